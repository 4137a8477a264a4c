#include "communitypoll/synth/synthesize.hpp"

#include <sstream>

#include "communitypoll/census/variables.hpp"
#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/common/rng.hpp"

namespace communitypoll::synth {

SynthesisResult synthesize(const SynthesisInputs& inputs, const SynthesisConfig& config,
                           std::size_t n) {
  if (config.retry_cap < 0) throw DomainError("synthesize: retry cap must be nonnegative");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw DomainError("synthesize: alpha must be in (0,1)");
  }

  JointDistribution joint = ipf_fit(inputs.ipf_targets, config.ipf);

  std::vector<std::vector<FitReport>> failed_attempts;
  for (int attempt = 0; attempt <= config.retry_cap; ++attempt) {
    std::uint64_t seed = config.ipf.seed + static_cast<std::uint64_t>(attempt);
    SynthesisResult result;
    result.agents = sample_agents(joint, n, seed);
    assign_marital_status(result.agents, inputs.marital_male, inputs.marital_female,
                          config.marital_adjustment, mix_seed(seed, 1));
    assign_education(result.agents, inputs.education_enrollment, inputs.education_attainment,
                     mix_seed(seed, 2));
    result.fit_reports = verify_population(result.agents, inputs.ipf_targets, config.alpha);
    result.seed_used = seed;
    result.attempts = attempt + 1;
    result.ipf_report = joint.report();

    bool all_pass = true;
    for (const auto& r : result.fit_reports) all_pass = all_pass && r.pass;
    if (all_pass) return result;
    failed_attempts.push_back(result.fit_reports);
  }
  throw SynthesisError("synthesize: verification failed on every regeneration attempt (cap " +
                           std::to_string(config.retry_cap) + ")",
                       std::move(failed_attempts));
}

void write_population(const std::filesystem::path& path,
                      const std::vector<AgentProfile>& agents, const std::string& config_hash,
                      std::uint64_t seed) {
  std::ostringstream out;
  out << "# communitypoll population\tconfig_hash=" << config_hash << "\tseed=" << seed << "\n";
  const auto& order = census::agent_attribute_order();
  for (const auto& agent : agents) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i) out << '\t';
      out << agent.attribute(order[i]);
    }
    out << '\n';
  }
  write_text_file_atomic(path, out.str());
}

PopulationFile read_population(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("# communitypoll population", 0) != 0) {
    throw SchemaError("population file missing header: " + path.string());
  }
  PopulationFile file;
  {
    std::istringstream header(line);
    std::string field;
    while (std::getline(header, field, '\t')) {
      if (field.rfind("config_hash=", 0) == 0) file.config_hash = field.substr(12);
      if (field.rfind("seed=", 0) == 0) file.seed = std::stoull(field.substr(5));
    }
  }
  const auto& order = census::agent_attribute_order();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, '\t')) fields.push_back(field);
    if (fields.size() != order.size()) {
      throw SchemaError("population record has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(order.size()));
    }
    AgentProfile agent;
    for (std::size_t i = 0; i < order.size(); ++i) agent.attribute(order[i]) = fields[i];
    file.agents.push_back(std::move(agent));
  }
  return file;
}

}  // namespace communitypoll::synth
