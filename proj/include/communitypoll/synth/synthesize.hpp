#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "communitypoll/census/types.hpp"
#include "communitypoll/common/errors.hpp"
#include "communitypoll/synth/agents.hpp"
#include "communitypoll/synth/ipf.hpp"

namespace communitypoll::synth {

struct SynthesisInputs {
  std::vector<census::MarginalTable> ipf_targets;  // the ten fitted dimensions
  census::MarginalTable marital_male;
  census::MarginalTable marital_female;
  census::MarginalTable education_enrollment;
  census::MarginalTable education_attainment;
};

struct SynthesisConfig {
  IpfConfig ipf;
  double alpha = 0.05;
  int retry_cap = 5;
  MaritalAgeAdjustment marital_adjustment;
};

struct SynthesisResult {
  std::vector<AgentProfile> agents;
  std::vector<FitReport> fit_reports;
  std::uint64_t seed_used = 0;  // base seed plus regeneration offset
  int attempts = 1;
  IpfReport ipf_report;
};

// Thrown when every regeneration attempt fails verification; carries the
// reports from all attempts.
class SynthesisError : public DomainError {
 public:
  SynthesisError(const std::string& message, std::vector<std::vector<FitReport>> attempts)
      : DomainError(message), attempt_reports(std::move(attempts)) {}
  std::vector<std::vector<FitReport>> attempt_reports;
};

// Full generation pipeline: fit, sample, assign marital status and education,
// verify. A failed chi-square on any dimension resamples with seed+1 until
// the retry cap is exhausted.
SynthesisResult synthesize(const SynthesisInputs& inputs, const SynthesisConfig& config,
                           std::size_t n);

// Line-delimited population file: a header comment carrying the config hash
// and seed, then one tab-separated agent per line in attribute order.
void write_population(const std::filesystem::path& path,
                      const std::vector<AgentProfile>& agents, const std::string& config_hash,
                      std::uint64_t seed);

struct PopulationFile {
  std::vector<AgentProfile> agents;
  std::string config_hash;
  std::uint64_t seed = 0;
};

PopulationFile read_population(const std::filesystem::path& path);

}  // namespace communitypoll::synth
