#include "communitypoll/cli/config.hpp"

#include <json.hpp>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/common/hash.hpp"

namespace communitypoll::cli {

using nlohmann::json;

namespace {

std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

// Typed lookup helpers that name the exact config path on failure.
class Reader {
 public:
  Reader(const json& doc, std::string source) : doc_(doc), source_(std::move(source)) {}

  const json* find(const std::string& pointer) const {
    try {
      return &doc_.at(json::json_pointer(pointer));
    } catch (const json::exception&) {
      return nullptr;
    }
  }

  template <typename T>
  T require(const std::string& pointer) const {
    const json* node = find(pointer);
    if (!node) throw ConfigError(source_ + ": missing required key " + pointer);
    try {
      return node->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(source_ + ": " + pointer + " has the wrong type");
    }
  }

  template <typename T>
  T value_or(const std::string& pointer, T fallback) const {
    const json* node = find(pointer);
    if (!node) return fallback;
    try {
      return node->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(source_ + ": " + pointer + " has the wrong type");
    }
  }

  const std::string& source() const { return source_; }

 private:
  const json& doc_;
  std::string source_;
};

void fail(const Reader& r, const std::string& pointer, const std::string& why) {
  throw ConfigError(r.source() + ": " + pointer + ": " + why);
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  if (p.is_absolute() || config_dir.empty()) return p;
  return config_dir / p;
}

RunConfig run_config_from_json(const std::string& json_text, const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source_name + ":" + line_of(json_text, e.byte) + ": " + e.what());
  }
  Reader r(doc, source_name);

  RunConfig config;
  config.config_hash = sha256_hex(doc.dump());

  config.region.state_fips = r.require<std::string>("/region/state_fips");
  config.region.county_fips = r.require<std::string>("/region/county_fips");
  config.region.state_name = r.require<std::string>("/region/state_name");
  config.region.county_name = r.value_or<std::string>("/region/county_name", "");
  config.region.state_dc_energy_mwh = r.require<double>("/region/state_dc_energy_mwh");
  config.region.acs_year = r.value_or<int>("/region/acs_year", 2023);
  if (config.region.state_fips.size() != 2) {
    fail(r, "/region/state_fips", "must be a 2-digit FIPS code");
  }
  if (config.region.county_fips.size() != 3) {
    fail(r, "/region/county_fips", "must be a 3-digit FIPS code");
  }
  if (!(config.region.state_dc_energy_mwh > 0.0)) {
    fail(r, "/region/state_dc_energy_mwh", "must be positive");
  }

  config.project.rated_capacity_mw = r.value_or<double>("/project/rated_capacity_mw", 100.0);
  config.project.capacity_factor = r.value_or<double>("/project/capacity_factor", 0.70);
  config.project.pue = r.value_or<double>("/project/pue", 1.1);
  config.project.wue_l_per_kwh = r.value_or<double>("/project/wue_l_per_kwh", 0.36);
  config.project.ewif_l_per_kwh = r.value_or<double>("/project/ewif_l_per_kwh", 3.14);
  config.project.state_emission_factor_st_per_mwh =
      r.value_or<double>("/project/state_emission_factor_st_per_mwh",
                         config.project.state_emission_factor_st_per_mwh);
  if (const json* node = r.find("/project/pollutant_intensities_st_per_mwh")) {
    config.project.pollutant_intensities_st_per_mwh.clear();
    for (const auto& [name, value] : node->items()) {
      if (!value.is_number()) {
        fail(r, "/project/pollutant_intensities_st_per_mwh/" + name, "must be numeric");
      }
      config.project.pollutant_intensities_st_per_mwh[name] = value.get<double>();
    }
  }
  auto& econ = config.project.economics;
  econ.construction_duration_months =
      r.value_or<std::string>("/project/economics/construction_duration_months",
                              econ.construction_duration_months);
  econ.construction_jobs =
      r.value_or<long long>("/project/economics/construction_jobs", econ.construction_jobs);
  econ.construction_economic_activity_musd =
      r.value_or<double>("/project/economics/construction_economic_activity_musd",
                         econ.construction_economic_activity_musd);
  econ.construction_taxes_musd = r.value_or<double>("/project/economics/construction_taxes_musd",
                                                    econ.construction_taxes_musd);
  econ.operational_jobs =
      r.value_or<long long>("/project/economics/operational_jobs", econ.operational_jobs);
  econ.average_salary_kusd =
      r.value_or<double>("/project/economics/average_salary_kusd", econ.average_salary_kusd);
  econ.operational_economic_activity_musd =
      r.value_or<double>("/project/economics/operational_economic_activity_musd",
                         econ.operational_economic_activity_musd);
  econ.operational_taxes_musd = r.value_or<double>("/project/economics/operational_taxes_musd",
                                                   econ.operational_taxes_musd);
  try {
    config.project.validate();
  } catch (const DomainError& e) {
    throw ConfigError(source_name + ": /project: " + e.what());
  }

  config.census.cache_dir = r.value_or<std::string>("/census/cache_dir", "cache");
  if (const json* node = r.find("/census/fixture_dir")) {
    config.census.fixture_dir = node->get<std::string>();
  }
  config.census.live = r.value_or<bool>("/census/live", false);

  if (const json* node = r.find("/seed"); node == nullptr) {
    throw ConfigError(source_name + ": missing required key /seed");
  }
  config.seed = r.require<std::uint64_t>("/seed");
  config.agent_count = r.value_or<std::size_t>("/agent_count", 1000);
  if (config.agent_count < 1) fail(r, "/agent_count", "must be >= 1");

  config.synthesis.ipf.max_iterations = r.value_or<int>("/synthesis/ipf/max_iterations", 10);
  config.synthesis.ipf.epsilon = r.value_or<double>("/synthesis/ipf/epsilon", 1e-9);
  config.synthesis.ipf.seed = config.seed;
  config.synthesis.alpha = r.value_or<double>("/synthesis/alpha", 0.05);
  config.synthesis.retry_cap = r.value_or<int>("/synthesis/retry_cap", 5);
  config.synthesis.marital_adjustment.young_never_married =
      r.value_or<double>("/synthesis/marital_adjustment/young_never_married", 3.0);
  config.synthesis.marital_adjustment.elderly_widowed =
      r.value_or<double>("/synthesis/marital_adjustment/elderly_widowed", 4.0);
  if (!(config.synthesis.alpha > 0.0 && config.synthesis.alpha < 1.0)) {
    fail(r, "/synthesis/alpha", "must lie in (0,1)");
  }
  if (config.synthesis.retry_cap < 0) fail(r, "/synthesis/retry_cap", "must be >= 0");
  try {
    config.synthesis.ipf.validate();
  } catch (const DomainError& e) {
    throw ConfigError(source_name + ": /synthesis/ipf: " + e.what());
  }

  config.poll.provider = r.value_or<std::string>("/poll/provider", "mock");
  if (config.poll.provider != "mock" && config.poll.provider != "live") {
    fail(r, "/poll/provider", "must be \"mock\" or \"live\"");
  }
  config.poll.model_name = r.value_or<std::string>("/poll/model_name", "mock-1");
  config.poll.batch_size = r.value_or<std::size_t>("/poll/batch_size", 200);
  if (config.poll.batch_size < 1) fail(r, "/poll/batch_size", "must be >= 1");
  config.poll.max_retries = r.value_or<int>("/poll/max_retries", 2);
  if (config.poll.max_retries < 0) fail(r, "/poll/max_retries", "must be >= 0");
  config.poll.max_inflight = r.value_or<int>("/poll/max_inflight", 4);
  if (config.poll.max_inflight < 1) fail(r, "/poll/max_inflight", "must be >= 1");
  config.poll.provider_attempts = r.value_or<int>("/poll/provider_attempts", 5);
  config.poll.backoff_base_ms = r.value_or<double>("/poll/backoff_base_ms", 50.0);
  if (const json* node = r.find("/poll/behavior_profile")) {
    config.poll.behavior_profile = node->get<std::string>();
  }

  config.analysis.ldta = r.value_or<bool>("/analysis/ldta", true);
  config.analysis.max_themes = r.value_or<std::size_t>("/analysis/max_themes", 10);
  if (config.analysis.max_themes < 1) fail(r, "/analysis/max_themes", "must be >= 1");

  if (const json* node = r.find("/calibration/pairs_file")) {
    config.calibration.pairs_file = node->get<std::string>();
  }
  config.calibration.alpha = r.value_or<double>("/calibration/alpha", 0.1);
  if (!(config.calibration.alpha > 0.0 && config.calibration.alpha < 1.0)) {
    fail(r, "/calibration/alpha", "must lie in (0,1)");
  }
  config.calibration.grouping = r.value_or<std::string>("/calibration/grouping", "pooled");
  if (config.calibration.grouping != "pooled" && config.calibration.grouping != "per_question") {
    fail(r, "/calibration/grouping", "must be \"pooled\" or \"per_question\"");
  }

  if (const json* node = r.find("/questionnaire")) {
    config.questionnaire_file = node->get<std::string>();
  }
  config.output_dir = r.value_or<std::string>("/output_dir", "runs/out");
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  RunConfig config = run_config_from_json(text, path.filename().string());
  config.config_dir = path.parent_path();
  if (overrides.cache_dir) config.census.cache_dir = *overrides.cache_dir;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  return config;
}

}  // namespace communitypoll::cli
