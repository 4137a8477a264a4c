#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "communitypoll/impact/impact.hpp"
#include "communitypoll/synth/synthesize.hpp"

namespace communitypoll::cli {

struct RegionConfig {
  std::string state_fips;   // 2 digits
  std::string county_fips;  // 3 digits
  std::string state_name;
  std::string county_name;
  double state_dc_energy_mwh = 0.0;
  int acs_year = 2023;
};

struct CensusConfig {
  std::filesystem::path cache_dir = "cache";
  std::optional<std::filesystem::path> fixture_dir;  // preloads the cache when set
  bool live = false;                                 // allow network fetches
};

struct SynthesisSection {
  synth::IpfConfig ipf;
  double alpha = 0.05;
  int retry_cap = 5;
  synth::MaritalAgeAdjustment marital_adjustment;
};

struct PollSection {
  std::string provider = "mock";  // mock | live
  std::string model_name = "mock-1";
  std::size_t batch_size = 200;
  int max_retries = 2;
  int max_inflight = 4;
  int provider_attempts = 5;
  double backoff_base_ms = 50.0;
  std::optional<std::filesystem::path> behavior_profile;  // mock behavior JSON
};

struct AnalysisSection {
  bool ldta = true;
  std::size_t max_themes = 10;
};

struct CalibrationSection {
  std::optional<std::filesystem::path> pairs_file;
  double alpha = 0.1;
  std::string grouping = "pooled";  // pooled | per_question
};

struct RunConfig {
  RegionConfig region;
  impact::ProjectSpec project;
  CensusConfig census;
  SynthesisSection synthesis;
  PollSection poll;
  AnalysisSection analysis;
  CalibrationSection calibration;
  std::size_t agent_count = 1000;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> questionnaire_file;
  std::filesystem::path output_dir = "runs/out";

  std::string config_hash;  // canonical hash of the config file content
  std::filesystem::path config_dir;  // directory of the config file; relative paths resolve here

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

struct ConfigOverrides {
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> output_dir;
};

// Parses and validates the run configuration. Parse failures report
// line:column; schema failures report the JSON pointer path of the offending
// key. Both throw ConfigError.
RunConfig load_run_config(const std::filesystem::path& path, const ConfigOverrides& overrides);

RunConfig run_config_from_json(const std::string& json_text, const std::string& source_name);

}  // namespace communitypoll::cli
