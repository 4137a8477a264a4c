#pragma once

// Shared helpers for the test suites: canonical fixture paths, the baseline
// agent used by the golden prompt files, and fixture-backed census loading.

#include <filesystem>
#include <string>
#include <unistd.h>

#include "communitypoll/census/client.hpp"
#include "communitypoll/census/variables.hpp"
#include "communitypoll/impact/context.hpp"
#include "communitypoll/synth/agents.hpp"

namespace testsupport {

inline std::filesystem::path fixtures_dir() { return std::filesystem::path(FIXTURES_DIR); }

inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("communitypoll-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Agent frozen into fixtures/golden/user_prompt_taylor.txt.
inline communitypoll::synth::AgentProfile golden_agent() {
  communitypoll::synth::AgentProfile agent;
  agent.age_group = "35 to 44 years";
  agent.sex = "Female";
  agent.race = "White";
  agent.ethnicity = "Not Hispanic or Latino";
  agent.citizenship = "Native - born in state of residence";
  agent.language_at_home = "English only";
  agent.employment_status = "Educational services, and health care and social assistance";
  agent.household_income = "$50,000 to $74,999";
  agent.housing = "Owner-occupied: $100,000 to $149,999";
  agent.vehicles = "2 vehicles available";
  agent.marital_status = "Now Married, Except Separated";
  agent.education_level = "Bachelor's degree";
  return agent;
}

inline communitypoll::census::CountyProfile taylor_profile(const std::filesystem::path& cache) {
  using namespace communitypoll::census;
  ResponseCache response_cache(cache);
  install_fixtures(fixtures_dir() / "census" / "index.json", response_cache);
  AcsClient client(nullptr, std::move(response_cache));
  return client.fetch_county_profile({2023, "48", "441"});
}

inline communitypoll::impact::StateContext texas_state_context() {
  return communitypoll::impact::StateContext{"Texas", 2023, 24000000.0};
}

}  // namespace testsupport
