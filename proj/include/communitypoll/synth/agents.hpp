#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "communitypoll/census/types.hpp"
#include "communitypoll/synth/chi_square.hpp"
#include "communitypoll/synth/ipf.hpp"

namespace communitypoll::synth {

struct AgentProfile {
  std::string age_group;
  std::string sex;
  std::string race;
  std::string ethnicity;
  std::string citizenship;
  std::string language_at_home;
  std::string employment_status;
  std::string household_income;
  std::string housing;
  std::string vehicles;
  std::string marital_status;
  std::string education_level;

  // Attribute value by dimension id; throws on unknown dimension.
  const std::string& attribute(const std::string& dimension) const;
  std::string& attribute(const std::string& dimension);
};

bool operator==(const AgentProfile& a, const AgentProfile& b);

// Multipliers applied to the sex-conditional marital distribution before
// renormalizing. Young agents skew unmarried, elderly agents skew widowed.
struct MaritalAgeAdjustment {
  double young_never_married = 3.0;  // applies under 25
  double elderly_widowed = 4.0;      // applies 75 and over
};

// Draws exactly n adult agents from the joint; under-18 draws are discarded
// and redrawn. Pure function of (joint, n, seed). Only the ten fitted
// attributes are populated.
std::vector<AgentProfile> sample_agents(const JointDistribution& joint, std::size_t n,
                                        std::uint64_t seed);

void assign_marital_status(std::vector<AgentProfile>& agents,
                           const census::MarginalTable& male_table,
                           const census::MarginalTable& female_table,
                           const MaritalAgeAdjustment& adjustment, std::uint64_t seed);

void assign_education(std::vector<AgentProfile>& agents,
                      const census::MarginalTable& enrollment_table,
                      const census::MarginalTable& attainment_table, std::uint64_t seed);

// Chi-square verification of the sampled population against the census
// targets, one report per fitted dimension. The age expectation is restricted
// to adult categories and renormalized. Requires n >= 30.
std::vector<FitReport> verify_population(const std::vector<AgentProfile>& agents,
                                         const std::vector<census::MarginalTable>& targets,
                                         double alpha);

}  // namespace communitypoll::synth
