#pragma once

#include <string>
#include <vector>

namespace communitypoll::census {

// One fetchable block of ACS Data Profile variables. The codes and labels are
// parallel arrays; `dimension` names the agent attribute the block feeds.
struct AcsVariableSet {
  std::string group_id;  // demographic | social | economic | housing
  std::string dimension;
  std::vector<std::string> variable_codes;
  std::vector<std::string> category_labels;

  void validate() const;
};

struct MarginalTable {
  std::string dimension_name;
  std::vector<std::string> categories;
  std::vector<long long> counts;
  long long total = 0;

  void validate() const;
  std::size_t index_of(const std::string& category) const;  // npos-like throw on miss
};

struct CountyProfile {
  std::string county_name;
  std::string state_name;
  long long population = 0;
  double median_age = 0.0;
  double male_pct = 0.0;
  double female_pct = 0.0;
  double white_pct = 0.0;
  double black_pct = 0.0;
  double aian_pct = 0.0;
  double asian_pct = 0.0;
  double nhpi_pct = 0.0;
  double other_race_pct = 0.0;
  double hispanic_pct = 0.0;
  long long total_households = 0;
  double avg_household_size = 0.0;
  double bachelor_or_higher_pct = 0.0;
  double graduate_pct = 0.0;
  double computer_pct = 0.0;
  long long median_household_income = 0;
  long long per_capita_income = 0;
  std::vector<std::string> top_industries;
  double homeownership_rate = 0.0;
  long long median_home_value = 0;
  long long median_rent = 0;

  void validate() const;
};

bool operator==(const MarginalTable& a, const MarginalTable& b);

}  // namespace communitypoll::census
