#pragma once

#include <string>
#include <vector>

#include "communitypoll/census/types.hpp"

namespace communitypoll::census {

// Canonical dimension ids. The first ten are fitted jointly; marital status
// and education level are assigned after sampling.
inline constexpr const char* kAgeGroup = "age_group";
inline constexpr const char* kSex = "sex";
inline constexpr const char* kRace = "race";
inline constexpr const char* kEthnicity = "ethnicity";
inline constexpr const char* kCitizenship = "citizenship";
inline constexpr const char* kLanguageAtHome = "language_at_home";
inline constexpr const char* kEmploymentStatus = "employment_status";
inline constexpr const char* kHouseholdIncome = "household_income";
inline constexpr const char* kHousing = "housing";
inline constexpr const char* kVehicles = "vehicles";
inline constexpr const char* kMaritalStatus = "marital_status";
inline constexpr const char* kEducationLevel = "education_level";

// Auxiliary fetch-only dimensions feeding the post-sampling assignments.
inline constexpr const char* kMaritalStatusMale = "marital_status_male";
inline constexpr const char* kMaritalStatusFemale = "marital_status_female";
inline constexpr const char* kEducationEnrollment = "education_enrollment";

// Fit order for the joint distribution: social, economic, housing, then
// demographic blocks.
const std::vector<std::string>& ipf_dimension_order();

// The twelve agent attributes, in the order they appear in persisted
// population records (the ten fitted dimensions followed by the two assigned
// ones).
const std::vector<std::string>& agent_attribute_order();

// Human-readable name for reports ("age_group" -> "Age Group").
std::string display_name(const std::string& dimension);

// All fetchable variable sets: the ten joint dimensions plus per-sex marital
// status, college enrollment, and educational attainment.
const std::vector<AcsVariableSet>& default_variable_sets();

// Variable codes for the county profile request, NAME first.
const std::vector<std::string>& county_profile_codes();

bool is_adult_age_category(const std::string& category);

}  // namespace communitypoll::census
