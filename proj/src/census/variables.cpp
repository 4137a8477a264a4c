#include "communitypoll/census/variables.hpp"

#include <map>
#include <set>

namespace communitypoll::census {

const std::vector<std::string>& ipf_dimension_order() {
  static const std::vector<std::string> order = {
      kLanguageAtHome, kCitizenship, kEmploymentStatus, kHouseholdIncome, kHousing,
      kVehicles,       kAgeGroup,    kSex,              kRace,            kEthnicity,
  };
  return order;
}

const std::vector<std::string>& agent_attribute_order() {
  static const std::vector<std::string> order = {
      kLanguageAtHome, kCitizenship, kEmploymentStatus, kHouseholdIncome,
      kHousing,        kVehicles,    kAgeGroup,         kSex,
      kRace,           kEthnicity,   kMaritalStatus,    kEducationLevel,
  };
  return order;
}

std::string display_name(const std::string& dimension) {
  static const std::map<std::string, std::string> names = {
      {kAgeGroup, "Age Group"},
      {kSex, "Sex"},
      {kRace, "Race"},
      {kEthnicity, "Ethnicity"},
      {kCitizenship, "Citizenship"},
      {kLanguageAtHome, "Language at Home"},
      {kEmploymentStatus, "Employment Status"},
      {kHouseholdIncome, "Household Income"},
      {kHousing, "Housing"},
      {kVehicles, "Vehicles"},
      {kMaritalStatus, "Marital Status"},
      {kEducationLevel, "Education Level"},
  };
  auto it = names.find(dimension);
  return it == names.end() ? dimension : it->second;
}

namespace {

std::vector<std::string> code_range(const char* table, int first, int last) {
  std::vector<std::string> codes;
  for (int n = first; n <= last; ++n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s_%04dE", table, n);
    codes.emplace_back(buf);
  }
  return codes;
}

std::vector<AcsVariableSet> build_default_sets() {
  std::vector<AcsVariableSet> sets;

  sets.push_back({"demographic",
                  kAgeGroup,
                  code_range("DP05", 5, 17),
                  {"Under 5 years", "5 to 9 years", "10 to 14 years", "15 to 19 years",
                   "20 to 24 years", "25 to 34 years", "35 to 44 years", "45 to 54 years",
                   "55 to 59 years", "60 to 64 years", "65 to 74 years", "75 to 84 years",
                   "85 years and over"}});

  sets.push_back({"demographic", kSex, {"DP05_0002E", "DP05_0003E"}, {"Male", "Female"}});

  sets.push_back({"demographic",
                  kRace,
                  {"DP05_0037E", "DP05_0038E", "DP05_0039E", "DP05_0044E", "DP05_0052E",
                   "DP05_0057E", "DP05_0059E", "DP05_0060E"},
                  {"White", "Black or African American", "American Indian and Alaska Native",
                   "Asian", "Native Hawaiian and Other Pacific Islander", "Some Other Race",
                   "Two Races Including Some Other Race",
                   "Two Races Excluding Some Other Race, and Three or More Races"}});

  sets.push_back({"demographic",
                  kEthnicity,
                  {"DP05_0076E", "DP05_0081E"},
                  {"Hispanic or Latino", "Not Hispanic or Latino"}});

  sets.push_back({"social",
                  kCitizenship,
                  code_range("DP02", 93, 97),
                  {"Native - born in state of residence", "Native - born in different state",
                   "Native - born abroad", "Foreign born - naturalized U.S. citizen",
                   "Foreign born - not a U.S. citizen"}});

  sets.push_back({"social",
                  kLanguageAtHome,
                  {"DP02_0114E", "DP02_0116E", "DP02_0118E", "DP02_0120E", "DP02_0122E"},
                  {"English only", "Spanish", "Other Indo-European languages",
                   "Asian and Pacific Islander languages", "Other languages"}});

  {
    AcsVariableSet employment{"economic", kEmploymentStatus, code_range("DP03", 33, 45),
                              {"Agriculture, forestry, fishing and hunting, and mining",
                               "Construction",
                               "Manufacturing",
                               "Wholesale trade",
                               "Retail trade",
                               "Transportation and warehousing, and utilities",
                               "Information",
                               "Finance and insurance, and real estate and rental and leasing",
                               "Professional, scientific, and management, and administrative "
                               "and waste management services",
                               "Educational services, and health care and social assistance",
                               "Arts, entertainment, and recreation, and accommodation and "
                               "food services",
                               "Other services, except public administration",
                               "Public administration"}};
    employment.variable_codes.push_back("DP03_0005E");
    employment.category_labels.push_back("Unemployed");
    employment.variable_codes.push_back("DP03_0006E");
    employment.category_labels.push_back("Armed Forces");
    employment.variable_codes.push_back("DP03_0007E");
    employment.category_labels.push_back("Not in Labor Force");
    sets.push_back(std::move(employment));
  }

  sets.push_back({"economic",
                  kHouseholdIncome,
                  code_range("DP03", 52, 61),
                  {"Less than $10,000", "$10,000 to $14,999", "$15,000 to $24,999",
                   "$25,000 to $34,999", "$35,000 to $49,999", "$50,000 to $74,999",
                   "$75,000 to $99,999", "$100,000 to $149,999", "$150,000 to $199,999",
                   "$200,000 or more"}});

  {
    AcsVariableSet housing{"housing", kHousing, code_range("DP04", 81, 88),
                           {"Owner-occupied: Less than $50,000",
                            "Owner-occupied: $50,000 to $99,999",
                            "Owner-occupied: $100,000 to $149,999",
                            "Owner-occupied: $150,000 to $199,999",
                            "Owner-occupied: $200,000 to $299,999",
                            "Owner-occupied: $300,000 to $499,999",
                            "Owner-occupied: $500,000 to $999,999",
                            "Owner-occupied: $1,000,000 or more"}};
    auto rent_codes = code_range("DP04", 127, 134);
    const char* rent_labels[] = {"Rent: Less than $500",     "Rent: $500 to $999",
                                 "Rent: $1,000 to $1,499",   "Rent: $1,500 to $1,999",
                                 "Rent: $2,000 to $2,499",   "Rent: $2,500 to $2,999",
                                 "Rent: $3,000 or more",     "Rent: No rent paid"};
    for (std::size_t i = 0; i < rent_codes.size(); ++i) {
      housing.variable_codes.push_back(rent_codes[i]);
      housing.category_labels.push_back(rent_labels[i]);
    }
    sets.push_back(std::move(housing));
  }

  sets.push_back({"housing",
                  kVehicles,
                  code_range("DP04", 58, 61),
                  {"No vehicles available", "1 vehicle available", "2 vehicles available",
                   "3 or more vehicles available"}});

  const std::vector<std::string> marital_labels = {
      "Never Married", "Now Married, Except Separated", "Separated", "Widowed", "Divorced"};
  sets.push_back({"social", kMaritalStatusMale, code_range("DP02", 26, 30), marital_labels});
  sets.push_back({"social", kMaritalStatusFemale, code_range("DP02", 32, 36), marital_labels});

  sets.push_back({"social",
                  kEducationEnrollment,
                  {"DP02_0057E", "DP02_0058E"},
                  {"Attending some college or graduate school", "Not attending any college"}});

  sets.push_back({"social",
                  kEducationLevel,
                  code_range("DP02", 60, 66),
                  {"Less than 9th grade", "9th to 12th grade, no diploma",
                   "High school graduate (includes equivalency)", "Some college, no degree",
                   "Associate's degree", "Bachelor's degree",
                   "Graduate or professional degree"}});

  for (auto& s : sets) s.validate();
  return sets;
}

}  // namespace

const std::vector<AcsVariableSet>& default_variable_sets() {
  static const std::vector<AcsVariableSet> sets = build_default_sets();
  return sets;
}

const std::vector<std::string>& county_profile_codes() {
  static const std::vector<std::string> codes = [] {
    std::vector<std::string> v = {"NAME"};
    auto append = [&v](std::vector<std::string> more) {
      v.insert(v.end(), more.begin(), more.end());
    };
    append({"DP05_0001E", "DP05_0002E", "DP05_0003E", "DP05_0018E"});
    append(code_range("DP05", 69, 74));                      // race counts
    append({"DP05_0076E", "DP05_0081E"});                    // ethnicity
    append({"DP02_0001E", "DP02_0016E"});                    // households, avg size
    append(code_range("DP02", 60, 66));                      // attainment
    append({"DP02_0153E"});                                  // computer access
    append({"DP03_0008E"});                                  // civilian labor force
    append(code_range("DP03", 33, 45));                      // industries
    append({"DP03_0006E", "DP03_0062E", "DP03_0088E"});      // armed forces, incomes
    append({"DP04_0045E", "DP04_0046E", "DP04_0047E", "DP04_0089E", "DP04_0134E"});
    return v;
  }();
  return codes;
}

bool is_adult_age_category(const std::string& category) {
  static const std::set<std::string> under18 = {"Under 5 years", "5 to 9 years",
                                                "10 to 14 years", "15 to 19 years"};
  return under18.find(category) == under18.end();
}

}  // namespace communitypoll::census
