#include "communitypoll/impact/context.hpp"

#include <vector>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/text.hpp"

namespace communitypoll::impact {

namespace {

// Keep this text byte-stable: it is the constant system prompt and golden
// files assert the exact rendering.
constexpr const char* kContextTemplate =
    "State Data Center Context\n"
    "\n"
    "[STATE_NAME] state data center status ([YEAR]): total annual electricity consumption is "
    "around [ENERGY_CONSUMPTION] MWh.\n"
    "\n"
    "Community Profile\n"
    "\n"
    "[COUNTY_NAME] County, [STATE_NAME] is a community with a total population of [POPULATION]. "
    "The population is [FEMALE_PCT]% female and [MALE_PCT]% male, with a median age of "
    "[MEDIAN_AGE] years.\n"
    "The racial composition includes [WHITE_PCT]% White residents, [ASIAN_PCT]% Asian residents, "
    "[BLACK_PCT]% African American residents, and [HISPANIC_PCT]% Hispanic or Latino residents "
    "of any race.\n"
    "The community consists of [TOTAL_HOUSEHOLDS] households with an average household size of "
    "[AVG_HOUSEHOLD_SIZE] people per household.\n"
    "In terms of educational attainment, [BACHELOR_OR_HIGHER_PCT]% of adults hold a bachelor's "
    "degree or higher, including [GRADUATE_PCT]% with graduate or professional degrees. "
    "Additionally, [COMPUTER_PCT]% of households have access to a computer.\n"
    "The economic profile shows a median household income of $[MEDIAN_HOUSEHOLD_INCOME] and a "
    "per capita income of $[PER_CAPITA_INCOME].\n"
    "The major employment sectors include [TOP_INDUSTRIES].\n"
    "For housing, [HOMEOWNERSHIP_RATE]% of households own their homes, with a median home value "
    "of $[MEDIAN_HOME_VALUE]. Rental households pay a median rent of $[MEDIAN_RENT].\n"
    "\n"
    "Proposed Data Center Project and Its Estimated Impact\n"
    "\n"
    "The annual electricity consumption of data center project is around "
    "[YEARLY_ENERGY_CONSUMPTION] MWh.\n"
    "\n"
    "During the construction phase ([CONSTRUCTION_DURATION] months), the project is estimated to "
    "support approximately [CONSTRUCTION_JOBS] temporary local jobs, and generates around "
    "$[CONSTRUCTION_ECONOMIC_ACTIVITY] million in local economic activity and $[CONSTRUCTION_TAX] "
    "million in taxes.\n"
    "\n"
    "Once operational, it is estimated to support nearly [OPERATIONAL_JOBS] permanent local jobs "
    "annually, with an average salary of about $[SALARY]k, and generates over "
    "$[OPERATIONAL_ECONOMIC_ACTIVITY] million in local economic activity and $[OPERATIONAL_TAX] "
    "million in taxes each year.\n"
    "\n"
    "The annual water consumption includes: [ONSITE_WATER] million liters for on-site water "
    "consumption for data center cooling, and [OFFSITE_WATER] million liters for off-site "
    "electricity generation.\n"
    "\n"
    "The annual carbon emissions is [CARBON_EMISSIONS] million short tons.\n"
    "\n"
    "The annual air pollutants generated by on-site backup generators includes: NOx [NOX], "
    "VOCs [VOCS], PM2.5 [PM25], SO2 [SO2] short tons.\n"
    "\n"
    "Survey Instructions\n"
    "\n"
    "You will be asked for your opinions about this proposed data center project. Consider the "
    "various impacts of the project on you and your community,including economic factors (such "
    "as economic growth, jobs, and tax revenue) and environmental factors (such as energy usage, "
    "carbon emissions, water consumption, and air pollution).\n";

std::string render(const std::vector<std::pair<std::string, std::string>>& values) {
  std::string text = kContextTemplate;
  for (const auto& [token, value] : values) {
    if (value.empty()) {
      throw RenderError("regional context: no value for placeholder " + token);
    }
    replace_all(text, "[" + token + "]", value);
  }
  for (const auto& [token, value] : values) {
    (void)value;
    if (text.find("[" + token + "]") != std::string::npos) {
      throw RenderError("regional context: unreplaced placeholder " + token);
    }
  }
  return text;
}

double pollutant_or_throw(const std::map<std::string, double>& pollutants,
                          const std::string& name) {
  auto it = pollutants.find(name);
  if (it == pollutants.end()) {
    throw RenderError("regional context: no value for placeholder " + name);
  }
  return it->second;
}

}  // namespace

RegionalContext build_regional_context(const ProjectSpec& spec,
                                       const census::CountyProfile& profile,
                                       const StateContext& state) {
  profile.validate();
  RegionalContext context;
  context.state_name = state.state_name;
  context.state_dc_energy_mwh = state.dc_energy_mwh;
  context.county_profile = profile;
  context.impact = build_impact_profile(spec);

  const auto& impact = context.impact;
  const auto& econ = impact.economics;
  std::vector<std::pair<std::string, std::string>> values = {
      {"STATE_NAME", state.state_name},
      {"YEAR", std::to_string(state.year)},
      {"ENERGY_CONSUMPTION", format_number(state.dc_energy_mwh)},
      {"COUNTY_NAME", profile.county_name},
      {"POPULATION", format_count(profile.population)},
      {"FEMALE_PCT", format_percent(profile.female_pct)},
      {"MALE_PCT", format_percent(profile.male_pct)},
      {"MEDIAN_AGE", format_number(profile.median_age, 1)},
      {"WHITE_PCT", format_percent(profile.white_pct)},
      {"ASIAN_PCT", format_percent(profile.asian_pct)},
      {"BLACK_PCT", format_percent(profile.black_pct)},
      {"HISPANIC_PCT", format_percent(profile.hispanic_pct)},
      {"TOTAL_HOUSEHOLDS", format_count(profile.total_households)},
      {"AVG_HOUSEHOLD_SIZE", format_number(profile.avg_household_size, 2)},
      {"BACHELOR_OR_HIGHER_PCT", format_percent(profile.bachelor_or_higher_pct)},
      {"GRADUATE_PCT", format_percent(profile.graduate_pct)},
      {"COMPUTER_PCT", format_percent(profile.computer_pct)},
      {"MEDIAN_HOUSEHOLD_INCOME", format_count(profile.median_household_income)},
      {"PER_CAPITA_INCOME", format_count(profile.per_capita_income)},
      {"TOP_INDUSTRIES", join(profile.top_industries, "; ")},
      {"HOMEOWNERSHIP_RATE", format_percent(profile.homeownership_rate)},
      {"MEDIAN_HOME_VALUE", format_count(profile.median_home_value)},
      {"MEDIAN_RENT", format_count(profile.median_rent)},
      {"YEARLY_ENERGY_CONSUMPTION", format_number(impact.annual_energy_mwh)},
      {"CONSTRUCTION_DURATION", econ.construction_duration_months},
      {"CONSTRUCTION_JOBS", format_count(econ.construction_jobs)},
      {"CONSTRUCTION_ECONOMIC_ACTIVITY", format_number(econ.construction_economic_activity_musd)},
      {"CONSTRUCTION_TAX", format_number(econ.construction_taxes_musd)},
      {"OPERATIONAL_JOBS", format_count(econ.operational_jobs)},
      {"SALARY", format_number(econ.average_salary_kusd)},
      {"OPERATIONAL_ECONOMIC_ACTIVITY", format_number(econ.operational_economic_activity_musd)},
      {"OPERATIONAL_TAX", format_number(econ.operational_taxes_musd)},
      {"ONSITE_WATER", format_number(impact.onsite_water_ml)},
      {"OFFSITE_WATER", format_number(impact.offsite_water_ml)},
      {"CARBON_EMISSIONS", format_number(impact.carbon_mst)},
      {"NOX", format_number(pollutant_or_throw(impact.pollutants_st, "NOx"))},
      {"VOCS", format_number(pollutant_or_throw(impact.pollutants_st, "VOCs"))},
      {"PM25", format_number(pollutant_or_throw(impact.pollutants_st, "PM2.5"))},
      {"SO2", format_number(pollutant_or_throw(impact.pollutants_st, "SO2"))},
  };
  context.rendered_text = render(values);
  return context;
}

}  // namespace communitypoll::impact
