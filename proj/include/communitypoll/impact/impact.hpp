#pragma once

#include <map>
#include <string>

namespace communitypoll::impact {

inline constexpr double kHoursPerYear = 8760.0;

struct EconomicFigures {
  std::string construction_duration_months = "18-24";
  long long construction_jobs = 1700;
  double construction_economic_activity_musd = 240.0;
  double construction_taxes_musd = 10.0;
  long long operational_jobs = 160;
  double average_salary_kusd = 50.0;
  double operational_economic_activity_musd = 32.0;
  double operational_taxes_musd = 1.1;
};

struct ProjectSpec {
  double rated_capacity_mw = 100.0;
  double capacity_factor = 0.70;
  double pue = 1.1;
  double wue_l_per_kwh = 0.36;
  double ewif_l_per_kwh = 3.14;
  double state_emission_factor_st_per_mwh = 0.41;
  // short tons per MWh of facility energy, one entry per pollutant
  std::map<std::string, double> pollutant_intensities_st_per_mwh = {
      {"NOx", 5.0e-05}, {"VOCs", 5.3846153846153846e-06},
      {"PM2.5", 2.3076923076923077e-06}, {"SO2", 1.9230769230769231e-07}};
  EconomicFigures economics;

  void validate() const;
};

struct ProjectImpactProfile {
  double annual_energy_mwh = 0.0;
  double it_energy_mwh = 0.0;
  double onsite_water_ml = 0.0;   // million liters
  double offsite_water_ml = 0.0;  // million liters
  double carbon_mst = 0.0;        // million short tons
  std::map<std::string, double> pollutants_st;
  EconomicFigures economics;
};

// rated capacity x capacity factor x annual hours x PUE
double annual_energy_mwh(const ProjectSpec& spec);

// Onsite cooling water scales with IT energy (facility energy / PUE); offsite
// generation water scales with facility energy. Both in liters.
std::pair<double, double> water_consumption_l(const ProjectSpec& spec);

double carbon_emissions_mst(const ProjectSpec& spec);

std::map<std::string, double> pollutant_emissions_st(const ProjectSpec& spec);

ProjectImpactProfile build_impact_profile(const ProjectSpec& spec);

// Offline derivation used to produce the shipped intensity defaults: a share
// of the permitted annual tonnage spread over the regional data-center energy
// consumption.
double derive_pollutant_intensity(double permitted_st, double actual_share,
                                  double regional_energy_mwh);

}  // namespace communitypoll::impact
