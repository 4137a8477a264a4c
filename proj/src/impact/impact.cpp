#include "communitypoll/impact/impact.hpp"

#include "communitypoll/common/errors.hpp"

namespace communitypoll::impact {

void ProjectSpec::validate() const {
  if (!(rated_capacity_mw > 0.0)) throw DomainError("project spec: rated capacity must be > 0");
  if (!(capacity_factor > 0.0 && capacity_factor <= 1.0)) {
    throw DomainError("project spec: capacity factor must be in (0,1]");
  }
  if (!(pue >= 1.0)) throw DomainError("project spec: PUE must be >= 1");
  if (wue_l_per_kwh < 0.0 || ewif_l_per_kwh < 0.0) {
    throw DomainError("project spec: water intensities must be nonnegative");
  }
  if (state_emission_factor_st_per_mwh < 0.0) {
    throw DomainError("project spec: emission factor must be nonnegative");
  }
  for (const auto& [name, intensity] : pollutant_intensities_st_per_mwh) {
    if (intensity < 0.0) {
      throw DomainError("project spec: negative intensity for " + name);
    }
  }
}

double annual_energy_mwh(const ProjectSpec& spec) {
  spec.validate();
  return spec.rated_capacity_mw * spec.capacity_factor * kHoursPerYear * spec.pue;
}

std::pair<double, double> water_consumption_l(const ProjectSpec& spec) {
  double energy_mwh = annual_energy_mwh(spec);
  double it_energy_kwh = energy_mwh / spec.pue * 1000.0;
  double facility_energy_kwh = energy_mwh * 1000.0;
  return {spec.wue_l_per_kwh * it_energy_kwh, spec.ewif_l_per_kwh * facility_energy_kwh};
}

double carbon_emissions_mst(const ProjectSpec& spec) {
  return annual_energy_mwh(spec) * spec.state_emission_factor_st_per_mwh / 1e6;
}

std::map<std::string, double> pollutant_emissions_st(const ProjectSpec& spec) {
  double energy_mwh = annual_energy_mwh(spec);
  std::map<std::string, double> out;
  for (const auto& [name, intensity] : spec.pollutant_intensities_st_per_mwh) {
    out[name] = energy_mwh * intensity;
  }
  return out;
}

ProjectImpactProfile build_impact_profile(const ProjectSpec& spec) {
  ProjectImpactProfile profile;
  profile.annual_energy_mwh = annual_energy_mwh(spec);
  profile.it_energy_mwh = profile.annual_energy_mwh / spec.pue;
  auto [onsite_l, offsite_l] = water_consumption_l(spec);
  profile.onsite_water_ml = onsite_l / 1e6;
  profile.offsite_water_ml = offsite_l / 1e6;
  profile.carbon_mst = carbon_emissions_mst(spec);
  profile.pollutants_st = pollutant_emissions_st(spec);
  profile.economics = spec.economics;
  return profile;
}

double derive_pollutant_intensity(double permitted_st, double actual_share,
                                  double regional_energy_mwh) {
  if (!(regional_energy_mwh > 0.0)) {
    throw DomainError("intensity derivation: regional energy must be positive");
  }
  if (permitted_st < 0.0 || actual_share < 0.0) {
    throw DomainError("intensity derivation: inputs must be nonnegative");
  }
  return permitted_st * actual_share / regional_energy_mwh;
}

}  // namespace communitypoll::impact
