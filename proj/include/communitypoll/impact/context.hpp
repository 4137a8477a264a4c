#pragma once

#include <string>

#include "communitypoll/census/types.hpp"
#include "communitypoll/impact/impact.hpp"

namespace communitypoll::impact {

struct StateContext {
  std::string state_name;
  int year = 2023;
  double dc_energy_mwh = 0.0;  // statewide annual data-center consumption
};

struct RegionalContext {
  std::string state_name;
  double state_dc_energy_mwh = 0.0;
  census::CountyProfile county_profile;
  ProjectImpactProfile impact;
  std::string rendered_text;
};

// Fills the regional-context template (state status, community profile,
// project impact, survey instructions). Rendering is pure; a missing or empty
// placeholder value raises RenderError naming the placeholder.
RegionalContext build_regional_context(const ProjectSpec& spec,
                                       const census::CountyProfile& profile,
                                       const StateContext& state);

}  // namespace communitypoll::impact
