#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/impact/context.hpp"
#include "communitypoll/impact/impact.hpp"
#include "support.hpp"

using namespace communitypoll;
using namespace communitypoll::impact;

namespace {

ProjectSpec baseline_spec() { return ProjectSpec{}; }  // 100 MW defaults

}  // namespace

TEST_CASE("annual energy follows capacity x CF x hours x PUE") {
  // Hand-derived: 100 * 0.70 * 8760 * 1.1 = 674,520 exactly.
  CHECK(annual_energy_mwh(baseline_spec()) == doctest::Approx(674520.0).epsilon(1e-12));

  ProjectSpec identity;
  identity.rated_capacity_mw = 1.0;
  identity.capacity_factor = 1.0;
  identity.pue = 1.0;
  CHECK(annual_energy_mwh(identity) == doctest::Approx(8760.0).epsilon(1e-12));
}

TEST_CASE("invalid specs are rejected at the boundary") {
  ProjectSpec zero_cf = baseline_spec();
  zero_cf.capacity_factor = 0.0;
  CHECK_THROWS_AS(annual_energy_mwh(zero_cf), DomainError);

  ProjectSpec low_pue = baseline_spec();
  low_pue.pue = 0.9;
  CHECK_THROWS_AS(annual_energy_mwh(low_pue), DomainError);

  ProjectSpec negative_factor = baseline_spec();
  negative_factor.state_emission_factor_st_per_mwh = -0.1;
  CHECK_THROWS_AS(carbon_emissions_mst(negative_factor), DomainError);
}

TEST_CASE("water consumption splits onsite IT cooling from offsite generation") {
  // Hand arithmetic: 613,200 MWh * 360 L/MWh and 674,520 MWh * 3140 L/MWh.
  auto [onsite, offsite] = water_consumption_l(baseline_spec());
  CHECK(onsite == doctest::Approx(220752000.0).epsilon(1e-9));
  CHECK(offsite == doctest::Approx(2117992800.0).epsilon(1e-9));

  ProjectSpec no_wue = baseline_spec();
  no_wue.wue_l_per_kwh = 0.0;
  CHECK(water_consumption_l(no_wue).first == 0.0);

  ProjectSpec no_ewif = baseline_spec();
  no_ewif.ewif_l_per_kwh = 0.0;
  CHECK(water_consumption_l(no_ewif).second == 0.0);
}

TEST_CASE("carbon emissions scale with the state factor") {
  ProjectSpec spec = baseline_spec();
  spec.state_emission_factor_st_per_mwh = 0.0;
  CHECK(carbon_emissions_mst(spec) == 0.0);
  spec.state_emission_factor_st_per_mwh = 0.0005;
  CHECK(carbon_emissions_mst(spec) == doctest::Approx(674520.0 * 0.0005 / 1e6).epsilon(1e-12));
}

TEST_CASE("pollutant tonnage is energy times intensity") {
  ProjectSpec spec = baseline_spec();
  for (auto& [name, value] : spec.pollutant_intensities_st_per_mwh) value = 0.0;
  for (const auto& [name, tons] : pollutant_emissions_st(spec)) {
    CHECK(tons == 0.0);
  }

  // Round trip of the offline derivation: 13,000 st permitted NOx at 10%
  // over the regional energy must reproduce 1,300 st.
  double regional_energy = 26000000.0;
  double intensity = derive_pollutant_intensity(13000.0, 0.10, regional_energy);
  CHECK(intensity * regional_energy == doctest::Approx(1300.0).epsilon(1e-9));

  // SO2: 50 st permit at 10% over the same region, scaled to the baseline
  // project energy. Spreadsheet-style recomputation: 674,520 * 5/26e6 * 0.1.
  double so2_intensity = derive_pollutant_intensity(50.0, 0.10, regional_energy);
  ProjectSpec so2_spec = baseline_spec();
  so2_spec.pollutant_intensities_st_per_mwh = {{"SO2", so2_intensity}};
  double expected_so2 = 674520.0 * 50.0 * 0.10 / 26000000.0;
  CHECK(pollutant_emissions_st(so2_spec).at("SO2") ==
        doctest::Approx(expected_so2).epsilon(1e-9));
}

TEST_CASE("impact outputs are linear in rated capacity") {
  ProjectSpec base = baseline_spec();
  ProjectSpec doubled = base;
  doubled.rated_capacity_mw *= 2.0;
  CHECK(annual_energy_mwh(doubled) == doctest::Approx(2.0 * annual_energy_mwh(base)));
  CHECK(water_consumption_l(doubled).first ==
        doctest::Approx(2.0 * water_consumption_l(base).first));
  CHECK(water_consumption_l(doubled).second ==
        doctest::Approx(2.0 * water_consumption_l(base).second));
  CHECK(carbon_emissions_mst(doubled) == doctest::Approx(2.0 * carbon_emissions_mst(base)));
  CHECK(pollutant_emissions_st(doubled).at("NOx") ==
        doctest::Approx(2.0 * pollutant_emissions_st(base).at("NOx")));
}

TEST_CASE("onsite to offsite water ratio is capacity independent") {
  ProjectSpec a = baseline_spec();
  ProjectSpec b = baseline_spec();
  b.rated_capacity_mw = 733.0;
  auto [on_a, off_a] = water_consumption_l(a);
  auto [on_b, off_b] = water_consumption_l(b);
  double expected = (a.wue_l_per_kwh / a.pue) / a.ewif_l_per_kwh;
  CHECK(on_a / off_a == doctest::Approx(expected).epsilon(1e-12));
  CHECK(on_b / off_b == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("impact profile keeps the IT energy identity") {
  auto profile = build_impact_profile(baseline_spec());
  CHECK(profile.it_energy_mwh == doctest::Approx(profile.annual_energy_mwh / 1.1).epsilon(1e-12));
  CHECK(profile.onsite_water_ml == doctest::Approx(220.752).epsilon(1e-9));
  CHECK(profile.offsite_water_ml == doctest::Approx(2117.9928).epsilon(1e-9));
}

TEST_CASE("regional context renders the baseline fixture byte-exactly") {
  auto cache = testsupport::scratch_dir("impact-golden");
  auto profile = testsupport::taylor_profile(cache);
  auto context =
      build_regional_context(baseline_spec(), profile, testsupport::texas_state_context());

  CHECK(context.rendered_text.find(
            "annual electricity consumption of data center project is around 674,520 MWh") !=
        std::string::npos);
  CHECK(context.rendered_text.rfind("State Data Center Context", 0) == 0);
  CHECK(context.rendered_text.find("Community Profile") != std::string::npos);
  CHECK(context.rendered_text.find("Proposed Data Center Project and Its Estimated Impact") !=
        std::string::npos);
  CHECK(context.rendered_text.find("Survey Instructions") != std::string::npos);

  auto golden = read_text_file(testsupport::fixtures_dir() / "golden" / "context_taylor.txt");
  CHECK(context.rendered_text == golden);

  // Re-render: byte-identical.
  auto again =
      build_regional_context(baseline_spec(), profile, testsupport::texas_state_context());
  CHECK(again.rendered_text == context.rendered_text);
  std::filesystem::remove_all(cache);
}

TEST_CASE("no placeholder tokens survive rendering") {
  auto cache = testsupport::scratch_dir("impact-tokens");
  auto profile = testsupport::taylor_profile(cache);
  auto context =
      build_regional_context(baseline_spec(), profile, testsupport::texas_state_context());
  for (const char* token :
       {"[STATE_NAME]", "[POPULATION]", "[YEARLY_ENERGY_CONSUMPTION]", "[ONSITE_WATER]",
        "[NOX]", "[TOP_INDUSTRIES]"}) {
    CHECK(context.rendered_text.find(token) == std::string::npos);
  }
  std::filesystem::remove_all(cache);
}

TEST_CASE("a missing profile field names its placeholder") {
  auto cache = testsupport::scratch_dir("impact-missing");
  auto profile = testsupport::taylor_profile(cache);
  profile.top_industries.clear();
  try {
    build_regional_context(baseline_spec(), profile, testsupport::texas_state_context());
    FAIL("expected RenderError");
  } catch (const RenderError& e) {
    CHECK(std::string(e.what()).find("TOP_INDUSTRIES") != std::string::npos);
  }
  std::filesystem::remove_all(cache);
}
