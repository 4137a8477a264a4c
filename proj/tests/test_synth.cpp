#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "communitypoll/census/client.hpp"
#include "communitypoll/census/variables.hpp"
#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/hash.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/synth/chi_square.hpp"
#include "communitypoll/synth/synthesize.hpp"

using namespace communitypoll;
using namespace communitypoll::census;
using namespace communitypoll::synth;

namespace {

std::filesystem::path fresh_temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("communitypoll-synth-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Taylor-format inputs straight from the shipped fixtures.
SynthesisInputs load_taylor_inputs(const std::filesystem::path& cache_dir) {
  ResponseCache cache(cache_dir);
  install_fixtures(std::filesystem::path(FIXTURES_DIR) / "census" / "index.json", cache);
  AcsClient client(nullptr, std::move(cache));
  auto tables = client.fetch_marginals({2023, "48", "441"}, default_variable_sets());

  SynthesisInputs inputs;
  std::map<std::string, MarginalTable> by_name;
  for (auto& t : tables) by_name[t.dimension_name] = t;
  for (const auto& name : ipf_dimension_order()) {
    if (name == kAgeGroup) {
      inputs.ipf_targets.push_back(partition_age_bracket(by_name.at(name)).table);
    } else {
      inputs.ipf_targets.push_back(by_name.at(name));
    }
  }
  inputs.marital_male = by_name.at(kMaritalStatusMale);
  inputs.marital_female = by_name.at(kMaritalStatusFemale);
  inputs.education_enrollment = by_name.at(kEducationEnrollment);
  inputs.education_attainment = by_name.at(kEducationLevel);
  return inputs;
}

// Independent tail probability via the textbook closed forms for integer
// degrees of freedom: a finite Poisson sum for even df, erfc plus a half-
// integer recurrence for odd df. Shares nothing with the library's series /
// continued-fraction implementation.
double oracle_p_value(double statistic, int df) {
  if (statistic <= 0.0) return 1.0;
  double y = statistic / 2.0;
  if (df % 2 == 0) {
    double term = std::exp(-y);
    double sum = term;
    for (int j = 1; j < df / 2; ++j) {
      term *= y / j;
      sum += term;
    }
    return sum;
  }
  double q = std::erfc(std::sqrt(y));
  double a = 0.5;
  for (int j = 0; j < df / 2; ++j) {
    // Q(a+1, y) = Q(a, y) + y^a e^{-y} / Gamma(a+1)
    q += std::exp(a * std::log(y) - y - std::lgamma(a + 1.0));
    a += 1.0;
  }
  return q;
}

MarginalTable two_sex_table() {
  return MarginalTable{"sex", {"Male", "Female"}, {60, 40}, 100};
}

}  // namespace

TEST_CASE("gamma tail matches published chi-square critical values") {
  CHECK(chi_square_p_value(3.841, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi_square_p_value(9.488, 4) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi_square_p_value(16.919, 9) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi_square_p_value(0.3500, 1) == doctest::Approx(0.5541).epsilon(1e-3));
}

TEST_CASE("library p-values agree with the quadrature oracle") {
  const double statistics[] = {0.1, 0.35, 1.7, 2.8606, 7.2699, 16.8381, 42.0};
  const int dfs[] = {1, 2, 4, 8, 9, 15, 20};
  for (double s : statistics) {
    for (int df : dfs) {
      CHECK(chi_square_p_value(s, df) == doctest::Approx(oracle_p_value(s, df)).epsilon(1e-6));
    }
  }
}

TEST_CASE("perfect fit gives zero statistic and p of one") {
  Eigen::VectorXd observed(3), probs(3);
  observed << 30, 50, 20;
  probs << 0.3, 0.5, 0.2;
  auto report = chi_square_goodness_of_fit("sex", observed, probs, 0.05);
  CHECK(report.chi_square == doctest::Approx(0.0));
  CHECK(report.p_value == doctest::Approx(1.0));
  CHECK(report.pass);
  CHECK(report.degrees_of_freedom == 2);
}

TEST_CASE("statistic and p match a hand computation over merged bins") {
  // Expected counts 55/45 against observed 62/38: chi2 = 49/55 + 49/45.
  Eigen::VectorXd observed(2), probs(2);
  observed << 62, 38;
  probs << 0.55, 0.45;
  auto report = chi_square_goodness_of_fit("sex", observed, probs, 0.05);
  double expected_stat = 49.0 / 55.0 + 49.0 / 45.0;
  CHECK(report.chi_square == doctest::Approx(expected_stat).epsilon(1e-9));
  CHECK(report.p_value == doctest::Approx(oracle_p_value(expected_stat, 1)).epsilon(1e-6));
}

TEST_CASE("small expected bins merge into their nearest neighbor") {
  // n = 100 with a 2% category: expected 2 < 5 forces one merge.
  Eigen::VectorXd observed(4), probs(4);
  observed << 50, 30, 18, 2;
  probs << 0.5, 0.3, 0.18, 0.02;
  auto report = chi_square_goodness_of_fit("income", observed, probs, 0.05);
  CHECK(report.merged_bins == 1);
  CHECK(report.degrees_of_freedom == 2);
  CHECK(report.pass);
}

TEST_CASE("all-zero expectations are rejected") {
  Eigen::VectorXd observed(2), probs(2);
  observed << 1, 1;
  probs << 0.0, 0.0;
  CHECK_THROWS_AS(chi_square_goodness_of_fit("x", observed, probs, 0.05), DomainError);
}

TEST_CASE("seeded sampling is deterministic") {
  auto joint = ipf_fit(std::vector<MarginalTable>{two_sex_table()}, IpfConfig{});
  auto first = sample_agents(joint, 1000, 42);
  auto second = sample_agents(joint, 1000, 42);
  REQUIRE(first.size() == 1000);
  CHECK(first == second);
  auto different = sample_agents(joint, 1000, 43);
  CHECK_FALSE(first == different);
}

TEST_CASE("sampling n=0 is rejected") {
  auto joint = ipf_fit(std::vector<MarginalTable>{two_sex_table()}, IpfConfig{});
  CHECK_THROWS_AS(sample_agents(joint, 0, 1), DomainError);
}

TEST_CASE("a concentrated joint yields identical agents") {
  MarginalTable sex{"sex", {"Male", "Female"}, {100, 0}, 100};
  MarginalTable eth{"ethnicity", {"Hispanic or Latino", "Not Hispanic or Latino"}, {0, 50}, 50};
  auto joint = ipf_fit(std::vector<MarginalTable>{sex, eth}, IpfConfig{});
  auto agents = sample_agents(joint, 50, 7);
  for (const auto& agent : agents) {
    CHECK(agent.sex == "Male");
    CHECK(agent.ethnicity == "Not Hispanic or Latino");
  }
}

TEST_CASE("empirical cell frequencies stay within three standard errors") {
  MarginalTable sex{"sex", {"Male", "Female"}, {60, 40}, 100};
  MarginalTable eth{"ethnicity", {"Hispanic or Latino", "Not Hispanic or Latino"}, {70, 30},
                    100};
  auto joint = ipf_fit(std::vector<MarginalTable>{sex, eth}, IpfConfig{});
  const std::size_t n = 10000;
  auto agents = sample_agents(joint, n, 2024);

  const double expected[2][2] = {{0.42, 0.18}, {0.28, 0.12}};
  std::map<std::pair<int, int>, int> counts;
  for (const auto& agent : agents) {
    int r = agent.sex == "Male" ? 0 : 1;
    int c = agent.ethnicity == "Hispanic or Latino" ? 0 : 1;
    counts[{r, c}] += 1;
  }
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      double p = expected[r][c];
      double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
      double observed = counts[{r, c}] / static_cast<double>(n);
      CHECK(std::abs(observed - p) <= 3.0 * se);
    }
  }
}

TEST_CASE("under-18 draws are discarded and redrawn") {
  MarginalTable age{"age_group",
                    {"10 to 14 years", "18 to 19 years", "25 to 34 years"},
                    {500, 100, 400},
                    1000};
  auto joint = ipf_fit(std::vector<MarginalTable>{age}, IpfConfig{});
  auto agents = sample_agents(joint, 2000, 11);
  REQUIRE(agents.size() == 2000);
  std::size_t young = 0;
  for (const auto& agent : agents) {
    CHECK(agent.age_group != "10 to 14 years");
    if (agent.age_group == "18 to 19 years") ++young;
  }
  // Conditioned on adulthood: 100 / 500 of the adult mass.
  double share = static_cast<double>(young) / 2000.0;
  double se = std::sqrt(0.2 * 0.8 / 2000.0);
  CHECK(std::abs(share - 0.2) <= 3.0 * se);
}

TEST_CASE("marital assignment matches the census conditional within sampling error") {
  MarginalTable male{"marital_status",
                     {"Never Married", "Now Married, Except Separated", "Separated", "Widowed",
                      "Divorced"},
                     {3000, 5000, 300, 200, 1500},
                     10000};
  MarginalTable female = male;
  std::vector<AgentProfile> agents(10000);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].sex = i % 2 ? "Male" : "Female";
    agents[i].age_group = "35 to 44 years";  // multiplier-neutral band
  }
  assign_marital_status(agents, male, female, MaritalAgeAdjustment{1.0, 1.0}, 5);

  std::map<std::string, int> counts;
  for (const auto& agent : agents) counts[agent.marital_status] += 1;
  for (std::size_t i = 0; i < male.categories.size(); ++i) {
    double p = static_cast<double>(male.counts[i]) / static_cast<double>(male.total);
    double se = std::sqrt(p * (1.0 - p) / static_cast<double>(agents.size()));
    double observed =
        counts[male.categories[i]] / static_cast<double>(agents.size());
    CHECK(std::abs(observed - p) <= 3.0 * se);
  }
}

TEST_CASE("a degenerate marital table pins every agent") {
  MarginalTable male{"marital_status",
                     {"Never Married", "Now Married, Except Separated", "Separated", "Widowed",
                      "Divorced"},
                     {100, 0, 0, 0, 0},
                     100};
  MarginalTable female = male;
  std::vector<AgentProfile> agents(100);
  for (auto& agent : agents) {
    agent.sex = "Male";
    agent.age_group = "45 to 54 years";
  }
  assign_marital_status(agents, male, female, MaritalAgeAdjustment{}, 3);
  for (const auto& agent : agents) CHECK(agent.marital_status == "Never Married");
}

TEST_CASE("marital assignment rejects minors") {
  MarginalTable male{"marital_status", {"Never Married", "Widowed"}, {1, 1}, 2};
  std::vector<AgentProfile> agents(1);
  agents[0].sex = "Male";
  agents[0].age_group = "Under 5 years";
  CHECK_THROWS_AS(assign_marital_status(agents, male, male, MaritalAgeAdjustment{}, 1),
                  DomainError);
}

TEST_CASE("marital assignment without a sex table is a configuration error") {
  MarginalTable male{"marital_status", {"Never Married", "Widowed"}, {1, 1}, 2};
  std::vector<AgentProfile> agents(1);
  agents[0].sex = "Unknown";
  agents[0].age_group = "35 to 44 years";
  CHECK_THROWS_AS(assign_marital_status(agents, male, male, MaritalAgeAdjustment{}, 1),
                  ConfigError);
}

TEST_CASE("age multipliers shift young agents toward never married") {
  MarginalTable table{"marital_status",
                      {"Never Married", "Now Married, Except Separated", "Separated", "Widowed",
                       "Divorced"},
                      {2000, 6000, 400, 600, 1000},
                      10000};
  std::vector<AgentProfile> young(20000);
  for (auto& agent : young) {
    agent.sex = "Male";
    agent.age_group = "20 to 24 years";
  }
  assign_marital_status(young, table, table, MaritalAgeAdjustment{3.0, 4.0}, 17);
  std::size_t never = 0;
  for (const auto& agent : young) never += agent.marital_status == "Never Married";
  // Reweighted: 6000 / (6000 + 8000) vs the unadjusted 0.2.
  double p = 6000.0 / 14000.0;
  double se = std::sqrt(p * (1 - p) / 20000.0);
  CHECK(std::abs(never / 20000.0 - p) <= 3 * se);
}

TEST_CASE("education uses enrollment categories for 18-24 and attainment for 25+") {
  MarginalTable enrollment{"education_enrollment",
                           {"Attending some college or graduate school",
                            "Not attending any college"},
                           {40, 60},
                           100};
  MarginalTable attainment{"education_level",
                           {"Less than 9th grade", "Bachelor's degree"},
                           {0, 100},
                           100};
  std::vector<AgentProfile> agents(3);
  agents[0].age_group = "18 to 19 years";
  agents[1].age_group = "20 to 24 years";
  agents[2].age_group = "65 to 74 years";
  assign_education(agents, enrollment, attainment, 9);
  CHECK(enrollment.index_of(agents[0].education_level) < 2);
  CHECK(enrollment.index_of(agents[1].education_level) < 2);
  CHECK(agents[2].education_level == "Bachelor's degree");
}

TEST_CASE("verification flags a deliberately skewed dimension") {
  MarginalTable sex = two_sex_table();
  std::vector<AgentProfile> agents(100);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].sex = i < 90 ? "Male" : "Female";  // census says 60/40
  }
  auto reports = verify_population(agents, {sex}, 0.05);
  REQUIRE(reports.size() == 1);
  CHECK_FALSE(reports[0].pass);
  CHECK(reports[0].p_value < 0.05);
  // Hand check: chi2 = (90-60)^2/60 + (10-40)^2/40 = 15 + 22.5.
  CHECK(reports[0].chi_square == doctest::Approx(37.5).epsilon(1e-9));
  CHECK(reports[0].p_value == doctest::Approx(oracle_p_value(37.5, 1)).epsilon(1e-6));
}

TEST_CASE("verification requires at least 30 agents") {
  std::vector<AgentProfile> agents(5);
  CHECK_THROWS_AS(verify_population(agents, {two_sex_table()}, 0.05), DomainError);
}

TEST_CASE("full synthesis from Taylor fixtures passes all ten dimensions") {
  auto dir = fresh_temp_dir("taylor");
  auto inputs = load_taylor_inputs(dir);
  SynthesisConfig config;
  config.ipf.seed = 20250930;
  auto result = synthesize(inputs, config, 1000);

  CHECK(result.agents.size() == 1000);
  CHECK(result.fit_reports.size() == 10);
  for (const auto& report : result.fit_reports) {
    CHECK(report.pass);
    CHECK(report.p_value > 0.05);
  }
  CHECK(result.attempts <= 6);
  for (const auto& agent : result.agents) {
    CHECK(census::is_adult_age_category(agent.age_group));
    CHECK_FALSE(agent.marital_status.empty());
    CHECK_FALSE(agent.education_level.empty());
    bool young = agent.age_group == "18 to 19 years" || agent.age_group == "20 to 24 years";
    if (young) {
      CHECK((agent.education_level == "Attending some college or graduate school" ||
             agent.education_level == "Not attending any college"));
    } else {
      CHECK(agent.education_level != "Attending some college or graduate school");
      CHECK(agent.education_level != "Not attending any college");
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthesis with too few agents hits the verification precondition") {
  auto dir = fresh_temp_dir("smalln");
  auto inputs = load_taylor_inputs(dir);
  SynthesisConfig config;
  config.ipf.seed = 5;
  CHECK_THROWS_AS(synthesize(inputs, config, 5), DomainError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("an impossible alpha exhausts the retry cap and reports every attempt") {
  auto dir = fresh_temp_dir("retrycap");
  auto inputs = load_taylor_inputs(dir);
  SynthesisConfig config;
  config.ipf.seed = 1;
  config.alpha = 0.999999;  // verification cannot pass at this level
  config.retry_cap = 2;
  try {
    synthesize(inputs, config, 1000);
    FAIL("expected SynthesisError");
  } catch (const SynthesisError& e) {
    CHECK(e.attempt_reports.size() == 3);  // initial try plus two retries
    for (const auto& attempt : e.attempt_reports) CHECK(attempt.size() == 10);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("population files persist and reload byte-identically") {
  auto dir = fresh_temp_dir("popfile");
  auto inputs = load_taylor_inputs(dir / "cache");
  SynthesisConfig config;
  config.ipf.seed = 77;
  auto result = synthesize(inputs, config, 200);

  auto path_a = dir / "pop_a.tsv";
  auto path_b = dir / "pop_b.tsv";
  write_population(path_a, result.agents, "cfg123", result.seed_used);
  write_population(path_b, result.agents, "cfg123", result.seed_used);
  CHECK(sha256_hex(read_text_file(path_a)) == sha256_hex(read_text_file(path_b)));

  auto loaded = read_population(path_a);
  CHECK(loaded.config_hash == "cfg123");
  CHECK(loaded.seed == result.seed_used);
  REQUIRE(loaded.agents.size() == result.agents.size());
  for (std::size_t i = 0; i < loaded.agents.size(); ++i) {
    CHECK(loaded.agents[i] == result.agents[i]);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical seeds reproduce identical populations end to end") {
  auto dir = fresh_temp_dir("determinism");
  auto inputs = load_taylor_inputs(dir);
  SynthesisConfig config;
  config.ipf.seed = 31337;
  auto first = synthesize(inputs, config, 500);
  auto second = synthesize(inputs, config, 500);
  REQUIRE(first.agents.size() == second.agents.size());
  for (std::size_t i = 0; i < first.agents.size(); ++i) {
    CHECK(first.agents[i] == second.agents[i]);
  }
  std::filesystem::remove_all(dir);
}
