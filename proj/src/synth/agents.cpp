#include "communitypoll/synth/agents.hpp"

#include <numeric>

#include "communitypoll/census/variables.hpp"
#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/rng.hpp"

namespace communitypoll::synth {

using census::MarginalTable;

const std::string& AgentProfile::attribute(const std::string& dimension) const {
  return const_cast<AgentProfile*>(this)->attribute(dimension);
}

std::string& AgentProfile::attribute(const std::string& dimension) {
  if (dimension == census::kAgeGroup) return age_group;
  if (dimension == census::kSex) return sex;
  if (dimension == census::kRace) return race;
  if (dimension == census::kEthnicity) return ethnicity;
  if (dimension == census::kCitizenship) return citizenship;
  if (dimension == census::kLanguageAtHome) return language_at_home;
  if (dimension == census::kEmploymentStatus) return employment_status;
  if (dimension == census::kHouseholdIncome) return household_income;
  if (dimension == census::kHousing) return housing;
  if (dimension == census::kVehicles) return vehicles;
  if (dimension == census::kMaritalStatus) return marital_status;
  if (dimension == census::kEducationLevel) return education_level;
  throw DomainError("agent profile has no attribute '" + dimension + "'");
}

bool operator==(const AgentProfile& a, const AgentProfile& b) {
  for (const auto& dim : census::agent_attribute_order()) {
    if (a.attribute(dim) != b.attribute(dim)) return false;
  }
  return true;
}

namespace {

std::vector<double> cumulative_of(const Eigen::VectorXd& weights) {
  std::vector<double> cum(static_cast<std::size_t>(weights.size()));
  double total = weights.sum();
  if (total <= 0.0) throw DomainError("cannot sample from an all-zero weight vector");
  double running = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    running += weights[i] / total;
    cum[static_cast<std::size_t>(i)] = running;
  }
  cum.back() = 1.0;
  return cum;
}

std::vector<double> cumulative_of_counts(const std::vector<long long>& counts,
                                         const std::vector<double>& multipliers) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    w[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]) * multipliers[i];
  }
  return cumulative_of(w);
}

bool is_young_adult(const std::string& age_group) {
  return age_group == "18 to 19 years" || age_group == "20 to 24 years";
}

bool is_elderly(const std::string& age_group) {
  return age_group == "75 to 84 years" || age_group == "85 years and over";
}

}  // namespace

std::vector<AgentProfile> sample_agents(const JointDistribution& joint, std::size_t n,
                                        std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_agents: n must be positive");

  const auto& dims = joint.dimensions();
  const auto& shape = joint.shape();
  const auto& labels = joint.categories();
  const std::size_t ndim = dims.size();

  std::ptrdiff_t age_dim = -1;
  for (std::size_t d = 0; d < ndim; ++d) {
    if (dims[d] == census::kAgeGroup) age_dim = static_cast<std::ptrdiff_t>(d);
  }

  std::mt19937_64 rng(seed);
  std::vector<AgentProfile> agents;
  agents.reserve(n);

  auto emit_if_adult = [&](const std::vector<Eigen::Index>& coords) {
    if (age_dim >= 0) {
      const std::string& age =
          labels[static_cast<std::size_t>(age_dim)]
                [static_cast<std::size_t>(coords[static_cast<std::size_t>(age_dim)])];
      if (!census::is_adult_age_category(age)) return;  // discard and redraw
    }
    AgentProfile agent;
    for (std::size_t d = 0; d < ndim; ++d) {
      agent.attribute(dims[d]) = labels[d][static_cast<std::size_t>(coords[d])];
    }
    agents.push_back(std::move(agent));
  };

  if (joint.storage() == JointDistribution::Storage::kDense) {
    const Eigen::ArrayXd& cells = joint.dense_cells();
    std::vector<double> cum(static_cast<std::size_t>(cells.size()));
    double total = cells.sum();
    double running = 0.0;
    for (Eigen::Index i = 0; i < cells.size(); ++i) {
      running += cells[i] / total;
      cum[static_cast<std::size_t>(i)] = running;
    }
    cum.back() = 1.0;

    while (agents.size() < n) {
      std::size_t flat = pick_index(cum, canonical(rng));
      std::vector<Eigen::Index> coords(ndim);
      std::size_t rem = flat;
      for (std::size_t d = ndim; d-- > 0;) {
        coords[d] = static_cast<Eigen::Index>(rem % static_cast<std::size_t>(shape[d]));
        rem /= static_cast<std::size_t>(shape[d]);
      }
      emit_if_adult(coords);
    }
    return agents;
  }

  // Factored storage: the joint is a product measure, so per-dimension draws
  // from the fitted marginals sample exactly the same distribution.
  std::vector<std::vector<double>> cums;
  cums.reserve(ndim);
  for (std::size_t d = 0; d < ndim; ++d) cums.push_back(cumulative_of(joint.marginal(d)));

  std::vector<Eigen::Index> coords(ndim);
  while (agents.size() < n) {
    for (std::size_t d = 0; d < ndim; ++d) {
      coords[d] = static_cast<Eigen::Index>(pick_index(cums[d], canonical(rng)));
    }
    emit_if_adult(coords);
  }
  return agents;
}

void assign_marital_status(std::vector<AgentProfile>& agents,
                           const census::MarginalTable& male_table,
                           const census::MarginalTable& female_table,
                           const MaritalAgeAdjustment& adjustment, std::uint64_t seed) {
  male_table.validate();
  female_table.validate();
  if (male_table.categories != female_table.categories) {
    throw ConfigError("marital tables disagree on categories");
  }
  const auto& categories = male_table.categories;
  std::size_t never_idx = male_table.index_of("Never Married");
  std::size_t widowed_idx = male_table.index_of("Widowed");

  std::mt19937_64 rng(seed);
  for (auto& agent : agents) {
    if (!census::is_adult_age_category(agent.age_group)) {
      throw DomainError("assign_marital_status: agent has under-18 age group '" +
                        agent.age_group + "'");
    }
    const census::MarginalTable* table = nullptr;
    if (agent.sex == "Male") {
      table = &male_table;
    } else if (agent.sex == "Female") {
      table = &female_table;
    } else {
      throw ConfigError("no marital table for sex '" + agent.sex + "'");
    }

    std::vector<double> multipliers(categories.size(), 1.0);
    if (is_young_adult(agent.age_group)) {
      multipliers[never_idx] = adjustment.young_never_married;
    } else if (is_elderly(agent.age_group)) {
      multipliers[widowed_idx] = adjustment.elderly_widowed;
    }
    auto cum = cumulative_of_counts(table->counts, multipliers);
    agent.marital_status = categories[pick_index(cum, canonical(rng))];
  }
}

void assign_education(std::vector<AgentProfile>& agents,
                      const census::MarginalTable& enrollment_table,
                      const census::MarginalTable& attainment_table, std::uint64_t seed) {
  enrollment_table.validate();
  attainment_table.validate();
  std::vector<double> ones_enroll(enrollment_table.categories.size(), 1.0);
  std::vector<double> ones_attain(attainment_table.categories.size(), 1.0);
  auto enroll_cum = cumulative_of_counts(enrollment_table.counts, ones_enroll);
  auto attain_cum = cumulative_of_counts(attainment_table.counts, ones_attain);

  std::mt19937_64 rng(seed);
  for (auto& agent : agents) {
    if (is_young_adult(agent.age_group)) {
      agent.education_level = enrollment_table.categories[pick_index(enroll_cum, canonical(rng))];
    } else {
      agent.education_level = attainment_table.categories[pick_index(attain_cum, canonical(rng))];
    }
  }
}

std::vector<FitReport> verify_population(const std::vector<AgentProfile>& agents,
                                         const std::vector<census::MarginalTable>& targets,
                                         double alpha) {
  if (agents.size() < 30) {
    throw DomainError("verify_population: need at least 30 agents, have " +
                      std::to_string(agents.size()));
  }
  std::vector<FitReport> reports;
  for (const auto& table : targets) {
    table.validate();
    std::vector<std::string> categories;
    std::vector<double> expected;
    for (std::size_t i = 0; i < table.categories.size(); ++i) {
      // Sampled agents are adults only; the age expectation must drop the
      // under-18 mass and renormalize over adult categories.
      if (table.dimension_name == census::kAgeGroup &&
          !census::is_adult_age_category(table.categories[i])) {
        continue;
      }
      categories.push_back(table.categories[i]);
      expected.push_back(static_cast<double>(table.counts[i]));
    }

    Eigen::VectorXd observed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(categories.size()));
    Eigen::VectorXd expected_probs(static_cast<Eigen::Index>(categories.size()));
    double expected_total = 0.0;
    for (double e : expected) expected_total += e;
    if (expected_total <= 0.0) {
      throw DomainError("verify_population: all-zero expected vector for dimension '" +
                        table.dimension_name + "'");
    }
    for (std::size_t i = 0; i < categories.size(); ++i) {
      expected_probs[static_cast<Eigen::Index>(i)] = expected[i] / expected_total;
    }
    for (const auto& agent : agents) {
      const std::string& value = agent.attribute(table.dimension_name);
      for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i] == value) {
          observed[static_cast<Eigen::Index>(i)] += 1.0;
          break;
        }
      }
    }
    reports.push_back(
        chi_square_goodness_of_fit(table.dimension_name, observed, expected_probs, alpha));
  }
  return reports;
}

}  // namespace communitypoll::synth
