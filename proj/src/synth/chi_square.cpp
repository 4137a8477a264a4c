#include "communitypoll/synth/chi_square.hpp"

#include <cmath>
#include <limits>

#include "communitypoll/common/errors.hpp"

namespace communitypoll::synth {

namespace {

// Series expansion of P(a, x), accurate for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) via the modified Lentz method, for x >= a+1.
double gamma_q_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_q: requires a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi_square_p_value(double statistic, int degrees_of_freedom) {
  if (degrees_of_freedom < 1) throw DomainError("chi-square: df must be >= 1");
  if (statistic < 0.0) throw DomainError("chi-square: statistic must be nonnegative");
  return gamma_q(0.5 * degrees_of_freedom, 0.5 * statistic);
}

FitReport chi_square_goodness_of_fit(const std::string& dimension,
                                     const Eigen::VectorXd& observed_counts,
                                     const Eigen::VectorXd& expected_probs, double alpha) {
  if (observed_counts.size() != expected_probs.size() || observed_counts.size() == 0) {
    throw DomainError("chi-square: observed/expected size mismatch");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("chi-square: alpha must be in (0,1)");
  if (expected_probs.sum() <= 0.0) {
    throw DomainError("chi-square: expected vector is all zero");
  }

  const double n = observed_counts.sum();
  std::vector<double> obs(observed_counts.data(), observed_counts.data() + observed_counts.size());
  std::vector<double> exp;
  for (Eigen::Index i = 0; i < expected_probs.size(); ++i) {
    exp.push_back(expected_probs[i] / expected_probs.sum() * n);
  }

  int merged = 0;
  // Fold any bin with expected < 5 into its nearest neighbor with nonzero
  // expectation (ties go left), until all remaining bins qualify.
  while (obs.size() > 1) {
    std::size_t victim = obs.size();
    for (std::size_t i = 0; i < exp.size(); ++i) {
      if (exp[i] < 5.0) {
        victim = i;
        break;
      }
    }
    if (victim == obs.size()) break;

    std::size_t target = obs.size();
    for (std::size_t dist = 1; dist < obs.size(); ++dist) {
      if (victim >= dist && exp[victim - dist] > 0.0) {
        target = victim - dist;
        break;
      }
      if (victim + dist < obs.size() && exp[victim + dist] > 0.0) {
        target = victim + dist;
        break;
      }
    }
    if (target == obs.size()) {
      // Everything else is zero too; fold into the adjacent bin regardless.
      target = victim == 0 ? 1 : victim - 1;
    }
    obs[target] += obs[victim];
    exp[target] += exp[victim];
    obs.erase(obs.begin() + static_cast<std::ptrdiff_t>(victim));
    exp.erase(exp.begin() + static_cast<std::ptrdiff_t>(victim));
    ++merged;
  }

  FitReport report;
  report.dimension = dimension;
  report.merged_bins = merged;
  double statistic = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (exp[i] <= 0.0) {
      if (obs[i] > 0.0) {
        throw DomainError("chi-square: observations in a zero-expectation bin");
      }
      continue;
    }
    double diff = obs[i] - exp[i];
    statistic += diff * diff / exp[i];
  }
  report.chi_square = statistic;
  report.degrees_of_freedom = static_cast<int>(obs.size()) - 1;
  if (report.degrees_of_freedom < 1) {
    // Degenerate single-bin case: the fit is exact by construction.
    report.degrees_of_freedom = 0;
    report.p_value = 1.0;
  } else {
    report.p_value = chi_square_p_value(statistic, report.degrees_of_freedom);
  }
  report.pass = report.p_value > alpha;
  return report;
}

}  // namespace communitypoll::synth
