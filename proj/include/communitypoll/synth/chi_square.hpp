#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace communitypoll::synth {

struct FitReport {
  std::string dimension;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 0.0;
  bool pass = false;
  int merged_bins = 0;  // bins removed by the small-expected-count rule
};

// Regularized upper incomplete gamma Q(a, x); the chi-square survival
// function is Q(df/2, x/2).
double gamma_q(double a, double x);
double chi_square_p_value(double statistic, int degrees_of_freedom);

// Pearson goodness-of-fit against expected probabilities. Bins whose expected
// count falls below 5 are merged into their nearest neighbor with nonzero
// expectation before testing. observed and expected_probs must be parallel to
// the category list; expected counts are expected_probs * n.
FitReport chi_square_goodness_of_fit(const std::string& dimension,
                                     const Eigen::VectorXd& observed_counts,
                                     const Eigen::VectorXd& expected_probs, double alpha);

}  // namespace communitypoll::synth
