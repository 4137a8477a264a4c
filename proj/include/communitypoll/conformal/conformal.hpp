#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace communitypoll::conformal {

struct CalibrationPair {
  std::string community_id;
  std::string question_id;
  std::string option_id;
  double y_hat = 0.0;  // agent-poll probability
  double y = 0.0;      // real-survey probability
};

struct ConformalModel {
  Eigen::VectorXd scores;  // |y - y_hat|, ascending
  std::size_t n = 0;
  double alpha = 0.0;
  double q_hat = 0.0;  // +infinity when ceil((n+1)(1-alpha)) > n
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// q_hat is the ceil((n+1)(1-alpha))-th smallest nonconformity score, or the
// +infinity sentinel when the rank exceeds n (too little calibration data for
// the requested confidence).
ConformalModel calibrate(const std::vector<CalibrationPair>& pairs, double alpha);

// [y_hat - q_hat, y_hat + q_hat] clipped to [0,1]; a sentinel model yields
// the vacuous [0,1].
Interval predict_interval(const ConformalModel& model, double y_hat_new);

struct CoverageSimConfig {
  double alpha = 0.1;
  std::size_t n_cal = 49;
  std::size_t trials = 10000;
  std::uint64_t seed = 7;
  // Draws the true probability; default Uniform(0,1).
  std::function<double(std::mt19937_64&)> true_dist;
  // Additive estimator noise; default Normal(0, 0.05).
  std::function<double(std::mt19937_64&)> noise;
};

// Monte Carlo check of the marginal coverage guarantee: per trial, calibrate
// on n_cal exchangeable pairs and test the held-out pair. Returns the
// fraction of trials whose interval contained the true value.
double coverage_simulation(const CoverageSimConfig& config);

// Delimited calibration file: header then
// community_id,question_id,option_id,y_hat,y per line.
std::vector<CalibrationPair> read_calibration_pairs(const std::filesystem::path& path);

}  // namespace communitypoll::conformal
