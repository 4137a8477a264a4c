#include "communitypoll/conformal/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "communitypoll/common/errors.hpp"
#include "communitypoll/common/fsio.hpp"
#include "communitypoll/common/rng.hpp"
#include "communitypoll/common/text.hpp"

namespace communitypoll::conformal {

ConformalModel calibrate(const std::vector<CalibrationPair>& pairs, double alpha) {
  if (pairs.empty()) throw DomainError("calibrate: no calibration pairs");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("calibrate: alpha must be in (0,1)");

  ConformalModel model;
  model.n = pairs.size();
  model.alpha = alpha;
  model.scores.resize(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    if (pair.y < 0.0 || pair.y > 1.0 || pair.y_hat < 0.0 || pair.y_hat > 1.0) {
      throw DomainError("calibrate: probabilities must lie in [0,1]");
    }
    model.scores[static_cast<Eigen::Index>(i)] = std::abs(pair.y - pair.y_hat);
  }
  std::sort(model.scores.data(), model.scores.data() + model.scores.size());

  // ceil((n+1)(1-alpha)); the tiny slack counters representation error in the
  // product (e.g. 20 * 0.95 landing a hair above 19).
  double exact = static_cast<double>(model.n + 1) * (1.0 - alpha);
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  if (rank <= model.n) {
    model.q_hat = model.scores[static_cast<Eigen::Index>(rank - 1)];
  } else {
    model.q_hat = std::numeric_limits<double>::infinity();
  }
  return model;
}

Interval predict_interval(const ConformalModel& model, double y_hat_new) {
  if (y_hat_new < 0.0 || y_hat_new > 1.0) {
    throw DomainError("predict_interval: y_hat must lie in [0,1]");
  }
  if (std::isinf(model.q_hat)) return Interval{0.0, 1.0};
  return Interval{std::max(0.0, y_hat_new - model.q_hat),
                  std::min(1.0, y_hat_new + model.q_hat)};
}

double coverage_simulation(const CoverageSimConfig& config) {
  if (config.trials == 0 || config.n_cal == 0) {
    throw DomainError("coverage_simulation: trials and n_cal must be positive");
  }
  auto true_dist = config.true_dist;
  if (!true_dist) {
    true_dist = [](std::mt19937_64& rng) { return canonical(rng); };
  }
  auto noise = config.noise;
  if (!noise) {
    noise = [](std::mt19937_64& rng) {
      // Box-Muller keeps the draw stream platform-stable.
      double u1 = std::max(canonical(rng), 1e-12);
      double u2 = canonical(rng);
      return 0.05 * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
  }

  std::size_t covered = 0;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    std::mt19937_64 rng(mix_seed(config.seed, trial));
    std::vector<CalibrationPair> pairs(config.n_cal);
    for (auto& pair : pairs) {
      pair.y = true_dist(rng);
      pair.y_hat = std::clamp(pair.y + noise(rng), 0.0, 1.0);
    }
    double y_test = true_dist(rng);
    double y_hat_test = std::clamp(y_test + noise(rng), 0.0, 1.0);

    ConformalModel model = calibrate(pairs, config.alpha);
    Interval interval = predict_interval(model, y_hat_test);
    if (y_test >= interval.lo && y_test <= interval.hi) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(config.trials);
}

std::vector<CalibrationPair> read_calibration_pairs(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<CalibrationPair> pairs;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    if (first) {
      first = false;
      if (trimmed.rfind("community_id", 0) == 0) continue;  // header
    }
    auto fields = split(trimmed, ',');
    if (fields.size() != 5) {
      throw SchemaError("calibration pairs " + path.string() + ":" + std::to_string(line_no) +
                        ": expected 5 comma-separated fields");
    }
    CalibrationPair pair;
    pair.community_id = trim(fields[0]);
    pair.question_id = trim(fields[1]);
    pair.option_id = trim(fields[2]);
    try {
      pair.y_hat = std::stod(fields[3]);
      pair.y = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw SchemaError("calibration pairs " + path.string() + ":" + std::to_string(line_no) +
                        ": probabilities must be numeric");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace communitypoll::conformal
