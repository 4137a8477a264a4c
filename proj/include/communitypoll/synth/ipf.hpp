#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "communitypoll/census/types.hpp"

namespace communitypoll::synth {

struct IpfConfig {
  int max_iterations = 10;
  double epsilon = 1e-9;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IpfReport {
  bool converged = false;
  int iterations = 0;
  double max_gap = 0.0;  // worst L-inf distance between a marginal and its target
};

// Joint probability array over the fitted dimensions. Grids small enough to
// enumerate hold explicit cells. Larger grids stay in product form: starting
// from a uniform array, every scaling update multiplies by a function of one
// coordinate, so the iterate remains a product of per-dimension factors and
// never needs materialising.
class JointDistribution {
 public:
  enum class Storage { kDense, kFactored };

  const std::vector<std::string>& dimensions() const { return dimensions_; }
  const std::vector<Eigen::Index>& shape() const { return shape_; }
  const std::vector<Eigen::VectorXd>& targets() const { return targets_; }
  // Category labels per dimension, parallel to shape().
  const std::vector<std::vector<std::string>>& categories() const { return categories_; }
  Storage storage() const { return storage_; }
  const IpfReport& report() const { return report_; }

  std::size_t dimension_index(const std::string& name) const;
  Eigen::Index cell_count() const;

  double total_mass() const;
  Eigen::VectorXd marginal(std::size_t dim) const;

  // Cell weight at the given coordinates, either storage mode.
  double cell(const std::vector<Eigen::Index>& coords) const;

  // Dense storage only: flattened row-major cells.
  const Eigen::ArrayXd& dense_cells() const;

  // Factored storage only.
  const std::vector<Eigen::ArrayXd>& factors() const;

 private:
  friend JointDistribution ipf_fit(const std::vector<Eigen::VectorXd>&,
                                   const std::vector<std::string>&, const IpfConfig&);
  friend JointDistribution ipf_fit(const std::vector<census::MarginalTable>&, const IpfConfig&);

  void fit_dense(const IpfConfig& config);
  void fit_factored(const IpfConfig& config);

  std::vector<std::string> dimensions_;
  std::vector<Eigen::Index> shape_;
  std::vector<Eigen::VectorXd> targets_;
  std::vector<std::vector<std::string>> categories_;
  Storage storage_ = Storage::kDense;
  Eigen::ArrayXd cells_;                 // dense: flattened row-major
  std::vector<Eigen::ArrayXd> factors_;  // factored: one array per dimension
  IpfReport report_;
};

// Cells above this stay dense; beyond it the factored form is used.
inline constexpr Eigen::Index kDenseCellLimit = Eigen::Index{1} << 22;

// Fits a joint distribution to probability targets from a uniform start.
// Every target must sum to 1 within 1e-9 and contain no negative entries.
JointDistribution ipf_fit(const std::vector<Eigen::VectorXd>& targets,
                          const std::vector<std::string>& dimension_names,
                          const IpfConfig& config);

// Normalizes marginal tables to probabilities and fits them.
JointDistribution ipf_fit(const std::vector<census::MarginalTable>& targets,
                          const IpfConfig& config);

}  // namespace communitypoll::synth
