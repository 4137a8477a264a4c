#include "communitypoll/synth/ipf.hpp"

#include <cmath>
#include <limits>

#include "communitypoll/common/errors.hpp"

namespace communitypoll::synth {

void IpfConfig::validate() const {
  if (max_iterations < 1) throw DomainError("ipf: max_iterations must be >= 1");
  if (!(epsilon > 0.0)) throw DomainError("ipf: epsilon must be positive");
}

std::size_t JointDistribution::dimension_index(const std::string& name) const {
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    if (dimensions_[d] == name) return d;
  }
  throw DomainError("joint distribution has no dimension '" + name + "'");
}

Eigen::Index JointDistribution::cell_count() const {
  Eigen::Index n = 1;
  for (Eigen::Index s : shape_) n *= s;
  return n;
}

double JointDistribution::total_mass() const {
  if (storage_ == Storage::kDense) return cells_.sum();
  double total = 1.0;
  for (const auto& f : factors_) total *= f.sum();
  return total;
}

Eigen::VectorXd JointDistribution::marginal(std::size_t dim) const {
  if (storage_ == Storage::kFactored) {
    double rest = 1.0;
    for (std::size_t e = 0; e < factors_.size(); ++e) {
      if (e != dim) rest *= factors_[e].sum();
    }
    return (factors_[dim] * rest).matrix();
  }
  // Row-major flattening: stride of dim = product of later shapes.
  Eigen::Index stride = 1;
  for (std::size_t e = dim + 1; e < shape_.size(); ++e) stride *= shape_[e];
  Eigen::Index block = stride * shape_[dim];
  Eigen::VectorXd m = Eigen::VectorXd::Zero(shape_[dim]);
  for (Eigen::Index i = 0; i < cells_.size(); ++i) {
    m[(i % block) / stride] += cells_[i];
  }
  return m;
}

double JointDistribution::cell(const std::vector<Eigen::Index>& coords) const {
  if (coords.size() != shape_.size()) {
    throw DomainError("joint distribution: wrong coordinate rank");
  }
  if (storage_ == Storage::kFactored) {
    double v = 1.0;
    for (std::size_t d = 0; d < coords.size(); ++d) v *= factors_[d][coords[d]];
    return v;
  }
  Eigen::Index flat = 0;
  for (std::size_t d = 0; d < coords.size(); ++d) {
    flat = flat * shape_[d] + coords[d];
  }
  return cells_[flat];
}

const Eigen::ArrayXd& JointDistribution::dense_cells() const {
  if (storage_ != Storage::kDense) throw DomainError("joint distribution is not dense");
  return cells_;
}

const std::vector<Eigen::ArrayXd>& JointDistribution::factors() const {
  if (storage_ != Storage::kFactored) throw DomainError("joint distribution is not factored");
  return factors_;
}

namespace {

void check_targets(const std::vector<Eigen::VectorXd>& targets) {
  if (targets.empty()) throw DomainError("ipf: no target marginals");
  for (const auto& t : targets) {
    if (t.size() == 0) throw DomainError("ipf: empty target marginal");
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (t[i] < 0.0) throw DomainError("ipf: negative entry in target marginal");
    }
    if (std::abs(t.sum() - 1.0) > 1e-9) {
      throw DomainError("ipf: target marginal does not sum to 1 (inconsistent totals)");
    }
  }
}

}  // namespace

void JointDistribution::fit_dense(const IpfConfig& config) {
  const std::size_t ndim = shape_.size();
  const Eigen::Index cells = cell_count();

  std::vector<Eigen::Index> stride(ndim, 1);
  for (std::size_t d = ndim - 1; d-- > 0;) stride[d] = stride[d + 1] * shape_[d + 1];

  cells_ = Eigen::ArrayXd::Ones(cells);

  // Zero targets zero their whole slice up front so no scaling step ever
  // meets a 0/0 factor.
  for (std::size_t d = 0; d < ndim; ++d) {
    for (Eigen::Index k = 0; k < shape_[d]; ++k) {
      if (targets_[d][k] != 0.0) continue;
      for (Eigen::Index i = 0; i < cells; ++i) {
        if ((i / stride[d]) % shape_[d] == k) cells_[i] = 0.0;
      }
    }
  }
  double support = cells_.sum();
  if (support <= 0.0) throw DomainError("ipf: zero-target pattern empties the support");
  cells_ /= support;

  IpfReport report;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    for (std::size_t d = 0; d < ndim; ++d) {
      Eigen::VectorXd marg = marginal(d);
      Eigen::ArrayXd scale(shape_[d]);
      for (Eigen::Index k = 0; k < shape_[d]; ++k) {
        if (targets_[d][k] == 0.0) {
          scale[k] = 0.0;
        } else if (marg[k] <= 0.0) {
          throw DomainError("ipf: infeasible zero pattern (positive target over empty slice)");
        } else {
          scale[k] = targets_[d][k] / marg[k];
        }
      }
      for (Eigen::Index i = 0; i < cells; ++i) {
        cells_[i] *= scale[(i / stride[d]) % shape_[d]];
      }
    }
    report.iterations = iter;
    report.max_gap = 0.0;
    for (std::size_t d = 0; d < ndim; ++d) {
      double gap = (marginal(d) - targets_[d]).lpNorm<Eigen::Infinity>();
      report.max_gap = std::max(report.max_gap, gap);
    }
    if (report.max_gap < config.epsilon) {
      report.converged = true;
      break;
    }
  }
  report_ = report;
}

void JointDistribution::fit_factored(const IpfConfig& config) {
  const std::size_t ndim = shape_.size();

  factors_.clear();
  double support = 1.0;
  for (std::size_t d = 0; d < ndim; ++d) {
    Eigen::ArrayXd f = Eigen::ArrayXd::Ones(shape_[d]);
    for (Eigen::Index k = 0; k < shape_[d]; ++k) {
      if (targets_[d][k] == 0.0) f[k] = 0.0;
    }
    if (f.sum() <= 0.0) throw DomainError("ipf: zero-target pattern empties the support");
    support *= f.sum();
    factors_.push_back(std::move(f));
  }
  // Normalize total mass to 1 across the product.
  factors_[0] /= support;

  IpfReport report;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    for (std::size_t d = 0; d < ndim; ++d) {
      double rest = 1.0;
      for (std::size_t e = 0; e < ndim; ++e) {
        if (e != d) rest *= factors_[e].sum();
      }
      if (rest <= 0.0) throw DomainError("ipf: infeasible zero pattern in factored fit");
      for (Eigen::Index k = 0; k < shape_[d]; ++k) {
        if (targets_[d][k] == 0.0) {
          factors_[d][k] = 0.0;
        } else {
          double marg = factors_[d][k] * rest;
          if (marg <= 0.0) {
            throw DomainError("ipf: infeasible zero pattern (positive target over empty slice)");
          }
          factors_[d][k] *= targets_[d][k] / marg;
        }
      }
    }
    report.iterations = iter;
    report.max_gap = 0.0;
    for (std::size_t d = 0; d < ndim; ++d) {
      double gap = (marginal(d) - targets_[d]).lpNorm<Eigen::Infinity>();
      report.max_gap = std::max(report.max_gap, gap);
    }
    if (report.max_gap < config.epsilon) {
      report.converged = true;
      break;
    }
  }
  report_ = report;
}

JointDistribution ipf_fit(const std::vector<Eigen::VectorXd>& targets,
                          const std::vector<std::string>& dimension_names,
                          const IpfConfig& config) {
  config.validate();
  check_targets(targets);
  if (!dimension_names.empty() && dimension_names.size() != targets.size()) {
    throw DomainError("ipf: dimension name count does not match target count");
  }

  JointDistribution joint;
  joint.targets_ = targets;
  joint.dimensions_ = dimension_names;
  if (joint.dimensions_.empty()) {
    for (std::size_t d = 0; d < targets.size(); ++d) {
      joint.dimensions_.push_back("dim" + std::to_string(d));
    }
  }
  for (const auto& t : targets) joint.shape_.push_back(t.size());
  if (joint.categories_.empty()) {
    for (const auto& t : targets) {
      std::vector<std::string> labels;
      for (Eigen::Index i = 0; i < t.size(); ++i) labels.push_back("c" + std::to_string(i));
      joint.categories_.push_back(std::move(labels));
    }
  }

  bool too_large = false;
  Eigen::Index cells = 1;
  for (Eigen::Index s : joint.shape_) {
    if (cells > kDenseCellLimit / s) {
      too_large = true;
      break;
    }
    cells *= s;
  }

  if (too_large) {
    joint.storage_ = JointDistribution::Storage::kFactored;
    joint.fit_factored(config);
  } else {
    joint.storage_ = JointDistribution::Storage::kDense;
    joint.fit_dense(config);
  }
  return joint;
}

JointDistribution ipf_fit(const std::vector<census::MarginalTable>& targets,
                          const IpfConfig& config) {
  std::vector<Eigen::VectorXd> probs;
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> labels;
  for (const auto& table : targets) {
    table.validate();
    if (table.total <= 0) {
      throw DomainError("ipf: marginal '" + table.dimension_name + "' has zero total");
    }
    Eigen::VectorXd p(static_cast<Eigen::Index>(table.counts.size()));
    for (std::size_t i = 0; i < table.counts.size(); ++i) {
      p[static_cast<Eigen::Index>(i)] =
          static_cast<double>(table.counts[i]) / static_cast<double>(table.total);
    }
    // Integer division leaves a representable remainder; pin the sum to 1.
    p /= p.sum();
    probs.push_back(std::move(p));
    names.push_back(table.dimension_name);
    labels.push_back(table.categories);
  }
  JointDistribution joint = ipf_fit(probs, names, config);
  joint.categories_ = std::move(labels);
  return joint;
}

}  // namespace communitypoll::synth
