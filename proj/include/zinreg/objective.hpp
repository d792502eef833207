#pragma once

// Flat parameter vector for the penalized ZIN likelihood and its analytic
// derivatives. Layout: [binary coefficients | mean coefficients | deltas],
// with sigma2 appended as the last coordinate of gradients and Hessians.

#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zinreg/zin_core.hpp"

namespace zinreg {

struct ParameterBlock {
  std::string name;
  Eigen::Index offset = 0;  // absolute index into the parameter vector
  Eigen::Index size = 0;
};

struct ParameterLayout {
  Eigen::Index binary_size = 0;  // intercept + parametric + retained h blocks
  Eigen::Index mean_size = 0;    // intercept + parametric + retained s blocks
  std::vector<ParameterBlock> binary_smooths;
  std::vector<ParameterBlock> mean_smooths;
  std::map<std::string, Eigen::Index> deltas;
  std::set<std::string> eliminated_binary;
  std::set<std::string> eliminated_mean;
  std::vector<std::string> names;  // one per coordinate, "sigma2" last

  static ParameterLayout build(const ModelStructure& structure,
                               const std::set<std::string>& eliminated_binary,
                               const std::set<std::string>& eliminated_mean);

  Eigen::Index size() const {
    return binary_size + mean_size + static_cast<Eigen::Index>(deltas.size());
  }
  Eigen::Index mean_offset() const { return binary_size; }
  Eigen::Index sigma2_index() const { return size(); }
  const ParameterBlock* find(Part part, const std::string& name) const;

  Eigen::VectorXd pack(const ZinParams& params, const ModelStructure& structure) const;
  ZinParams unpack(const Eigen::VectorXd& psi, double sigma2,
                   const ModelStructure& structure) const;
};

class JointObjective {
 public:
  JointObjective(const ModelStructure& structure, ParameterLayout layout, const Dataset& data,
                 const SmoothingParams& smoothing);

  const ParameterLayout& layout() const { return layout_; }
  Eigen::Index size() const { return layout_.size(); }

  double loglik(const Eigen::VectorXd& psi, double sigma2) const;
  double penalty(const Eigen::VectorXd& psi) const;
  /// Bernoulli log-likelihood of the zero indicator alone.
  double binary_loglik(const Eigen::VectorXd& psi) const;
  double value(const Eigen::VectorXd& psi, double sigma2) const {
    return loglik(psi, sigma2) - penalty(psi);
  }
  /// Length size() + 1; last entry is d/d sigma2.
  Eigen::VectorXd gradient(const Eigen::VectorXd& psi, double sigma2) const;
  /// Hessian over (psi, sigma2); `penalized = false` drops the penalty curvature.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& psi, double sigma2, bool penalized = true) const;

  /// RSS / n+ : maximizer over sigma2 for fixed psi.
  double profile_sigma2(const Eigen::VectorXd& psi) const;
  double profile_value(const Eigen::VectorXd& psi) const;
  Eigen::VectorXd profile_gradient(const Eigen::VectorXd& psi) const;
  Eigen::MatrixXd profile_hessian(const Eigen::VectorXd& psi) const;

  /// max |design column| per coordinate (>= 1), used to scale convergence checks.
  Eigen::VectorXd column_scale(const Eigen::VectorXd& psi) const;

  std::size_t n() const { return y_.size(); }
  std::size_t n_nonzero() const { return n_pos_; }

 private:
  struct Penalized {
    Eigen::Index offset;
    Eigen::Index size;
    double weight;  // squared smoothing parameter
    Eigen::MatrixXd s;
  };
  struct Constrained {
    Eigen::Index offset;  // absolute offset of the shared s block
    Eigen::Index size;
    Eigen::Index delta;   // absolute index of delta
    Eigen::Index mean_col;  // first column in xm_
    double lambda2;
    Eigen::MatrixXd s;
  };

  void predictors(const Eigen::VectorXd& psi, Eigen::VectorXd& eta, Eigen::VectorXd& mu) const;
  void binary_derivs(const Eigen::VectorXd& eta, Eigen::VectorXd& u, Eigen::VectorXd& v) const;

  Link link_;
  double clamp_;
  ParameterLayout layout_;
  Eigen::MatrixXd xb_;
  Eigen::MatrixXd xm_;
  Eigen::VectorXd y_;
  Eigen::VectorXd e_;  // nonzero indicator as 0/1
  std::size_t n_pos_ = 0;
  std::vector<Penalized> penalized_;
  std::vector<Constrained> constrained_;
};

/// First and second derivative of the Bernoulli log-likelihood with respect
/// to the linear predictor, for outcome e in {0, 1}.
void bernoulli_eta_derivs(Link link, double eta, double e, double& u, double& v);

}  // namespace zinreg
