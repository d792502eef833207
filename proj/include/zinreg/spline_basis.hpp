#pragma once

// Truncated-power cubic regression splines:
//   f(x) = t0 + t1 x + sum_j t_{j+1} (x - k_j)^3_+
// with the integrated squared second derivative as roughness penalty and an
// optional ridge term (S + eps I) that lets a smooth shrink to exactly zero.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace zinreg {

struct KnotSet {
  std::vector<double> knots;  // strictly increasing, inside [domain_lo, domain_hi)
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  int collapsed = 0;  // requested knots dropped because quantiles coincided
};

class SplineBasis {
 public:
  SplineBasis() = default;
  explicit SplineBasis(KnotSet knot_set);

  const KnotSet& knot_set() const { return knot_set_; }
  const std::vector<double>& knots() const { return knot_set_.knots; }
  int dim() const { return static_cast<int>(knot_set_.knots.size()) + 2; }

 private:
  KnotSet knot_set_;
};

struct PenaltyMatrix {
  Eigen::MatrixXd s;
  double epsilon = 0.0;
};

/// Interior knots at the q/(n_knots+1) empirical quantiles of `values`
/// (linear interpolation between order statistics). Throws
/// DegenerateCovariate when fewer than n_knots + 2 distinct values exist.
KnotSet place_knots(std::span<const double> values, int n_knots);

/// Linear-interpolation quantile of an already sorted sample.
double sorted_quantile(std::span<const double> sorted, double q);

Eigen::VectorXd eval_basis(double x, const SplineBasis& basis);

/// Second derivative of every basis function at x (used by tests and the
/// roughness checks).
Eigen::VectorXd eval_basis_second_derivative(double x, const SplineBasis& basis);

/// Closed-form roughness penalty over [domain_lo, domain_hi]:
///   S(j+2, k+2) = 36 * integral (x - k_j)_+ (x - k_k)_+ dx.
PenaltyMatrix penalty_matrix(const SplineBasis& basis);

PenaltyMatrix shrink_penalty(const PenaltyMatrix& pm, double epsilon);

/// relative * mean of the nonzero eigenvalues of S; falls back to `relative`
/// when S has no positive eigenvalues (no interior knots).
double default_shrinkage(const PenaltyMatrix& pm, double relative = 1e-3);

double centering_constant(const SplineBasis& basis, const Eigen::VectorXd& theta,
                          std::span<const double> values);

}  // namespace zinreg
