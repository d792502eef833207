#include "zinreg/spline_basis.hpp"

#include <algorithm>
#include <cmath>

#include "zinreg/error.hpp"

namespace zinreg {

SplineBasis::SplineBasis(KnotSet knot_set) : knot_set_(std::move(knot_set)) {}

double sorted_quantile(std::span<const double> sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

KnotSet place_knots(std::span<const double> values, int n_knots) {
  if (values.empty()) {
    throw Error(ErrorCode::DegenerateCovariate, "no covariate values");
  }
  if (n_knots < 0) {
    throw Error(ErrorCode::InvalidSpec, "negative knot count");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> uniq(sorted);
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (static_cast<int>(uniq.size()) < n_knots + 2) {
    throw Error(ErrorCode::DegenerateCovariate,
                std::to_string(uniq.size()) + " distinct values cannot support " +
                    std::to_string(n_knots) + " knots; use a parametric term");
  }

  KnotSet ks;
  ks.domain_lo = sorted.front();
  ks.domain_hi = sorted.back();
  for (int q = 1; q <= n_knots; ++q) {
    const double k = sorted_quantile(sorted, static_cast<double>(q) / (n_knots + 1));
    // A knot at the upper end has an identically zero basis column.
    if (k >= ks.domain_hi || (!ks.knots.empty() && k <= ks.knots.back())) {
      ++ks.collapsed;
      continue;
    }
    ks.knots.push_back(k);
  }
  return ks;
}

Eigen::VectorXd eval_basis(double x, const SplineBasis& basis) {
  Eigen::VectorXd b(basis.dim());
  b[0] = 1.0;
  b[1] = x;
  const auto& knots = basis.knots();
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const double u = x - knots[j];
    b[static_cast<Eigen::Index>(j) + 2] = u > 0.0 ? u * u * u : 0.0;
  }
  return b;
}

Eigen::VectorXd eval_basis_second_derivative(double x, const SplineBasis& basis) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(basis.dim());
  const auto& knots = basis.knots();
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const double u = x - knots[j];
    b[static_cast<Eigen::Index>(j) + 2] = u > 0.0 ? 6.0 * u : 0.0;
  }
  return b;
}

PenaltyMatrix penalty_matrix(const SplineBasis& basis) {
  const auto& knots = basis.knots();
  const double hi = basis.knot_set().domain_hi;
  PenaltyMatrix pm;
  pm.s = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
  for (std::size_t j = 0; j < knots.size(); ++j) {
    for (std::size_t k = j; k < knots.size(); ++k) {
      // knots[j] <= knots[k]; substitute u = x - knots[k] on [0, len].
      const double len = hi - knots[k];
      if (len <= 0.0) continue;
      const double gap = knots[k] - knots[j];
      const double v = 36.0 * (len * len * len / 3.0 + gap * len * len / 2.0);
      const auto r = static_cast<Eigen::Index>(j) + 2;
      const auto c = static_cast<Eigen::Index>(k) + 2;
      pm.s(r, c) = v;
      pm.s(c, r) = v;
    }
  }
  return pm;
}

PenaltyMatrix shrink_penalty(const PenaltyMatrix& pm, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::InvalidEpsilon, "shrinkage must be positive, got " +
                                               std::to_string(epsilon));
  }
  PenaltyMatrix out = pm;
  out.s.diagonal().array() += epsilon;
  out.epsilon = pm.epsilon + epsilon;
  return out;
}

double default_shrinkage(const PenaltyMatrix& pm, double relative) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pm.s, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > 1e-10 * top && ev[i] > 0.0) {
      sum += ev[i];
      ++count;
    }
  }
  if (count == 0) return relative;
  return relative * sum / count;
}

double centering_constant(const SplineBasis& basis, const Eigen::VectorXd& theta,
                          std::span<const double> values) {
  if (theta.size() != basis.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "theta length does not match basis");
  }
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double x : values) total += eval_basis(x, basis).dot(theta);
  return total / static_cast<double>(values.size());
}

}  // namespace zinreg
