#pragma once

// Independent numerical oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "zinreg/dataset.hpp"
#include "zinreg/fit.hpp"

namespace zinreg::testing {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Central-difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double rel = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Central differences of an analytic gradient, symmetrized.
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g, const Eigen::VectorXd& x,
    double rel = 1e-6) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = rel * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    a[i] += step;
    b[i] -= step;
    h.col(i) = (g(a) - g(b)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

inline double max_rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Small zero-inflated sample with one factor and two smooth covariates.
inline Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);
  Dataset d;
  FactorColumn g;
  g.levels = {"a", "b"};
  std::vector<double> u(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = unif(rng);
    v[i] = unif(rng);
    g.codes.push_back(unif(rng) < 0.5 ? 0 : 1);
  }
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = -0.2 + 0.6 * g.codes[i] + std::sin(2.0 * std::numbers::pi * u[i]);
    const double p = 1.0 / (1.0 + std::exp(-eta));
    const double mu = 1.0 + 0.5 * g.codes[i] + 2.0 * (u[i] - 0.5) * (u[i] - 0.5) + v[i];
    const bool pos = unif(rng) < p;
    const double noise = norm(rng);
    d.y[i] = pos ? mu + 0.3 * noise : 0.0;
  }
  d.factors["g"] = g;
  d.continuous["u"] = u;
  d.continuous["v"] = v;
  return d;
}

/// [intercept | parametric | kept smooths] from a fitted structure.
inline Eigen::MatrixXd oracle_design(const FittedZinModel& m, Part part, const Dataset& d) {
  const PartStructure& ps = m.structure.part(part);
  const auto& blocks = part == Part::Binary ? m.layout.binary_smooths : m.layout.mean_smooths;
  Eigen::MatrixXd x = ps.parametric_design(d);
  for (const auto& b : blocks) {
    const Eigen::MatrixXd s = ps.find(b.name)->design(d.column(b.name));
    Eigen::MatrixXd wider(x.rows(), x.cols() + s.cols());
    wider << x, s;
    x = wider;
  }
  return x;
}

inline Eigen::MatrixXd oracle_penalty(const FittedZinModel& m, Part part, Eigen::Index cols) {
  const PartStructure& ps = m.structure.part(part);
  const auto& blocks = part == Part::Binary ? m.layout.binary_smooths : m.layout.mean_smooths;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(cols, cols);
  Eigen::Index at = cols;
  for (const auto& b : blocks) at -= b.size;
  for (const auto& b : blocks) {
    const double w = part == Part::Binary ? m.smoothing.lambda.at(b.name) : m.smoothing.phi.at(b.name);
    p.block(at, at, b.size, b.size) = w * w * ps.find(b.name)->penalty_block();
    at += b.size;
  }
  return p;
}

struct FactorizedFit {
  Eigen::VectorXd beta;   // binary coefficients
  Eigen::VectorXd gamma;  // mean coefficients
  double sigma2 = 0.0;
};

/// Refits an unconstrained logit model part by part at its smoothing
/// parameters: Newton iterations for the penalized logistic regression and
/// a fixed point in sigma2 for the penalized least squares.
inline FactorizedFit factorized_refit(const FittedZinModel& m, const Dataset& data) {
  FactorizedFit out;
  const Eigen::MatrixXd xb = oracle_design(m, Part::Binary, data);
  const Eigen::MatrixXd pb = oracle_penalty(m, Part::Binary, xb.cols());
  Eigen::VectorXd e(xb.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = data.y[static_cast<std::size_t>(i)] != 0.0 ? 1.0 : 0.0;
  out.beta = Eigen::VectorXd::Zero(xb.cols());
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd p =
        (xb * out.beta).unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
    const Eigen::VectorXd w = p.array() * (1.0 - p.array());
    const Eigen::VectorXd g = xb.transpose() * (e - p) - 2.0 * pb * out.beta;
    const Eigen::MatrixXd h = xb.transpose() * w.asDiagonal() * xb + 2.0 * pb;
    out.beta += h.ldlt().solve(g);
  }

  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.y[i] != 0.0) pos.push_back(i);
  }
  const Dataset dp = data.subset(pos);
  const Eigen::MatrixXd xm = oracle_design(m, Part::Mean, dp);
  const Eigen::MatrixXd pm = oracle_penalty(m, Part::Mean, xm.cols());
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(dp.y.data(), static_cast<Eigen::Index>(dp.y.size()));
  out.sigma2 = 1.0;
  for (int it = 0; it < 500; ++it) {
    out.gamma = (xm.transpose() * xm + 2.0 * out.sigma2 * pm).ldlt().solve(xm.transpose() * y);
    out.sigma2 = (y - xm * out.gamma).squaredNorm() / static_cast<double>(y.size());
  }
  return out;
}

/// Largest coefficient difference between a fit and its factorized refit.
inline double factorization_gap(const FittedZinModel& m, const Dataset& data) {
  const FactorizedFit f = factorized_refit(m, data);
  const Eigen::VectorXd psi = m.psi();
  const double b = (f.beta - psi.head(f.beta.size())).cwiseAbs().maxCoeff();
  const double g = (f.gamma - psi.segment(m.layout.mean_offset(), f.gamma.size())).cwiseAbs().maxCoeff();
  const double s = std::abs(f.sigma2 - m.params.sigma2) / f.sigma2;
  return std::max({b, g, s});
}

}  // namespace zinreg::testing
