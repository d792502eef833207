#include "zinreg/penalized_fit.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "zinreg/error.hpp"
#include "zinreg/objective.hpp"

namespace zinreg {

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index p = a.rows();
  Eigen::VectorXd d(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double v = std::abs(a(j, j));
    d[j] = v > 1e-300 ? 1.0 / std::sqrt(v) : 1.0;
  }
  Eigen::MatrixXd scaled = d.asDiagonal() * a * d.asDiagonal();
  double ridge = 0.0;
  for (int attempt = 0; attempt < 16; ++attempt) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Eigen::VectorXd piv = ldlt.vectorD();
      if (piv.minCoeff() > 1e-14 * std::max(1.0, piv.maxCoeff())) {
        return d.asDiagonal() * ldlt.solve(d.asDiagonal() * b);
      }
    }
    const double next = ridge == 0.0 ? 1e-10 : ridge * 10.0;
    scaled.diagonal().array() += next - ridge;
    ridge = next;
  }
  throw Error(ErrorCode::DomainError, "system is not positive definite");
}

namespace {

double scaled_max(const Eigen::VectorXd& g, const Eigen::VectorXd& scale) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) m = std::max(m, std::abs(g[j]) / scale[j]);
  return m;
}

}  // namespace

NewtonResult maximize_newton(const SmoothObjective& f, Eigen::VectorXd x0,
                             const Eigen::VectorXd& scale, const NewtonOptions& options) {
  NewtonResult res;
  res.x = std::move(x0);
  res.value = f.value(res.x);
  res.trace.push_back(res.value);
  Eigen::VectorXd g = f.gradient(res.x);
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    res.gradient_norm = scaled_max(g, scale);
    if (!std::isfinite(res.gradient_norm)) break;
    if (res.gradient_norm <= options.tolerance) {
      res.converged = true;
      return res;
    }
    const Eigen::MatrixXd h = f.hessian(res.x);
    Eigen::VectorXd step;
    try {
      step = solve_spd(-h, g);
    } catch (const Error&) {
      step = g;
    }

    bool accepted = false;
    double t = 1.0;
    for (int k = 0; k <= options.max_halvings; ++k, t *= 0.5) {
      Eigen::VectorXd trial = res.x + t * step;
      const double v = f.value(trial);
      if (!std::isfinite(v)) continue;
      bool ok = v >= res.value;
      Eigen::VectorXd g_trial;
      if (!ok && k == 0 && v >= res.value - 1e-12 * (1.0 + std::abs(res.value))) {
        // Rounding-level change at the optimum: accept if the gradient shrinks.
        g_trial = f.gradient(trial);
        ok = scaled_max(g_trial, scale) < res.gradient_norm;
      }
      if (ok) {
        res.x = std::move(trial);
        res.value = v;
        g = g_trial.size() > 0 ? g_trial : f.gradient(res.x);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Fallback: diagonally scaled gradient ascent.
      Eigen::VectorXd dir(g.size());
      for (Eigen::Index j = 0; j < g.size(); ++j) {
        const double hj = std::abs(h(j, j));
        dir[j] = g[j] / (hj > 1e-300 ? hj : 1.0);
      }
      t = 1.0;
      for (int k = 0; k <= options.max_halvings; ++k, t *= 0.5) {
        Eigen::VectorXd trial = res.x + t * dir;
        const double v = f.value(trial);
        if (std::isfinite(v) && v > res.value) {
          res.x = std::move(trial);
          res.value = v;
          g = f.gradient(res.x);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
    res.trace.push_back(res.value);
  }
  res.gradient_norm = scaled_max(g, scale);
  res.converged = res.gradient_norm <= options.tolerance;
  return res;
}

PenalizedBinary::PenalizedBinary(Link link, Eigen::MatrixXd x, Eigen::VectorXd e, double clamp)
    : link_(link), x_(std::move(x)), e_(std::move(e)), clamp_(clamp) {
  penalty_ = Eigen::MatrixXd::Zero(x_.cols(), x_.cols());
}

double PenalizedBinary::loglik(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd eta = x_ * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = std::clamp(inverse_link(link_, eta[i]), clamp_, 1.0 - clamp_);
    total += e_[i] > 0.5 ? std::log(p) : std::log1p(-p);
  }
  return total;
}

double PenalizedBinary::value(const Eigen::VectorXd& beta) const {
  return loglik(beta) - beta.dot(penalty_ * beta);
}

Eigen::VectorXd PenalizedBinary::gradient(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd eta = x_ * beta;
  Eigen::VectorXd u(eta.size());
  double v = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) bernoulli_eta_derivs(link_, eta[i], e_[i], u[i], v);
  return x_.transpose() * u - 2.0 * penalty_ * beta;
}

Eigen::MatrixXd PenalizedBinary::information(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd eta = x_ * beta;
  Eigen::VectorXd w(eta.size());
  double u = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    bernoulli_eta_derivs(link_, eta[i], e_[i], u, w[i]);
    w[i] = -w[i];
  }
  return x_.transpose() * w.asDiagonal() * x_;
}

Eigen::MatrixXd PenalizedBinary::hessian(const Eigen::VectorXd& beta) const {
  return -information(beta) - 2.0 * penalty_;
}

Eigen::VectorXd PenalizedBinary::scale() const {
  Eigen::VectorXd s(x_.cols());
  for (Eigen::Index j = 0; j < x_.cols(); ++j) {
    s[j] = std::max(1.0, x_.col(j).cwiseAbs().maxCoeff());
  }
  return s;
}

NewtonResult PenalizedBinary::fit(Eigen::VectorXd start, const NewtonOptions& options) const {
  SmoothObjective f{[this](const Eigen::VectorXd& b) { return value(b); },
                    [this](const Eigen::VectorXd& b) { return gradient(b); },
                    [this](const Eigen::VectorXd& b) { return hessian(b); }};
  return maximize_newton(f, std::move(start), scale(), options);
}

GaussianSolve solve_penalized_ls(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty,
                                 double yty, const Eigen::MatrixXd& penalty) {
  const Eigen::MatrixXd a = xtx + 2.0 * penalty;
  GaussianSolve out;
  Eigen::MatrixXd rhs(xtx.rows(), xtx.cols() + 1);
  rhs.leftCols(xtx.cols()) = xtx;
  rhs.col(xtx.cols()) = xty;
  const Eigen::MatrixXd sol = solve_spd(a, rhs);
  out.beta = sol.col(xtx.cols());
  out.trace = sol.leftCols(xtx.cols()).trace();
  out.rss = std::max(0.0, yty - 2.0 * out.beta.dot(xty) + out.beta.dot(xtx * out.beta));
  return out;
}

Eigen::MatrixXd PartDesign::penalty(const std::vector<double>& weights) const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  for (std::size_t j = 0; j < penalties.size(); ++j) {
    p.block(offsets[j], offsets[j], sizes[j], sizes[j]) = weights[j] * penalties[j];
  }
  return p;
}

namespace {

PartDesign make_design(const PartStructure& part, const Dataset& data,
                       const std::function<bool(const std::string&)>& keep) {
  PartDesign d;
  const Eigen::MatrixXd par = part.parametric_design(data);
  Eigen::Index width = par.cols();
  for (const auto& sc : part.smooths) {
    if (keep(sc.covariate)) width += sc.free_dim();
  }
  d.x.resize(par.rows(), width);
  d.x.leftCols(par.cols()) = par;
  Eigen::Index at = par.cols();
  for (const auto& sc : part.smooths) {
    if (!keep(sc.covariate)) continue;
    d.x.middleCols(at, sc.free_dim()) = sc.design(data.column(sc.covariate));
    d.smooth_names.push_back(sc.covariate);
    d.offsets.push_back(at);
    d.sizes.push_back(sc.free_dim());
    d.penalties.push_back(sc.penalty_block());
    at += sc.free_dim();
  }
  return d;
}

}  // namespace

std::vector<double> smoothing_grid(double scale, const FitOptions& o) {
  if (o.absolute_grid) return *o.absolute_grid;
  std::vector<double> g(static_cast<std::size_t>(o.grid_size));
  const double lo = -std::log10(o.grid_span);
  const double hi = std::log10(o.grid_span);
  for (int k = 0; k < o.grid_size; ++k) {
    const double frac = o.grid_size == 1 ? 0.5 : static_cast<double>(k) / (o.grid_size - 1);
    g[static_cast<std::size_t>(k)] = scale * std::pow(10.0, lo + frac * (hi - lo));
  }
  return g;
}

namespace {

struct Evaluation {
  double score = std::numeric_limits<double>::infinity();
  std::vector<double> edf;
};

std::vector<double> block_edf(const PartDesign& d, const Eigen::MatrixXd& influence) {
  std::vector<double> edf;
  for (std::size_t j = 0; j < d.offsets.size(); ++j) {
    edf.push_back(influence.diagonal().segment(d.offsets[j], d.sizes[j]).sum());
  }
  return edf;
}

double gcv_score(double n, double deviance, double trace) {
  const double denom = n - trace;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return n * deviance / (denom * denom);
}

/// Coordinate-wise grid search; returns the final evaluation.
template <class Eval>
Evaluation coordinate_search(const std::vector<std::vector<double>>& grids, std::vector<double>& t,
                             std::vector<bool>& at_max, int sweeps, Eval&& eval) {
  at_max.assign(grids.size(), false);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t j = 0; j < grids.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = grids[j].size() - 1;
      for (std::size_t k = 0; k < grids[j].size(); ++k) {
        t[j] = grids[j][k];
        const double s = eval(t).score;
        // Near-ties resolve toward the larger (smoother) value.
        if (s <= best + 1e-12 * std::abs(best) || !std::isfinite(best)) {
          if (std::isfinite(s) || !std::isfinite(best)) {
            best = std::min(best, s);
            best_k = k;
          }
        }
      }
      t[j] = grids[j][best_k];
      at_max[j] = best_k + 1 == grids[j].size();
    }
  }
  return eval(t);
}

}  // namespace

PartDesign binary_design(const ModelStructure& structure, const Dataset& data,
                         const std::set<std::string>& drop) {
  return make_design(structure.binary, data, [&](const std::string& name) {
    return !structure.constrained(name) && !drop.contains(name);
  });
}

PartDesign mean_design(const ModelStructure& structure, const Dataset& data,
                       const std::set<std::string>& drop) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.nonzero(i)) rows.push_back(i);
  }
  const Dataset pos = data.subset(rows);
  return make_design(structure.mean, pos,
                     [&](const std::string& name) { return !drop.contains(name); });
}

SmoothingSelection select_smoothing(const ModelStructure& structure, const Dataset& data,
                                    const FitOptions& options) {
  SmoothingSelection sel;
  const NewtonOptions newton{options.tolerance, options.max_iterations, 30};

  // Binary part on all observations.
  {
    const PartDesign d = binary_design(structure, data);
    const auto n = static_cast<double>(data.size());
    Eigen::VectorXd e(d.x.rows());
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = data.nonzero(static_cast<std::size_t>(i)) ? 1.0 : 0.0;
    const double pbar = std::clamp(e.mean(), 1e-6, 1.0 - 1e-6);
    double w0 = pbar * (1.0 - pbar);
    if (structure.spec.link == Link::Probit) {
      const boost::math::normal nd;
      const double dens = boost::math::pdf(nd, boost::math::quantile(nd, pbar));
      w0 = dens * dens / (pbar * (1.0 - pbar));
    }
    PenalizedBinary prob(structure.spec.link, d.x, e, structure.spec.clamp);
    std::vector<std::vector<double>> grids;
    std::vector<double> t;
    for (std::size_t j = 0; j < d.offsets.size(); ++j) {
      const double xs = d.x.middleCols(d.offsets[j], d.sizes[j]).squaredNorm();
      const double scale = std::sqrt(w0 * xs / (2.0 * d.penalties[j].trace()));
      grids.push_back(smoothing_grid(scale, options));
      t.push_back(options.absolute_grid ? grids.back().front() : scale);
      sel.binary_scale[d.smooth_names[j]] = scale;
    }
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(d.x.cols());
    warm[0] = apply_link(structure.spec.link, pbar);
    auto eval = [&](const std::vector<double>& tv) {
      std::vector<double> w2;
      for (double v : tv) w2.push_back(v * v);
      const Eigen::MatrixXd pen = d.penalty(w2);
      prob.set_penalty(pen);
      NewtonResult r = prob.fit(warm, newton);
      if (!r.x.allFinite()) r.x = warm;
      warm = r.x;
      const Eigen::MatrixXd info = prob.information(r.x);
      const Eigen::MatrixXd f = solve_spd(info + 2.0 * pen, info);
      Evaluation ev;
      ev.score = gcv_score(n, -2.0 * prob.loglik(r.x), f.trace());
      ev.edf = block_edf(d, f);
      return ev;
    };
    std::vector<bool> at_max;
    const Evaluation fin = coordinate_search(grids, t, at_max, options.sweeps, eval);
    sel.binary_gcv = fin.score;
    for (std::size_t j = 0; j < t.size(); ++j) {
      sel.binary[d.smooth_names[j]] = t[j];
      sel.binary_edf[d.smooth_names[j]] = fin.edf[j];
      if (at_max[j]) sel.binary_at_max.insert(d.smooth_names[j]);
    }
  }

  // Mean part on nonzero observations, unit-variance working scale.
  {
    const PartDesign d = mean_design(structure, data);
    const auto n = static_cast<double>(d.x.rows());
    std::vector<std::size_t> rows;
    Eigen::VectorXd y(d.x.rows());
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.nonzero(i)) y[at++] = data.y[i];
    }
    const Eigen::MatrixXd xtx = d.x.transpose() * d.x;
    const Eigen::VectorXd xty = d.x.transpose() * y;
    const double yty = y.squaredNorm();
    std::vector<std::vector<double>> grids;
    std::vector<double> t;
    for (std::size_t j = 0; j < d.offsets.size(); ++j) {
      const double xs = d.x.middleCols(d.offsets[j], d.sizes[j]).squaredNorm();
      const double scale = std::sqrt(xs / (2.0 * d.penalties[j].trace()));
      grids.push_back(smoothing_grid(scale, options));
      t.push_back(options.absolute_grid ? grids.back().front() : scale);
      sel.mean_scale[d.smooth_names[j]] = scale;
    }
    auto eval = [&](const std::vector<double>& tv) {
      std::vector<double> w2;
      for (double v : tv) w2.push_back(v * v);
      const Eigen::MatrixXd pen = d.penalty(w2);
      const Eigen::MatrixXd a = xtx + 2.0 * pen;
      const Eigen::MatrixXd f = solve_spd(a, xtx);
      const Eigen::VectorXd beta = solve_spd(a, xty);
      const double rss = std::max(0.0, yty - 2.0 * beta.dot(xty) + beta.dot(xtx * beta));
      Evaluation ev;
      ev.score = gcv_score(n, rss, f.trace());
      ev.edf = block_edf(d, f);
      return ev;
    };
    std::vector<bool> at_max;
    const Evaluation fin = coordinate_search(grids, t, at_max, options.sweeps, eval);
    sel.mean_gcv = fin.score;
    for (std::size_t j = 0; j < t.size(); ++j) {
      sel.mean[d.smooth_names[j]] = t[j];
      sel.mean_edf[d.smooth_names[j]] = fin.edf[j];
      if (at_max[j]) sel.mean_at_max.insert(d.smooth_names[j]);
    }
  }
  return sel;
}

SmoothingSelection select_smoothing(const Dataset& data, const ModelSpec& spec,
                                    const FitOptions& options) {
  const ModelStructure structure = ModelStructure::build(spec.without_constraint(), data);
  return select_smoothing(structure, data, options);
}

}  // namespace zinreg
