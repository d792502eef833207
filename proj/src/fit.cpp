#include "zinreg/fit.hpp"

#include <cmath>
#include <limits>

#include "zinreg/error.hpp"

namespace zinreg {

const SmoothTerm* FittedZinModel::term(Part part, const std::string& name) const {
  for (const auto& t : smooth_terms) {
    if (t.part == part && t.name == name) return &t;
  }
  return nullptr;
}

namespace {

void check_counts(const Dataset& data) {
  const std::size_t pos = data.count_nonzero();
  if (pos == data.size()) throw Error(ErrorCode::NoZeroObservations, "response has no zeros");
  if (pos == 0) throw Error(ErrorCode::NoNonzeroObservations, "response is identically zero");
}

std::set<std::string> eliminated(const std::map<std::string, double>& edf,
                                 const std::set<std::string>& at_max, double cutoff) {
  std::set<std::string> out;
  for (const auto& name : at_max) {
    auto it = edf.find(name);
    if (it != edf.end() && it->second < cutoff) out.insert(name);
  }
  return out;
}

double scaled_norm(const Eigen::VectorXd& g, const Eigen::VectorXd& scale) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) m = std::max(m, std::abs(g[j]) / scale[j]);
  return m;
}

InformationMatrix information_at(const JointObjective& obj, const Eigen::VectorXd& psi,
                                 double sigma2) {
  InformationMatrix info;
  Eigen::MatrixXd h = -obj.hessian(psi, sigma2, true);
  info.matrix = 0.5 * (h + h.transpose());
  const Eigen::Index m = info.matrix.rows();
  Eigen::VectorXd d(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double v = std::abs(info.matrix(j, j));
    d[j] = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
  }
  const Eigen::MatrixXd scaled = d.asDiagonal() * info.matrix * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  info.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  info.singular = !(info.condition <= 1e12);
  return info;
}

void finalize(FittedZinModel& m, const JointObjective& obj, const Eigen::VectorXd& psi,
              double sigma2) {
  const ParameterLayout& l = m.layout;
  const Eigen::Index q = l.size();
  m.params = l.unpack(psi, sigma2, m.structure);
  m.loglik = obj.loglik(psi, sigma2);
  m.penalized_loglik = m.loglik - obj.penalty(psi);
  m.fisher = information_at(obj, psi, sigma2);
  if (m.fisher.singular) m.warnings.push_back("observed information is near singular");
  m.covariance = solve_spd(m.fisher.matrix, Eigen::MatrixXd::Identity(q + 1, q + 1));

  const Eigen::MatrixXd unpen = -obj.hessian(psi, sigma2, false).topLeftCorner(q, q);
  const Eigen::MatrixXd f = solve_spd(m.fisher.matrix.topLeftCorner(q, q), unpen);
  m.edf = f.diagonal();
  m.binary_edf_total = m.edf.head(l.binary_size).sum();
  for (const auto& [name, idx] : l.deltas) m.binary_edf_total += m.edf[idx];
  m.mean_edf_total = m.edf.segment(l.mean_offset(), l.mean_size).sum();

  const Eigen::VectorXd scale = obj.column_scale(psi);
  m.gradient_norm = scaled_norm(obj.profile_gradient(psi), scale);
  m.n = obj.n();
  m.n_nonzero = obj.n_nonzero();

  auto block_edf = [&](const ParameterBlock* b) {
    return b ? m.edf.segment(b->offset, b->size).sum() : 0.0;
  };
  m.smooth_terms.clear();
  for (const auto& sc : m.structure.mean.smooths) {
    SmoothTerm t;
    t.name = sc.covariate;
    t.part = Part::Mean;
    t.basis = sc.basis;
    t.penalty = sc.penalty;
    t.theta = m.params.smooths_s.at(sc.covariate);
    t.smoothing_param = m.smoothing.phi.at(sc.covariate);
    t.eliminated = l.eliminated_mean.contains(sc.covariate);
    t.edf = block_edf(l.find(Part::Mean, sc.covariate));
    t.centering = sc.centering(t.theta);
    m.smooth_terms.push_back(std::move(t));
  }
  for (const auto& sc : m.structure.binary.smooths) {
    SmoothTerm t;
    t.name = sc.covariate;
    t.part = Part::Binary;
    t.basis = sc.basis;
    t.penalty = sc.penalty;
    t.smoothing_param = m.smoothing.lambda.at(sc.covariate);
    if (m.structure.constrained(sc.covariate)) {
      t.constrained = true;
      t.eliminated = l.eliminated_mean.contains(sc.covariate);
      t.theta = m.params.deltas.at(sc.covariate) * m.params.smooths_s.at(sc.covariate);
      // Same shape as the mean-part smooth.
      t.edf = block_edf(l.find(Part::Mean, sc.covariate));
    } else {
      t.eliminated = l.eliminated_binary.contains(sc.covariate);
      t.theta = m.params.smooths_h.at(sc.covariate);
      t.edf = block_edf(l.find(Part::Binary, sc.covariate));
    }
    t.centering = sc.centering(t.theta);
    m.smooth_terms.push_back(std::move(t));
  }
}

NewtonResult polish(const JointObjective& obj, const Eigen::VectorXd& psi,
                    const FitOptions& options) {
  SmoothObjective f{[&](const Eigen::VectorXd& x) { return obj.profile_value(x); },
                    [&](const Eigen::VectorXd& x) { return obj.profile_gradient(x); },
                    [&](const Eigen::VectorXd& x) { return obj.profile_hessian(x); }};
  return maximize_newton(f, psi, obj.column_scale(psi),
                         NewtonOptions{options.tolerance, options.max_iterations, 30});
}

double binary_gcv(const JointObjective& obj, const ParameterLayout& l, const Eigen::VectorXd& psi) {
  const Eigen::Index q = l.size();
  const double s2 = obj.profile_sigma2(psi);
  const Eigen::MatrixXd pen = -obj.hessian(psi, s2, true).topLeftCorner(q, q);
  const Eigen::MatrixXd unpen = -obj.hessian(psi, s2, false).topLeftCorner(q, q);
  const Eigen::MatrixXd f = solve_spd(pen, unpen);
  double trace = f.diagonal().head(l.binary_size).sum();
  for (const auto& [name, idx] : l.deltas) trace += f(idx, idx);
  const double n = static_cast<double>(obj.n());
  const double denom = n - trace;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return n * (-2.0 * obj.binary_loglik(psi)) / (denom * denom);
}

/// Coordinate-wise GCV over the lambdas of constrained terms; returns the
/// coefficients at the chosen values.
Eigen::VectorXd select_constrained_lambda(FittedZinModel& m, const Dataset& data,
                                          Eigen::VectorXd psi, const FitOptions& options) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> grids;
  for (const auto& [name, idx] : m.layout.deltas) {
    names.push_back(name);
    auto it = m.selection.binary_scale.find(name);
    grids.push_back(smoothing_grid(
        it != m.selection.binary_scale.end() ? it->second : m.smoothing.lambda.at(name), options));
  }
  const int sweeps = names.size() > 1 ? options.sweeps : 1;
  Eigen::VectorXd best_psi = psi;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = grids[j].size() - 1;
      Eigen::VectorXd warm = best_psi;
      for (std::size_t k = 0; k < grids[j].size(); ++k) {
        m.smoothing.lambda[names[j]] = grids[j][k];
        const JointObjective obj(m.structure, m.layout, data, m.smoothing);
        const NewtonResult r = polish(obj, warm, options);
        // delta can run off to infinity while theta_s shrinks; such lambdas are not candidates
        if (!r.converged) continue;
        warm = r.x;
        const double score = binary_gcv(obj, m.layout, r.x);
        if (!std::isfinite(score)) continue;
        if (!std::isfinite(best) || score <= best + 1e-12 * std::abs(best)) {
          best = std::min(best, score);
          best_k = k;
          best_psi = r.x;
        }
      }
      m.smoothing.lambda[names[j]] = grids[j][best_k];
      m.selection.binary[names[j]] = grids[j][best_k];
      if (best_k + 1 == grids[j].size()) {
        m.selection.binary_at_max.insert(names[j]);
      } else {
        m.selection.binary_at_max.erase(names[j]);
      }
    }
  }
  return best_psi;
}

}  // namespace

FittedZinModel fit_unconstrained(const Dataset& data, const ModelSpec& spec,
                                 const FitOptions& options) {
  if (!spec.constraint.empty()) {
    throw Error(ErrorCode::InvalidSpec, "fit_unconstrained called with a constraint set");
  }
  spec.validate(data);
  check_counts(data);

  FittedZinModel m;
  m.structure = ModelStructure::build(spec, data);
  m.warnings = m.structure.warnings;
  m.selection = options.fixed_smoothing ? *options.fixed_smoothing
                                        : select_smoothing(m.structure, data, options);
  const auto elim_b =
      eliminated(m.selection.binary_edf, m.selection.binary_at_max, options.eliminate_edf);
  const auto elim_m =
      eliminated(m.selection.mean_edf, m.selection.mean_at_max, options.eliminate_edf);
  const NewtonOptions newton{options.tolerance, options.max_iterations, 30};

  // Binary part.
  const PartDesign bd = binary_design(m.structure, data, elim_b);
  Eigen::VectorXd e(bd.x.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    e[i] = data.nonzero(static_cast<std::size_t>(i)) ? 1.0 : 0.0;
  }
  std::vector<double> wb;
  for (const auto& name : bd.smooth_names) wb.push_back(std::pow(m.selection.binary.at(name), 2));
  PenalizedBinary prob(spec.link, bd.x, e, spec.clamp);
  prob.set_penalty(bd.penalty(wb));
  Eigen::VectorXd start = Eigen::VectorXd::Zero(bd.x.cols());
  start[0] = apply_link(spec.link, e.mean());
  const NewtonResult br = prob.fit(start, newton);

  // Mean part on the nonzero responses.
  const PartDesign md = mean_design(m.structure, data, elim_m);
  Eigen::VectorXd y(md.x.rows());
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.nonzero(i)) y[at++] = data.y[i];
  }
  std::vector<double> wm;
  for (const auto& name : md.smooth_names) wm.push_back(std::pow(m.selection.mean.at(name), 2));
  const GaussianSolve gs = solve_penalized_ls(md.x.transpose() * md.x, md.x.transpose() * y,
                                              y.squaredNorm(), md.penalty(wm));
  const double sigma = std::sqrt(gs.rss / static_cast<double>(y.size()));

  m.smoothing.lambda = m.selection.binary;
  for (const auto& [name, t] : m.selection.mean) m.smoothing.phi[name] = sigma > 0.0 ? t / sigma : t;

  m.layout = ParameterLayout::build(m.structure, elim_b, elim_m);
  Eigen::VectorXd psi(m.layout.size());
  psi << br.x, gs.beta;
  const JointObjective obj(m.structure, m.layout, data, m.smoothing);
  const NewtonResult pr = polish(obj, psi, options);

  m.converged = br.converged && pr.converged;
  m.iterations = br.iterations + pr.iterations;
  m.ascent_trace = pr.trace;
  finalize(m, obj, pr.x, obj.profile_sigma2(pr.x));
  if (!m.converged) m.warnings.push_back("fit did not converge");
  return m;
}

FittedZinModel fit_constrained(const Dataset& data, const ModelSpec& spec,
                               const FitOptions& options, const FittedZinModel* unconstrained) {
  if (spec.constraint.empty()) return fit_unconstrained(data, spec, options);
  spec.validate(data);
  check_counts(data);

  FittedZinModel local;
  if (unconstrained == nullptr) {
    local = fit_unconstrained(data, spec.without_constraint(), options);
    unconstrained = &local;
  }
  const FittedZinModel& unc = *unconstrained;

  FittedZinModel m;
  m.structure = ModelStructure::build(spec, data);
  m.warnings = m.structure.warnings;
  m.selection = unc.selection;
  m.smoothing = unc.smoothing;
  std::set<std::string> elim_b;
  for (const auto& name : unc.layout.eliminated_binary) {
    if (!m.structure.constrained(name)) elim_b.insert(name);
  }
  const std::set<std::string> elim_m = unc.layout.eliminated_mean;
  m.layout = ParameterLayout::build(m.structure, elim_b, elim_m);

  ZinParams p = ZinParams::zeros(m.structure);
  p.beta0 = unc.params.beta0;
  p.beta = unc.params.beta;
  p.gamma0 = unc.params.gamma0;
  p.gamma = unc.params.gamma;
  p.sigma2 = unc.params.sigma2;
  for (auto& [name, theta] : p.smooths_h) theta = unc.params.smooths_h.at(name);
  for (auto& [name, theta] : p.smooths_s) theta = unc.params.smooths_s.at(name);
  for (const auto& name : spec.constraint.terms) {
    if (elim_m.contains(name)) {
      m.undefined_deltas.insert(name);
      m.warnings.push_back("delta for '" + name + "' is unidentified: smooth eliminated");
      continue;
    }
    if (auto it = spec.constraint.initial_deltas.find(name);
        it != spec.constraint.initial_deltas.end()) {
      p.deltas[name] = it->second;
      continue;
    }
    // Least squares through the origin of h-hat on s-hat over a grid.
    const SmoothComponent* sb = m.structure.binary.find(name);
    const SmoothComponent* sm = m.structure.mean.find(name);
    const double lo = sm->basis.knot_set().domain_lo;
    const double hi = sm->basis.knot_set().domain_hi;
    const Eigen::VectorXd& th = unc.params.smooths_h.at(name);
    const Eigen::VectorXd& ts = unc.params.smooths_s.at(name);
    double sh = 0.0;
    double ss = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double x = lo + (hi - lo) * k / 199.0;
      const double hv = sb->value(x, th);
      const double sv = sm->value(x, ts);
      sh += hv * sv;
      ss += sv * sv;
    }
    p.deltas[name] = ss > 0.0 ? sh / ss : 0.0;
  }

  Eigen::VectorXd psi0 = m.layout.pack(p, m.structure);
  if (options.select_constrained && !m.layout.deltas.empty()) {
    psi0 = select_constrained_lambda(m, data, psi0, options);
  }
  const JointObjective obj(m.structure, m.layout, data, m.smoothing);
  const NewtonResult r = polish(obj, psi0, options);
  m.converged = r.converged;
  m.iterations = r.iterations;
  m.ascent_trace = r.trace;
  finalize(m, obj, r.x, obj.profile_sigma2(r.x));
  if (!m.converged) m.warnings.push_back("fit did not converge");
  return m;
}

FittedZinModel fit_model(const Dataset& data, const ModelSpec& spec, const FitOptions& options) {
  return spec.constraint.empty() ? fit_unconstrained(data, spec, options)
                                 : fit_constrained(data, spec, options);
}

InformationMatrix observed_information(const FittedZinModel& model, const Dataset& data) {
  const JointObjective obj(model.structure, model.layout, data, model.smoothing);
  return information_at(obj, model.psi(), model.params.sigma2);
}

}  // namespace zinreg
