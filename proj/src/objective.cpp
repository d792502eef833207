#include "zinreg/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zinreg/error.hpp"

namespace zinreg {

namespace {

double sq(double x) { return x * x; }

double smoothing_weight(const std::map<std::string, double>& m, const std::string& name,
                        std::string_view which) {
  auto it = m.find(name);
  if (it == m.end()) {
    throw Error(ErrorCode::InvalidSpec,
                "missing " + std::string(which) + " smoothing parameter for '" + name + "'");
  }
  if (it->second < 0.0) {
    throw Error(ErrorCode::NegativeSmoothingParameter, std::string(which) + " for '" + name + "'");
  }
  return sq(it->second);
}

}  // namespace

ParameterLayout ParameterLayout::build(const ModelStructure& structure,
                                       const std::set<std::string>& eliminated_binary,
                                       const std::set<std::string>& eliminated_mean) {
  ParameterLayout l;
  l.eliminated_binary = eliminated_binary;
  l.eliminated_mean = eliminated_mean;
  Eigen::Index pos = 0;
  auto add_part = [&](const PartStructure& part, Part which, std::vector<ParameterBlock>& blocks) {
    const std::string tag = std::string(part_name(which)) + ":";
    l.names.push_back(tag + "(Intercept)");
    ++pos;
    for (const auto& pc : part.parametric) {
      l.names.push_back(tag + pc.name);
      ++pos;
    }
    const auto& elim = which == Part::Binary ? eliminated_binary : eliminated_mean;
    for (const auto& sc : part.smooths) {
      if (which == Part::Binary && structure.constrained(sc.covariate)) continue;
      if (elim.contains(sc.covariate)) continue;
      blocks.push_back({sc.covariate, pos, sc.free_dim()});
      for (int k = 1; k <= sc.free_dim(); ++k) {
        l.names.push_back(tag + "s(" + sc.covariate + ")." + std::to_string(k));
      }
      pos += sc.free_dim();
    }
  };
  add_part(structure.binary, Part::Binary, l.binary_smooths);
  l.binary_size = pos;
  add_part(structure.mean, Part::Mean, l.mean_smooths);
  l.mean_size = pos - l.binary_size;
  for (const auto& t : structure.spec.constraint.terms) {
    if (eliminated_mean.contains(t)) continue;
    l.deltas[t] = pos++;
    l.names.push_back("delta:" + t);
  }
  l.names.push_back("sigma2");
  return l;
}

const ParameterBlock* ParameterLayout::find(Part part, const std::string& name) const {
  const auto& blocks = part == Part::Binary ? binary_smooths : mean_smooths;
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

Eigen::VectorXd ParameterLayout::pack(const ZinParams& params,
                                      const ModelStructure& structure) const {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(size());
  auto fill = [&](const PartStructure& part, Eigen::Index start, double intercept,
                  const std::map<std::string, double>& coefs,
                  const std::vector<ParameterBlock>& blocks,
                  const std::map<std::string, Eigen::VectorXd>& thetas) {
    psi[start] = intercept;
    for (std::size_t c = 0; c < part.parametric.size(); ++c) {
      psi[start + 1 + static_cast<Eigen::Index>(c)] = coefs.at(part.parametric[c].name);
    }
    for (const auto& b : blocks) {
      const auto& theta = thetas.at(b.name);
      if (theta.size() != b.size + 1) {
        throw Error(ErrorCode::DimensionMismatch, "smooth '" + b.name + "' size mismatch");
      }
      psi.segment(b.offset, b.size) = theta.tail(b.size);
    }
  };
  fill(structure.binary, 0, params.beta0, params.beta, binary_smooths, params.smooths_h);
  fill(structure.mean, mean_offset(), params.gamma0, params.gamma, mean_smooths, params.smooths_s);
  for (const auto& [name, idx] : deltas) psi[idx] = params.deltas.at(name);
  return psi;
}

ZinParams ParameterLayout::unpack(const Eigen::VectorXd& psi, double sigma2,
                                  const ModelStructure& structure) const {
  if (psi.size() != size()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has wrong length");
  }
  ZinParams p = ZinParams::zeros(structure);
  p.beta0 = psi[0];
  for (std::size_t c = 0; c < structure.binary.parametric.size(); ++c) {
    p.beta[structure.binary.parametric[c].name] = psi[1 + static_cast<Eigen::Index>(c)];
  }
  p.gamma0 = psi[mean_offset()];
  for (std::size_t c = 0; c < structure.mean.parametric.size(); ++c) {
    p.gamma[structure.mean.parametric[c].name] =
        psi[mean_offset() + 1 + static_cast<Eigen::Index>(c)];
  }
  for (const auto& b : binary_smooths) p.smooths_h[b.name].tail(b.size) = psi.segment(b.offset, b.size);
  for (const auto& b : mean_smooths) p.smooths_s[b.name].tail(b.size) = psi.segment(b.offset, b.size);
  for (const auto& [name, idx] : deltas) p.deltas[name] = psi[idx];
  p.sigma2 = sigma2;
  return p;
}

void bernoulli_eta_derivs(Link link, double eta, double e, double& u, double& v) {
  if (link == Link::Logit) {
    const double p = inverse_link(Link::Logit, eta);
    u = e - p;
    v = -p * (1.0 - p);
    return;
  }
  // Probit: ratios of the normal density to the relevant tail probability.
  const double dens = std::exp(-0.5 * eta * eta) / std::sqrt(2.0 * std::numbers::pi);
  if (e > 0.5) {
    const double tail = 0.5 * std::erfc(-eta / std::numbers::sqrt2);
    const double r = tail > 1e-300 ? dens / tail : -eta;
    u = r;
    v = -r * (eta + r);
  } else {
    const double tail = 0.5 * std::erfc(eta / std::numbers::sqrt2);
    const double r = tail > 1e-300 ? dens / tail : eta;
    u = -r;
    v = -r * (r - eta);
  }
}

JointObjective::JointObjective(const ModelStructure& structure, ParameterLayout layout,
                               const Dataset& data, const SmoothingParams& smoothing)
    : link_(structure.spec.link), clamp_(structure.spec.clamp), layout_(std::move(layout)) {
  const auto n = static_cast<Eigen::Index>(data.size());
  y_ = Eigen::Map<const Eigen::VectorXd>(data.y.data(), n);
  e_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) e_[i] = y_[i] != 0.0 ? 1.0 : 0.0;
  n_pos_ = data.count_nonzero();

  auto build = [&](const PartStructure& part, Eigen::Index part_offset, Eigen::Index part_size,
                   const std::vector<ParameterBlock>& blocks, Eigen::MatrixXd& x,
                   const std::map<std::string, double>& weights, std::string_view which) {
    x.resize(n, part_size);
    const Eigen::MatrixXd par = part.parametric_design(data);
    x.leftCols(par.cols()) = par;
    for (const auto& b : blocks) {
      const SmoothComponent* sc = part.find(b.name);
      x.middleCols(b.offset - part_offset, b.size) = sc->design(data.column(b.name));
      penalized_.push_back({b.offset, b.size, smoothing_weight(weights, b.name, which),
                            sc->penalty_block()});
    }
  };
  build(structure.binary, 0, layout_.binary_size, layout_.binary_smooths, xb_, smoothing.lambda,
        "lambda");
  build(structure.mean, layout_.mean_offset(), layout_.mean_size, layout_.mean_smooths, xm_,
        smoothing.phi, "phi");
  for (const auto& [name, idx] : layout_.deltas) {
    const ParameterBlock* b = layout_.find(Part::Mean, name);
    constrained_.push_back({b->offset, b->size, idx, b->offset - layout_.mean_offset(),
                            smoothing_weight(smoothing.lambda, name, "lambda"),
                            structure.mean.find(name)->penalty_block()});
  }
}

void JointObjective::predictors(const Eigen::VectorXd& psi, Eigen::VectorXd& eta,
                                Eigen::VectorXd& mu) const {
  eta.noalias() = xb_ * psi.head(layout_.binary_size);
  mu.noalias() = xm_ * psi.segment(layout_.mean_offset(), layout_.mean_size);
  for (const auto& c : constrained_) {
    eta.noalias() += psi[c.delta] * (xm_.middleCols(c.mean_col, c.size) * psi.segment(c.offset, c.size));
  }
}

void JointObjective::binary_derivs(const Eigen::VectorXd& eta, Eigen::VectorXd& u,
                                   Eigen::VectorXd& v) const {
  u.resize(eta.size());
  v.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) bernoulli_eta_derivs(link_, eta[i], e_[i], u[i], v[i]);
}

double JointObjective::loglik(const Eigen::VectorXd& psi, double sigma2) const {
  Eigen::VectorXd eta, mu;
  predictors(psi, eta, mu);
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    total += zin_log_density(y_[i], inverse_link(link_, eta[i]), mu[i], sigma2, clamp_);
  }
  return total;
}

double JointObjective::binary_loglik(const Eigen::VectorXd& psi) const {
  Eigen::VectorXd eta, mu;
  predictors(psi, eta, mu);
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = std::clamp(inverse_link(link_, eta[i]), clamp_, 1.0 - clamp_);
    total += e_[i] > 0.5 ? std::log(p) : std::log1p(-p);
  }
  return total;
}

double JointObjective::penalty(const Eigen::VectorXd& psi) const {
  double pen = 0.0;
  for (const auto& b : penalized_) {
    const auto theta = psi.segment(b.offset, b.size);
    pen += b.weight * theta.dot(b.s * theta);
  }
  for (const auto& c : constrained_) {
    const auto theta = psi.segment(c.offset, c.size);
    pen += c.lambda2 * sq(psi[c.delta]) * theta.dot(c.s * theta);
  }
  return pen;
}

double JointObjective::profile_sigma2(const Eigen::VectorXd& psi) const {
  const Eigen::VectorXd mu = xm_ * psi.segment(layout_.mean_offset(), layout_.mean_size);
  const double rss = (e_.array() * (y_ - mu).array().square()).sum();
  return rss / static_cast<double>(n_pos_);
}

Eigen::VectorXd JointObjective::gradient(const Eigen::VectorXd& psi, double sigma2) const {
  Eigen::VectorXd eta, mu, u, v;
  predictors(psi, eta, mu);
  binary_derivs(eta, u, v);
  const Eigen::VectorXd r = e_.cwiseProduct(y_ - mu);
  const Eigen::Index q = size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(q + 1);
  g.head(layout_.binary_size).noalias() = xb_.transpose() * u;
  g.segment(layout_.mean_offset(), layout_.mean_size).noalias() = xm_.transpose() * r / sigma2;
  for (const auto& c : constrained_) {
    const auto xc = xm_.middleCols(c.mean_col, c.size);
    const auto theta = psi.segment(c.offset, c.size);
    g.segment(c.offset, c.size).noalias() += psi[c.delta] * (xc.transpose() * u);
    g[c.delta] = (xc * theta).dot(u);
    const Eigen::VectorXd st = c.s * theta;
    g.segment(c.offset, c.size) -= 2.0 * c.lambda2 * sq(psi[c.delta]) * st;
    g[c.delta] -= 2.0 * c.lambda2 * psi[c.delta] * theta.dot(st);
  }
  for (const auto& b : penalized_) {
    g.segment(b.offset, b.size) -= 2.0 * b.weight * (b.s * psi.segment(b.offset, b.size));
  }
  const double np = static_cast<double>(n_pos_);
  g[q] = -np / (2.0 * sigma2) + r.squaredNorm() / (2.0 * sigma2 * sigma2);
  return g;
}

Eigen::MatrixXd JointObjective::hessian(const Eigen::VectorXd& psi, double sigma2,
                                        bool penalized) const {
  Eigen::VectorXd eta, mu, u, v;
  predictors(psi, eta, mu);
  binary_derivs(eta, u, v);
  const Eigen::VectorXd r = e_.cwiseProduct(y_ - mu);
  const Eigen::Index q = size();
  const Eigen::Index n = eta.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(q + 1, q + 1);

  // Binary part: J' diag(v) J over the coordinates that move eta.
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < layout_.binary_size; ++j) cols.push_back(j);
  Eigen::MatrixXd jac;
  {
    Eigen::Index width = layout_.binary_size;
    for (const auto& c : constrained_) width += c.size + 1;
    jac.resize(n, width);
    jac.leftCols(layout_.binary_size) = xb_;
    Eigen::Index at = layout_.binary_size;
    for (const auto& c : constrained_) {
      const auto xc = xm_.middleCols(c.mean_col, c.size);
      jac.middleCols(at, c.size) = psi[c.delta] * xc;
      for (Eigen::Index k = 0; k < c.size; ++k) cols.push_back(c.offset + k);
      at += c.size;
      jac.col(at) = xc * psi.segment(c.offset, c.size);
      cols.push_back(c.delta);
      ++at;
    }
  }
  const Eigen::MatrixXd jtj = jac.transpose() * v.asDiagonal() * jac;
  for (std::size_t a = 0; a < cols.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      h(cols[a], cols[b]) += jtj(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  for (const auto& c : constrained_) {
    const Eigen::VectorXd cross = xm_.middleCols(c.mean_col, c.size).transpose() * u;
    h.block(c.offset, c.delta, c.size, 1) += cross;
    h.block(c.delta, c.offset, 1, c.size) += cross.transpose();
  }

  // Gaussian part over the nonzero observations.
  const Eigen::Index mo = layout_.mean_offset();
  const Eigen::Index ms = layout_.mean_size;
  h.block(mo, mo, ms, ms).noalias() -= xm_.transpose() * e_.asDiagonal() * xm_ / sigma2;
  const Eigen::VectorXd xr = xm_.transpose() * r;
  const double s4 = sigma2 * sigma2;
  h.block(mo, q, ms, 1) = -xr / s4;
  h.block(q, mo, 1, ms) = -xr.transpose() / s4;
  h(q, q) = static_cast<double>(n_pos_) / (2.0 * s4) - r.squaredNorm() / (s4 * sigma2);

  if (penalized) {
    for (const auto& b : penalized_) {
      h.block(b.offset, b.offset, b.size, b.size) -= 2.0 * b.weight * b.s;
    }
    for (const auto& c : constrained_) {
      const auto theta = psi.segment(c.offset, c.size);
      const Eigen::VectorXd st = c.s * theta;
      const double d = psi[c.delta];
      h.block(c.offset, c.offset, c.size, c.size) -= 2.0 * c.lambda2 * d * d * c.s;
      h.block(c.offset, c.delta, c.size, 1) -= 4.0 * c.lambda2 * d * st;
      h.block(c.delta, c.offset, 1, c.size) -= 4.0 * c.lambda2 * d * st.transpose();
      h(c.delta, c.delta) -= 2.0 * c.lambda2 * theta.dot(st);
    }
  }
  return h;
}

double JointObjective::profile_value(const Eigen::VectorXd& psi) const {
  return value(psi, profile_sigma2(psi));
}

Eigen::VectorXd JointObjective::profile_gradient(const Eigen::VectorXd& psi) const {
  return gradient(psi, profile_sigma2(psi)).head(size());
}

Eigen::MatrixXd JointObjective::profile_hessian(const Eigen::VectorXd& psi) const {
  const Eigen::Index q = size();
  const Eigen::MatrixXd h = hessian(psi, profile_sigma2(psi));
  const Eigen::VectorXd hs = h.col(q).head(q);
  return h.topLeftCorner(q, q) - hs * hs.transpose() / h(q, q);
}

Eigen::VectorXd JointObjective::column_scale(const Eigen::VectorXd& psi) const {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(size());
  for (Eigen::Index j = 0; j < layout_.binary_size; ++j) {
    s[j] = std::max(1.0, xb_.col(j).cwiseAbs().maxCoeff());
  }
  for (Eigen::Index j = 0; j < layout_.mean_size; ++j) {
    s[layout_.mean_offset() + j] = std::max(1.0, xm_.col(j).cwiseAbs().maxCoeff());
  }
  for (const auto& c : constrained_) {
    const Eigen::VectorXd f = xm_.middleCols(c.mean_col, c.size) * psi.segment(c.offset, c.size);
    s[c.delta] = std::max(1.0, f.cwiseAbs().maxCoeff());
  }
  return s;
}

}  // namespace zinreg
