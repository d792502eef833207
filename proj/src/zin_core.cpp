#include "zinreg/zin_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "zinreg/error.hpp"

namespace zinreg {

std::string_view link_name(Link link) { return link == Link::Logit ? "logit" : "probit"; }

Link parse_link(std::string_view name) {
  if (name == "logit") return Link::Logit;
  if (name == "probit") return Link::Probit;
  throw Error(ErrorCode::InvalidSpec, "unknown link '" + std::string(name) + "'");
}

std::string_view part_name(Part part) { return part == Part::Binary ? "binary" : "mean"; }

double inverse_link(Link link, double eta) {
  if (link == Link::Logit) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
  }
  return 0.5 * std::erfc(-eta / std::numbers::sqrt2);
}

double apply_link(Link link, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::DomainError, "link argument outside (0,1)");
  if (link == Link::Logit) return std::log(p / (1.0 - p));
  return boost::math::quantile(boost::math::normal(), p);
}

bool PartSpec::has_smooth(const std::string& name) const {
  return std::any_of(smooths.begin(), smooths.end(),
                     [&](const SmoothSpec& s) { return s.covariate == name; });
}

bool ConstraintSpec::contains(const std::string& name) const {
  return std::find(terms.begin(), terms.end(), name) != terms.end();
}

namespace {

void validate_part(const PartSpec& part, std::string_view label, const Dataset& data) {
  std::set<std::string> seen;
  for (const auto& p : part.parametric) {
    if (!data.has_column(p)) {
      throw Error(ErrorCode::MissingColumn,
                  std::string(label) + " part references unknown column '" + p + "'");
    }
    if (!seen.insert(p).second) {
      throw Error(ErrorCode::InvalidSpec, "duplicate term '" + p + "'");
    }
  }
  for (const auto& s : part.smooths) {
    if (!data.continuous.contains(s.covariate)) {
      throw Error(ErrorCode::MissingColumn, std::string(label) +
                                                " smooth needs continuous column '" +
                                                s.covariate + "'");
    }
    if (s.n_knots < 0) {
      throw Error(ErrorCode::InvalidSpec, "negative knot count for '" + s.covariate + "'");
    }
    if (!seen.insert(s.covariate).second) {
      throw Error(ErrorCode::InvalidSpec, "duplicate term '" + s.covariate + "'");
    }
  }
}

const SmoothSpec* find_smooth(const PartSpec& part, const std::string& name) {
  for (const auto& s : part.smooths) {
    if (s.covariate == name) return &s;
  }
  return nullptr;
}

}  // namespace

void ModelSpec::validate(const Dataset& data) const {
  validate_part(binary, "binary", data);
  validate_part(mean, "mean", data);
  if (!(shrinkage > 0.0) || !std::isfinite(shrinkage)) {
    throw Error(ErrorCode::InvalidEpsilon, "shrinkage must be positive");
  }
  if (!(clamp > 0.0 && clamp < 0.5)) {
    throw Error(ErrorCode::InvalidSpec, "probability clamp must lie in (0, 0.5)");
  }
  std::set<std::string> seen;
  for (const auto& t : constraint.terms) {
    const SmoothSpec* b = find_smooth(binary, t);
    const SmoothSpec* m = find_smooth(mean, t);
    if (b == nullptr || m == nullptr) {
      throw Error(ErrorCode::InvalidSpec,
                  "constrained term '" + t + "' must be a smooth in both parts");
    }
    if (b->n_knots != m->n_knots) {
      throw Error(ErrorCode::InvalidSpec,
                  "constrained term '" + t + "' needs equal knot counts in both parts");
    }
    if (!seen.insert(t).second) {
      throw Error(ErrorCode::InvalidSpec, "duplicate constrained term '" + t + "'");
    }
  }
}

ModelSpec ModelSpec::without_constraint() const {
  ModelSpec out = *this;
  out.constraint = {};
  return out;
}

Eigen::RowVectorXd SmoothComponent::design_row(double x) const {
  const Eigen::VectorXd b = eval_basis(x, basis);
  return (b.tail(free_dim()) - column_means).transpose();
}

Eigen::MatrixXd SmoothComponent::design(const std::vector<double>& x) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x.size()), free_dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = design_row(x[i]);
  }
  return out;
}

Eigen::MatrixXd SmoothComponent::penalty_block() const {
  return penalty.s.bottomRightCorner(free_dim(), free_dim());
}

double SmoothComponent::value(double x, const Eigen::VectorXd& theta) const {
  return design_row(x).dot(theta.tail(free_dim()));
}

double SmoothComponent::centering(const Eigen::VectorXd& theta) const {
  return theta[0] + column_means.dot(theta.tail(free_dim()));
}

const SmoothComponent* PartStructure::find(const std::string& covariate) const {
  for (const auto& s : smooths) {
    if (s.covariate == covariate) return &s;
  }
  return nullptr;
}

Eigen::MatrixXd PartStructure::parametric_design(const Dataset& data) const {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd x(n, 1 + static_cast<Eigen::Index>(parametric.size()));
  x.col(0).setOnes();
  for (std::size_t c = 0; c < parametric.size(); ++c) {
    const auto& pc = parametric[c];
    const auto col = static_cast<Eigen::Index>(c) + 1;
    if (pc.level.empty()) {
      const auto& v = data.column(pc.covariate);
      for (Eigen::Index i = 0; i < n; ++i) x(i, col) = v[static_cast<std::size_t>(i)];
    } else {
      const auto& f = data.factor(pc.covariate);
      const auto it = std::find(f.levels.begin(), f.levels.end(), pc.level);
      const int code = it == f.levels.end() ? -1 : static_cast<int>(it - f.levels.begin());
      for (Eigen::Index i = 0; i < n; ++i) {
        x(i, col) = f.codes[static_cast<std::size_t>(i)] == code ? 1.0 : 0.0;
      }
    }
  }
  return x;
}

namespace {

PartStructure build_part(const PartSpec& spec, const ModelSpec& model, const Dataset& data,
                         std::vector<std::string>& warnings) {
  PartStructure out;
  for (const auto& name : spec.parametric) {
    if (auto it = data.factors.find(name); it != data.factors.end()) {
      const auto& levels = it->second.levels;
      for (std::size_t l = 1; l < levels.size(); ++l) {
        out.parametric.push_back({name + ":" + levels[l], name, levels[l]});
      }
    } else {
      out.parametric.push_back({name, name, {}});
    }
  }
  for (const auto& s : spec.smooths) {
    const auto& x = data.column(s.covariate);
    SmoothComponent sc;
    sc.covariate = s.covariate;
    KnotSet ks = place_knots(x, s.n_knots);
    if (ks.collapsed > 0) {
      warnings.push_back("smooth '" + s.covariate + "': " + std::to_string(ks.collapsed) +
                         " coincident knot(s) dropped");
    }
    sc.basis = SplineBasis(std::move(ks));
    const PenaltyMatrix raw = penalty_matrix(sc.basis);
    sc.penalty = shrink_penalty(raw, default_shrinkage(raw, model.shrinkage));
    sc.column_means = Eigen::VectorXd::Zero(sc.free_dim());
    for (double v : x) sc.column_means += eval_basis(v, sc.basis).tail(sc.free_dim());
    sc.column_means /= static_cast<double>(x.size());
    out.smooths.push_back(std::move(sc));
  }
  return out;
}

}  // namespace

ModelStructure ModelStructure::build(const ModelSpec& spec, const Dataset& data) {
  data.validate();
  spec.validate(data);
  ModelStructure st;
  st.spec = spec;
  st.binary = build_part(spec.binary, spec, data, st.warnings);
  st.mean = build_part(spec.mean, spec, data, st.warnings);
  for (const auto* part : {&spec.binary, &spec.mean}) {
    for (const auto& name : part->parametric) {
      if (auto it = data.factors.find(name); it != data.factors.end()) {
        st.factor_levels[name] = it->second.levels;
      }
    }
  }
  return st;
}

void ModelStructure::check_schema(const Dataset& data) const {
  auto need = [&](const std::string& name, bool factor) {
    const bool ok = factor ? data.factors.contains(name) : data.continuous.contains(name);
    if (!ok) throw Error(ErrorCode::SchemaMismatch, "missing column '" + name + "'");
  };
  for (const auto* part : {&binary, &mean}) {
    for (const auto& pc : part->parametric) need(pc.covariate, !pc.level.empty());
    for (const auto& sc : part->smooths) need(sc.covariate, false);
  }
  for (const auto& [name, levels] : factor_levels) {
    const auto& f = data.factor(name);
    for (int code : f.codes) {
      const auto& lev = f.levels[static_cast<std::size_t>(code)];
      if (std::find(levels.begin(), levels.end(), lev) == levels.end()) {
        throw Error(ErrorCode::SchemaMismatch,
                    "factor '" + name + "' has unseen level '" + lev + "'");
      }
    }
  }
}

ZinParams ZinParams::zeros(const ModelStructure& structure) {
  ZinParams p;
  for (const auto& pc : structure.binary.parametric) p.beta[pc.name] = 0.0;
  for (const auto& pc : structure.mean.parametric) p.gamma[pc.name] = 0.0;
  for (const auto& sc : structure.binary.smooths) {
    if (structure.constrained(sc.covariate)) {
      p.deltas[sc.covariate] = 0.0;
    } else {
      p.smooths_h[sc.covariate] = Eigen::VectorXd::Zero(sc.basis.dim());
    }
  }
  for (const auto& sc : structure.mean.smooths) {
    p.smooths_s[sc.covariate] = Eigen::VectorXd::Zero(sc.basis.dim());
  }
  return p;
}

namespace {

template <class Map>
const auto& lookup(const Map& m, const std::string& key, std::string_view what) {
  auto it = m.find(key);
  if (it == m.end()) {
    throw Error(ErrorCode::DimensionMismatch,
                "parameters lack " + std::string(what) + " '" + key + "'");
  }
  return it->second;
}

const Eigen::VectorXd& smooth_theta(const std::map<std::string, Eigen::VectorXd>& m,
                                    const SmoothComponent& sc) {
  const auto& theta = lookup(m, sc.covariate, "smooth");
  if (theta.size() != sc.basis.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "smooth '" + sc.covariate + "' has " + std::to_string(theta.size()) +
                    " coefficients, basis has " + std::to_string(sc.basis.dim()));
  }
  return theta;
}

Eigen::VectorXd part_parametric(const PartStructure& part, const Dataset& data,
                                double intercept, const std::map<std::string, double>& coefs) {
  const Eigen::MatrixXd x = part.parametric_design(data);
  Eigen::VectorXd b(x.cols());
  b[0] = intercept;
  for (std::size_t c = 0; c < part.parametric.size(); ++c) {
    b[static_cast<Eigen::Index>(c) + 1] = lookup(coefs, part.parametric[c].name, "coefficient");
  }
  return x * b;
}

}  // namespace

LinearPredictors linear_predictors(const ZinParams& params, const ModelStructure& structure,
                                   const Dataset& data) {
  LinearPredictors lp;
  lp.eta_p = part_parametric(structure.binary, data, params.beta0, params.beta);
  lp.mu = part_parametric(structure.mean, data, params.gamma0, params.gamma);
  for (const auto& sc : structure.mean.smooths) {
    const Eigen::VectorXd f = sc.design(data.column(sc.covariate)) *
                              smooth_theta(params.smooths_s, sc).tail(sc.free_dim());
    lp.mu += f;
    if (structure.constrained(sc.covariate)) {
      lp.eta_p += lookup(params.deltas, sc.covariate, "delta") * f;
    }
  }
  for (const auto& sc : structure.binary.smooths) {
    if (structure.constrained(sc.covariate)) continue;
    lp.eta_p += sc.design(data.column(sc.covariate)) *
                smooth_theta(params.smooths_h, sc).tail(sc.free_dim());
  }
  return lp;
}

double zin_log_density(double y, double p, double mu, double sigma2, double clamp) {
  const double pc = std::clamp(p, clamp, 1.0 - clamp);
  if (y == 0.0) return std::log1p(-pc);
  const double r = y - mu;
  return std::log(pc) - 0.5 * std::log(2.0 * std::numbers::pi * sigma2) - r * r / (2.0 * sigma2);
}

double log_likelihood(const ZinParams& params, const ModelStructure& structure,
                      const Dataset& data) {
  if (!(params.sigma2 > 0.0)) throw Error(ErrorCode::DomainError, "sigma2 must be positive");
  const LinearPredictors lp = linear_predictors(params, structure, data);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double p = inverse_link(structure.spec.link, lp.eta_p[ii]);
    const double li = zin_log_density(data.y[i], p, lp.mu[ii], params.sigma2, structure.spec.clamp);
    if (std::isnan(li)) {
      throw Error(ErrorCode::NonFiniteLikelihood, "observation " + std::to_string(i));
    }
    total += li;
  }
  return total;
}

double penalty_value(const ZinParams& params, const ModelStructure& structure,
                     const SmoothingParams& smoothing) {
  auto weight = [](const std::map<std::string, double>& m, const std::string& name,
                   std::string_view which) {
    auto it = m.find(name);
    if (it == m.end()) {
      throw Error(ErrorCode::InvalidSpec,
                  "missing " + std::string(which) + " smoothing parameter for '" + name + "'");
    }
    if (it->second < 0.0) {
      throw Error(ErrorCode::NegativeSmoothingParameter, std::string(which) + " for '" + name + "'");
    }
    return it->second * it->second;
  };
  double pen = 0.0;
  for (const auto& sc : structure.mean.smooths) {
    const Eigen::VectorXd& theta = smooth_theta(params.smooths_s, sc);
    const double q = theta.dot(sc.penalty.s * theta);
    pen += weight(smoothing.phi, sc.covariate, "phi") * q;
    if (structure.constrained(sc.covariate)) {
      const double d = lookup(params.deltas, sc.covariate, "delta");
      pen += weight(smoothing.lambda, sc.covariate, "lambda") * d * d * q;
    }
  }
  for (const auto& sc : structure.binary.smooths) {
    if (structure.constrained(sc.covariate)) continue;
    const Eigen::VectorXd& theta = smooth_theta(params.smooths_h, sc);
    pen += weight(smoothing.lambda, sc.covariate, "lambda") * theta.dot(sc.penalty.s * theta);
  }
  return pen;
}

double penalized_log_likelihood(const ZinParams& params, const ModelStructure& structure,
                                const Dataset& data, const SmoothingParams& smoothing) {
  return log_likelihood(params, structure, data) - penalty_value(params, structure, smoothing);
}

Predictions predict(const ZinParams& params, const ModelStructure& structure,
                    const Dataset& covariates) {
  structure.check_schema(covariates);
  const LinearPredictors lp = linear_predictors(params, structure, covariates);
  Predictions out;
  out.p = lp.eta_p.unaryExpr([&](double e) { return inverse_link(structure.spec.link, e); });
  out.mu = lp.mu;
  out.ey = out.p.cwiseProduct(out.mu);
  return out;
}

}  // namespace zinreg
