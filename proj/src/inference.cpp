#include <algorithm>
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include "zinreg/error.hpp"
#include "zinreg/fit.hpp"

namespace zinreg {

namespace {

const SmoothTerm& require_term(const FittedZinModel& model, Part part, const std::string& name) {
  const SmoothTerm* t = model.term(part, name);
  if (t == nullptr) {
    throw Error(ErrorCode::UnknownTerm,
                std::string(part_name(part)) + " part has no smooth '" + name + "'");
  }
  return *t;
}

const SmoothComponent& component(const FittedZinModel& model, Part part, const std::string& name) {
  return *model.structure.part(part).find(name);
}

}  // namespace

Eigen::MatrixXd smooth_covariance(const FittedZinModel& model, Part part,
                                  const std::string& name) {
  const SmoothTerm& t = require_term(model, part, name);
  if (t.eliminated) throw Error(ErrorCode::EliminatedTerm, "smooth '" + name + "' was eliminated");
  const ParameterLayout& l = model.layout;
  if (!t.constrained) {
    const ParameterBlock* b = l.find(part, name);
    return model.covariance.block(b->offset, b->offset, b->size, b->size);
  }
  const ParameterBlock* b = l.find(Part::Mean, name);
  const Eigen::Index d = l.deltas.at(name);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < b->size; ++k) idx.push_back(b->offset + k);
  idx.push_back(d);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd v(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) v(i, j) = model.covariance(idx[i], idx[j]);
  }
  // h = delta * theta_s
  Eigen::MatrixXd jac(b->size, m);
  jac.leftCols(b->size) = model.params.deltas.at(name) * Eigen::MatrixXd::Identity(b->size, b->size);
  jac.col(b->size) = model.params.smooths_s.at(name).tail(b->size);
  return jac * v * jac.transpose();
}

std::vector<BandPoint> confidence_band(const FittedZinModel& model, Part part,
                                       const std::string& name, const std::vector<double>& grid,
                                       double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "band level must lie in (0, 1)");
  }
  const SmoothTerm& t = require_term(model, part, name);
  const Eigen::MatrixXd v = smooth_covariance(model, part, name);
  const SmoothComponent& sc = component(model, part, name);
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
  std::vector<BandPoint> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const Eigen::RowVectorXd row = sc.design_row(x);
    BandPoint bp;
    bp.x = x;
    bp.estimate = row.dot(t.theta.tail(sc.free_dim()));
    bp.se = std::sqrt(std::max(0.0, row.dot(v * row.transpose())));
    bp.lower = bp.estimate - z * bp.se;
    bp.upper = bp.estimate + z * bp.se;
    out.push_back(bp);
  }
  return out;
}

SmoothTest smooth_significance(const FittedZinModel& model, Part part, const std::string& name) {
  const SmoothTerm& t = require_term(model, part, name);
  SmoothTest out;
  out.residual_df = part == Part::Mean
                        ? static_cast<double>(model.n_nonzero) - model.mean_edf_total
                        : static_cast<double>(model.n) - model.binary_edf_total;
  if (t.eliminated) return out;
  out.edf = t.edf;

  // Work with the function values on a grid so the truncation does not depend on basis scaling.
  const SmoothComponent* sc = model.structure.part(part).find(name);
  const KnotSet& ks = sc->basis.knot_set();
  const int m = 200;
  Eigen::MatrixXd x(m, sc->free_dim());
  for (int i = 0; i < m; ++i) {
    x.row(i) = sc->design_row(ks.domain_lo + (ks.domain_hi - ks.domain_lo) * i / (m - 1.0));
  }
  const Eigen::MatrixXd r =
      Eigen::HouseholderQR<Eigen::MatrixXd>(x).matrixQR().topRows(x.cols()).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd v0 = smooth_covariance(model, part, name);
  const Eigen::MatrixXd v = r * v0 * r.transpose();
  const Eigen::VectorXd theta = r * t.theta.tail(v0.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (v + v.transpose()));
  const auto dim = static_cast<int>(v.rows());
  const int rank = std::clamp(static_cast<int>(std::lround(t.edf)), 1, dim);
  double quad = 0.0;
  for (int k = dim - rank; k < dim; ++k) {
    const double ev = es.eigenvalues()[k];
    if (ev <= 0.0) continue;
    const double c = es.eigenvectors().col(k).dot(theta);
    quad += c * c / ev;
  }
  const double edf = std::max(t.edf, 1e-8);
  out.f_stat = quad / edf;
  if (out.residual_df > 0.0) {
    const boost::math::fisher_f dist(edf, out.residual_df);
    out.p_value = boost::math::cdf(boost::math::complement(dist, *out.f_stat));
  }
  return out;
}

InferenceReport inference_report(const FittedZinModel& model) {
  InferenceReport r;
  const ParameterLayout& l = model.layout;
  const Eigen::VectorXd psi = model.psi();
  const boost::math::normal nd;
  auto add_coefs = [&](Part part, Eigen::Index start) {
    const PartStructure& ps = model.structure.part(part);
    for (std::size_t c = 0; c <= ps.parametric.size(); ++c) {
      const Eigen::Index idx = start + static_cast<Eigen::Index>(c);
      CoefficientRow row;
      row.part = part;
      row.name = c == 0 ? "(Intercept)" : ps.parametric[c - 1].name;
      row.estimate = psi[idx];
      row.se = std::sqrt(std::max(0.0, model.covariance(idx, idx)));
      row.z = row.se > 0.0 ? row.estimate / row.se : 0.0;
      row.p_value = 2.0 * boost::math::cdf(boost::math::complement(nd, std::abs(row.z)));
      r.coefficients.push_back(row);
    }
  };
  add_coefs(Part::Binary, 0);
  add_coefs(Part::Mean, l.mean_offset());

  for (Part part : {Part::Binary, Part::Mean}) {
    for (const auto& t : model.smooth_terms) {
      if (t.part != part) continue;
      r.smooths.push_back({part, t.name, t.eliminated, smooth_significance(model, part, t.name)});
    }
  }
  for (const auto& name : model.structure.spec.constraint.terms) {
    DeltaRow row;
    row.name = name;
    if (auto it = l.deltas.find(name); it != l.deltas.end()) {
      row.estimate = psi[it->second];
      row.se = std::sqrt(std::max(0.0, model.covariance(it->second, it->second)));
    }
    r.deltas.push_back(row);
  }
  r.sigma2 = model.params.sigma2;
  r.loglik = model.loglik;
  return r;
}

}  // namespace zinreg
