#pragma once

// Zero-inflated normal model:
//   Y = 0 with probability 1 - p,  Y ~ N(mu, sigma2) with probability p,
//   g(p) = beta0 + beta'Z + sum_j h_j(X_j),  mu = gamma0 + gamma'Z + sum_j s_j(X_j),
// with optional proportional constraints h_j = delta_j s_j.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zinreg/dataset.hpp"
#include "zinreg/spline_basis.hpp"

namespace zinreg {

enum class Link { Logit, Probit };
enum class Part { Binary, Mean };

std::string_view link_name(Link link);
Link parse_link(std::string_view name);
std::string_view part_name(Part part);

/// Inverse link g^{-1}(eta).
double inverse_link(Link link, double eta);
/// g(p).
double apply_link(Link link, double p);

struct SmoothSpec {
  std::string covariate;
  int n_knots = 9;
};

struct PartSpec {
  std::vector<std::string> parametric;  // factor or continuous column names
  std::vector<SmoothSpec> smooths;

  bool has_smooth(const std::string& name) const;
};

struct ConstraintSpec {
  std::vector<std::string> terms;  // smooth covariates with h_j = delta_j s_j
  std::map<std::string, double> initial_deltas;

  bool empty() const { return terms.empty(); }
  bool contains(const std::string& name) const;
};

struct ModelSpec {
  std::string name = "model";
  PartSpec binary;
  PartSpec mean;
  Link link = Link::Logit;
  double shrinkage = 1e-3;  // eps relative to the mean nonzero eigenvalue of S
  double clamp = 1e-10;     // probabilities are clamped to [clamp, 1 - clamp] before logs
  ConstraintSpec constraint;

  /// Throws InvalidSpec / MissingColumn.
  void validate(const Dataset& data) const;
  ModelSpec without_constraint() const;
};

struct ParametricColumn {
  std::string name;       // "bmi" or "race:Chinese"
  std::string covariate;  // source column
  std::string level;      // empty for continuous columns
};

/// One smooth term after knot placement and centering. Columns exclude the
/// constant basis function, which the part intercept absorbs.
struct SmoothComponent {
  std::string covariate;
  SplineBasis basis;
  PenaltyMatrix penalty;         // S + eps I
  Eigen::VectorXd column_means;  // means of basis functions 1..dim-1

  int free_dim() const { return basis.dim() - 1; }
  Eigen::RowVectorXd design_row(double x) const;
  Eigen::MatrixXd design(const std::vector<double>& x) const;
  Eigen::MatrixXd penalty_block() const;
  /// Centered value sum_{k>=1} theta_k (b_k(x) - c_k); theta has full basis length.
  double value(double x, const Eigen::VectorXd& theta) const;
  double centering(const Eigen::VectorXd& theta) const;
};

struct PartStructure {
  std::vector<ParametricColumn> parametric;
  std::vector<SmoothComponent> smooths;

  const SmoothComponent* find(const std::string& covariate) const;
  /// n x (1 + parametric.size()) with a leading intercept column.
  Eigen::MatrixXd parametric_design(const Dataset& data) const;
};

class ModelStructure {
 public:
  /// Places knots, builds shrunk penalties and centering means from `data`.
  static ModelStructure build(const ModelSpec& spec, const Dataset& data);

  ModelSpec spec;
  PartStructure binary;
  PartStructure mean;
  std::map<std::string, std::vector<std::string>> factor_levels;
  std::vector<std::string> warnings;

  bool constrained(const std::string& covariate) const {
    return spec.constraint.contains(covariate);
  }
  const PartStructure& part(Part p) const { return p == Part::Binary ? binary : mean; }
  /// Throws SchemaMismatch if `data` lacks a column or has unseen factor levels.
  void check_schema(const Dataset& data) const;
};

struct ZinParams {
  double beta0 = 0.0;
  std::map<std::string, double> beta;
  double gamma0 = 0.0;
  std::map<std::string, double> gamma;
  std::map<std::string, Eigen::VectorXd> smooths_h;  // unconstrained binary smooths
  std::map<std::string, Eigen::VectorXd> smooths_s;  // all mean smooths
  std::map<std::string, double> deltas;              // constrained terms
  double sigma2 = 1.0;

  /// Zero-valued parameters with the right shapes for `structure`.
  static ZinParams zeros(const ModelStructure& structure);
};

/// Smoothing parameters; each penalty is theta' S_eps theta times the square.
/// Constrained terms use lambda for the induced h_j = delta_j s_j and phi for s_j.
struct SmoothingParams {
  std::map<std::string, double> lambda;  // binary part
  std::map<std::string, double> phi;     // mean part
};

struct LinearPredictors {
  Eigen::VectorXd eta_p;
  Eigen::VectorXd mu;
};

LinearPredictors linear_predictors(const ZinParams& params, const ModelStructure& structure,
                                   const Dataset& data);

/// Log density of one observation, normal constant included.
double zin_log_density(double y, double p, double mu, double sigma2, double clamp = 1e-10);

double log_likelihood(const ZinParams& params, const ModelStructure& structure,
                      const Dataset& data);

double penalty_value(const ZinParams& params, const ModelStructure& structure,
                     const SmoothingParams& smoothing);

double penalized_log_likelihood(const ZinParams& params, const ModelStructure& structure,
                                const Dataset& data, const SmoothingParams& smoothing);

struct Predictions {
  Eigen::VectorXd p;
  Eigen::VectorXd mu;
  Eigen::VectorXd ey;  // p * mu
};

Predictions predict(const ZinParams& params, const ModelStructure& structure,
                    const Dataset& covariates);

}  // namespace zinreg
