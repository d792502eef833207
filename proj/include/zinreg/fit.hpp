#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zinreg/objective.hpp"
#include "zinreg/penalized_fit.hpp"
#include "zinreg/zin_core.hpp"

namespace zinreg {

struct SmoothTerm {
  std::string name;
  Part part = Part::Mean;
  SplineBasis basis;
  Eigen::VectorXd theta;  // full basis length; theta[0] is 0 (intercept absorbs it)
  PenaltyMatrix penalty;
  double smoothing_param = 0.0;
  double centering = 0.0;
  double edf = 0.0;
  bool eliminated = false;
  bool constrained = false;  // binary term tied to the mean-part smooth by delta
};

struct InformationMatrix {
  Eigen::MatrixXd matrix;  // over (psi, sigma2), sigma2 last
  double condition = 0.0;  // after symmetric diagonal scaling
  bool singular = false;
};

struct FittedZinModel {
  ModelStructure structure;
  ParameterLayout layout;
  ZinParams params;
  SmoothingParams smoothing;
  SmoothingSelection selection;
  std::vector<SmoothTerm> smooth_terms;
  std::set<std::string> undefined_deltas;  // constrained terms whose s was eliminated

  double loglik = 0.0;
  double penalized_loglik = 0.0;
  InformationMatrix fisher;
  Eigen::MatrixXd covariance;  // inverse of fisher.matrix
  Eigen::VectorXd edf;         // per coordinate of psi
  double binary_edf_total = 0.0;
  double mean_edf_total = 0.0;

  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> ascent_trace;
  std::size_t n = 0;
  std::size_t n_nonzero = 0;
  std::vector<std::string> warnings;

  const SmoothTerm* term(Part part, const std::string& name) const;
  Eigen::VectorXd psi() const { return layout.pack(params, structure); }
};

/// Factorized fit: penalized Bernoulli regression of the zero indicator plus
/// penalized least squares on the nonzero responses.
FittedZinModel fit_unconstrained(const Dataset& data, const ModelSpec& spec,
                                 const FitOptions& options = {});

/// Joint damped-Newton fit under h_j = delta_j s_j. Smoothing parameters and
/// eliminated terms come from `unconstrained` (fitted here when null).
FittedZinModel fit_constrained(const Dataset& data, const ModelSpec& spec,
                               const FitOptions& options = {},
                               const FittedZinModel* unconstrained = nullptr);

/// Dispatches on whether the constraint set is empty.
FittedZinModel fit_model(const Dataset& data, const ModelSpec& spec, const FitOptions& options = {});

InformationMatrix observed_information(const FittedZinModel& model, const Dataset& data);

struct BandPoint {
  double x = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Point-wise normal bands for the centered smooth. Constrained binary terms
/// use the delta method over (theta_s, delta).
std::vector<BandPoint> confidence_band(const FittedZinModel& model, Part part,
                                       const std::string& term, const std::vector<double>& grid,
                                       double level = 0.95);

/// Covariance of the free smooth coefficients (delta method when constrained).
Eigen::MatrixXd smooth_covariance(const FittedZinModel& model, Part part, const std::string& term);

struct SmoothTest {
  double edf = 0.0;
  std::optional<double> f_stat;  // empty for eliminated terms
  std::optional<double> p_value;
  double residual_df = 0.0;
};

SmoothTest smooth_significance(const FittedZinModel& model, Part part, const std::string& term);

struct CoefficientRow {
  Part part = Part::Binary;
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

struct SmoothRow {
  Part part = Part::Binary;
  std::string name;
  bool eliminated = false;
  SmoothTest test;
};

struct DeltaRow {
  std::string name;
  std::optional<double> estimate;  // empty when undefined
  std::optional<double> se;
};

struct InferenceReport {
  std::vector<CoefficientRow> coefficients;
  std::vector<SmoothRow> smooths;
  std::vector<DeltaRow> deltas;
  double sigma2 = 0.0;
  double loglik = 0.0;
};

InferenceReport inference_report(const FittedZinModel& model);

}  // namespace zinreg
