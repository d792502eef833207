#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zinreg/zin_core.hpp"

namespace zinreg {

struct NewtonOptions {
  double tolerance = 1e-8;  // on max_j |g_j| / scale_j
  int max_iterations = 200;
  int max_halvings = 30;
};

struct NewtonResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;  // scaled max-norm at x
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;  // objective after each accepted step, starting value first
};

struct SmoothObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

/// Damped Newton ascent: step halving, then a scaled gradient step when
/// halving fails to increase the objective.
NewtonResult maximize_newton(const SmoothObjective& f, Eigen::VectorXd x0,
                             const Eigen::VectorXd& scale, const NewtonOptions& options);

/// Solves A x = b for symmetric positive (semi)definite A after Jacobi
/// scaling, adding a small ridge if the factorization is not positive.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Penalized Bernoulli regression: maximizes sum log f(E_i | eta_i) - beta' P beta.
class PenalizedBinary {
 public:
  PenalizedBinary(Link link, Eigen::MatrixXd x, Eigen::VectorXd e, double clamp);

  void set_penalty(Eigen::MatrixXd p) { penalty_ = std::move(p); }
  const Eigen::MatrixXd& design() const { return x_; }

  double loglik(const Eigen::VectorXd& beta) const;
  double value(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& beta) const;
  /// X' W X with W = -d2 loglik / d eta2 at beta.
  Eigen::MatrixXd information(const Eigen::VectorXd& beta) const;

  NewtonResult fit(Eigen::VectorXd start, const NewtonOptions& options) const;
  Eigen::VectorXd scale() const;

 private:
  Link link_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd e_;
  double clamp_;
  Eigen::MatrixXd penalty_;
};

/// Working-scale penalized least squares: minimizes RSS/2 + beta' P beta.
struct GaussianSolve {
  Eigen::VectorXd beta;
  double rss = 0.0;
  double trace = 0.0;  // trace of the influence matrix
};
GaussianSolve solve_penalized_ls(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty,
                                 double yty, const Eigen::MatrixXd& penalty);

/// Smoothing parameters chosen by GCV. Binary entries are lambda; mean
/// entries are on the unit-variance working scale (phi = value / sigma).
struct SmoothingSelection {
  std::map<std::string, double> binary;
  std::map<std::string, double> mean;
  std::set<std::string> binary_at_max;
  std::set<std::string> mean_at_max;
  std::map<std::string, double> binary_edf;
  std::map<std::string, double> mean_edf;
  std::map<std::string, double> binary_scale;  // grid centres
  std::map<std::string, double> mean_scale;
  double binary_gcv = 0.0;
  double mean_gcv = 0.0;
};

struct FitOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
  int grid_size = 30;
  double grid_span = 1e4;  // grid covers scale * [1/span, span], log-spaced
  int sweeps = 2;
  double eliminate_edf = 0.05;
  /// Replaces the relative grid with these values for every term.
  std::optional<std::vector<double>> absolute_grid;
  /// Skips GCV; terms listed in *_at_max with EDF below the cutoff are eliminated.
  std::optional<SmoothingSelection> fixed_smoothing;
  /// Re-selects lambda of constrained terms by binary-part GCV inside the
  /// constrained fit; when false the unconstrained value is inherited.
  bool select_constrained = true;
};

/// Grid of `options.grid_size` values around `scale` (or the absolute grid).
std::vector<double> smoothing_grid(double scale, const FitOptions& options);

/// Design pieces shared by the GCV search and the final fits.
struct PartDesign {
  Eigen::MatrixXd x;  // [intercept | parametric | smooth blocks]
  std::vector<std::string> smooth_names;
  std::vector<Eigen::Index> offsets;
  std::vector<Eigen::Index> sizes;
  std::vector<Eigen::MatrixXd> penalties;  // S_eps restricted to free coefficients

  /// Block-diagonal sum of weight_j * S_j.
  Eigen::MatrixXd penalty(const std::vector<double>& weights) const;
};

PartDesign binary_design(const ModelStructure& structure, const Dataset& data,
                         const std::set<std::string>& drop = {});
/// Rows restricted to nonzero responses.
PartDesign mean_design(const ModelStructure& structure, const Dataset& data,
                       const std::set<std::string>& drop = {});

SmoothingSelection select_smoothing(const ModelStructure& structure, const Dataset& data,
                                    const FitOptions& options);
SmoothingSelection select_smoothing(const Dataset& data, const ModelSpec& spec,
                                    const FitOptions& options = {});

}  // namespace zinreg
