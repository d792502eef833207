#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zinreg/fit.hpp"

namespace zinreg {

struct MccvConfig {
  int b = 100;       // replications
  double nu = 0.5;   // validation fraction
  std::uint64_t seed = 1;
  bool stratified = true;  // on the zero indicator
  int threads = 1;

  void validate() const;
};

struct Partition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Deterministic in (cfg.seed, rep); both index lists are sorted.
Partition draw_partition(const Dataset& data, const MccvConfig& cfg, int rep);

struct Criteria {
  double loglik = 0.0;  // summed over the validation set
  double auc = 0.0;
  double mse = 0.0;
  double mse_c = 0.0;
};

struct CandidateResult {
  std::string name;
  std::vector<std::string> constrained_terms;
  std::vector<Criteria> replications;  // successful replications only, in order
  Criteria mean;
  Criteria se;  // standard error of the mean
  int failures = 0;  // replications where this candidate failed
};

struct CvReport {
  std::vector<CandidateResult> candidates;
  std::vector<int> replications;  // indices of successful replications
  int failed_replications = 0;
  std::size_t selected = 0;  // largest mean loglik
};

CvReport mccv(const Dataset& data, const std::vector<ModelSpec>& candidates,
              const MccvConfig& cfg, const FitOptions& options = {});

double cv_loglik(const FittedZinModel& model, const Dataset& validation);
/// Mann-Whitney AUC with ties counted one half. Labels are 0/1.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);
double mse_nonzero(const FittedZinModel& model, const Dataset& validation);
double mse_corrected(const FittedZinModel& model, const Dataset& validation);

double mse_nonzero(const Eigen::VectorXd& mu, const std::vector<double>& y);
double mse_corrected(const Eigen::VectorXd& p, const Eigen::VectorXd& mu,
                     const std::vector<double>& y);

Criteria evaluate_criteria(const FittedZinModel& model, const Dataset& validation);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace zinreg
