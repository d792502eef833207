#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zinreg/selection.hpp"

namespace zinreg {

enum class TestFunction { S1, S2, S3 };

/// Test functions on [0, 1]; throws DomainError outside.
double test_function(TestFunction which, double x);

struct SimConfig {
  int n = 400;
  double sigma = 0.5;
  std::uint64_t seed = 1;
  int replications = 100;
  MccvConfig mccv{50, 0.5, 1, true, 1};

  void validate() const;
};

struct SimulatedData {
  Dataset data;  // y, factor z ("0"/"1"), continuous x1, x2, x3
  Eigen::VectorXd p;
  Eigen::VectorXd mu;
  Eigen::VectorXd s1_bar;  // centered s1(x1)
  Eigen::VectorXd s2_bar;
  Eigen::VectorXd s3_bar;  // centered s3(x2)
};

/// logit p = 0.3 z + 0.5 s1(x1) + s2(x2),  mu = -1 + 2 z + s1(x1) + s3(x2),
/// smooths centered over the draws; x3 is unrelated to the response.
SimulatedData simulate_dataset(const SimConfig& cfg);

/// The two candidates compared by the study: constrained on x1, and unconstrained.
ModelSpec simulation_spec(bool constrained_x1, int n_knots = 9);

/// Seed for outer replication `rep` of a study cell.
std::uint64_t replication_seed(std::uint64_t seed, int n, double sigma, int rep);

inline constexpr int kCriteria = 4;
inline constexpr const char* kCriterionNames[kCriteria] = {"loglik", "auc", "mse", "mse_c"};

struct ReplicationRecord {
  int n = 0;
  double sigma = 0.0;
  int rep = 0;
  bool ok = false;
  Criteria constrained;
  Criteria unconstrained;
};

struct SuccessRateRow {
  int n = 0;
  double sigma = 0.0;
  int replications = 0;  // outer replications with a usable MCCV report
  int failed = 0;
  double rate[kCriteria] = {};      // share preferring the constrained model
  double mean_gap[kCriteria] = {};  // mean of (constrained - unconstrained)
};

struct SuccessRateTable {
  std::vector<SuccessRateRow> rows;
  std::vector<ReplicationRecord> records;
};

/// Full grid of (n, sigma) cells; `base` supplies seed, replications and MCCV settings.
SuccessRateTable run_success_rate_study(const std::vector<int>& ns, const std::vector<double>& sigmas,
                                        const SimConfig& base, const FitOptions& options = {},
                                        int threads = 1);

}  // namespace zinreg
