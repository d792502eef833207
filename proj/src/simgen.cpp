#include "zinreg/simgen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "zinreg/error.hpp"

namespace zinreg {

double test_function(TestFunction which, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::DomainError, "test functions are defined on [0, 1]");
  }
  switch (which) {
    case TestFunction::S1:
      return (0.2 * std::pow(x, 11) * std::pow(10.0 * (1.0 - x), 6) +
              10.0 * std::pow(10.0 * x, 3) * std::pow(1.0 - x, 10)) /
             4.0;
    case TestFunction::S2:
      return 2.0 * std::sin(std::numbers::pi * x);
    case TestFunction::S3:
      return std::exp(3.0 * x) / 10.0;
  }
  return 0.0;
}

void SimConfig::validate() const {
  if (n < 4 || n % 2 != 0) throw Error(ErrorCode::InvalidConfig, "n must be even and at least 4");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma must be nonnegative");
  if (replications < 1) throw Error(ErrorCode::InvalidConfig, "replications must be at least 1");
  mccv.validate();
}

namespace {

Eigen::VectorXd centered(TestFunction f, const std::vector<double>& x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = test_function(f, x[i]);
  return v.array() - v.mean();
}

}  // namespace

SimulatedData simulate_dataset(const SimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto n = static_cast<std::size_t>(cfg.n);
  SimulatedData out;
  Dataset& d = out.data;
  for (const char* name : {"x1", "x2", "x3"}) {
    std::vector<double> x(n);
    for (auto& v : x) v = unif(rng);
    d.continuous[name] = std::move(x);
  }
  FactorColumn z{{"0", "1"}, std::vector<int>(n, 0)};
  for (std::size_t i = n / 2; i < n; ++i) z.codes[i] = 1;
  d.factors["z"] = z;

  out.s1_bar = centered(TestFunction::S1, d.continuous["x1"]);
  out.s2_bar = centered(TestFunction::S2, d.continuous["x2"]);
  out.s3_bar = centered(TestFunction::S3, d.continuous["x2"]);
  out.p.resize(cfg.n);
  out.mu.resize(cfg.n);
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    const double zi = z.codes[static_cast<std::size_t>(i)];
    out.p[i] = inverse_link(Link::Logit, 0.3 * zi + 0.5 * out.s1_bar[i] + out.s2_bar[i]);
    out.mu[i] = -1.0 + 2.0 * zi + out.s1_bar[i] + out.s3_bar[i];
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ystar = out.mu[static_cast<Eigen::Index>(i)];
    if (cfg.sigma > 0.0) ystar += cfg.sigma * noise(rng);
    // Keep the zero atom unambiguous.
    if (ystar == 0.0) ystar = std::nextafter(0.0, 1.0);
    d.y[i] = ystar;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (unif(rng) >= out.p[static_cast<Eigen::Index>(i)]) d.y[i] = 0.0;
  }
  return out;
}

ModelSpec simulation_spec(bool constrained_x1, int n_knots) {
  ModelSpec spec;
  spec.name = constrained_x1 ? "constrained" : "unconstrained";
  for (PartSpec* part : {&spec.binary, &spec.mean}) {
    part->parametric = {"z"};
    part->smooths = {{"x1", n_knots}, {"x2", n_knots}, {"x3", n_knots}};
  }
  if (constrained_x1) spec.constraint.terms = {"x1"};
  return spec;
}

std::uint64_t replication_seed(std::uint64_t seed, int n, double sigma, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n),
                    static_cast<std::uint32_t>(std::llround(sigma * 1e6)),
                    static_cast<std::uint32_t>(rep)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

SuccessRateTable run_success_rate_study(const std::vector<int>& ns, const std::vector<double>& sigmas,
                                        const SimConfig& base, const FitOptions& options,
                                        int threads) {
  base.validate();
  const std::vector<ModelSpec> candidates{simulation_spec(true), simulation_spec(false)};
  SuccessRateTable table;
  for (int n : ns) {
    for (double sigma : sigmas) {
      for (int rep = 0; rep < base.replications; ++rep) {
        table.records.push_back({n, sigma, rep, false, {}, {}});
      }
    }
  }
  parallel_for(static_cast<int>(table.records.size()), threads, [&](int k) {
    ReplicationRecord& rec = table.records[static_cast<std::size_t>(k)];
    SimConfig cfg = base;
    cfg.n = rec.n;
    cfg.sigma = rec.sigma;
    cfg.seed = replication_seed(base.seed, rec.n, rec.sigma, rec.rep);
    cfg.mccv.seed = cfg.seed ^ 0x9E3779B97F4A7C15ULL;
    cfg.mccv.threads = 1;
    const SimulatedData sim = simulate_dataset(cfg);
    try {
      const CvReport report = mccv(sim.data, candidates, cfg.mccv, options);
      rec.constrained = report.candidates[0].mean;
      rec.unconstrained = report.candidates[1].mean;
      rec.ok = true;
    } catch (const Error&) {
      rec.ok = false;
    }
  });

  for (int n : ns) {
    for (double sigma : sigmas) {
      SuccessRateRow row;
      row.n = n;
      row.sigma = sigma;
      for (const auto& rec : table.records) {
        if (rec.n != n || rec.sigma != sigma) continue;
        if (!rec.ok) {
          ++row.failed;
          continue;
        }
        ++row.replications;
        const Criteria& c = rec.constrained;
        const Criteria& u = rec.unconstrained;
        const bool win[kCriteria] = {c.loglik > u.loglik, c.auc > u.auc, c.mse < u.mse,
                                     c.mse_c < u.mse_c};
        const double gap[kCriteria] = {c.loglik - u.loglik, c.auc - u.auc, c.mse - u.mse,
                                       c.mse_c - u.mse_c};
        for (int j = 0; j < kCriteria; ++j) {
          row.rate[j] += win[j] ? 1.0 : 0.0;
          row.mean_gap[j] += gap[j];
        }
      }
      if (row.replications > 0) {
        for (int j = 0; j < kCriteria; ++j) {
          row.rate[j] /= row.replications;
          row.mean_gap[j] /= row.replications;
        }
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace zinreg
