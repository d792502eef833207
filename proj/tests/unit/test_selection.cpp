#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "zinreg/error.hpp"
#include "zinreg/selection.hpp"
#include "zinreg/simgen.hpp"

using namespace zinreg;

namespace {

double brute_auc(const std::vector<double>& s, const std::vector<int>& l) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (l[i] == 0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

}  // namespace

TEST_SUITE("selection") {
  TEST_CASE("AUC fixtures") {
    CHECK(auc({0.9, 0.1}, {1, 0}) == 1.0);
    CHECK(auc({0.3, 0.3, 0.3}, {1, 0, 1}) == 0.5);
    CHECK(auc({0.8, 0.6, 0.6, 0.2}, {1, 0, 1, 0}) == 0.875);
    CHECK(code_of([] { auc({0.1, 0.2}, {1, 1}); }) == ErrorCode::SingleClass);
  }

  TEST_CASE("AUC equals brute-force pair enumeration") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> level(0, 6);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + trial % 49;
      std::vector<double> s(n);
      std::vector<int> l(n);
      for (int i = 0; i < n; ++i) {
        s[i] = level(rng) / 7.0;  // coarse values force ties
        l[i] = coin(rng) ? 1 : 0;
      }
      l[0] = 1;
      l[1] = 0;
      CHECK(auc(s, l) == brute_auc(s, l));
    }
  }

  TEST_CASE("MSE over nonzero responses") {
    CHECK(mse_nonzero(Eigen::Vector2d(2, 4), {2, 4}) == 0.0);
    CHECK(mse_nonzero(Eigen::Vector2d(3, 3), {2, 4}) == 1.0);
    CHECK(mse_nonzero(Eigen::Vector2d(5, 2), {0, 2}) == 0.0);
    CHECK(code_of([] { mse_nonzero(Eigen::Vector2d(5, 2), {0, 0}); }) ==
          ErrorCode::NoNonzeroValidation);
  }

  TEST_CASE("bias-corrected MSE") {
    CHECK(mse_corrected(Eigen::Vector2d(1, 0.5), Eigen::Vector2d(2, 4), {2, 0}) == 2.0);
    CHECK(mse_corrected(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, -1), {0, 0}) == 0.0);
    CHECK(mse_corrected(Eigen::Vector3d(0.5, 0.25, 1), Eigen::Vector3d(4, 8, 1.5), {2, 2, 1.5}) == 0.0);
  }

  TEST_CASE("cross-validated log-likelihood") {
    const Dataset d = testing::toy_dataset(200, 41);
    const FittedZinModel m = fit_unconstrained(d, ModelSpec{});
    // saturated intercept model evaluated on its own training data
    CHECK(cv_loglik(m, d) == doctest::Approx(m.loglik).epsilon(1e-12));

    // hand-summed densities on five observations
    std::vector<std::size_t> rows{0, 1, 2, 3, 4};
    const Dataset v = d.subset(rows);
    const double p = 1.0 / (1.0 + std::exp(-m.params.beta0));
    double total = 0.0;
    for (double y : v.y) {
      if (y == 0.0) {
        total += std::log(1.0 - p);
      } else {
        const double r = y - m.params.gamma0;
        total += std::log(p) - 0.5 * std::log(2 * std::numbers::pi * m.params.sigma2) -
                 r * r / (2 * m.params.sigma2);
      }
    }
    CHECK(cv_loglik(m, v) == doctest::Approx(total).epsilon(1e-12));
  }

  TEST_CASE("single zero validation observation at one half") {
    Dataset d;
    d.y = {0.0, 1.0, 0.0, 2.0};
    const FittedZinModel m = fit_unconstrained(d, ModelSpec{});
    Dataset v;
    v.y = {0.0};
    CHECK(cv_loglik(m, v) == doctest::Approx(std::log(0.5)).epsilon(1e-9));
  }

  TEST_CASE("partitions are deterministic, disjoint and stratified") {
    const Dataset d = testing::toy_dataset(301, 42);
    MccvConfig cfg;
    cfg.seed = 77;
    const Partition a = draw_partition(d, cfg, 5);
    const Partition b = draw_partition(d, cfg, 5);
    const Partition c = draw_partition(d, cfg, 6);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.validation != c.validation);
    std::vector<std::size_t> all = a.train;
    all.insert(all.end(), a.validation.begin(), a.validation.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

    const std::size_t pos = d.count_nonzero();
    std::size_t vpos = 0;
    for (auto i : a.validation) vpos += d.nonzero(i) ? 1 : 0;
    CHECK(vpos == static_cast<std::size_t>(std::llround(0.5 * pos)));
    CHECK(a.validation.size() - vpos == static_cast<std::size_t>(std::llround(0.5 * (d.size() - pos))));
  }

  TEST_CASE("invalid configurations") {
    MccvConfig cfg;
    cfg.nu = 1.0;
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
    cfg.nu = 0.5;
    cfg.b = 0;
    CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("identical candidates give identical criteria") {
    SimConfig sc;
    sc.n = 300;
    sc.seed = 43;
    const auto sim = simulate_dataset(sc);
    MccvConfig cfg;
    cfg.b = 4;
    cfg.seed = 9;
    ModelSpec a = simulation_spec(true);
    ModelSpec b = a;
    b.name = "copy";
    const CvReport r = mccv(sim.data, {a, b}, cfg);
    REQUIRE(r.replications.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
      const Criteria& x = r.candidates[0].replications[k];
      const Criteria& y = r.candidates[1].replications[k];
      CHECK(std::abs(x.loglik - y.loglik) <= 1e-10 * std::abs(x.loglik));
      CHECK(x.auc == doctest::Approx(y.auc).epsilon(1e-10));
      CHECK(x.mse == doctest::Approx(y.mse).epsilon(1e-10));
      CHECK(x.mse_c == doctest::Approx(y.mse_c).epsilon(1e-10));
    }
  }

  TEST_CASE("mccv is reproducible and independent of the thread count") {
    SimConfig sc;
    sc.n = 300;
    sc.seed = 44;
    const auto sim = simulate_dataset(sc);
    MccvConfig cfg;
    cfg.b = 4;
    cfg.seed = 10;
    const std::vector<ModelSpec> cands{simulation_spec(true), simulation_spec(false)};
    const CvReport one = mccv(sim.data, cands, cfg);
    cfg.threads = 3;
    const CvReport three = mccv(sim.data, cands, cfg);
    REQUIRE(one.replications == three.replications);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(one.candidates[c].mean.loglik == three.candidates[c].mean.loglik);
      CHECK(one.candidates[c].mean.mse_c == three.candidates[c].mean.mse_c);
    }
    CHECK(one.selected == three.selected);
  }

  TEST_CASE("a candidate that cannot be fitted fails every replication") {
    SimConfig sc;
    sc.n = 200;
    sc.seed = 45;
    const auto sim = simulate_dataset(sc);
    MccvConfig cfg;
    cfg.b = 2;
    ModelSpec broken = simulation_spec(true);
    broken.constraint.initial_deltas["x1"] = std::nan("");
    CHECK(code_of([&] { mccv(sim.data, {simulation_spec(false), broken}, cfg); }) ==
          ErrorCode::AllReplicationsFailed);
  }

  TEST_CASE("parallel_for visits every index once") {
    std::vector<int> hits(97, 0);
    parallel_for(97, 4, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}
