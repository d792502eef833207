#include "zinreg/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "zinreg/error.hpp"

namespace zinreg {

void MccvConfig::validate() const {
  if (b < 1) throw Error(ErrorCode::InvalidConfig, "mccv replications must be at least 1");
  if (!(nu > 0.0 && nu < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "validation fraction must lie in (0, 1)");
  }
  if (threads < 1) throw Error(ErrorCode::InvalidConfig, "threads must be at least 1");
}

Partition draw_partition(const Dataset& data, const MccvConfig& cfg, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(rep)};
  std::mt19937_64 rng(seq);
  std::vector<std::vector<std::size_t>> groups(cfg.stratified ? 2 : 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    groups[cfg.stratified && data.nonzero(i) ? 1 : 0].push_back(i);
  }
  Partition part;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    const auto nv = static_cast<std::size_t>(std::llround(cfg.nu * static_cast<double>(g.size())));
    part.validation.insert(part.validation.end(), g.begin(), g.begin() + static_cast<long>(nv));
    part.train.insert(part.train.end(), g.begin() + static_cast<long>(nv), g.end());
  }
  std::sort(part.train.begin(), part.train.end());
  std::sort(part.validation.begin(), part.validation.end());
  return part;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Mid-ranks; the positive-class rank sum gives the Mann-Whitney count.
  double rank_sum = 0.0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        rank_sum += mid;
        ++n1;
      }
    }
    i = j;
  }
  const std::size_t n0 = n - n1;
  if (n1 == 0 || n0 == 0) throw Error(ErrorCode::SingleClass, "AUC needs both classes");
  const double d1 = static_cast<double>(n1);
  const double u = rank_sum - d1 * (d1 + 1.0) / 2.0;
  return u / (d1 * static_cast<double>(n0));
}

double mse_nonzero(const Eigen::VectorXd& mu, const std::vector<double>& y) {
  double ss = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    const double r = mu[static_cast<Eigen::Index>(i)] - y[i];
    ss += r * r;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::NoNonzeroValidation, "validation set has no nonzero response");
  return ss / static_cast<double>(count);
}

double mse_corrected(const Eigen::VectorXd& p, const Eigen::VectorXd& mu,
                     const std::vector<double>& y) {
  if (y.empty()) throw Error(ErrorCode::DimensionMismatch, "empty validation set");
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double r = p[ii] * mu[ii] - y[i];
    ss += r * r;
  }
  return ss / static_cast<double>(y.size());
}

double cv_loglik(const FittedZinModel& model, const Dataset& validation) {
  model.structure.check_schema(validation);
  return log_likelihood(model.params, model.structure, validation);
}

double mse_nonzero(const FittedZinModel& model, const Dataset& validation) {
  return mse_nonzero(predict(model.params, model.structure, validation).mu, validation.y);
}

double mse_corrected(const FittedZinModel& model, const Dataset& validation) {
  const Predictions pr = predict(model.params, model.structure, validation);
  return mse_corrected(pr.p, pr.mu, validation.y);
}

Criteria evaluate_criteria(const FittedZinModel& model, const Dataset& validation) {
  const Predictions pr = predict(model.params, model.structure, validation);
  Criteria c;
  c.loglik = log_likelihood(model.params, model.structure, validation);
  c.auc = auc(std::vector<double>(pr.p.data(), pr.p.data() + pr.p.size()),
              validation.nonzero_indicator());
  c.mse = mse_nonzero(pr.mu, validation.y);
  c.mse_c = mse_corrected(pr.p, pr.mu, validation.y);
  return c;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::string structure_key(const ModelSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  auto part = [&](const PartSpec& p) {
    for (const auto& s : p.parametric) os << s << ',';
    os << '|';
    for (const auto& s : p.smooths) os << s.covariate << ':' << s.n_knots << ',';
    os << '|';
  };
  part(spec.binary);
  part(spec.mean);
  os << link_name(spec.link) << '|' << spec.shrinkage << '|' << spec.clamp;
  return os.str();
}

struct RepOutcome {
  std::vector<std::optional<Criteria>> criteria;  // per candidate
};

Criteria mean_of(const std::vector<Criteria>& v) {
  Criteria m;
  for (const auto& c : v) {
    m.loglik += c.loglik;
    m.auc += c.auc;
    m.mse += c.mse;
    m.mse_c += c.mse_c;
  }
  const double k = static_cast<double>(v.size());
  m.loglik /= k;
  m.auc /= k;
  m.mse /= k;
  m.mse_c /= k;
  return m;
}

Criteria se_of(const std::vector<Criteria>& v, const Criteria& m) {
  Criteria s;
  if (v.size() < 2) return s;
  for (const auto& c : v) {
    s.loglik += std::pow(c.loglik - m.loglik, 2);
    s.auc += std::pow(c.auc - m.auc, 2);
    s.mse += std::pow(c.mse - m.mse, 2);
    s.mse_c += std::pow(c.mse_c - m.mse_c, 2);
  }
  const double k = static_cast<double>(v.size());
  const double f = 1.0 / ((k - 1.0) * k);
  s.loglik = std::sqrt(s.loglik * f);
  s.auc = std::sqrt(s.auc * f);
  s.mse = std::sqrt(s.mse * f);
  s.mse_c = std::sqrt(s.mse_c * f);
  return s;
}

}  // namespace

CvReport mccv(const Dataset& data, const std::vector<ModelSpec>& candidates, const MccvConfig& cfg,
              const FitOptions& options) {
  cfg.validate();
  if (candidates.empty()) throw Error(ErrorCode::InvalidConfig, "no candidate models");
  for (const auto& c : candidates) c.validate(data);

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.b));
  parallel_for(cfg.b, cfg.threads, [&](int rep) {
    const Partition part = draw_partition(data, cfg, rep);
    const Dataset train = data.subset(part.train);
    const Dataset valid = data.subset(part.validation);
    RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];
    out.criteria.resize(candidates.size());
    // Unconstrained fits are shared by candidates with the same terms.
    std::map<std::string, std::optional<FittedZinModel>> base;
    auto base_fit = [&](const ModelSpec& spec) -> const FittedZinModel* {
      const std::string key = structure_key(spec);
      auto it = base.find(key);
      if (it == base.end()) {
        std::optional<FittedZinModel> fit;
        try {
          fit = fit_unconstrained(train, spec.without_constraint(), options);
        } catch (const Error&) {
        }
        it = base.emplace(key, std::move(fit)).first;
      }
      return it->second ? &*it->second : nullptr;
    };
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const ModelSpec& spec = candidates[c];
      try {
        const FittedZinModel* unc = base_fit(spec);
        if (unc == nullptr || !unc->converged) continue;
        if (spec.constraint.empty()) {
          out.criteria[c] = evaluate_criteria(*unc, valid);
        } else {
          const FittedZinModel fit = fit_constrained(train, spec, options, unc);
          if (!fit.converged) continue;
          out.criteria[c] = evaluate_criteria(fit, valid);
        }
      } catch (const Error&) {
      }
    }
  });

  CvReport report;
  report.candidates.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    report.candidates[c].name = candidates[c].name;
    report.candidates[c].constrained_terms = candidates[c].constraint.terms;
  }
  for (int rep = 0; rep < cfg.b; ++rep) {
    const RepOutcome& o = outcomes[static_cast<std::size_t>(rep)];
    bool ok = true;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (!o.criteria[c]) {
        ok = false;
        ++report.candidates[c].failures;
      }
    }
    if (!ok) {
      ++report.failed_replications;
      continue;
    }
    report.replications.push_back(rep);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      report.candidates[c].replications.push_back(*o.criteria[c]);
    }
  }
  if (report.replications.empty()) {
    throw Error(ErrorCode::AllReplicationsFailed, "every MCCV replication failed");
  }
  for (auto& cand : report.candidates) {
    cand.mean = mean_of(cand.replications);
    cand.se = se_of(cand.replications, cand.mean);
  }
  for (std::size_t c = 1; c < report.candidates.size(); ++c) {
    if (report.candidates[c].mean.loglik > report.candidates[report.selected].mean.loglik) {
      report.selected = c;
    }
  }
  return report;
}

}  // namespace zinreg
