#include <algorithm>
#include <fstream>
#include <sstream>

#include "zinreg/error.hpp"
#include "zinreg/io.hpp"

namespace zinreg {

namespace {

std::filesystem::path output_dir(const AnalysisConfig& config, const CommandOverrides& o) {
  const std::filesystem::path dir = o.output ? *o.output : config.output;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

LoadedData load_input(const AnalysisConfig& config, std::ostream& log) {
  if (config.input.empty()) throw Error(ErrorCode::InvalidConfig, "config has no 'input' file");
  if (config.response.empty()) throw Error(ErrorCode::InvalidConfig, "config has no 'response'");
  LoadedData d = load_csv(config.input, config);
  log << "loaded " << d.data.size() << " rows from " << config.input.string();
  if (d.dropped > 0) log << " (" << d.dropped << " dropped for missing values)";
  log << '\n';
  return d;
}

}  // namespace

int command_fit(const AnalysisConfig& config, const CommandOverrides& overrides, std::ostream& log) {
  const LoadedData d = load_input(config, log);
  const ModelSpec spec = config.candidate_spec(overrides.candidate.value_or(""));
  const FittedZinModel model = fit_model(d.data, spec);
  const InferenceReport report = inference_report(model);
  const auto dir = output_dir(config, overrides);

  {
    auto out = open_out(dir / "model.json");
    out << model_to_json(model) << '\n';
  }
  {
    auto out = open_out(dir / "coefficients.csv");
    write_coefficient_table(out, report);
  }
  {
    auto out = open_out(dir / "smooths.csv");
    write_smooth_table(out, report);
  }
  {
    auto out = open_out(dir / "deltas.csv");
    write_delta_table(out, report);
  }
  {
    auto out = open_out(dir / "grids.csv");
    write_smooth_grids(out, model);
  }
  {
    auto out = open_out(dir / "summary.txt");
    if (d.dropped > 0) out << "Rows dropped for missing values: " << d.dropped << "\n";
    write_summary(out, model, report);
  }
  for (const auto& w : model.warnings) log << "warning: " << w << '\n';
  if (!model.converged) {
    log << "fit did not converge (gradient norm " << format_number(model.gradient_norm) << ")\n";
    return 2;
  }
  log << "fit '" << spec.name << "' written to " << dir.string() << '\n';
  return 0;
}

int command_select(const AnalysisConfig& config, const CommandOverrides& overrides,
                   std::ostream& log) {
  if (config.candidates.size() < 2) {
    throw Error(ErrorCode::InvalidConfig, "select needs at least two candidates");
  }
  const LoadedData d = load_input(config, log);
  std::vector<ModelSpec> specs;
  for (const auto& c : config.candidates) specs.push_back(config.candidate_spec(c));
  MccvConfig cfg = config.mccv;
  cfg.seed = overrides.seed.value_or(config.seed);
  cfg.threads = overrides.threads.value_or(config.threads);
  const CvReport report = mccv(d.data, specs, cfg);
  const auto dir = output_dir(config, overrides);

  std::vector<std::string> smooth_terms;
  for (const auto& s : config.model.mean.smooths) {
    if (config.model.binary.has_smooth(s.covariate)) smooth_terms.push_back(s.covariate);
  }
  {
    auto out = open_out(dir / "cv_report.csv");
    write_cv_report(out, report, smooth_terms);
  }
  {
    auto out = open_out(dir / "cv_replications.csv");
    out << "replication,model,loglik,auc,mse,mse_c\n";
    for (std::size_t k = 0; k < report.replications.size(); ++k) {
      for (const auto& cand : report.candidates) {
        const Criteria& c = cand.replications[k];
        out << report.replications[k] << ',' << cand.name << ',' << format_number(c.loglik) << ','
            << format_number(c.auc) << ',' << format_number(c.mse) << ',' << format_number(c.mse_c)
            << '\n';
      }
    }
  }
  log << "selected '" << report.candidates[report.selected].name << "' over "
      << report.replications.size() << " replications (" << report.failed_replications
      << " failed)\n";
  return 0;
}

int command_simulate(const AnalysisConfig& config, const CommandOverrides& overrides,
                     std::ostream& log) {
  SimConfig base;
  base.seed = overrides.seed.value_or(config.seed);
  base.replications = config.simulation.replications;
  base.mccv = config.mccv;
  base.n = config.simulation.n.front();
  base.sigma = config.simulation.sigma.front();
  const int threads = overrides.threads.value_or(config.threads);
  const SuccessRateTable table =
      run_success_rate_study(config.simulation.n, config.simulation.sigma, base, {}, threads);
  const auto dir = output_dir(config, overrides);
  {
    auto out = open_out(dir / "success_rates.csv");
    write_success_table(out, table);
  }
  {
    auto out = open_out(dir / "success_records.csv");
    write_success_records(out, table);
  }
  log << "simulated " << table.rows.size() << " cells x " << base.replications
      << " replications\n";
  return 0;
}

int command_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                    const std::filesystem::path& out_path, char delimiter, std::ostream& log) {
  std::ifstream in(model_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + model_path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const LoadedModel m = model_from_json(ss.str());

  AnalysisConfig cfg;
  cfg.delimiter = delimiter;
  for (const auto& [name, levels] : m.structure.factor_levels) cfg.factors[name] = levels.front();
  for (const auto* part : {&m.structure.binary, &m.structure.mean}) {
    for (const auto& pc : part->parametric) {
      if (pc.level.empty() && std::find(cfg.continuous.begin(), cfg.continuous.end(), pc.covariate) ==
                                  cfg.continuous.end()) {
        cfg.continuous.push_back(pc.covariate);
      }
    }
    for (const auto& sc : part->smooths) {
      if (std::find(cfg.continuous.begin(), cfg.continuous.end(), sc.covariate) ==
          cfg.continuous.end()) {
        cfg.continuous.push_back(sc.covariate);
      }
    }
  }
  // Reference levels of the new file need not match; columns are matched by level name.
  for (auto& [name, ref] : cfg.factors) ref.reset();
  const LoadedData d = load_csv(data_path, cfg, false);
  const Predictions pred = predict(m.params, m.structure, d.data);
  auto out = open_out(out_path);
  write_predictions(out, pred);
  log << "wrote " << pred.p.size() << " predictions to " << out_path.string();
  if (d.dropped > 0) log << " (" << d.dropped << " rows dropped for missing values)";
  log << '\n';
  return 0;
}

}  // namespace zinreg
