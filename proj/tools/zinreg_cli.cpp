// zinreg: fit, compare and simulate semiparametric zero-inflated normal models.

#include <iostream>

#include "CLI11.hpp"

#include "zinreg/error.hpp"
#include "zinreg/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric zero-inflated normal regression"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 0;
  std::string candidate;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON analysis config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->add_option("-j,--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* fit = app.add_subcommand("fit", "fit one candidate model");
  add_common(fit);
  fit->add_option("--candidate", candidate, "candidate name (default: first)");

  auto* select = app.add_subcommand("select", "compare candidates by Monte Carlo cross-validation");
  add_common(select);

  auto* simulate = app.add_subcommand("simulate", "run the selection success-rate study");
  add_common(simulate);

  std::string model_path;
  std::string data_path;
  std::string pred_out = "predictions.csv";
  std::string delimiter = ",";
  auto* predict = app.add_subcommand("predict", "predict from a saved model");
  predict->add_option("-m,--model", model_path, "model.json from 'fit'")->required()->check(CLI::ExistingFile);
  predict->add_option("-d,--data", data_path, "delimited covariate file")->required()->check(CLI::ExistingFile);
  predict->add_option("-o,--out", pred_out, "output file");
  predict->add_option("--delimiter", delimiter, "field delimiter");

  CLI11_PARSE(app, argc, argv);

  try {
    if (predict->parsed()) {
      if (delimiter.size() != 1) throw zinreg::Error(zinreg::ErrorCode::InvalidConfig, "delimiter must be one character");
      return zinreg::command_predict(model_path, data_path, pred_out, delimiter[0], std::cerr);
    }
    const zinreg::AnalysisConfig config = zinreg::load_config(config_path);
    zinreg::CommandOverrides o;
    if (fit->count("--seed") + select->count("--seed") + simulate->count("--seed") > 0) o.seed = seed;
    if (!out_dir.empty()) o.output = out_dir;
    if (threads > 0) o.threads = threads;
    if (!candidate.empty()) o.candidate = candidate;
    if (fit->parsed()) return zinreg::command_fit(config, o, std::cerr);
    if (select->parsed()) return zinreg::command_select(config, o, std::cerr);
    return zinreg::command_simulate(config, o, std::cerr);
  } catch (const zinreg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
