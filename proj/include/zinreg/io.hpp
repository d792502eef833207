#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "zinreg/fit.hpp"
#include "zinreg/selection.hpp"
#include "zinreg/simgen.hpp"

namespace zinreg {

enum class Transform { Identity, Log1p };

struct CandidateConfig {
  std::string name;
  std::vector<std::string> constrained;
  std::map<std::string, double> initial_deltas;
};

struct SimulationConfig {
  std::vector<int> n{400};
  std::vector<double> sigma{0.5};
  int replications = 100;
};

struct AnalysisConfig {
  std::filesystem::path input;  // may be empty for simulate
  char delimiter = ',';
  std::string response;
  Transform transform = Transform::Identity;
  std::map<std::string, std::optional<std::string>> factors;  // column -> reference level
  std::vector<std::string> continuous;
  ModelSpec model;  // terms, link, knots, shrinkage; constraint left empty
  std::vector<CandidateConfig> candidates;
  MccvConfig mccv;
  SimulationConfig simulation;
  std::uint64_t seed = 1;
  std::filesystem::path output = "zinreg_out";
  int threads = 1;

  /// Columns that the data file must provide.
  std::vector<std::string> used_columns() const;
  /// Throws InvalidConfig when terms reference undeclared columns or
  /// candidates constrain terms not smoothed in both parts.
  void validate() const;
  ModelSpec candidate_spec(const CandidateConfig& c) const;
  /// The named candidate, or the first one; an unconstrained model if none are declared.
  ModelSpec candidate_spec(const std::string& name) const;
};

/// Parses the JSON configuration; relative paths resolve against `base_dir`.
AnalysisConfig parse_config(const std::string& json_text,
                            const std::filesystem::path& base_dir = {});
AnalysisConfig load_config(const std::filesystem::path& path);

struct LoadedData {
  Dataset data;
  std::size_t dropped = 0;  // rows removed for missing values
};

/// Reads a delimited file with a header row. Rows with a missing value in
/// any used column are dropped. Without `with_response` the response column
/// is not required and y is set to zero.
LoadedData load_csv(const std::filesystem::path& path, const AnalysisConfig& config,
                    bool with_response = true);
LoadedData parse_csv(std::istream& in, const AnalysisConfig& config, bool with_response = true);

/// Full fitted state needed for prediction.
std::string model_to_json(const FittedZinModel& model);
struct LoadedModel {
  ModelStructure structure;
  ZinParams params;
};
LoadedModel model_from_json(const std::string& text);

/// Number formatting used by every data table.
std::string format_number(double v);
/// Three-decimal formatting for human-readable summaries; "NA" when empty.
std::string format_summary(std::optional<double> v);

void write_coefficient_table(std::ostream& os, const InferenceReport& report, char delim = ',');
void write_smooth_table(std::ostream& os, const InferenceReport& report, char delim = ',');
void write_delta_table(std::ostream& os, const InferenceReport& report, char delim = ',');
/// Table 2/3-shaped plain-text summary at three decimals.
void write_summary(std::ostream& os, const FittedZinModel& model, const InferenceReport& report);
/// 200-point evaluation grids with 95% bands for every smooth.
void write_smooth_grids(std::ostream& os, const FittedZinModel& model, int points = 200,
                        char delim = ',');
void write_cv_report(std::ostream& os, const CvReport& report,
                     const std::vector<std::string>& smooth_terms, char delim = ',');
void write_success_table(std::ostream& os, const SuccessRateTable& table, char delim = ',');
void write_success_records(std::ostream& os, const SuccessRateTable& table, char delim = ',');
void write_predictions(std::ostream& os, const Predictions& pred, char delim = ',');

struct CommandOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
  std::optional<int> threads;
  std::optional<std::string> candidate;
};

/// Each returns a process exit status and writes its files into the output directory.
int command_fit(const AnalysisConfig& config, const CommandOverrides& overrides, std::ostream& log);
int command_select(const AnalysisConfig& config, const CommandOverrides& overrides,
                   std::ostream& log);
int command_simulate(const AnalysisConfig& config, const CommandOverrides& overrides,
                     std::ostream& log);
int command_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                    const std::filesystem::path& out_path, char delimiter, std::ostream& log);

}  // namespace zinreg
