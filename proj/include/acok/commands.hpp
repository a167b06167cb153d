#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "acok/io.hpp"

namespace acok {

/// Process exit statuses of the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitDivergence = 4,
};

struct TruthSummary {
  std::size_t grid_size = 0;
  long steps = 0;
  std::size_t snapshots = 0;
  double final_energy = 0.0;
  double final_volume_defect = 0.0;
  std::filesystem::path truth_path;
  std::filesystem::path diagnostics_path;  ///< empty unless diagnostics were requested
};

/// Runs the reference solver and writes the truth CSV (plus an optional
/// "t,energy,volume_defect" diagnostics CSV next to it).
TruthSummary cmd_generate_truth(const RunConfig& config, std::ostream& log);

struct TrainSummary {
  std::vector<ModelWindow> windows;
  std::vector<HistoryRow> history;
  std::vector<LossReport> final_reports;  ///< one per window
  std::filesystem::path model_path;
  std::filesystem::path log_path;
  std::filesystem::path report_path;
};

/// Trains on the truth file and writes the model bundle, training_log.csv and
/// final_report.csv into the output directory.
TrainSummary cmd_train(const RunConfig& config, std::ostream& log);

struct EvaluateSummary {
  std::vector<EvaluationRow> rows;
  std::filesystem::path evaluation_path;
  std::filesystem::path plot_path;
};

/// Scores a saved model against the truth file: evaluation.csv and
/// plot_data.csv in the output directory.
EvaluateSummary cmd_evaluate(const RunConfig& config, std::ostream& log);

/// Maps the exception currently being handled to an exit status, printing
/// its message to err.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace acok
