#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "acok/spectral.hpp"
#include "acok/trainer.hpp"

namespace acok {

/// Reference-solver settings.
struct SolverSettings {
  std::size_t grid_size = 512;
  double dt = 1e-6;
  double kappa = -1.0;  ///< negative: default_kappa(physics)
  std::size_t snapshot_stride = 1;
  std::string initial_condition;  ///< optional (x, u) CSV
  bool diagnostics = false;       ///< also write per-snapshot energy and volume

  double resolved_kappa(const AcokParams& physics) const {
    return kappa < 0.0 ? default_kappa(physics) : kappa;
  }
};

/// Everything one CLI invocation needs.
struct RunConfig {
  TrainConfig train;
  SolverSettings solver;
  std::string truth_file = "truth.csv";
  std::string output_dir = "out";
  std::string model_file;  ///< empty: <output_dir>/model.txt
  std::size_t windows = 1;
  std::size_t eval_times = 11;
  long snapshot_every = 0;
  bool log_wall_time = false;

  const AcokParams& physics() const noexcept { return train.physics; }
  std::filesystem::path model_path() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Sets one key from its text value. Unknown keys and unparsable values throw
/// ConfigError naming the key.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat "key = value" text: one setting per line, '#' starts a comment.
RunConfig parse_config_text(std::string_view text, std::string_view source = "<config>");
RunConfig parse_config_file(const std::filesystem::path& path);

/// Every key with its current value, in a form parse_config_text accepts.
std::string format_config(const RunConfig& config);

/// Names of all recognised keys.
std::vector<std::string> config_keys();

// Truth snapshots: CSV "t,x,u,nu", time-major, 17 significant digits.
void write_truth_csv(const std::filesystem::path& path, const TruthSeries& truth);
TruthSeries read_truth_csv(const std::filesystem::path& path);

/// Initial condition CSV "x,u" on the uniform periodic grid of half-width X.
Field1D read_initial_condition_csv(const std::filesystem::path& path, double half_width);
void write_initial_condition_csv(const std::filesystem::path& path, const Field1D& u);

/// Model bundle: one or more time windows, each holding Net_u and Net_v
/// snapshots in the acok-mlp text format.
void write_model(const std::filesystem::path& path, const std::vector<ModelWindow>& windows);
std::vector<ModelWindow> read_model(const std::filesystem::path& path);

void write_training_log(const std::filesystem::path& path, const std::vector<HistoryRow>& history);
std::vector<HistoryRow> read_training_log(const std::filesystem::path& path);

void write_evaluation_csv(const std::filesystem::path& path, const std::vector<EvaluationRow>& rows);
std::vector<EvaluationRow> read_evaluation_csv(const std::filesystem::path& path);

/// Plot-ready grids "t,x,u_pred,u_truth,nu_pred,nu_truth".
void write_plot_csv(const std::filesystem::path& path, const PredictFn& predict,
                    const TruthSeries& truth, std::span<const double> times);

}  // namespace acok
