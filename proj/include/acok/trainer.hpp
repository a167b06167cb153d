#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "acok/losses.hpp"
#include "acok/mlp.hpp"
#include "acok/model.hpp"
#include "acok/optimizers.hpp"
#include "acok/sampling.hpp"
#include "acok/spectral.hpp"

namespace acok {

/// Ten hidden tanh layers of width 20 mapping (t, x) to (u, nu).
std::vector<int> default_netu_layers();
/// Three hidden tanh layers of width 10 mapping t to v.
std::vector<int> default_netv_layers();

struct TrainConfig {
  AcokParams physics;
  double t_max = 1e-3;
  long epochs = 495;
  std::size_t n_initial = 500;
  std::size_t n_boundary = 95;
  std::size_t n_interior = 20000;
  std::size_t n_time_uniform = 20;
  std::size_t n_x_uniform = 0;  ///< 0: the truth grid size
  LossWeights weights = LossWeights::standard();
  std::vector<int> netu_layers = default_netu_layers();
  std::vector<int> netv_layers = default_netv_layers();
  int rescale_power = 1;
  std::size_t minibatch_size = 0;  ///< 0: full batch
  std::uint64_t seed = 1234;
  AdamSettings adam;
  LbfgsSettings lbfgs;
  bool staged = false;
  std::size_t chunk_size = 2048;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Everything except the training horizon.
  void validate_settings() const;
};

/// One network pair valid on [t_start, t_end].
struct ModelWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  MlpParams netu;
  MlpParams netv;

  /// u and nu at time t for every x.
  void predict(double t, std::span<const double> x, std::span<double> u,
               std::span<double> nu) const;
  /// Integral-network output v(t).
  double integral(double t) const;

  bool operator==(const ModelWindow&) const = default;
};

struct HistoryRow {
  std::string phase;  ///< "adam" or "lbfgs"
  long iteration = 0;
  LossReport report;
  double wall_time = 0.0;
};

struct TrainedModel {
  ModelWindow model;
  LossReport final_report;
  std::vector<HistoryRow> history;
  TrainConfig config;
  LbfgsTermination lbfgs_termination = LbfgsTermination::MaxIterations;
  long lbfgs_iterations = 0;
};

/// Piecewise-in-time model: window k answers for t in (t_start_k, t_end_k],
/// the first window also for its own t_start.
struct StitchedModel {
  std::vector<ModelWindow> windows;

  const ModelWindow& window_for(double t) const;
  void predict(double t, std::span<const double> x, std::span<double> u,
               std::span<double> nu) const;
};

using PredictFn =
    std::function<void(double t, std::span<const double> x, std::span<double> u, std::span<double> nu)>;

struct TrainHooks {
  /// Called after each ADAM epoch with the current networks.
  std::function<void(long epoch, const ModelWindow&)> on_epoch;
  /// Called for each appended history row.
  std::function<void(const HistoryRow&)> on_history;
  bool record_wall_time = false;
};

/// ADAM epochs followed by L-BFGS on the joint (Net_u, Net_v) parameters,
/// starting from the truth at t = 0. Throws DivergenceError on a non-finite
/// loss, reporting the epoch.
TrainedModel train(const TrainConfig& config, const TruthSeries& truth,
                   const TrainHooks& hooks = {});

/// Trains on [t_start, t_start + duration] from the given initial fields.
TrainedModel train_window(const TrainConfig& config, const Field1D& u0, const Field1D& nu0,
                          double t_start, double duration, const TrainHooks& hooks = {});

struct AdaptiveResult {
  std::vector<TrainedModel> windows;
  StitchedModel stitched;
  /// Initial data handed to each window (window 0 gets the truth).
  std::vector<Field1D> handoff_u;
  std::vector<Field1D> handoff_nu;
};

/// Splits [0, t_max] into equal windows and trains them in sequence, each
/// starting from the previous window's prediction at its final time. Boundary,
/// interior, and uniform-time counts are divided by n_windows (rounded up) so
/// the point density per unit time matches a single run; seeds differ per
/// window except the first.
AdaptiveResult train_time_adaptive(const TrainConfig& config, const TruthSeries& truth,
                                   std::size_t n_windows, const TrainHooks& hooks = {});

struct EvaluationRow {
  double t = 0.0;
  double rel_l2_u = 0.0;
  double rel_l2_nu = 0.0;
  double volume_defect = 0.0;  ///< sum (f(u) - omega) dx of the prediction
  double nu_mean = 0.0;        ///< discrete mean of the predicted nu
  double nu_max_abs = 0.0;
};

/// Scores a predictor against the truth grid at each requested time.
std::vector<EvaluationRow> evaluate(const PredictFn& predict, const TruthSeries& truth,
                                    std::span<const double> times, const AcokParams& physics);

/// n equispaced times covering [t_begin, t_end].
std::vector<double> evaluation_times(double t_begin, double t_end, std::size_t n = 11);

}  // namespace acok
