#include "acok/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "acok/errors.hpp"
#include "acok/objective.hpp"

namespace acok {

std::vector<int> default_netu_layers() {
  std::vector<int> layers{2};
  layers.insert(layers.end(), 10, 20);
  layers.push_back(2);
  return layers;
}

std::vector<int> default_netv_layers() { return {1, 10, 10, 10, 1}; }

void TrainConfig::validate() const {
  validate_settings();
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be a finite positive time");
}

void TrainConfig::validate_settings() const {
  physics.validate();
  weights.validate();
  adam.validate();
  lbfgs.validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (n_initial < 1) throw ConfigError("n_initial must be >= 1");
  if (n_boundary < 1) throw ConfigError("n_boundary must be >= 1");
  if (n_interior < 1) throw ConfigError("n_interior must be >= 1");
  if (n_time_uniform < 1) throw ConfigError("n_time_uniform must be >= 1");
  if (rescale_power < 1 || rescale_power > 3) throw ConfigError("rescale_power must be 1, 2, or 3");
  if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  try {
    validate_layer_sizes(netu_layers);
    validate_layer_sizes(netv_layers);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("network layers: ") + e.what());
  }
  if (netu_layers.front() != 2 || netu_layers.back() != 2) {
    throw ConfigError("netu_layers must start and end with width 2");
  }
  if (netv_layers.front() != 1 || netv_layers.back() != 1) {
    throw ConfigError("netv_layers must start and end with width 1");
  }
}

void ModelWindow::predict(double t, std::span<const double> x, std::span<double> u,
                          std::span<double> nu) const {
  if (u.size() != x.size() || nu.size() != x.size()) {
    throw std::invalid_argument("predict: output spans must match x");
  }
  Eigen::MatrixXd in(2, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    in(0, static_cast<Eigen::Index>(i)) = t;
    in(1, static_cast<Eigen::Index>(i)) = x[i];
  }
  ValueTape tape(netu, in);
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = tape.outputs()(0, static_cast<Eigen::Index>(i));
    nu[i] = tape.outputs()(1, static_cast<Eigen::Index>(i));
  }
}

double ModelWindow::integral(double t) const {
  const double in[1] = {t};
  return forward(netv, in)(0);
}

const ModelWindow& StitchedModel::window_for(double t) const {
  if (windows.empty()) throw std::logic_error("StitchedModel: no windows");
  for (const auto& w : windows) {
    if (t <= w.t_end) return w;
  }
  return windows.back();
}

void StitchedModel::predict(double t, std::span<const double> x, std::span<double> u,
                            std::span<double> nu) const {
  window_for(t).predict(t, x, u, nu);
}

namespace {

constexpr std::uint64_t kNetuStream = 10;
constexpr std::uint64_t kNetvStream = 11;
constexpr std::uint64_t kBatchStream = 12;

void set_input_map(MlpParams& net, double t_start, double duration, double half_width) {
  net.input_shift()(0) = t_start + 0.5 * duration;
  net.input_scale()(0) = 2.0 / duration;
  if (net.input_width() == 2) {
    net.input_shift()(1) = 0.0;
    net.input_scale()(1) = 1.0 / half_width;
  }
}

bool finite_report(const LossReport& r) {
  if (!std::isfinite(r.total)) return false;
  for (double c : r.components()) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

class HistoryRecorder {
 public:
  HistoryRecorder(std::vector<HistoryRow>& rows, const TrainHooks& hooks)
      : rows_(rows), hooks_(hooks), start_(std::chrono::steady_clock::now()) {}

  void add(const char* phase, long iteration, const LossReport& report) {
    HistoryRow row;
    row.phase = phase;
    row.iteration = iteration;
    row.report = report;
    if (hooks_.record_wall_time) {
      row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    rows_.push_back(row);
    if (hooks_.on_history) hooks_.on_history(rows_.back());
  }

 private:
  std::vector<HistoryRow>& rows_;
  const TrainHooks& hooks_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch,
                                                   std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> batches;
  if (batch == 0 || batch >= n) {
    batches.emplace_back();  // empty subset selects every point in sample order
    return batches;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t start = 0; start < n; start += batch) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
  }
  return batches;
}

}  // namespace

TrainedModel train_window(const TrainConfig& config, const Field1D& u0, const Field1D& nu0,
                          double t_start, double duration, const TrainHooks& hooks) {
  config.validate();
  require_same_grid(u0, nu0, "train_window");
  if (u0.half_width() != config.physics.half_width) {
    throw ConfigError("initial data half_width differs from the configured half_width");
  }
  if (!(duration > 0.0)) throw ConfigError("training window must have positive duration");

  SamplingPlan plan;
  plan.n_initial = config.n_initial;
  plan.n_boundary = config.n_boundary;
  plan.n_interior = config.n_interior;
  plan.n_time_uniform = config.n_time_uniform;
  plan.n_x_uniform = config.n_x_uniform == 0 ? u0.size() : config.n_x_uniform;
  plan.rescale_power = config.rescale_power;
  plan.seed = config.seed;
  if (plan.n_initial > u0.size()) {
    throw ConfigError("n_initial exceeds the number of grid points in the initial data");
  }
  SampleSet samples = build_sample_set(plan, u0, nu0, t_start, duration);

  ModelWindow window;
  window.t_start = t_start;
  window.t_end = t_start + duration;
  window.netu = init_params(config.netu_layers, derive_seed(config.seed, kNetuStream));
  window.netv = init_params(config.netv_layers, derive_seed(config.seed, kNetvStream));
  set_input_map(window.netu, t_start, duration, config.physics.half_width);
  set_input_map(window.netv, t_start, duration, config.physics.half_width);

  PinnObjective objective(std::move(samples), window.netu, window.netv, config.physics,
                          config.weights, config.chunk_size);
  const std::size_t n_params = objective.parameter_count();
  const std::size_t n_u = objective.netu_parameter_count();
  const std::vector<double> packed = objective.pack(window.netu, window.netv);
  Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(packed.data(), static_cast<Eigen::Index>(n_params));
  Eigen::VectorXd grad(static_cast<Eigen::Index>(n_params));
  const auto theta_span = [&]() { return std::span<const double>(theta.data(), n_params); };
  const auto grad_span = [&]() { return std::span<double>(grad.data(), n_params); };

  TrainedModel result;
  result.config = config;
  HistoryRecorder recorder(result.history, hooks);
  std::mt19937_64 batch_rng(derive_seed(config.seed, kBatchStream));
  const std::size_t n_interior = objective.samples().interior.size();

  AdamState adam(static_cast<Eigen::Index>(n_params), config.adam);
  AdamState adam_u(static_cast<Eigen::Index>(n_u), config.adam);
  AdamState adam_v(static_cast<Eigen::Index>(n_params - n_u), config.adam);

  const auto checked = [](const LossReport& report, long epoch) {
    if (!finite_report(report)) {
      std::ostringstream msg;
      msg << "training diverged: non-finite loss at epoch " << epoch;
      throw DivergenceError(msg.str(), epoch);
    }
  };

  for (long epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = make_batches(n_interior, config.minibatch_size, batch_rng);
    std::array<double, 8> sum{};
    double total = 0.0;
    for (const auto& batch : batches) {
      LossReport report;
      if (!config.staged) {
        report = objective.evaluate(theta_span(), grad_span(), batch);
        checked(report, epoch);
        try {
          adam_step(adam, theta, grad);
        } catch (const DivergenceError&) {
          throw DivergenceError("training diverged: non-finite gradient at epoch " +
                                    std::to_string(epoch),
                                epoch);
        }
      } else {
        // Alternating block updates: Net_v first, then Net_u at the new point.
        report = objective.evaluate(theta_span(), grad_span(), batch);
        checked(report, epoch);
        adam_step(adam_v, theta.tail(static_cast<Eigen::Index>(n_params - n_u)),
                  grad.tail(static_cast<Eigen::Index>(n_params - n_u)));
        checked(objective.evaluate(theta_span(), grad_span(), batch), epoch);
        adam_step(adam_u, theta.head(static_cast<Eigen::Index>(n_u)),
                  grad.head(static_cast<Eigen::Index>(n_u)));
      }
      const auto c = report.components();
      for (std::size_t k = 0; k < c.size(); ++k) sum[k] += c[k];
      total += report.total;
    }
    const double count = static_cast<double>(batches.size());
    for (double& s : sum) s /= count;
    LossReport mean = LossReport::from_components(sum);
    mean.total = total / count;
    recorder.add("adam", epoch, mean);
    if (hooks.on_epoch) {
      objective.unpack(theta_span(), window.netu, window.netv);
      hooks.on_epoch(epoch, window);
    }
  }

  // Reports of the trial points in the current line search, matched back to
  // the accepted step by its loss value.
  std::vector<LossReport> trials;
  const Objective lbfgs_objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const LossReport report = objective.evaluate(std::span<const double>(x.data(), n_params),
                                                 std::span<double>(g.data(), n_params));
    trials.push_back(report);
    return report.total;
  };
  const auto on_iteration = [&](const LbfgsProgress& progress) {
    LossReport accepted;
    accepted.total = progress.loss;
    for (auto it = trials.rbegin(); it != trials.rend(); ++it) {
      if (it->total == progress.loss) {
        accepted = *it;
        break;
      }
    }
    trials.clear();
    recorder.add("lbfgs", progress.iteration, accepted);
  };
  LbfgsResult refined = lbfgs_minimize(theta, lbfgs_objective, config.lbfgs, on_iteration);
  theta = refined.x;
  result.lbfgs_termination = refined.termination;
  result.lbfgs_iterations = refined.iterations;

  result.final_report = objective.evaluate(theta_span());
  checked(result.final_report, config.epochs);
  objective.unpack(theta_span(), window.netu, window.netv);
  result.model = std::move(window);
  return result;
}

TrainedModel train(const TrainConfig& config, const TruthSeries& truth, const TrainHooks& hooks) {
  config.validate();
  truth.validate();
  if (!truth.covers(0.0) || !truth.covers(config.t_max)) {
    std::ostringstream msg;
    msg << "truth covers [" << truth.t_begin() << ", " << truth.t_end()
        << "] but training needs [0, " << config.t_max << "]";
    throw ConfigError(msg.str());
  }
  return train_window(config, truth.u_at(0.0), truth.nu_at(0.0), 0.0, config.t_max, hooks);
}

AdaptiveResult train_time_adaptive(const TrainConfig& config, const TruthSeries& truth,
                                   std::size_t n_windows, const TrainHooks& hooks) {
  config.validate();
  truth.validate();
  if (n_windows < 1) throw ConfigError("windows must be >= 1");
  if (!truth.covers(0.0) || !truth.covers(config.t_max)) {
    throw ConfigError("truth does not cover the training horizon");
  }
  const auto per_window = [n_windows](std::size_t count) {
    return std::max<std::size_t>(1, (count + n_windows - 1) / n_windows);
  };
  TrainConfig window_config = config;
  window_config.n_boundary = per_window(config.n_boundary);
  window_config.n_interior = per_window(config.n_interior);
  window_config.n_time_uniform = per_window(config.n_time_uniform);
  const double duration = config.t_max / static_cast<double>(n_windows);

  AdaptiveResult result;
  Field1D u0 = truth.u_at(0.0);
  Field1D nu0 = truth.nu_at(0.0);
  for (std::size_t k = 0; k < n_windows; ++k) {
    result.handoff_u.push_back(u0);
    result.handoff_nu.push_back(nu0);
    window_config.seed = k == 0 ? config.seed : derive_seed(config.seed, 100 + k);
    // Interfaces are shared exactly: each window starts at the previous t_end
    // and the last one ends at t_max.
    const double t_start = k == 0 ? 0.0 : result.stitched.windows.back().t_end;
    const double length = k + 1 == n_windows ? config.t_max - t_start : duration;
    TrainedModel trained = train_window(window_config, u0, nu0, t_start, length, hooks);
    if (k + 1 < n_windows) {
      const std::vector<double> xs = u0.coordinates();
      trained.model.predict(trained.model.t_end, xs, u0.values(), nu0.values());
    }
    result.stitched.windows.push_back(trained.model);
    result.windows.push_back(std::move(trained));
  }
  return result;
}

std::vector<EvaluationRow> evaluate(const PredictFn& predict, const TruthSeries& truth,
                                    std::span<const double> times, const AcokParams& physics) {
  truth.validate();
  std::vector<EvaluationRow> rows;
  for (double t : times) {
    if (!truth.covers(t)) {
      std::ostringstream msg;
      msg << "evaluation time " << t << " is not covered by the truth";
      throw std::out_of_range(msg.str());
    }
    const Field1D u_true = truth.u_at(t);
    const Field1D nu_true = truth.nu_at(t);
    Field1D u_pred = u_true;
    Field1D nu_pred = nu_true;
    const std::vector<double> xs = u_true.coordinates();
    predict(t, xs, u_pred.values(), nu_pred.values());

    EvaluationRow row;
    row.t = t;
    row.rel_l2_u = relative_l2_error(u_pred, u_true);
    row.rel_l2_nu = relative_l2_error(nu_pred, nu_true);
    row.volume_defect = volume_defect(u_pred, physics.omega);
    row.nu_mean = nu_pred.mean();
    for (double v : nu_pred.values()) row.nu_max_abs = std::max(row.nu_max_abs, std::abs(v));
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> evaluation_times(double t_begin, double t_end, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {t_begin};
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) {
    times[k] = t_begin + (t_end - t_begin) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  times.back() = t_end;
  return times;
}

}  // namespace acok
