#include "acok/commands.hpp"

#include <cmath>
#include <exception>
#include <fstream>

#include "acok/errors.hpp"
#include "text_format.hpp"

namespace acok {

namespace fs = std::filesystem;
using detail::format_double;

namespace {

void require_file(const fs::path& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw IoError(std::string(what) + " '" + path.string() + "' does not exist");
  }
}

fs::path prepare_output_dir(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

fs::path diagnostics_path_for(const fs::path& truth) {
  fs::path p = truth;
  p.replace_filename(truth.stem().string() + "_diagnostics.csv");
  return p;
}

void write_report_csv(const fs::path& path, const std::vector<LossReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "window," << loss_csv_header() << '\n';
  for (std::size_t k = 0; k < reports.size(); ++k) {
    out << k << ',' << loss_csv_fields(reports[k]) << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

TruthSummary cmd_generate_truth(const RunConfig& config, std::ostream& log) {
  config.validate();
  const AcokParams& physics = config.physics();
  const std::size_t n = config.solver.grid_size;

  Field1D u0 = Field1D::zeros(n, physics.half_width);
  if (config.solver.initial_condition.empty()) {
    u0 = default_initial_condition(n, physics);
  } else {
    require_file(config.solver.initial_condition, "initial condition");
    u0 = read_initial_condition_csv(config.solver.initial_condition, physics.half_width);
    if (u0.size() != n) throw ConfigError("initial_condition: grid size does not match grid_size");
  }

  const double kappa = config.solver.resolved_kappa(physics);
  const TruthSeries truth = generate_truth(u0, config.train.t_max, config.solver.dt, physics, kappa,
                                           config.solver.snapshot_stride);

  TruthSummary summary;
  summary.grid_size = n;
  summary.steps = std::lround(config.train.t_max / config.solver.dt);
  summary.snapshots = truth.size();
  summary.truth_path = config.truth_file;
  summary.final_energy = energy(truth.u.back(), truth.nu.back(), physics);
  summary.final_volume_defect = volume_defect(truth.u.back(), physics.omega);
  write_truth_csv(summary.truth_path, truth);

  if (config.solver.diagnostics) {
    summary.diagnostics_path = diagnostics_path_for(summary.truth_path);
    std::ofstream out(summary.diagnostics_path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + summary.diagnostics_path.string() + "' for writing");
    out << "t,energy,volume_defect\n";
    for (std::size_t k = 0; k < truth.size(); ++k) {
      out << format_double(truth.times[k]) << ',' << format_double(energy(truth.u[k], truth.nu[k], physics))
          << ',' << format_double(volume_defect(truth.u[k], physics.omega)) << '\n';
    }
    if (!out) throw IoError("write to '" + summary.diagnostics_path.string() + "' failed");
  }

  log << "grid size:           " << summary.grid_size << '\n'
      << "steps:               " << summary.steps << '\n'
      << "snapshots:           " << summary.snapshots << '\n'
      << "final energy:        " << format_double(summary.final_energy) << '\n'
      << "final volume defect: " << format_double(summary.final_volume_defect) << '\n'
      << "wrote " << summary.truth_path.string() << '\n';
  if (!summary.diagnostics_path.empty()) log << "wrote " << summary.diagnostics_path.string() << '\n';
  return summary;
}

TrainSummary cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  config.train.validate();
  require_file(config.truth_file, "truth file");
  const TruthSeries truth = read_truth_csv(config.truth_file);
  if (!truth.covers(0.0) || !truth.covers(config.train.t_max)) {
    throw ConfigError("t_max: truth file covers [" + format_double(truth.t_begin()) + ", " +
                      format_double(truth.t_end()) + "], not [0, " + format_double(config.train.t_max) + "]");
  }
  const fs::path dir = prepare_output_dir(config);

  TrainSummary summary;
  TrainHooks hooks;
  hooks.record_wall_time = config.log_wall_time;
  hooks.on_history = [&log](const HistoryRow& row) {
    const long every = row.phase == "adam" ? 50 : 250;
    if (row.iteration == 1 || row.iteration % every == 0) {
      log << row.phase << ' ' << row.iteration << "  loss " << format_double(row.report.total) << std::endl;
    }
  };
  if (config.snapshot_every > 0) {
    hooks.on_epoch = [&](long epoch, const ModelWindow& model) {
      if (epoch % config.snapshot_every != 0) return;
      std::string name = "model_epoch" + std::to_string(epoch);
      if (config.windows > 1) {
        const double width = config.train.t_max / static_cast<double>(config.windows);
        const long window = std::lround(model.t_start / width);
        name = "model_w" + std::to_string(window) + "_epoch" + std::to_string(epoch);
      }
      write_model(dir / (name + ".txt"), {model});
    };
  }

  if (config.windows == 1) {
    TrainedModel trained = train(config.train, truth, hooks);
    summary.windows.push_back(trained.model);
    summary.history = std::move(trained.history);
    summary.final_reports.push_back(trained.final_report);
    log << "lbfgs: " << to_string(trained.lbfgs_termination) << " after " << trained.lbfgs_iterations
        << " iterations\n";
  } else {
    AdaptiveResult result = train_time_adaptive(config.train, truth, config.windows, hooks);
    for (std::size_t k = 0; k < result.windows.size(); ++k) {
      auto& w = result.windows[k];
      summary.windows.push_back(w.model);
      summary.final_reports.push_back(w.final_report);
      for (auto& row : w.history) {
        row.phase = "w" + std::to_string(k) + ":" + row.phase;
        summary.history.push_back(std::move(row));
      }
      log << "window " << k << " lbfgs: " << to_string(w.lbfgs_termination) << " after "
          << w.lbfgs_iterations << " iterations\n";
    }
  }

  summary.model_path = config.model_path();
  summary.log_path = dir / "training_log.csv";
  summary.report_path = dir / "final_report.csv";
  write_model(summary.model_path, summary.windows);
  write_training_log(summary.log_path, summary.history);
  write_report_csv(summary.report_path, summary.final_reports);

  const LossReport& last = summary.final_reports.back();
  log << "final loss:          " << format_double(last.total) << '\n'
      << "wrote " << summary.model_path.string() << '\n'
      << "wrote " << summary.log_path.string() << '\n'
      << "wrote " << summary.report_path.string() << '\n';
  return summary;
}

EvaluateSummary cmd_evaluate(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_file(config.model_path(), "model file");
  require_file(config.truth_file, "truth file");
  StitchedModel model{read_model(config.model_path())};
  const TruthSeries truth = read_truth_csv(config.truth_file);

  const double t0 = model.windows.front().t_start;
  const double t1 = model.windows.back().t_end;
  if (!truth.covers(t0) || !truth.covers(t1)) {
    throw ConfigError("truth_file: covers [" + format_double(truth.t_begin()) + ", " +
                      format_double(truth.t_end()) + "] but the model spans [" + format_double(t0) +
                      ", " + format_double(t1) + "]");
  }
  const fs::path dir = prepare_output_dir(config);
  const std::vector<double> times = evaluation_times(t0, t1, config.eval_times);
  const PredictFn predict = [&model](double t, std::span<const double> x, std::span<double> u,
                                     std::span<double> nu) { model.predict(t, x, u, nu); };

  EvaluateSummary summary;
  summary.rows = evaluate(predict, truth, times, config.physics());
  summary.evaluation_path = dir / "evaluation.csv";
  summary.plot_path = dir / "plot_data.csv";
  write_evaluation_csv(summary.evaluation_path, summary.rows);
  write_plot_csv(summary.plot_path, predict, truth, times);

  log << "t, rel_l2_u, rel_l2_nu, nu_mean\n";
  for (const auto& r : summary.rows) {
    log << format_double(r.t) << ", " << format_double(r.rel_l2_u) << ", "
        << format_double(r.rel_l2_nu) << ", " << format_double(r.nu_mean) << '\n';
  }
  log << "wrote " << summary.evaluation_path.string() << '\n'
      << "wrote " << summary.plot_path.string() << '\n';
  return summary;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace acok
