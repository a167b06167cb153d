#include "acok/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "acok/errors.hpp"
#include "text_format.hpp"

namespace acok {

namespace fs = std::filesystem;
using detail::format_double;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" +
                    std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  if (!detail::parse_double(value, out) || !std::isfinite(out)) bad_value(key, value, "a finite number");
  return out;
}

long to_long(std::string_view key, std::string_view value) {
  long out = 0;
  if (!detail::parse_long(value, out)) bad_value(key, value, "an integer");
  return out;
}

std::size_t to_count(std::string_view key, std::string_view value) {
  // Accept integral values written in exponent form such as 2e4.
  long out = 0;
  if (detail::parse_long(value, out)) {
    if (out < 0) bad_value(key, value, "a non-negative integer");
    return static_cast<std::size_t>(out);
  }
  double d = 0.0;
  if (detail::parse_double(value, d) && d >= 0.0 && d < 1e15 && std::floor(d) == d) {
    return static_cast<std::size_t>(d);
  }
  bad_value(key, value, "a non-negative integer");
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

std::vector<int> to_layers(std::string_view key, std::string_view value) {
  std::vector<int> layers;
  for (auto part : split(value, ',')) {
    const long n = to_long(key, part);
    if (n <= 0 || n > 100000) bad_value(key, value, "a comma-separated list of positive widths");
    layers.push_back(static_cast<int>(n));
  }
  return layers;
}

std::string layers_text(const std::vector<int>& layers) {
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(layers[i]);
  }
  return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct KeySpec {
  const char* name;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define ACOK_DOUBLE_KEY(key_name, member)                                                      \
  KeySpec {                                                                                    \
    key_name, [](RunConfig& c, std::string_view k, std::string_view v) { member = to_double(k, v); }, \
        [](const RunConfig& c) { return format_double(member); }                               \
  }
#define ACOK_COUNT_KEY(key_name, member)                                                       \
  KeySpec {                                                                                    \
    key_name, [](RunConfig& c, std::string_view k, std::string_view v) { member = to_count(k, v); }, \
        [](const RunConfig& c) { return std::to_string(member); }                              \
  }
#define ACOK_BOOL_KEY(key_name, member)                                                        \
  KeySpec {                                                                                    \
    key_name, [](RunConfig& c, std::string_view k, std::string_view v) { member = to_bool(k, v); }, \
        [](const RunConfig& c) { return bool_text(member); }                                   \
  }
#define ACOK_STRING_KEY(key_name, member)                                                      \
  KeySpec {                                                                                    \
    key_name, [](RunConfig& c, std::string_view, std::string_view v) { member = std::string(v); }, \
        [](const RunConfig& c) { return member; }                                              \
  }

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      // physics
      ACOK_DOUBLE_KEY("epsilon", c.train.physics.epsilon),
      ACOK_DOUBLE_KEY("gamma", c.train.physics.gamma),
      ACOK_DOUBLE_KEY("omega", c.train.physics.omega),
      ACOK_DOUBLE_KEY("big_m", c.train.physics.big_m),
      ACOK_DOUBLE_KEY("half_width", c.train.physics.half_width),
      // reference solver
      ACOK_COUNT_KEY("grid_size", c.solver.grid_size),
      ACOK_DOUBLE_KEY("dt", c.solver.dt),
      ACOK_DOUBLE_KEY("kappa", c.solver.kappa),
      ACOK_COUNT_KEY("snapshot_stride", c.solver.snapshot_stride),
      ACOK_STRING_KEY("initial_condition", c.solver.initial_condition),
      ACOK_BOOL_KEY("truth_diagnostics", c.solver.diagnostics),
      // training
      ACOK_DOUBLE_KEY("t_max", c.train.t_max),
      KeySpec{"epochs",
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.train.epochs = static_cast<long>(to_count(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.train.epochs); }},
      ACOK_COUNT_KEY("n_initial", c.train.n_initial),
      ACOK_COUNT_KEY("n_boundary", c.train.n_boundary),
      ACOK_COUNT_KEY("n_interior", c.train.n_interior),
      ACOK_COUNT_KEY("n_time_uniform", c.train.n_time_uniform),
      ACOK_COUNT_KEY("n_x_uniform", c.train.n_x_uniform),
      ACOK_DOUBLE_KEY("w_u_in", c.train.weights.w_u_in),
      ACOK_DOUBLE_KEY("w_nu_in", c.train.weights.w_nu_in),
      ACOK_DOUBLE_KEY("w_u_b", c.train.weights.w_u_b),
      ACOK_DOUBLE_KEY("w_nu_b", c.train.weights.w_nu_b),
      ACOK_DOUBLE_KEY("w_f", c.train.weights.w_f),
      ACOK_DOUBLE_KEY("w_lap", c.train.weights.w_lap),
      ACOK_DOUBLE_KEY("w_int", c.train.weights.w_int),
      ACOK_DOUBLE_KEY("w_zm", c.train.weights.w_zm),
      KeySpec{"netu_layers",
              [](RunConfig& c, std::string_view k, std::string_view v) { c.train.netu_layers = to_layers(k, v); },
              [](const RunConfig& c) { return layers_text(c.train.netu_layers); }},
      KeySpec{"netv_layers",
              [](RunConfig& c, std::string_view k, std::string_view v) { c.train.netv_layers = to_layers(k, v); },
              [](const RunConfig& c) { return layers_text(c.train.netv_layers); }},
      KeySpec{"rescale_power",
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.train.rescale_power = static_cast<int>(to_long(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.train.rescale_power); }},
      ACOK_COUNT_KEY("minibatch_size", c.train.minibatch_size),
      KeySpec{"seed",
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.train.seed = static_cast<std::uint64_t>(to_count(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      ACOK_DOUBLE_KEY("learning_rate", c.train.adam.eta),
      ACOK_DOUBLE_KEY("beta1", c.train.adam.beta1),
      ACOK_DOUBLE_KEY("beta2", c.train.adam.beta2),
      ACOK_DOUBLE_KEY("adam_epsilon", c.train.adam.eps_hat),
      KeySpec{"lbfgs_memory",
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.train.lbfgs.memory = static_cast<int>(to_count(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.train.lbfgs.memory); }},
      KeySpec{"lbfgs_max_iter",
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.train.lbfgs.max_iterations = static_cast<long>(to_count(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.train.lbfgs.max_iterations); }},
      ACOK_DOUBLE_KEY("lbfgs_gtol", c.train.lbfgs.gradient_tolerance),
      ACOK_DOUBLE_KEY("lbfgs_ftol", c.train.lbfgs.relative_decrease_tolerance),
      ACOK_BOOL_KEY("staged", c.train.staged),
      ACOK_COUNT_KEY("chunk_size", c.train.chunk_size),
      ACOK_COUNT_KEY("windows", c.windows),
      // files and reporting
      ACOK_STRING_KEY("truth_file", c.truth_file),
      ACOK_STRING_KEY("output_dir", c.output_dir),
      ACOK_STRING_KEY("model_file", c.model_file),
      ACOK_COUNT_KEY("eval_times", c.eval_times),
      KeySpec{"snapshot_every",
              [](RunConfig& c, std::string_view k, std::string_view v) {
                c.snapshot_every = static_cast<long>(to_count(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.snapshot_every); }},
      ACOK_BOOL_KEY("log_wall_time", c.log_wall_time),
  };
  return table;
}

#undef ACOK_DOUBLE_KEY
#undef ACOK_COUNT_KEY
#undef ACOK_BOOL_KEY
#undef ACOK_STRING_KEY

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// Line-oriented CSV reader with a required header.
class CsvReader {
 public:
  CsvReader(const fs::path& path, std::string_view header) : path_(path), in_(open_in(path)) {
    std::string line;
    if (!std::getline(in_, line) || trim(line) != header) {
      throw IoError(path.string() + ": expected header '" + std::string(header) + "'");
    }
    columns_ = split(header, ',').size();
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      fields.clear();
      for (auto f : split(line, ',')) fields.emplace_back(f);
      if (fields.size() != columns_) fail("expected " + std::to_string(columns_) + " fields");
      return true;
    }
    return false;
  }

  double number(const std::string& field) const {
    double v = 0.0;
    if (!detail::parse_double(field, v)) fail("bad number '" + field + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw IoError(path_.string() + ":" + std::to_string(line_no_ + 1) + ": " + why);
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t columns_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

fs::path RunConfig::model_path() const {
  return model_file.empty() ? fs::path(output_dir) / "model.txt" : fs::path(model_file);
}

void RunConfig::validate() const {
  train.validate_settings();
  if (!(train.t_max >= 0.0) || !std::isfinite(train.t_max)) throw ConfigError("t_max must be finite and >= 0");
  if (solver.grid_size < 4 || solver.grid_size % 2 != 0) {
    throw ConfigError("grid_size must be even and >= 4");
  }
  if (!(solver.dt > 0.0) || !std::isfinite(solver.dt)) throw ConfigError("dt must be positive");
  const double steps = train.t_max / solver.dt;
  if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) {
    throw ConfigError("dt: t_max must be a whole number of solver steps");
  }
  if (solver.kappa >= 0.0 && !std::isfinite(solver.kappa)) throw ConfigError("kappa must be finite");
  if (solver.snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  if (windows < 1) throw ConfigError("windows must be >= 1");
  if (eval_times < 1) throw ConfigError("eval_times must be >= 1");
  if (train.n_initial > solver.grid_size) throw ConfigError("n_initial must not exceed grid_size");
  if (truth_file.empty()) throw ConfigError("truth_file must not be empty");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const auto& spec : key_table()) {
    if (key == spec.name) {
      spec.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

RunConfig parse_config_text(std::string_view text, std::string_view source) {
  RunConfig config;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got '" + std::string(line) + "'");
    }
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig parse_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open configuration file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.string());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& spec : key_table()) {
    out += spec.name;
    out += " = ";
    out += spec.get(config);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& spec : key_table()) keys.emplace_back(spec.name);
  return keys;
}

void write_truth_csv(const fs::path& path, const TruthSeries& truth) {
  truth.validate();
  auto out = open_out(path);
  out << "t,x,u,nu\n";
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const std::string t = format_double(truth.times[k]);
    const auto& u = truth.u[k];
    for (std::size_t i = 0; i < u.size(); ++i) {
      out << t << ',' << format_double(u.x(i)) << ',' << format_double(u[i]) << ','
          << format_double(truth.nu[k][i]) << '\n';
    }
  }
  finish(out, path);
}

TruthSeries read_truth_csv(const fs::path& path) {
  CsvReader csv(path, "t,x,u,nu");
  TruthSeries series;
  std::vector<std::string> fields;
  std::vector<double> xs;
  std::vector<double> u;
  std::vector<double> nu;
  double current_t = 0.0;
  bool open_block = false;

  const auto close_block = [&]() {
    if (!open_block) return;
    if (xs.size() < 4) csv.fail("time block has fewer than 4 grid points");
    const double half_width = -xs.front();
    try {
      Field1D uf(u, half_width);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(xs[i] - uf.x(i)) > 1e-9 * half_width) {
          csv.fail("x column is not the uniform periodic grid");
        }
      }
      series.times.push_back(current_t);
      series.u.push_back(std::move(uf));
      series.nu.emplace_back(nu, half_width);
    } catch (const std::invalid_argument& e) {
      csv.fail(e.what());
    }
    xs.clear();
    u.clear();
    nu.clear();
  };

  while (csv.next(fields)) {
    const double t = csv.number(fields[0]);
    if (!open_block || t != current_t) {
      close_block();
      current_t = t;
      open_block = true;
    }
    xs.push_back(csv.number(fields[1]));
    u.push_back(csv.number(fields[2]));
    nu.push_back(csv.number(fields[3]));
  }
  close_block();
  if (series.size() == 0) throw IoError(path.string() + ": no data rows");
  try {
    series.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return series;
}

Field1D read_initial_condition_csv(const fs::path& path, double half_width) {
  CsvReader csv(path, "x,u");
  std::vector<std::string> fields;
  std::vector<double> xs;
  std::vector<double> us;
  while (csv.next(fields)) {
    xs.push_back(csv.number(fields[0]));
    us.push_back(csv.number(fields[1]));
  }
  try {
    Field1D u(us, half_width);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::abs(xs[i] - u.x(i)) > 1e-9 * half_width) {
        throw IoError(path.string() + ": x column does not match the grid of half-width " +
                      format_double(half_width));
      }
    }
    return u;
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_initial_condition_csv(const fs::path& path, const Field1D& u) {
  auto out = open_out(path);
  out << "x,u\n";
  for (std::size_t i = 0; i < u.size(); ++i) out << format_double(u.x(i)) << ',' << format_double(u[i]) << '\n';
  finish(out, path);
}

void write_model(const fs::path& path, const std::vector<ModelWindow>& windows) {
  if (windows.empty()) throw std::invalid_argument("write_model: no windows");
  auto out = open_out(path);
  out << "acok-model 1\nwindows " << windows.size() << '\n';
  for (std::size_t k = 0; k < windows.size(); ++k) {
    out << "window " << k << ' ' << format_double(windows[k].t_start) << ' '
        << format_double(windows[k].t_end) << '\n';
    out << "net u\n";
    write_mlp(out, windows[k].netu);
    out << "net v\n";
    write_mlp(out, windows[k].netv);
  }
  finish(out, path);
}

std::vector<ModelWindow> read_model(const fs::path& path) {
  auto in = open_in(path);
  const std::string ctx_s = "model file '" + path.string() + "'";
  const char* ctx = ctx_s.c_str();
  try {
    detail::expect_token(in, "acok-model", ctx);
    if (detail::read_long(in, ctx) != 1) throw std::runtime_error(ctx_s + ": unsupported version");
    detail::expect_token(in, "windows", ctx);
    const long count = detail::read_long(in, ctx);
    if (count < 1 || count > 100000) throw std::runtime_error(ctx_s + ": bad window count");
    std::vector<ModelWindow> windows;
    for (long k = 0; k < count; ++k) {
      detail::expect_token(in, "window", ctx);
      if (detail::read_long(in, ctx) != k) throw std::runtime_error(ctx_s + ": windows out of order");
      ModelWindow w;
      w.t_start = detail::read_double(in, ctx);
      w.t_end = detail::read_double(in, ctx);
      detail::expect_token(in, "net", ctx);
      detail::expect_token(in, "u", ctx);
      w.netu = read_mlp(in);
      detail::expect_token(in, "net", ctx);
      detail::expect_token(in, "v", ctx);
      w.netv = read_mlp(in);
      if (w.netu.input_width() != 2 || w.netu.output_width() != 2 || w.netv.input_width() != 1 ||
          w.netv.output_width() != 1) {
        throw std::runtime_error(ctx_s + ": network shapes do not match (t, x) -> (u, nu), t -> v");
      }
      windows.push_back(std::move(w));
    }
    return windows;
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

void write_training_log(const fs::path& path, const std::vector<HistoryRow>& history) {
  auto out = open_out(path);
  out << "phase,iteration," << loss_csv_header() << ",wall_time\n";
  for (const auto& row : history) {
    out << row.phase << ',' << row.iteration << ',' << loss_csv_fields(row.report) << ','
        << format_double(row.wall_time) << '\n';
  }
  finish(out, path);
}

std::vector<HistoryRow> read_training_log(const fs::path& path) {
  CsvReader csv(path, "phase,iteration," + loss_csv_header() + ",wall_time");
  std::vector<HistoryRow> rows;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    HistoryRow row;
    row.phase = fields[0];
    long it = 0;
    if (!detail::parse_long(fields[1], it)) csv.fail("bad iteration");
    row.iteration = it;
    std::array<double, 8> c{};
    for (std::size_t k = 0; k < 8; ++k) c[k] = csv.number(fields[2 + k]);
    row.report = LossReport::from_components(c);
    row.report.total = csv.number(fields[10]);
    row.wall_time = csv.number(fields[11]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_evaluation_csv(const fs::path& path, const std::vector<EvaluationRow>& rows) {
  auto out = open_out(path);
  out << "t,rel_l2_u,rel_l2_nu,volume_defect,nu_mean,nu_max_abs\n";
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.rel_l2_u) << ','
        << format_double(r.rel_l2_nu) << ',' << format_double(r.volume_defect) << ','
        << format_double(r.nu_mean) << ',' << format_double(r.nu_max_abs) << '\n';
  }
  finish(out, path);
}

std::vector<EvaluationRow> read_evaluation_csv(const fs::path& path) {
  CsvReader csv(path, "t,rel_l2_u,rel_l2_nu,volume_defect,nu_mean,nu_max_abs");
  std::vector<EvaluationRow> rows;
  std::vector<std::string> f;
  while (csv.next(f)) {
    rows.push_back(EvaluationRow{csv.number(f[0]), csv.number(f[1]), csv.number(f[2]),
                                 csv.number(f[3]), csv.number(f[4]), csv.number(f[5])});
  }
  return rows;
}

void write_plot_csv(const fs::path& path, const PredictFn& predict, const TruthSeries& truth,
                    std::span<const double> times) {
  auto out = open_out(path);
  out << "t,x,u_pred,u_truth,nu_pred,nu_truth\n";
  for (double t : times) {
    const Field1D u_true = truth.u_at(t);
    const Field1D nu_true = truth.nu_at(t);
    const std::vector<double> xs = u_true.coordinates();
    std::vector<double> u(xs.size());
    std::vector<double> nu(xs.size());
    predict(t, xs, u, nu);
    const std::string ts = format_double(t);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out << ts << ',' << format_double(xs[i]) << ',' << format_double(u[i]) << ','
          << format_double(u_true[i]) << ',' << format_double(nu[i]) << ','
          << format_double(nu_true[i]) << '\n';
    }
  }
  finish(out, path);
}

}  // namespace acok
