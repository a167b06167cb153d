// Python bindings for the ACOK PINN core.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "acok/commands.hpp"
#include "acok/errors.hpp"
#include "acok/io.hpp"
#include "acok/mlp.hpp"
#include "acok/model.hpp"
#include "acok/optimizers.hpp"
#include "acok/spectral.hpp"

namespace py = pybind11;
using namespace acok;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Field1D to_field(const Array& a, double half_width) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  return Field1D(std::vector<double>(a.data(), a.data() + a.size()), half_width);
}

Array to_array(const Field1D& f) {
  Array out(static_cast<py::ssize_t>(f.size()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Array stack(const std::vector<Field1D>& fields) {
  const auto rows = static_cast<py::ssize_t>(fields.size());
  const auto cols = static_cast<py::ssize_t>(fields.empty() ? 0 : fields.front().size());
  Array out({rows, cols});
  double* p = out.mutable_data();
  for (const auto& f : fields) p = std::copy(f.values().begin(), f.values().end(), p);
  return out;
}

RunConfig make_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  RunConfig config = parse_config_text(text);
  for (const auto& [k, v] : overrides) apply_setting(config, k, v);
  config.validate();
  return config;
}

py::dict loss_dict(const LossReport& r) {
  py::dict d;
  const auto c = r.components();
  for (std::size_t k = 0; k < c.size(); ++k) d[kLossComponentNames[k]] = c[k];
  d["total"] = r.total;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Allen-Cahn-Ohta-Kawasaki PINN and spectral reference solver";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  py::class_<AcokParams>(m, "AcokParams")
      .def(py::init<>())
      .def(py::init([](double epsilon, double gamma, double omega, double big_m, double half_width) {
             AcokParams p{epsilon, gamma, omega, big_m, half_width};
             p.validate();
             return p;
           }),
           py::arg("epsilon") = 0.01, py::arg("gamma") = 100.0, py::arg("omega") = 0.3,
           py::arg("big_m") = 1000.0, py::arg("half_width") = 1.0)
      .def_readwrite("epsilon", &AcokParams::epsilon)
      .def_readwrite("gamma", &AcokParams::gamma)
      .def_readwrite("omega", &AcokParams::omega)
      .def_readwrite("big_m", &AcokParams::big_m)
      .def_readwrite("half_width", &AcokParams::half_width)
      .def("validate", &AcokParams::validate)
      .def("__repr__", [](const AcokParams& p) {
        std::ostringstream s;
        s << "AcokParams(epsilon=" << p.epsilon << ", gamma=" << p.gamma << ", omega=" << p.omega
          << ", big_m=" << p.big_m << ", half_width=" << p.half_width << ")";
        return s.str();
      });

  m.def("double_well", &double_well);
  m.def("double_well_prime", &double_well_prime);
  m.def("interpolant_f", &interpolant_f);
  m.def("interpolant_f_prime", &interpolant_f_prime);

  m.def("grid", [](std::size_t n, double half_width) { return Field1D::zeros(n, half_width).coordinates(); },
        py::arg("n"), py::arg("half_width") = 1.0, "Periodic grid x_i = -X + i dx.");
  m.def("inv_laplacian", [](const Array& g, double X) { return to_array(inv_laplacian(to_field(g, X))); },
        py::arg("g"), py::arg("half_width") = 1.0, "Zero-mean solution of -w'' = g - mean(g).");
  m.def("long_range_potential",
        [](const Array& u, const AcokParams& p) { return to_array(long_range_potential(to_field(u, p.half_width), p.omega)); },
        py::arg("u"), py::arg("params") = AcokParams{});
  m.def("energy",
        [](const Array& u, const AcokParams& p) {
          const Field1D f = to_field(u, p.half_width);
          return energy(f, long_range_potential(f, p.omega), p);
        },
        py::arg("u"), py::arg("params") = AcokParams{});
  m.def("volume_defect",
        [](const Array& u, const AcokParams& p) { return volume_defect(to_field(u, p.half_width), p.omega); },
        py::arg("u"), py::arg("params") = AcokParams{});
  m.def("default_kappa", &default_kappa, py::arg("params") = AcokParams{});
  m.def("default_initial_condition",
        [](std::size_t n, const AcokParams& p) { return to_array(default_initial_condition(n, p)); },
        py::arg("n") = 512, py::arg("params") = AcokParams{});
  m.def("acok_step",
        [](const Array& u, double dt, const AcokParams& p, std::optional<double> kappa) {
          return to_array(acok_step(to_field(u, p.half_width), dt, p, kappa.value_or(default_kappa(p))));
        },
        py::arg("u"), py::arg("dt"), py::arg("params") = AcokParams{}, py::arg("kappa") = py::none());
  m.def("generate_truth",
        [](const Array& u0, double t_max, double dt, const AcokParams& p, std::optional<double> kappa,
           std::size_t stride) {
          TruthSeries s = [&] {
            py::gil_scoped_release release;
            return generate_truth(to_field(u0, p.half_width), t_max, dt, p, kappa.value_or(default_kappa(p)), stride);
          }();
          return py::make_tuple(s.times, stack(s.u), stack(s.nu));
        },
        py::arg("u0"), py::arg("t_max"), py::arg("dt") = 1e-6, py::arg("params") = AcokParams{},
        py::arg("kappa") = py::none(), py::arg("stride") = 1,
        "Returns (times, u[k, i], nu[k, i]).");

  py::class_<MlpParams>(m, "MlpParams")
      .def(py::init<std::vector<int>>(), py::arg("layer_sizes"))
      .def_property_readonly("layer_sizes", &MlpParams::layer_sizes)
      .def_property_readonly("parameter_count", &MlpParams::parameter_count)
      .def("flatten", [](const MlpParams& p) {
        const auto v = p.flatten();
        return Array(static_cast<py::ssize_t>(v.size()), v.data());
      })
      .def("assign", [](MlpParams& p, const Array& flat) {
        if (flat.ndim() != 1 || static_cast<std::size_t>(flat.size()) != p.parameter_count()) {
          throw std::invalid_argument("flat parameter vector has the wrong length");
        }
        p.assign_from({flat.data(), static_cast<std::size_t>(flat.size())});
      })
      .def("to_text", [](const MlpParams& p) {
        std::ostringstream s;
        write_mlp(s, p);
        return s.str();
      })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream s(text);
        return read_mlp(s);
      })
      .def("__eq__", [](const MlpParams& a, const MlpParams& b) { return a == b; });
  m.def("init_params", &init_params, py::arg("layer_sizes"), py::arg("seed"));
  m.def("forward",
        [](const MlpParams& p, const Array& inputs) {
          if (inputs.ndim() != 2 || inputs.shape(1) != p.input_width()) {
            throw std::invalid_argument("inputs must have shape (batch, input_width)");
          }
          const auto batch = inputs.shape(0);
          Array out({batch, static_cast<py::ssize_t>(p.output_width())});
          for (py::ssize_t j = 0; j < batch; ++j) {
            const Eigen::VectorXd y =
                forward(p, {inputs.data(j, 0), static_cast<std::size_t>(p.input_width())});
            std::copy(y.data(), y.data() + y.size(), out.mutable_data(j, 0));
          }
          return out;
        },
        py::arg("params"), py::arg("inputs"));
  m.def("forward_jet",
        [](const MlpParams& p, double t, double x) {
          const NetworkJet j = forward_jet(p, t, x);
          py::dict d;
          d["u"] = j.u;
          d["nu"] = j.nu;
          d["u_t"] = j.u_t;
          d["u_x"] = j.u_x;
          d["u_xx"] = j.u_xx;
          d["nu_xx"] = j.nu_xx;
          return d;
        },
        py::arg("params"), py::arg("t"), py::arg("x"));

  m.def("lbfgs_minimize",
        [](const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>& fun,
           Eigen::VectorXd x0, long max_iterations, double gradient_tolerance) {
          LbfgsSettings s;
          s.max_iterations = max_iterations;
          s.gradient_tolerance = gradient_tolerance;
          const Objective objective = [&fun](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            auto [f, grad] = fun(x);
            if (grad.size() != g.size()) throw std::invalid_argument("gradient has the wrong length");
            g = grad;
            return f;
          };
          const LbfgsResult r = lbfgs_minimize(std::move(x0), objective, s);
          py::dict d;
          d["x"] = r.x;
          d["loss"] = r.loss;
          d["iterations"] = r.iterations;
          d["termination"] = to_string(r.termination);
          return d;
        },
        py::arg("fun"), py::arg("x0"), py::arg("max_iterations") = 1000,
        py::arg("gradient_tolerance") = 1e-9,
        "Minimise fun(x) -> (f, grad) with L-BFGS and a strong-Wolfe line search.");

  m.def("config_keys", &config_keys);
  m.def("resolve_config",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          return format_config(make_config(text, overrides));
        },
        py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{},
        "Validate a key = value config with overrides; returns the fully resolved text.");
  m.def("generate_truth_cmd",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          const RunConfig config = make_config(text, overrides);
          std::ostringstream log;
          TruthSummary s;
          {
            py::gil_scoped_release release;
            s = cmd_generate_truth(config, log);
          }
          py::dict d;
          d["grid_size"] = s.grid_size;
          d["steps"] = s.steps;
          d["snapshots"] = s.snapshots;
          d["final_energy"] = s.final_energy;
          d["final_volume_defect"] = s.final_volume_defect;
          d["truth_path"] = s.truth_path.string();
          return d;
        },
        py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("train_cmd",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          const RunConfig config = make_config(text, overrides);
          std::ostringstream log;
          TrainSummary s;
          {
            py::gil_scoped_release release;
            s = cmd_train(config, log);
          }
          py::list reports;
          for (const auto& r : s.final_reports) reports.append(loss_dict(r));
          py::dict d;
          d["final_reports"] = reports;
          d["history_rows"] = s.history.size();
          d["model_path"] = s.model_path.string();
          d["log_path"] = s.log_path.string();
          d["report_path"] = s.report_path.string();
          return d;
        },
        py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("evaluate_cmd",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          const RunConfig config = make_config(text, overrides);
          std::ostringstream log;
          EvaluateSummary s;
          {
            py::gil_scoped_release release;
            s = cmd_evaluate(config, log);
          }
          py::list rows;
          for (const auto& r : s.rows) {
            py::dict d;
            d["t"] = r.t;
            d["rel_l2_u"] = r.rel_l2_u;
            d["rel_l2_nu"] = r.rel_l2_nu;
            d["volume_defect"] = r.volume_defect;
            d["nu_mean"] = r.nu_mean;
            d["nu_max_abs"] = r.nu_max_abs;
            rows.append(d);
          }
          return rows;
        },
        py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{});
}
