#include "acok/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "acok/errors.hpp"
#include "text_format.hpp"

namespace acok {

namespace {

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw std::invalid_argument(std::string(what) + ": empty point set");
}

void require_size(std::size_t n, std::size_t expected, const char* what) {
  if (n != expected) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

void add_to(std::span<double> target, std::size_t i, double value) {
  if (!target.empty()) target[i] += value;
}

}  // namespace

LossWeights LossWeights::standard() {
  LossWeights w;
  w.w_u_in = 1e5;
  w.w_nu_in = 5e6;
  w.w_u_b = 1.0;
  w.w_nu_b = 30.0;
  w.w_f = 1.0;
  w.w_lap = 500.0;
  w.w_int = 1.0;
  w.w_zm = 30.0;
  return w;
}

std::array<double, 8> LossWeights::as_array() const {
  return {w_u_in, w_nu_in, w_u_b, w_nu_b, w_f, w_lap, w_int, w_zm};
}

void LossWeights::validate() const {
  const auto values = as_array();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= 0.0) || !std::isfinite(values[k])) {
      throw ConfigError(std::string("loss weight for ") + kLossComponentNames[k] +
                        " must be finite and >= 0");
    }
  }
  if (!(w_u_in > 0.0)) throw ConfigError("w_u_in must be positive");
}

std::array<double, 8> LossReport::components() const {
  return {mse_u_in, mse_nu_in, mse_u_b, mse_nu_b, mse_f, mse_lap, mse_int, mse_zm};
}

LossReport LossReport::from_components(const std::array<double, 8>& v) {
  LossReport r;
  r.mse_u_in = v[0];
  r.mse_nu_in = v[1];
  r.mse_u_b = v[2];
  r.mse_nu_b = v[3];
  r.mse_f = v[4];
  r.mse_lap = v[5];
  r.mse_int = v[6];
  r.mse_zm = v[7];
  return r;
}

double residual_f(const NetworkJet& jet, double v_int, const AcokParams& p) {
  return jet.u_t - p.epsilon * jet.u_xx + double_well_prime(jet.u) / p.epsilon +
         p.gamma * jet.nu * interpolant_f_prime(jet.u) +
         p.big_m * v_int * interpolant_f_prime(jet.u);
}

ResidualPartials residual_f_partials(const NetworkJet& jet, double v_int, const AcokParams& p) {
  ResidualPartials d;
  const double fp = interpolant_f_prime(jet.u);
  d.du = double_well_second(jet.u) / p.epsilon +
         (p.gamma * jet.nu + p.big_m * v_int) * interpolant_f_second(jet.u);
  d.dnu = p.gamma * fp;
  d.du_t = 1.0;
  d.du_xx = -p.epsilon;
  d.dv = p.big_m * fp;
  return d;
}

PairMse mse_initial(std::span<const double> u_pred, std::span<const double> nu_pred,
                    std::span<const double> u_true, std::span<const double> nu_true,
                    PairAdjoint adjoint, double scale_u, double scale_nu) {
  const std::size_t n = u_pred.size();
  require_nonempty(n, "mse_initial");
  require_size(nu_pred.size(), n, "mse_initial");
  require_size(u_true.size(), n, "mse_initial");
  require_size(nu_true.size(), n, "mse_initial");
  const double inv_n = 1.0 / static_cast<double>(n);
  PairMse out;
  for (std::size_t i = 0; i < n; ++i) {
    const double du = u_pred[i] - u_true[i];
    const double dnu = nu_pred[i] - nu_true[i];
    out.u += du * du;
    out.nu += dnu * dnu;
    add_to(adjoint.u, i, 2.0 * scale_u * inv_n * du);
    add_to(adjoint.nu, i, 2.0 * scale_nu * inv_n * dnu);
  }
  out.u *= inv_n;
  out.nu *= inv_n;
  return out;
}

PairMse mse_boundary(std::span<const double> u_lower, std::span<const double> nu_lower,
                     std::span<const double> u_upper, std::span<const double> nu_upper,
                     PairAdjoint lower_adjoint, PairAdjoint upper_adjoint, double scale_u,
                     double scale_nu) {
  const std::size_t n = u_lower.size();
  require_nonempty(n, "mse_boundary");
  require_size(nu_lower.size(), n, "mse_boundary");
  require_size(u_upper.size(), n, "mse_boundary");
  require_size(nu_upper.size(), n, "mse_boundary");
  const double inv_n = 1.0 / static_cast<double>(n);
  PairMse out;
  for (std::size_t i = 0; i < n; ++i) {
    const double du = u_lower[i] - u_upper[i];
    const double dnu = nu_lower[i] - nu_upper[i];
    out.u += du * du;
    out.nu += dnu * dnu;
    const double gu = 2.0 * scale_u * inv_n * du;
    const double gnu = 2.0 * scale_nu * inv_n * dnu;
    add_to(lower_adjoint.u, i, gu);
    add_to(lower_adjoint.nu, i, gnu);
    add_to(upper_adjoint.u, i, -gu);
    add_to(upper_adjoint.nu, i, -gnu);
  }
  out.u *= inv_n;
  out.nu *= inv_n;
  return out;
}

namespace {

void check_interior(const InteriorJets& jets, const char* what) {
  const std::size_t n = jets.size();
  require_nonempty(n, what);
  require_size(jets.nu.size(), n, what);
  require_size(jets.u_t.size(), n, what);
  require_size(jets.u_xx.size(), n, what);
  require_size(jets.nu_xx.size(), n, what);
}

}  // namespace

double mse_residual(const InteriorJets& jets, std::span<const double> v_int,
                    const AcokParams& params, const InteriorAdjoint& adjoint, double scale) {
  check_interior(jets, "mse_residual");
  const std::size_t n = jets.size();
  require_size(v_int.size(), n, "mse_residual");
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    NetworkJet jet;
    jet.u = jets.u[i];
    jet.nu = jets.nu[i];
    jet.u_t = jets.u_t[i];
    jet.u_xx = jets.u_xx[i];
    jet.nu_xx = jets.nu_xx[i];
    const double f = residual_f(jet, v_int[i], params);
    sum += f * f;
    if (!adjoint.u.empty()) {
      const double g = 2.0 * scale * inv_n * f;
      const ResidualPartials d = residual_f_partials(jet, v_int[i], params);
      add_to(adjoint.u, i, g * d.du);
      add_to(adjoint.nu, i, g * d.dnu);
      add_to(adjoint.u_t, i, g * d.du_t);
      add_to(adjoint.u_xx, i, g * d.du_xx);
      add_to(adjoint.v, i, g * d.dv);
    }
  }
  return sum * inv_n;
}

double mse_laplacian(const InteriorJets& jets, double omega, const InteriorAdjoint& adjoint,
                     double scale) {
  check_interior(jets, "mse_laplacian");
  const std::size_t n = jets.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = -jets.nu_xx[i] - (interpolant_f(jets.u[i]) - omega);
    sum += r * r;
    const double g = 2.0 * scale * inv_n * r;
    add_to(adjoint.nu_xx, i, -g);
    add_to(adjoint.u, i, -g * interpolant_f_prime(jets.u[i]));
  }
  return sum * inv_n;
}

double mse_integral(std::span<const double> v, std::span<const double> u_mesh, std::size_t n_x,
                    double omega, double dx, const MeshAdjoint& adjoint, double scale) {
  const std::size_t n_t = v.size();
  require_nonempty(n_t, "mse_integral");
  if (n_x == 0 || u_mesh.size() != n_t * n_x) {
    throw std::invalid_argument("mse_integral: mesh values do not align with the mesh times");
  }
  const double inv_n = 1.0 / static_cast<double>(n_t);
  double sum = 0.0;
  for (std::size_t j = 0; j < n_t; ++j) {
    const auto column = u_mesh.subspan(j * n_x, n_x);
    double integral = 0.0;
    for (double u : column) integral += interpolant_f(u) - omega;
    integral *= dx;
    const double r = v[j] - integral;
    sum += r * r;
    const double g = 2.0 * scale * inv_n * r;
    add_to(adjoint.v, j, g);
    if (!adjoint.u.empty()) {
      for (std::size_t i = 0; i < n_x; ++i) {
        adjoint.u[j * n_x + i] -= g * interpolant_f_prime(column[i]) * dx;
      }
    }
  }
  return sum * inv_n;
}

double mse_zero_mean(std::span<const double> nu_mesh, std::size_t n_x, double dx,
                     const MeshAdjoint& adjoint, double scale) {
  if (n_x == 0 || nu_mesh.empty() || nu_mesh.size() % n_x != 0) {
    throw std::invalid_argument("mse_zero_mean: empty or ragged mesh");
  }
  const std::size_t n_t = nu_mesh.size() / n_x;
  const double inv_n = 1.0 / static_cast<double>(n_t);
  double sum = 0.0;
  for (std::size_t j = 0; j < n_t; ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < n_x; ++i) column += nu_mesh[j * n_x + i];
    column *= dx;
    sum += column * column;
    if (!adjoint.nu.empty()) {
      const double g = 2.0 * scale * inv_n * column * dx;
      for (std::size_t i = 0; i < n_x; ++i) adjoint.nu[j * n_x + i] += g;
    }
  }
  return sum * inv_n;
}

LossReport total_loss(const LossReport& components, const LossWeights& weights) {
  LossReport out = components;
  const auto c = components.components();
  const auto w = weights.as_array();
  double total = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!(c[k] >= 0.0)) {
      throw std::invalid_argument(std::string("total_loss: component ") + kLossComponentNames[k] +
                                  " is negative or not a number");
    }
    total += w[k] * c[k];
  }
  out.total = total;
  return out;
}

std::string loss_csv_header() {
  std::string header;
  for (const char* name : kLossComponentNames) {
    header += name;
    header += ',';
  }
  header += "total";
  return header;
}

std::string loss_csv_fields(const LossReport& report) {
  std::string row;
  for (double v : report.components()) {
    row += detail::format_double(v);
    row += ',';
  }
  row += detail::format_double(report.total);
  return row;
}

}  // namespace acok
