#pragma once

#include <array>
#include <span>
#include <string>

#include "acok/mlp.hpp"
#include "acok/model.hpp"

namespace acok {

/// Per-component weights of the composite training objective.
struct LossWeights {
  double w_u_in = 1.0;
  double w_nu_in = 1.0;
  double w_u_b = 1.0;
  double w_nu_b = 1.0;
  double w_f = 1.0;
  double w_lap = 1.0;
  double w_int = 1.0;
  double w_zm = 1.0;

  /// The weight set used for the millisecond-horizon experiments.
  static LossWeights standard();

  std::array<double, 8> as_array() const;
  void validate() const;

  bool operator==(const LossWeights&) const = default;
};

inline constexpr std::array<const char*, 8> kLossComponentNames = {
    "mse_u_in", "mse_nu_in", "mse_u_b", "mse_nu_b", "mse_f", "mse_lap", "mse_int", "mse_zm"};

/// One value per loss component plus the weighted total.
struct LossReport {
  double mse_u_in = 0.0;
  double mse_nu_in = 0.0;
  double mse_u_b = 0.0;
  double mse_nu_b = 0.0;
  double mse_f = 0.0;
  double mse_lap = 0.0;
  double mse_int = 0.0;
  double mse_zm = 0.0;
  double total = 0.0;

  std::array<double, 8> components() const;
  static LossReport from_components(const std::array<double, 8>& values);

  bool operator==(const LossReport&) const = default;
};

/// F = u_t - eps u_xx + W'(u)/eps + gamma nu f'(u) + M v f'(u).
double residual_f(const NetworkJet& jet, double v_int, const AcokParams& params);

/// Partial derivatives of residual_f with respect to its inputs.
struct ResidualPartials {
  double du = 0.0;
  double dnu = 0.0;
  double du_t = 0.0;
  double du_xx = 0.0;
  double dv = 0.0;
};
ResidualPartials residual_f_partials(const NetworkJet& jet, double v_int, const AcokParams& params);

// The batched components below read network outputs as parallel arrays. When
// the matching adjoint span is non-empty, `scale` times the derivative of the
// component with respect to each input is added into it.

struct PairMse {
  double u = 0.0;
  double nu = 0.0;
};

struct PairAdjoint {
  std::span<double> u;
  std::span<double> nu;
};

/// Mean squared deviation of (u, nu) from ground truth at the initial points.
PairMse mse_initial(std::span<const double> u_pred, std::span<const double> nu_pred,
                    std::span<const double> u_true, std::span<const double> nu_true,
                    PairAdjoint adjoint = {}, double scale_u = 1.0, double scale_nu = 1.0);

/// Mean squared mismatch of (u, nu) across the periodic boundary. Adjoints are
/// for the lower (x = -X) and upper (x = +X) predictions.
PairMse mse_boundary(std::span<const double> u_lower, std::span<const double> nu_lower,
                     std::span<const double> u_upper, std::span<const double> nu_upper,
                     PairAdjoint lower_adjoint = {}, PairAdjoint upper_adjoint = {},
                     double scale_u = 1.0, double scale_nu = 1.0);

/// Interior jets as parallel arrays.
struct InteriorJets {
  std::span<const double> u;
  std::span<const double> nu;
  std::span<const double> u_t;
  std::span<const double> u_xx;
  std::span<const double> nu_xx;

  std::size_t size() const noexcept { return u.size(); }
};

struct InteriorAdjoint {
  std::span<double> u;
  std::span<double> nu;
  std::span<double> u_t;
  std::span<double> u_xx;
  std::span<double> nu_xx;
  std::span<double> v;  ///< adjoint of the integral-network output at each point
};

double mse_residual(const InteriorJets& jets, std::span<const double> v_int,
                    const AcokParams& params, const InteriorAdjoint& adjoint = {},
                    double scale = 1.0);

/// Mean of |-nu_xx - (f(u) - omega)|^2.
double mse_laplacian(const InteriorJets& jets, double omega, const InteriorAdjoint& adjoint = {},
                     double scale = 1.0);

/// Uniform-mesh values are stored column by column: entry j * n_x + i holds
/// point (t_j, x_i).
struct MeshAdjoint {
  std::span<double> v;
  std::span<double> u;
  std::span<double> nu;
};

/// Mean over mesh times of |v(t_j) - sum_i (f(u(t_j, x_i)) - omega) dx|^2.
double mse_integral(std::span<const double> v, std::span<const double> u_mesh, std::size_t n_x,
                    double omega, double dx, const MeshAdjoint& adjoint = {}, double scale = 1.0);

/// Mean over mesh times of |sum_i nu(t_j, x_i) dx|^2.
double mse_zero_mean(std::span<const double> nu_mesh, std::size_t n_x, double dx,
                     const MeshAdjoint& adjoint = {}, double scale = 1.0);

/// Weighted sum of the eight components, summed in component order.
LossReport total_loss(const LossReport& components, const LossWeights& weights);

/// CSV header/row helpers for the training log.
std::string loss_csv_header();
std::string loss_csv_fields(const LossReport& report);

}  // namespace acok
