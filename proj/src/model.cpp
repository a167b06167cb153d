#include "acok/model.hpp"

#include <cmath>

#include "acok/errors.hpp"
#include "acok/spectral.hpp"

namespace acok {

void AcokParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be a finite positive number");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be finite and >= 0");
  }
  if (!(omega > 0.0 && omega < 1.0)) {
    throw ConfigError("omega must lie strictly between 0 and 1");
  }
  if (!(big_m >= 0.0) || !std::isfinite(big_m)) {
    throw ConfigError("big_m must be finite and >= 0");
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ConfigError("half_width must be a finite positive number");
  }
}

double double_well(double u) noexcept {
  const double q = u * u - u;
  return 18.0 * q * q;
}

double double_well_prime(double u) noexcept {
  return 36.0 * (u * u - u) * (2.0 * u - 1.0);
}

double double_well_second(double u) noexcept {
  return 36.0 * (6.0 * u * u - 6.0 * u + 1.0);
}

double interpolant_f(double u) noexcept {
  const double u3 = u * u * u;
  return u3 * (6.0 * u * u - 15.0 * u + 10.0);
}

double interpolant_f_prime(double u) noexcept {
  const double w = u * (u - 1.0);
  return 30.0 * w * w;
}

double interpolant_f_second(double u) noexcept {
  return 60.0 * u * (u - 1.0) * (2.0 * u - 1.0);
}

double volume_defect(const Field1D& u, double omega) {
  double sum = 0.0;
  for (double v : u.values()) sum += interpolant_f(v) - omega;
  return sum * u.dx();
}

double energy(const Field1D& u, const Field1D& inv_lap, const AcokParams& params) {
  require_same_grid(u, inv_lap, "energy");
  const Field1D ux = spectral_derivative(u);
  const double dx = u.dx();

  double local = 0.0;
  double nonlocal = 0.0;
  double volume = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    local += 0.5 * params.epsilon * ux[i] * ux[i] + double_well(u[i]) / params.epsilon;
    const double g = interpolant_f(u[i]) - params.omega;
    nonlocal += g * inv_lap[i];
    volume += g;
  }
  volume *= dx;
  return local * dx + 0.5 * params.gamma * nonlocal * dx + 0.5 * params.big_m * volume * volume;
}

}  // namespace acok
