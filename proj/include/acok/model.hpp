#pragma once

#include "acok/field.hpp"

namespace acok {

/// Physical constants of the Allen-Cahn-Ohta-Kawasaki model on [-X, X).
///
/// Defaults are implementation choices that give visible phase separation on
/// millisecond horizons; override them through the run configuration.
struct AcokParams {
  double epsilon = 0.01;   ///< interfacial width
  double gamma = 100.0;    ///< long-range interaction strength
  double omega = 0.3;      ///< volume fraction of species A
  double big_m = 1000.0;   ///< volume-penalty strength
  double half_width = 1.0; ///< domain is [-half_width, half_width)

  double domain_length() const noexcept { return 2.0 * half_width; }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const AcokParams&) const = default;
};

// W(u) = 18 (u^2 - u)^2 and derivatives.
double double_well(double u) noexcept;
double double_well_prime(double u) noexcept;
double double_well_second(double u) noexcept;

// f(u) = 6u^5 - 15u^4 + 10u^3 and derivatives.
double interpolant_f(double u) noexcept;
double interpolant_f_prime(double u) noexcept;
double interpolant_f_second(double u) noexcept;

/// Discrete volume defect: midpoint integral of f(u) - omega.
double volume_defect(const Field1D& u, double omega);

/// Discrete free energy on the periodic grid.
///
/// Gradient term uses the spectral derivative; the long-range term is
/// gamma/2 * sum (f(u) - omega) * inv_lap * dx, which equals the half-Laplacian
/// form after integration by parts. `inv_lap` must be the zero-mean inverse
/// Laplacian of f(u) - omega on the same grid.
double energy(const Field1D& u, const Field1D& inv_lap, const AcokParams& params);

}  // namespace acok
