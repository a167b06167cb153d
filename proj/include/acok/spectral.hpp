#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "acok/field.hpp"
#include "acok/model.hpp"

namespace acok {

/// Real-to-complex FFT pair on a fixed periodic grid (FFTW, estimate plans).
///
/// Mode m carries physical wavenumber k_m = pi m / X for m = 0..N/2.
class PeriodicSpectrum {
 public:
  PeriodicSpectrum(std::size_t n, double half_width);
  ~PeriodicSpectrum();
  PeriodicSpectrum(const PeriodicSpectrum&) = delete;
  PeriodicSpectrum& operator=(const PeriodicSpectrum&) = delete;
  PeriodicSpectrum(PeriodicSpectrum&&) noexcept;
  PeriodicSpectrum& operator=(PeriodicSpectrum&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  std::size_t modes() const noexcept { return n_ / 2 + 1; }
  double wavenumber(std::size_t mode) const noexcept;

  /// Unnormalized forward transform.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Inverse transform including the 1/N normalization.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Plans;
  std::size_t n_ = 0;
  double half_width_ = 1.0;
  std::unique_ptr<Plans> plans_;
};

/// Zero-mean solution of -nu'' = g - mean(g); the zero mode is discarded.
Field1D inv_laplacian(const Field1D& g);
/// Spectral first derivative (Nyquist mode dropped).
Field1D spectral_derivative(const Field1D& u);
/// Spectral Laplacian u''.
Field1D spectral_laplacian(const Field1D& u);

/// inv_laplacian(f(u) - omega).
Field1D long_range_potential(const Field1D& u, double omega);

/// 2 max|W''| / epsilon over u in [-0.2, 1.2].
double default_kappa(const AcokParams& params);

/// Single centred bump 0.5 (1 + tanh((r - |x|)/epsilon)) with r chosen so the
/// discrete volume defect vanishes.
Field1D default_initial_condition(std::size_t n, const AcokParams& params);

/// First-order stabilized semi-implicit stepper for the ACOK gradient flow.
///
/// (u1 - u0)/dt = eps u1'' - kappa (u1 - u0) - W'(u0)/eps
///                - gamma inv_lap(f(u0) - omega) f'(u0) - M [int f(u0) - omega] f'(u0)
class AcokStepper {
 public:
  AcokStepper(std::size_t n, const AcokParams& params, double dt, double kappa);

  /// Advances `u` in place by one step. Throws DivergenceError on a
  /// non-finite state.
  void step(Field1D& u);

  double dt() const noexcept { return dt_; }
  double kappa() const noexcept { return kappa_; }

 private:
  AcokParams params_;
  double dt_;
  double kappa_;
  PeriodicSpectrum spectrum_;
  std::vector<double> explicit_;
  std::vector<double> g_;
  std::vector<double> nu_;
  std::vector<std::complex<double>> u_hat_;
  std::vector<std::complex<double>> n_hat_;
};

Field1D acok_step(const Field1D& u, double dt, const AcokParams& params, double kappa);

/// Time-indexed reference snapshots of u and nu = inv_lap(f(u) - omega).
struct TruthSeries {
  std::vector<double> times;
  std::vector<Field1D> u;
  std::vector<Field1D> nu;

  std::size_t size() const noexcept { return times.size(); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  bool covers(double t) const;
  /// Linear interpolation between bracketing snapshots; exact on snapshot times.
  Field1D u_at(double t) const;
  Field1D nu_at(double t) const;
  /// Throws std::invalid_argument on inconsistent sizes, grids, or unsorted times.
  void validate() const;
};

/// Integrates from t = 0 to t_max, keeping every `stride`-th step plus the
/// first and last states. t_max / dt must be a whole number of steps.
TruthSeries generate_truth(const Field1D& u0, double t_max, double dt, const AcokParams& params,
                           double kappa, std::size_t stride = 1);

/// ||prediction - truth|| / ||truth||, or the absolute norm when truth is zero.
double relative_l2_error(const Field1D& prediction, const Field1D& truth);

}  // namespace acok
