#include "acok/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "acok/errors.hpp"

namespace acok {

struct PeriodicSpectrum::Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  explicit Plans(std::size_t n) {
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    // ESTIMATE keeps plan selection, and therefore rounding, reproducible.
    r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
    if (!real || !spec || !r2c || !c2r) {
      release();
      throw std::runtime_error("PeriodicSpectrum: FFTW plan creation failed");
    }
  }
  ~Plans() { release(); }

  void release() {
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
    r2c = c2r = nullptr;
    real = nullptr;
    spec = nullptr;
  }
};

PeriodicSpectrum::PeriodicSpectrum(std::size_t n, double half_width)
    : n_(n), half_width_(half_width), plans_(std::make_unique<Plans>(n)) {
  if (n < 4 || n % 2 != 0) {
    throw std::invalid_argument("PeriodicSpectrum: grid size must be even and >= 4");
  }
}

PeriodicSpectrum::~PeriodicSpectrum() = default;
PeriodicSpectrum::PeriodicSpectrum(PeriodicSpectrum&&) noexcept = default;
PeriodicSpectrum& PeriodicSpectrum::operator=(PeriodicSpectrum&&) noexcept = default;

double PeriodicSpectrum::wavenumber(std::size_t mode) const noexcept {
  return std::numbers::pi * static_cast<double>(mode) / half_width_;
}

void PeriodicSpectrum::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), plans_->real);
  fftw_execute(plans_->r2c);
  for (std::size_t m = 0; m < modes(); ++m) {
    out[m] = {plans_->spec[m][0], plans_->spec[m][1]};
  }
}

void PeriodicSpectrum::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  for (std::size_t m = 0; m < modes(); ++m) {
    plans_->spec[m][0] = in[m].real();
    plans_->spec[m][1] = in[m].imag();
  }
  fftw_execute(plans_->c2r);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = plans_->real[i] * scale;
}

namespace {

template <typename Multiplier>
Field1D apply_symbol(const Field1D& g, Multiplier&& symbol) {
  PeriodicSpectrum spectrum(g.size(), g.half_width());
  std::vector<std::complex<double>> hat(spectrum.modes());
  spectrum.forward(g.values(), hat);
  for (std::size_t m = 0; m < hat.size(); ++m) hat[m] *= symbol(m, spectrum.wavenumber(m));
  Field1D out = Field1D::zeros(g.size(), g.half_width());
  spectrum.inverse(hat, out.values());
  return out;
}

void remove_mean(std::span<double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  for (double& v : values) v -= mean;
}

}  // namespace

Field1D inv_laplacian(const Field1D& g) {
  Field1D nu = apply_symbol(g, [](std::size_t m, double k) -> std::complex<double> {
    return m == 0 ? 0.0 : 1.0 / (k * k);
  });
  // The zero mode is already gone; this strips the residual rounding mean.
  remove_mean(nu.values());
  return nu;
}

Field1D spectral_derivative(const Field1D& u) {
  const std::size_t nyquist = u.size() / 2;
  return apply_symbol(u, [nyquist](std::size_t m, double k) -> std::complex<double> {
    return m == nyquist ? std::complex<double>(0.0) : std::complex<double>(0.0, k);
  });
}

Field1D spectral_laplacian(const Field1D& u) {
  return apply_symbol(u, [](std::size_t, double k) -> std::complex<double> { return -k * k; });
}

Field1D long_range_potential(const Field1D& u, double omega) {
  Field1D g = u;
  for (double& v : g.values()) v = interpolant_f(v) - omega;
  return inv_laplacian(g);
}

double default_kappa(const AcokParams& params) {
  const double lo = -0.2;
  const double hi = 1.2;
  double peak = std::max(std::abs(double_well_second(lo)), std::abs(double_well_second(hi)));
  peak = std::max(peak, std::abs(double_well_second(0.5)));
  return 2.0 * peak / params.epsilon;
}

Field1D default_initial_condition(std::size_t n, const AcokParams& params) {
  const auto bump = [&](double r) {
    return Field1D::sample(n, params.half_width, [&](double x) {
      return 0.5 * (1.0 + std::tanh((r - std::abs(x)) / params.epsilon));
    });
  };
  // The defect is increasing in r; bisect on [0, X].
  double lo = 0.0;
  double hi = params.half_width;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (volume_defect(bump(mid), params.omega) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return bump(0.5 * (lo + hi));
}

AcokStepper::AcokStepper(std::size_t n, const AcokParams& params, double dt, double kappa)
    : params_(params),
      dt_(dt),
      kappa_(kappa),
      spectrum_(n, params.half_width),
      explicit_(n),
      g_(n),
      nu_(n),
      u_hat_(n / 2 + 1),
      n_hat_(n / 2 + 1) {
  params_.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("AcokStepper: dt must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("AcokStepper: kappa must be >= 0");
}

void AcokStepper::step(Field1D& u) {
  if (u.size() != spectrum_.size() || u.half_width() != params_.half_width) {
    throw std::invalid_argument("AcokStepper: field does not match the stepper grid");
  }
  const std::size_t n = u.size();
  const double dx = u.dx();
  const auto values = u.values();

  double volume = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g_[i] = interpolant_f(values[i]) - params_.omega;
    volume += g_[i];
  }
  volume *= dx;

  spectrum_.forward(g_, n_hat_);
  n_hat_[0] = 0.0;
  for (std::size_t m = 1; m < n_hat_.size(); ++m) {
    const double k = spectrum_.wavenumber(m);
    n_hat_[m] /= k * k;
  }
  spectrum_.inverse(n_hat_, nu_);

  for (std::size_t i = 0; i < n; ++i) {
    const double fp = interpolant_f_prime(values[i]);
    explicit_[i] = double_well_prime(values[i]) / params_.epsilon +
                   (params_.gamma * nu_[i] + params_.big_m * volume) * fp;
  }

  // Increment form: (1/dt + kappa + eps k^2) du_hat = -eps k^2 u_hat - N_hat.
  spectrum_.forward(values, u_hat_);
  spectrum_.forward(explicit_, n_hat_);
  for (std::size_t m = 0; m < u_hat_.size(); ++m) {
    const double k = spectrum_.wavenumber(m);
    const double diffusion = params_.epsilon * k * k;
    n_hat_[m] = -(diffusion * u_hat_[m] + n_hat_[m]) / (1.0 / dt_ + kappa_ + diffusion);
  }
  spectrum_.inverse(n_hat_, explicit_);

  for (std::size_t i = 0; i < n; ++i) {
    values[i] += explicit_[i];
    if (!std::isfinite(values[i])) {
      throw DivergenceError("acok_step: non-finite state", 0);
    }
  }
}

Field1D acok_step(const Field1D& u, double dt, const AcokParams& params, double kappa) {
  AcokStepper stepper(u.size(), params, dt, kappa);
  Field1D next = u;
  stepper.step(next);
  return next;
}

bool TruthSeries::covers(double t) const {
  if (times.empty()) return false;
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end()));
  return t >= t_begin() - slack && t <= t_end() + slack;
}

namespace {

Field1D interpolate(const TruthSeries& series, const std::vector<Field1D>& fields, double t) {
  if (!series.covers(t)) {
    std::ostringstream msg;
    msg << "truth does not cover t = " << t << " (range [" << series.t_begin() << ", "
        << series.t_end() << "])";
    throw std::out_of_range(msg.str());
  }
  const auto& times = series.times;
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end()) return fields.back();
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const double span = times.size() > 1 ? times.back() - times.front() : 1.0;
  const double snap = 1e-9 * std::max(span, 1e-300);
  if (std::abs(times[hi] - t) <= snap) return fields[hi];
  if (hi == 0) return fields.front();
  if (std::abs(times[hi - 1] - t) <= snap) return fields[hi - 1];
  const double w = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
  Field1D out = fields[hi - 1];
  const auto b = fields[hi].values();
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = (1.0 - w) * values[i] + w * b[i];
  return out;
}

}  // namespace

Field1D TruthSeries::u_at(double t) const { return interpolate(*this, u, t); }
Field1D TruthSeries::nu_at(double t) const { return interpolate(*this, nu, t); }

void TruthSeries::validate() const {
  if (times.empty()) throw std::invalid_argument("truth series is empty");
  if (u.size() != times.size() || nu.size() != times.size()) {
    throw std::invalid_argument("truth series: field counts do not match time count");
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw std::invalid_argument("truth series: times must be strictly increasing");
    }
    require_same_grid(u[k], u.front(), "truth series");
    require_same_grid(nu[k], u.front(), "truth series");
  }
}

TruthSeries generate_truth(const Field1D& u0, double t_max, double dt, const AcokParams& params,
                           double kappa, std::size_t stride) {
  params.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("generate_truth: dt must be positive");
  if (!(t_max >= 0.0)) throw std::invalid_argument("generate_truth: t_max must be >= 0");
  if (stride == 0) throw std::invalid_argument("generate_truth: stride must be >= 1");
  const double ratio = t_max / dt;
  const auto steps = static_cast<long>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-6 * std::max(1.0, ratio)) {
    throw std::invalid_argument("generate_truth: t_max must be a whole number of steps");
  }
  if (u0.half_width() != params.half_width) {
    throw std::invalid_argument("generate_truth: initial field half_width differs from params");
  }

  TruthSeries series;
  const auto keep = [&](long step, const Field1D& u) {
    series.times.push_back(static_cast<double>(step) * dt);
    series.u.push_back(u);
    series.nu.push_back(long_range_potential(u, params.omega));
  };

  Field1D u = u0;
  keep(0, u);
  if (steps == 0) return series;

  AcokStepper stepper(u.size(), params, dt, kappa);
  for (long s = 1; s <= steps; ++s) {
    try {
      stepper.step(u);
    } catch (const DivergenceError&) {
      std::ostringstream msg;
      msg << "reference solver blew up at t = " << static_cast<double>(s) * dt
          << "; reduce dt";
      throw DivergenceError(msg.str(), s);
    }
    if (s % static_cast<long>(stride) == 0 || s == steps) keep(s, u);
  }
  return series;
}

double relative_l2_error(const Field1D& prediction, const Field1D& truth) {
  require_same_grid(prediction, truth, "relative_l2_error");
  double diff = 0.0;
  double base = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = prediction[i] - truth[i];
    diff += d * d;
    base += truth[i] * truth[i];
  }
  return base == 0.0 ? std::sqrt(diff) : std::sqrt(diff / base);
}

}  // namespace acok
