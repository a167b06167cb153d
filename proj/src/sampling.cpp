#include "acok/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace acok {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

double below(double upper) { return std::nextafter(upper, -std::numeric_limits<double>::infinity()); }

void require_box(double t_max, double half_width, const char* what) {
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw std::invalid_argument(std::string(what) + ": t_max must be finite and >= 0");
  }
  if (!(half_width > 0.0)) throw std::invalid_argument(std::string(what) + ": half_width must be positive");
}

}  // namespace

std::vector<SpaceTimePoint> lhs_sample(std::size_t n, double t_max, double half_width,
                                       std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("lhs_sample: n must be >= 1");
  require_box(t_max, half_width, "lhs_sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::size_t> t_strata(n);
  std::vector<std::size_t> x_strata(n);
  std::iota(t_strata.begin(), t_strata.end(), 0);
  std::iota(x_strata.begin(), x_strata.end(), 0);
  std::shuffle(t_strata.begin(), t_strata.end(), rng);
  std::shuffle(x_strata.begin(), x_strata.end(), rng);

  const double width = 2.0 * half_width;
  const double count = static_cast<double>(n);
  std::vector<SpaceTimePoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ut = (static_cast<double>(t_strata[i]) + unit(rng)) / count;
    const double ux = (static_cast<double>(x_strata[i]) + unit(rng)) / count;
    points[i].t = std::min(t_max * ut, t_max);
    points[i].x = std::min(-half_width + width * ux, below(half_width));
  }
  return points;
}

std::vector<SpaceTimePoint> rescale_time(std::vector<SpaceTimePoint> points, double t_max,
                                         int power) {
  if (power < 1 || power > 3) throw std::invalid_argument("rescale_time: power must be 1, 2, or 3");
  for (const auto& p : points) {
    if (!(p.t >= 0.0 && p.t <= t_max)) {
      throw std::invalid_argument("rescale_time: t = " + std::to_string(p.t) +
                                  " lies outside [0, t_max]");
    }
  }
  if (power == 1 || t_max == 0.0) return points;
  for (auto& p : points) {
    const double s = p.t / t_max;
    p.t = std::min(t_max * std::pow(s, power), t_max);
  }
  return points;
}

InitialSamples sample_initial(std::size_t n0, const Field1D& u0, const Field1D& nu0,
                              std::uint64_t seed) {
  require_same_grid(u0, nu0, "sample_initial");
  if (n0 == 0) throw std::invalid_argument("sample_initial: n0 must be >= 1");
  if (n0 > u0.size()) {
    throw std::invalid_argument("sample_initial: requested " + std::to_string(n0) +
                                " points but the grid only has " + std::to_string(u0.size()));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(u0.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n0);

  InitialSamples out;
  out.indices = order;
  for (std::size_t idx : order) {
    out.x.push_back(u0.x(idx));
    out.u.push_back(u0[idx]);
    out.nu.push_back(nu0[idx]);
  }
  return out;
}

BoundaryPairs sample_boundary(std::size_t nb, double t_max, double half_width,
                              std::uint64_t seed) {
  if (nb == 0) throw std::invalid_argument("sample_boundary: nb must be >= 1");
  require_box(t_max, half_width, "sample_boundary");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BoundaryPairs out;
  out.lower_x = -half_width;
  out.upper_x = half_width;
  out.t.resize(nb);
  for (auto& t : out.t) t = t_max * (1.0 - unit(rng));
  return out;
}

UniformMesh uniform_mesh(std::size_t n_t, std::size_t n_x, double t_max, double half_width,
                         std::uint64_t seed) {
  if (n_t == 0 || n_x == 0) throw std::invalid_argument("uniform_mesh: counts must be >= 1");
  require_box(t_max, half_width, "uniform_mesh");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  UniformMesh mesh;
  mesh.t.resize(n_t);
  for (auto& t : mesh.t) t = t_max * unit(rng);
  mesh.dx = 2.0 * half_width / static_cast<double>(n_x);
  mesh.x.resize(n_x);
  for (std::size_t i = 0; i < n_x; ++i) mesh.x[i] = -half_width + static_cast<double>(i) * mesh.dx;
  return mesh;
}

SampleSet build_sample_set(const SamplingPlan& plan, const Field1D& u0, const Field1D& nu0,
                           double t_start, double duration) {
  const double half_width = u0.half_width();
  SampleSet set;
  set.t_start = t_start;
  set.t_end = t_start + duration;
  set.half_width = half_width;

  set.initial = sample_initial(plan.n_initial, u0, nu0, derive_seed(plan.seed, 1));
  set.initial.t = t_start;

  set.boundary = sample_boundary(plan.n_boundary, duration, half_width, derive_seed(plan.seed, 2));
  for (auto& t : set.boundary.t) t += t_start;

  set.interior = rescale_time(lhs_sample(plan.n_interior, duration, half_width,
                                         derive_seed(plan.seed, 3)),
                              duration, plan.rescale_power);
  for (auto& p : set.interior) p.t += t_start;

  set.mesh = uniform_mesh(plan.n_time_uniform, plan.n_x_uniform, duration, half_width,
                          derive_seed(plan.seed, 4));
  for (auto& t : set.mesh.t) t += t_start;
  return set;
}

}  // namespace acok
