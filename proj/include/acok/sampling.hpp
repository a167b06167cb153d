#pragma once

#include <cstdint>
#include <vector>

#include "acok/field.hpp"

namespace acok {

/// Independent sub-seed for stream `stream` of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct SpaceTimePoint {
  double t = 0.0;
  double x = 0.0;

  bool operator==(const SpaceTimePoint&) const = default;
};

/// Latin hypercube design on [0, t_max] x [-X, X): one point per stratum of
/// each axis, strata paired by independent random permutations.
std::vector<SpaceTimePoint> lhs_sample(std::size_t n, double t_max, double half_width,
                                       std::uint64_t seed);

/// Maps t to t_max (t / t_max)^power, concentrating points near t = 0.
/// power must be 1, 2, or 3; power 1 returns the input untouched.
std::vector<SpaceTimePoint> rescale_time(std::vector<SpaceTimePoint> points, double t_max,
                                         int power);

/// Initial-time collocation points drawn from grid nodes without replacement,
/// carrying the ground-truth u and nu there.
struct InitialSamples {
  double t = 0.0;
  std::vector<std::size_t> indices;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> nu;

  std::size_t size() const noexcept { return x.size(); }
};

InitialSamples sample_initial(std::size_t n0, const Field1D& u0, const Field1D& nu0,
                              std::uint64_t seed);

/// Periodic boundary pairs (t, -X) / (t, +X) with t uniform in (0, t_max].
struct BoundaryPairs {
  std::vector<double> t;
  double lower_x = -1.0;
  double upper_x = 1.0;

  std::size_t size() const noexcept { return t.size(); }
};

BoundaryPairs sample_boundary(std::size_t nb, double t_max, double half_width,
                              std::uint64_t seed);

/// n_t random times in [0, t_max] crossed with n_x uniform nodes -X + i dx.
struct UniformMesh {
  std::vector<double> t;
  std::vector<double> x;
  double dx = 0.0;

  std::size_t n_t() const noexcept { return t.size(); }
  std::size_t n_x() const noexcept { return x.size(); }
};

UniformMesh uniform_mesh(std::size_t n_t, std::size_t n_x, double t_max, double half_width,
                         std::uint64_t seed);

/// All collocation collections for one training window.
struct SampleSet {
  InitialSamples initial;
  BoundaryPairs boundary;
  std::vector<SpaceTimePoint> interior;
  UniformMesh mesh;
  double t_start = 0.0;
  double t_end = 0.0;
  double half_width = 1.0;
};

struct SamplingPlan {
  std::size_t n_initial = 500;
  std::size_t n_boundary = 95;
  std::size_t n_interior = 20000;
  std::size_t n_time_uniform = 20;
  std::size_t n_x_uniform = 512;
  int rescale_power = 1;
  std::uint64_t seed = 1234;
};

/// Draws every collection for the window [t_start, t_start + duration]. The
/// initial data (u0, nu0) is taken to hold at t_start.
SampleSet build_sample_set(const SamplingPlan& plan, const Field1D& u0, const Field1D& nu0,
                           double t_start, double duration);

}  // namespace acok
