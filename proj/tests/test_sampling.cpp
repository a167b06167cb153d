#include <algorithm>
#include <cmath>
#include <set>

#include "acok/sampling.hpp"
#include "acok/spectral.hpp"
#include "doctest.h"

using namespace acok;

namespace {

// Every stratum of [lo, lo + width) split into n cells holds exactly one value.
bool one_per_stratum(const std::vector<double>& v, double lo, double width) {
  const std::size_t n = v.size();
  std::vector<int> counts(n, 0);
  for (double x : v) {
    const double cell = (x - lo) / width * static_cast<double>(n);
    if (cell < 0.0 || cell > static_cast<double>(n)) return false;
    const auto idx = std::min(n - 1, static_cast<std::size_t>(cell));
    ++counts[idx];
  }
  return std::all_of(counts.begin(), counts.end(), [](int c) { return c == 1; });
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("derived seeds differ by stream and are stable") {
    CHECK(derive_seed(1234, 1) == derive_seed(1234, 1));
    CHECK(derive_seed(1234, 1) != derive_seed(1234, 2));
    CHECK(derive_seed(1234, 1) != derive_seed(1235, 1));
  }

  TEST_CASE("latin hypercube: four points") {
    const auto pts = lhs_sample(4, 1.0, 1.0, 7);
    REQUIRE(pts.size() == 4);
    std::vector<double> t, x;
    for (const auto& p : pts) {
      t.push_back(p.t);
      x.push_back(p.x);
    }
    CHECK(one_per_stratum(t, 0.0, 1.0));
    CHECK(one_per_stratum(x, -1.0, 2.0));
  }

  TEST_CASE("latin hypercube: one point") {
    const auto pts = lhs_sample(1, 2.0, 3.0, 9);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].t >= 0.0);
    CHECK(pts[0].t <= 2.0);
    CHECK(pts[0].x >= -3.0);
    CHECK(pts[0].x < 3.0);
  }

  TEST_CASE("latin hypercube: histogram at full preset scale") {
    const auto pts = lhs_sample(20000, 1e-3, 1.0, 1234);
    std::vector<double> t, x;
    for (const auto& p : pts) {
      t.push_back(p.t);
      x.push_back(p.x);
      CHECK_FALSE(p.x >= 1.0);
    }
    CHECK(one_per_stratum(t, 0.0, 1e-3));
    CHECK(one_per_stratum(x, -1.0, 2.0));
    CHECK(lhs_sample(20000, 1e-3, 1.0, 1234) == pts);
    CHECK_FALSE(lhs_sample(20000, 1e-3, 1.0, 1235) == pts);
  }

  TEST_CASE("time rescaling") {
    const auto pts = lhs_sample(100, 1e-3, 1.0, 3);
    CHECK(rescale_time(pts, 1e-3, 1) == pts);
    const std::vector<SpaceTimePoint> half{{5e-4, 0.3}};
    const auto r = rescale_time(half, 1e-3, 2);
    CHECK(r[0].t == doctest::Approx(2.5e-4).epsilon(1e-14));
    CHECK(r[0].x == 0.3);
    CHECK_THROWS(rescale_time(half, 1e-3, 4));

    const auto many = lhs_sample(10000, 1e-3, 1.0, 5);
    const auto sq = rescale_time(many, 1e-3, 2);
    auto early = [](const std::vector<SpaceTimePoint>& v) {
      return std::count_if(v.begin(), v.end(), [](const SpaceTimePoint& p) { return p.t <= 5e-4; });
    };
    CHECK(early(sq) > early(many));
  }

  TEST_CASE("initial samples") {
    const AcokParams p;
    const Field1D u0 = default_initial_condition(512, p);
    const Field1D nu0 = long_range_potential(u0, p.omega);
    const InitialSamples all = sample_initial(512, u0, nu0, 1);
    std::vector<std::size_t> idx = all.indices;
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < 512; ++i) CHECK(idx[i] == i);

    const InitialSamples s = sample_initial(500, u0, nu0, 2);
    CHECK(std::set<std::size_t>(s.indices.begin(), s.indices.end()).size() == 500);
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(s.x[k] == u0.x(s.indices[k]));
      CHECK(s.u[k] == u0[s.indices[k]]);
      CHECK(s.nu[k] == nu0[s.indices[k]]);
    }
    CHECK(sample_initial(500, u0, nu0, 2).indices == s.indices);
    CHECK_THROWS(sample_initial(513, u0, nu0, 2));
  }

  TEST_CASE("boundary pairs") {
    const BoundaryPairs b = sample_boundary(95, 1e-3, 1.0, 4);
    CHECK(b.size() == 95);
    CHECK(b.lower_x == -1.0);
    CHECK(b.upper_x == 1.0);
    for (double t : b.t) {
      CHECK(t > 0.0);
      CHECK(t <= 1e-3);
    }
    CHECK(sample_boundary(995, 1e-2, 1.0, 4).size() == 995);
  }

  TEST_CASE("uniform mesh") {
    const UniformMesh m = uniform_mesh(20, 4, 1e-3, 1.0, 6);
    CHECK(m.n_t() == 20);
    CHECK(m.x == std::vector<double>{-1.0, -0.5, 0.0, 0.5});
    CHECK(m.dx == 0.5);
    for (double t : m.t) {
      CHECK(t >= 0.0);
      CHECK(t <= 1e-3);
    }
    CHECK(uniform_mesh(20, 4, 1e-3, 1.0, 6).t == m.t);
  }

  TEST_CASE("sample set shifts times into the window") {
    const AcokParams p;
    const Field1D u0 = default_initial_condition(64, p);
    const Field1D nu0 = long_range_potential(u0, p.omega);
    SamplingPlan plan;
    plan.n_initial = 32;
    plan.n_boundary = 10;
    plan.n_interior = 100;
    plan.n_time_uniform = 5;
    plan.n_x_uniform = 64;
    const SampleSet s = build_sample_set(plan, u0, nu0, 2e-3, 1e-3);
    CHECK(s.initial.t == 2e-3);
    CHECK(s.t_start == 2e-3);
    CHECK(s.t_end == doctest::Approx(3e-3));
    for (const auto& q : s.interior) {
      CHECK(q.t >= 2e-3);
      CHECK(q.t <= 3e-3 * (1 + 1e-15));
    }
    for (double t : s.boundary.t) CHECK(t > 2e-3);
    for (double t : s.mesh.t) CHECK(t >= 2e-3);
    CHECK(s.mesh.n_x() == 64);
  }
}
