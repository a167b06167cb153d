#include <cmath>
#include <random>

#include "acok/errors.hpp"
#include "acok/model.hpp"
#include "acok/spectral.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acok;

namespace {

Field1D random_field(std::size_t n, double half_width, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return Field1D(std::move(v), half_width);
}

double max_abs_diff(const Field1D& a, const Field1D& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("spectral_reference") {
  TEST_CASE("inverse Laplacian of cosine modes") {
    for (double X : {1.0, 2.5}) {
      for (int k = 1; k <= 5; ++k) {
        const double w = k * oracle::pi / X;
        const Field1D g = Field1D::sample(512, X, [&](double x) { return std::cos(w * x); });
        const Field1D nu = inv_laplacian(g);
        const Field1D expected = Field1D::sample(512, X, [&](double x) { return std::cos(w * x) / (w * w); });
        CHECK(max_abs_diff(nu, expected) <= 1e-10);
        CHECK(std::abs(nu.mean()) <= 1e-12);
      }
    }
  }

  TEST_CASE("inverse Laplacian removes the zero mode") {
    const Field1D nu = inv_laplacian(Field1D::constant(64, 1.0, 3.7));
    for (double v : nu.values()) CHECK(v == 0.0);
  }

  TEST_CASE("inverse Laplacian matches a direct DFT solve") {
    const Field1D g = random_field(96, 1.5, 7);
    const Field1D nu = inv_laplacian(g);
    const auto expected = oracle::inv_laplacian(std::vector<double>(g.values().begin(), g.values().end()), 1.5);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(nu[i] == doctest::Approx(expected[i]).epsilon(1e-10).scale(1.0));
  }

  TEST_CASE("spectral Laplacian inverts the inverse Laplacian") {
    const Field1D g = random_field(256, 1.0, 11);
    const Field1D back = spectral_laplacian(inv_laplacian(g));
    const double mean = g.mean();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(-back[i] == doctest::Approx(g[i] - mean).epsilon(1e-10).scale(1.0));
  }

  TEST_CASE("output mean is zero for random data") {
    for (unsigned seed = 0; seed < 10; ++seed) {
      const Field1D nu = inv_laplacian(random_field(512, 1.0, seed));
      CHECK(std::abs(nu.mean()) <= 1e-12);
    }
  }

  TEST_CASE("spectral derivative of a sine") {
    const double X = 1.0;
    const Field1D u = Field1D::sample(128, X, [](double x) { return std::sin(3 * oracle::pi * x); });
    const Field1D du = spectral_derivative(u);
    const Field1D expected = Field1D::sample(128, X, [](double x) { return 3 * oracle::pi * std::cos(3 * oracle::pi * x); });
    CHECK(max_abs_diff(du, expected) <= 1e-10);
  }

  TEST_CASE("pure phases are exact fixed points") {
    const AcokParams p;
    const double kappa = default_kappa(p);
    for (double c : {0.0, 1.0}) {
      Field1D u = Field1D::constant(512, p.half_width, c);
      AcokStepper stepper(512, p, 1e-6, kappa);
      for (int s = 0; s < 100; ++s) stepper.step(u);
      for (double v : u.values()) CHECK(v == c);
      CHECK(acok_step(Field1D::constant(512, p.half_width, c), 1e-6, p, kappa) ==
            Field1D::constant(512, p.half_width, c));
    }
  }

  TEST_CASE("default kappa covers the well curvature") {
    const AcokParams p;
    CHECK(default_kappa(p) == doctest::Approx(2.0 * 36.0 * (6 * 0.04 + 1.2 + 1) / p.epsilon));
  }

  TEST_CASE("default initial condition has zero volume defect") {
    const AcokParams p;
    const Field1D u0 = default_initial_condition(512, p);
    CHECK(std::abs(volume_defect(u0, p.omega)) <= 1e-12);
    for (double v : u0.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  TEST_CASE("energy is non-increasing over 1000 default steps") {
    const AcokParams p;
    Field1D u = default_initial_condition(512, p);
    AcokStepper stepper(512, p, 1e-6, default_kappa(p));
    double e = energy(u, long_range_potential(u, p.omega), p);
    double worst = -INFINITY;
    for (int s = 0; s < 1000; ++s) {
      stepper.step(u);
      const double next = energy(u, long_range_potential(u, p.omega), p);
      worst = std::max(worst, next - e);
      e = next;
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("first-order self-convergence in dt") {
    const AcokParams p;
    const Field1D u0 = default_initial_condition(256, p);
    const double kappa = default_kappa(p);
    const double T = 1e-4;
    auto run = [&](double dt) { return generate_truth(u0, T, dt, p, kappa, 1000000).u.back(); };
    const Field1D a = run(2e-6);
    const Field1D b = run(1e-6);
    const Field1D c = run(5e-7);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      d1 += (a[i] - b[i]) * (a[i] - b[i]);
      d2 += (b[i] - c[i]) * (b[i] - c[i]);
    }
    const double ratio = std::sqrt(d1 / d2);
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }

  TEST_CASE("truth with zero horizon is one snapshot") {
    const AcokParams p;
    const Field1D u0 = default_initial_condition(64, p);
    const TruthSeries s = generate_truth(u0, 0.0, 1e-6, p, default_kappa(p));
    REQUIRE(s.size() == 1);
    CHECK(s.times[0] == 0.0);
    CHECK(s.u[0] == u0);
    CHECK(s.nu[0] == long_range_potential(u0, p.omega));
  }

  TEST_CASE("snapshot count and stride") {
    const AcokParams p;
    const Field1D u0 = default_initial_condition(64, p);
    const TruthSeries all = generate_truth(u0, 1e-3, 1e-6, p, default_kappa(p));
    CHECK(all.size() == 1001);
    CHECK(all.times.back() == doctest::Approx(1e-3).epsilon(1e-15));
    const TruthSeries strided = generate_truth(u0, 1e-3, 1e-6, p, default_kappa(p), 300);
    // 0, 300, 600, 900 and the final state.
    CHECK(strided.size() == 5);
    CHECK(strided.u.back() == all.u.back());
    CHECK(strided.u[2] == all.u[600]);
    CHECK_THROWS_AS(generate_truth(u0, 1.5e-6, 1e-6, p, default_kappa(p)), std::invalid_argument);
  }

  TEST_CASE("truth interpolation is exact on snapshots and linear between") {
    const AcokParams p;
    const Field1D u0 = default_initial_condition(64, p);
    const TruthSeries s = generate_truth(u0, 1e-5, 1e-6, p, default_kappa(p), 5);
    CHECK(s.u_at(s.times[1]) == s.u[1]);
    const double tm = 0.5 * (s.times[0] + s.times[1]);
    const Field1D mid = s.u_at(tm);
    for (std::size_t i = 0; i < mid.size(); ++i) CHECK(mid[i] == doctest::Approx(0.5 * (s.u[0][i] + s.u[1][i])));
    CHECK_FALSE(s.covers(2e-5));
    CHECK_THROWS(s.u_at(2e-5));
  }

  TEST_CASE("blow-up is reported as divergence") {
    AcokParams p;
    Field1D u = Field1D::sample(64, 1.0, [](double x) { return 0.5 + 0.5 * std::cos(oracle::pi * x); });
    u[3] = 1e200;
    AcokStepper stepper(64, p, 1e-3, 0.0);
    CHECK_THROWS_AS(stepper.step(u), DivergenceError);
  }

  TEST_CASE("relative L2 error") {
    const Field1D t = random_field(32, 1.0, 3);
    Field1D scaled = t;
    for (double& v : scaled.values()) v *= 1.1;
    CHECK(relative_l2_error(t, t) == 0.0);
    CHECK(relative_l2_error(scaled, t) == doctest::Approx(0.1).epsilon(1e-12));
    const Field1D other = random_field(32, 1.0, 4);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 32; ++i) {
      num += (other[i] - t[i]) * (other[i] - t[i]);
      den += t[i] * t[i];
    }
    CHECK(relative_l2_error(other, t) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-13));
  }
}
