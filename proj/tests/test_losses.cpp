#include <cmath>
#include <random>

#include "acok/losses.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acok;

namespace {

std::vector<double> randoms(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double sq(double v) { return v * v; }

}  // namespace

TEST_SUITE("losses") {
  TEST_CASE("residual vanishes at pure phases") {
    const AcokParams p;
    for (double u : {0.0, 1.0}) {
      for (double v : {-3.0, 0.0, 2.5}) {
        NetworkJet j;
        j.u = u;
        j.nu = 0.7;
        CHECK(residual_f(j, v, p) == 0.0);
      }
    }
  }

  TEST_CASE("residual matches a hand expansion") {
    const AcokParams p{0.05, 7.0, 0.4, 20.0, 1.0};
    NetworkJet j;
    j.u = 0.3;
    j.nu = -0.2;
    j.u_t = 1.5;
    j.u_xx = -4.0;
    const double v = 0.11;
    const double wp = 36 * (0.09 - 0.3) * (0.6 - 1);
    const double fp = 30 * 0.09 * 0.49;
    const double expected = 1.5 - 0.05 * -4.0 + wp / 0.05 + 7.0 * -0.2 * fp + 20.0 * 0.11 * fp;
    CHECK(residual_f(j, v, p) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("residual partials match finite differences") {
    const AcokParams p{0.05, 7.0, 0.4, 20.0, 1.0};
    NetworkJet j;
    j.u = 0.37;
    j.nu = -0.2;
    j.u_t = 1.5;
    j.u_xx = -4.0;
    const double v = 0.11;
    const ResidualPartials d = residual_f_partials(j, v, p);
    const double h = 1e-6;
    auto bump = [&](double NetworkJet::*field) {
      NetworkJet a = j, b = j;
      a.*field += h;
      b.*field -= h;
      return (residual_f(a, v, p) - residual_f(b, v, p)) / (2 * h);
    };
    CHECK(d.du == doctest::Approx(bump(&NetworkJet::u)).epsilon(1e-7));
    CHECK(d.dnu == doctest::Approx(bump(&NetworkJet::nu)).epsilon(1e-7));
    CHECK(d.du_t == doctest::Approx(bump(&NetworkJet::u_t)).epsilon(1e-7));
    CHECK(d.du_xx == doctest::Approx(bump(&NetworkJet::u_xx)).epsilon(1e-7));
    CHECK(d.dv == doctest::Approx((residual_f(j, v + h, p) - residual_f(j, v - h, p)) / (2 * h)).epsilon(1e-7));
  }

  TEST_CASE("initial mse") {
    const std::vector<double> a{0.2, 0.4}, b{1.0, 2.0};
    const PairMse exact = mse_initial(a, b, a, b);
    CHECK(exact.u == 0.0);
    CHECK(exact.nu == 0.0);
    const std::vector<double> u{0.6}, ut{0.5}, nu{0.3};
    const PairMse one = mse_initial(u, nu, ut, nu);
    CHECK(one.u == doctest::Approx(0.01));
    CHECK(one.nu == 0.0);

    const auto up = randoms(37, 1), nup = randoms(37, 2), utr = randoms(37, 3), nutr = randoms(37, 4);
    double su = 0.0, snu = 0.0;
    for (std::size_t i = 0; i < 37; ++i) {
      su += sq(up[i] - utr[i]);
      snu += sq(nup[i] - nutr[i]);
    }
    std::vector<double> au(37, 0.0), anu(37, 0.0);
    const PairMse r = mse_initial(up, nup, utr, nutr, {au, anu}, 2.0, 3.0);
    CHECK(r.u == doctest::Approx(su / 37).epsilon(1e-14));
    CHECK(r.nu == doctest::Approx(snu / 37).epsilon(1e-14));
    for (std::size_t i = 0; i < 37; ++i) {
      CHECK(au[i] == doctest::Approx(2.0 * 2 * (up[i] - utr[i]) / 37));
      CHECK(anu[i] == doctest::Approx(3.0 * 2 * (nup[i] - nutr[i]) / 37));
    }
  }

  TEST_CASE("boundary mse") {
    const std::vector<double> same{0.3, -0.1};
    const PairMse periodic = mse_boundary(same, same, same, same);
    CHECK(periodic.u == 0.0);
    CHECK(periodic.nu == 0.0);
    const std::vector<double> lo{0.5}, hi{0.3}, nu{1.0};
    CHECK(mse_boundary(lo, nu, hi, nu).u == doctest::Approx(0.04));

    const auto ul = randoms(20, 5), nl = randoms(20, 6), uu = randoms(20, 7), nup = randoms(20, 8);
    double su = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      su += sq(ul[i] - uu[i]);
      sn += sq(nl[i] - nup[i]);
    }
    std::vector<double> aul(20, 0.0), anl(20, 0.0), auu(20, 0.0), anu(20, 0.0);
    const PairMse r = mse_boundary(ul, nl, uu, nup, {aul, anl}, {auu, anu}, 1.0, 30.0);
    CHECK(r.u == doctest::Approx(su / 20).epsilon(1e-14));
    CHECK(r.nu == doctest::Approx(sn / 20).epsilon(1e-14));
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(aul[i] == doctest::Approx(2 * (ul[i] - uu[i]) / 20));
      CHECK(auu[i] == doctest::Approx(-2 * (ul[i] - uu[i]) / 20));
      CHECK(anl[i] == doctest::Approx(30.0 * 2 * (nl[i] - nup[i]) / 20));
    }
  }

  TEST_CASE("residual mse") {
    const AcokParams p;
    const std::vector<double> zero(5, 0.0);
    const InteriorJets pure{zero, zero, zero, zero, zero};
    CHECK(mse_residual(pure, zero, p) == 0.0);

    // A single point whose residual is 0.5: u = 0 so only u_t contributes.
    const std::vector<double> u{0.0}, ut{0.5}, z{0.0};
    CHECK(mse_residual(InteriorJets{u, z, ut, z, z}, z, p) == doctest::Approx(0.25));

    const std::size_t n = 25;
    const auto ju = randoms(n, 11, -0.2, 1.2), jnu = randoms(n, 12), jut = randoms(n, 13), juxx = randoms(n, 14),
               jnuxx = randoms(n, 15), v = randoms(n, 16);
    const InteriorJets jets{ju, jnu, jut, juxx, jnuxx};
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      NetworkJet j;
      j.u = ju[i];
      j.nu = jnu[i];
      j.u_t = jut[i];
      j.u_xx = juxx[i];
      s += sq(residual_f(j, v[i], p));
    }
    std::vector<double> a_u(n, 0.0), a_nu(n, 0.0), a_ut(n, 0.0), a_uxx(n, 0.0), a_nuxx(n, 0.0), a_v(n, 0.0);
    const double r = mse_residual(jets, v, p, {a_u, a_nu, a_ut, a_uxx, a_nuxx, a_v}, 0.5);
    CHECK(r == doctest::Approx(s / n).epsilon(1e-13));
    for (std::size_t i = 0; i < n; ++i) {
      NetworkJet j;
      j.u = ju[i];
      j.nu = jnu[i];
      j.u_t = jut[i];
      j.u_xx = juxx[i];
      const double f = residual_f(j, v[i], p);
      const ResidualPartials d = residual_f_partials(j, v[i], p);
      CHECK(a_u[i] == doctest::Approx(0.5 * 2 * f * d.du / n));
      CHECK(a_ut[i] == doctest::Approx(0.5 * 2 * f / n));
      CHECK(a_v[i] == doctest::Approx(0.5 * 2 * f * d.dv / n));
      CHECK(a_nuxx[i] == 0.0);
    }
  }

  TEST_CASE("laplacian mse") {
    const std::vector<double> u{0.2, 0.7, 1.0};
    std::vector<double> nuxx(3);
    for (std::size_t i = 0; i < 3; ++i) nuxx[i] = -(interpolant_f(u[i]) - 0.3);
    const std::vector<double> z(3, 0.0);
    CHECK(mse_laplacian(InteriorJets{u, z, z, z, nuxx}, 0.3) == doctest::Approx(0.0).scale(1.0));
    const std::vector<double> u0{0.0}, z1{0.0};
    CHECK(mse_laplacian(InteriorJets{u0, z1, z1, z1, z1}, 0.3) == doctest::Approx(0.09));

    const std::size_t n = 30;
    const auto ju = randoms(n, 21, -0.2, 1.2), jnuxx = randoms(n, 22);
    const std::vector<double> zn(n, 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sq(-jnuxx[i] - (interpolant_f(ju[i]) - 0.3));
    std::vector<double> a_u(n, 0.0), a_nuxx(n, 0.0);
    InteriorAdjoint adj;
    adj.u = a_u;
    adj.nu_xx = a_nuxx;
    CHECK(mse_laplacian(InteriorJets{ju, zn, zn, zn, jnuxx}, 0.3, adj, 500.0) == doctest::Approx(s / n).epsilon(1e-13));
    for (std::size_t i = 0; i < n; ++i) {
      const double r = -jnuxx[i] - (interpolant_f(ju[i]) - 0.3);
      CHECK(a_nuxx[i] == doctest::Approx(500.0 * -2 * r / n));
      CHECK(a_u[i] == doctest::Approx(500.0 * -2 * r * interpolant_f_prime(ju[i]) / n));
    }
  }

  TEST_CASE("integral mse") {
    // u == 1 on a mesh of total length 2: the column integral is 2 * 0.7 = 1.4.
    const std::size_t nx = 8, nt = 3;
    const double dx = 0.25;
    const std::vector<double> ones(nx * nt, 1.0);
    const std::vector<double> v(nt, 1.4);
    CHECK(mse_integral(v, ones, nx, 0.3, dx) == doctest::Approx(0.0).scale(1.0));

    const auto u = randoms(nx * nt, 31, -0.1, 1.1), vv = randoms(nt, 32);
    double s = 0.0;
    std::vector<double> col(nt, 0.0);
    for (std::size_t j = 0; j < nt; ++j) {
      for (std::size_t i = 0; i < nx; ++i) col[j] += (interpolant_f(u[j * nx + i]) - 0.3) * dx;
      s += sq(vv[j] - col[j]);
    }
    std::vector<double> a_v(nt, 0.0), a_u(nx * nt, 0.0);
    MeshAdjoint adj;
    adj.v = a_v;
    adj.u = a_u;
    CHECK(mse_integral(vv, u, nx, 0.3, dx, adj) == doctest::Approx(s / nt).epsilon(1e-13));
    for (std::size_t j = 0; j < nt; ++j) {
      CHECK(a_v[j] == doctest::Approx(2 * (vv[j] - col[j]) / nt));
      CHECK(a_u[j * nx + 2] == doctest::Approx(-2 * (vv[j] - col[j]) / nt * interpolant_f_prime(u[j * nx + 2]) * dx));
    }
  }

  TEST_CASE("zero-mean mse") {
    // Odd nu on the symmetric mesh {-1, -0.5, 0, 0.5}: nu(-1) pairs with itself only
    // through periodicity, so use an odd function that vanishes there.
    const std::size_t nx = 4;
    const std::vector<double> odd{0.0, -0.3, 0.0, 0.3};
    CHECK(mse_zero_mean(odd, nx, 0.5) == 0.0);
    const std::vector<double> c(nx, 0.7);
    CHECK(mse_zero_mean(c, nx, 0.5) == doctest::Approx(sq(2 * 0.7)));

    const std::size_t nt = 5, n = 16;
    const auto nu = randoms(n * nt, 41);
    double s = 0.0;
    std::vector<double> a_nu(n * nt, 0.0);
    for (std::size_t j = 0; j < nt; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += nu[j * n + i] * 0.125;
      s += col * col;
    }
    MeshAdjoint adj;
    adj.nu = a_nu;
    CHECK(mse_zero_mean(nu, n, 0.125, adj, 30.0) == doctest::Approx(s / nt).epsilon(1e-13));
    double col0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) col0 += nu[i] * 0.125;
    CHECK(a_nu[3] == doctest::Approx(30.0 * 2 * col0 * 0.125 / nt));
  }

  TEST_CASE("weighted total") {
    LossWeights unit;
    CHECK(total_loss(LossReport{}, unit).total == 0.0);
    CHECK(total_loss(LossReport::from_components({1, 1, 1, 1, 1, 1, 1, 1}), unit).total == 8.0);

    const LossWeights w = LossWeights::standard();
    CHECK(w.as_array() == std::array<double, 8>{1e5, 5e6, 1, 30, 1, 500, 1, 30});
    const auto c = randoms(8, 51, 0.0, 2.0);
    std::array<double, 8> comp{};
    std::copy(c.begin(), c.end(), comp.begin());
    double expected = 0.0;
    for (std::size_t k = 0; k < 8; ++k) expected += w.as_array()[k] * comp[k];
    const LossReport r = total_loss(LossReport::from_components(comp), w);
    CHECK(r.total == doctest::Approx(expected).epsilon(1e-15));
    CHECK(r.components() == comp);
    CHECK_THROWS(total_loss(LossReport::from_components({-1, 0, 0, 0, 0, 0, 0, 0}), w));
  }

  TEST_CASE("csv helpers") {
    CHECK(loss_csv_header() == "mse_u_in,mse_nu_in,mse_u_b,mse_nu_b,mse_f,mse_lap,mse_int,mse_zm,total");
    const LossReport r = LossReport::from_components({0.1, 0, 0, 0, 0, 0, 0, 0});
    CHECK(loss_csv_fields(r).rfind("0.10000000000000001,", 0) == 0);
  }
}
