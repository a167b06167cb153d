#include <algorithm>
#include <cmath>

#include "acok/errors.hpp"
#include "acok/objective.hpp"
#include "acok/spectral.hpp"
#include "acok/trainer.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acok;

namespace {

TruthSeries small_truth(double t_max = 1e-4) {
  AcokParams p;
  const Field1D u0 = default_initial_condition(64, p);
  return generate_truth(u0, t_max, 1e-6, p, default_kappa(p), 10);
}

TrainConfig small_config() {
  TrainConfig c;
  c.t_max = 1e-4;
  c.epochs = 3;
  c.n_initial = 32;
  c.n_boundary = 8;
  c.n_interior = 60;
  c.n_time_uniform = 4;
  c.netu_layers = {2, 6, 6, 2};
  c.netv_layers = {1, 4, 1};
  c.lbfgs.max_iterations = 5;
  c.chunk_size = 25;
  return c;
}

SampleSet small_samples(const TruthSeries& truth, std::size_t n_interior = 10) {
  SamplingPlan plan;
  plan.n_initial = 6;
  plan.n_boundary = 3;
  plan.n_interior = n_interior;
  plan.n_time_uniform = 2;
  plan.n_x_uniform = 64;
  plan.seed = 77;
  return build_sample_set(plan, truth.u[0], truth.nu[0], 0.0, truth.t_end());
}

MlpParams perturbed(const std::vector<int>& sizes, std::uint64_t seed, double t_max) {
  MlpParams p = init_params(sizes, seed);
  p.input_shift()(0) = 0.5 * t_max;
  p.input_scale()(0) = 2.0 / t_max;
  for (std::size_t l = 0; l < p.num_layers(); ++l) p.biases(l).setConstant(0.1 * static_cast<double>(l + 1));
  return p;
}

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("components match direct recomputation") {
    const TruthSeries truth = small_truth();
    const SampleSet s = small_samples(truth);
    const MlpParams nu = perturbed({2, 5, 2}, 1, 1e-4);
    const MlpParams nv = perturbed({1, 3, 1}, 2, 1e-4);
    const AcokParams phys;
    PinnObjective obj(s, nu, nv, phys, LossWeights::standard());
    const LossReport r = obj.evaluate(obj.pack(nu, nv));

    double mse_u = 0.0;
    for (std::size_t k = 0; k < s.initial.size(); ++k) {
      const auto y = forward(nu, std::vector<double>{0.0, s.initial.x[k]});
      mse_u += (y[0] - s.initial.u[k]) * (y[0] - s.initial.u[k]);
    }
    CHECK(r.mse_u_in == doctest::Approx(mse_u / static_cast<double>(s.initial.size())).epsilon(1e-12));

    double mse_f = 0.0;
    for (const auto& q : s.interior) {
      const NetworkJet j = forward_jet(nu, q.t, q.x);
      const double v = forward(nv, std::vector<double>{q.t})[0];
      mse_f += residual_f(j, v, phys) * residual_f(j, v, phys);
    }
    CHECK(r.mse_f == doctest::Approx(mse_f / static_cast<double>(s.interior.size())).epsilon(1e-12));

    double zm = 0.0;
    for (double t : s.mesh.t) {
      double col = 0.0;
      for (double x : s.mesh.x) col += forward(nu, std::vector<double>{t, x})[1] * s.mesh.dx;
      zm += col * col;
    }
    CHECK(r.mse_zm == doctest::Approx(zm / static_cast<double>(s.mesh.n_t())).epsilon(1e-12));
    CHECK(r.total == doctest::Approx(total_loss(r, LossWeights::standard()).total).epsilon(1e-14));
  }

  TEST_CASE("joint gradient matches finite differences") {
    const TruthSeries truth = small_truth();
    const SampleSet s = small_samples(truth);
    const MlpParams nu = perturbed({2, 4, 2}, 3, 1e-4);
    const MlpParams nv = perturbed({1, 3, 1}, 4, 1e-4);
    // Unit weights keep every component visible in the total.
    PinnObjective obj(s, nu, nv, AcokParams{}, LossWeights{}, 4);
    std::vector<double> theta = obj.pack(nu, nv);
    std::vector<double> grad(theta.size());
    obj.evaluate(theta, grad);
    const double h = 1e-6;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      std::vector<double> a = theta, b = theta;
      a[k] += h;
      b[k] -= h;
      const double fd = (obj.evaluate(a).total - obj.evaluate(b).total) / (2 * h);
      CAPTURE(k);
      if (std::abs(fd) < 1e-3) {
        CHECK(std::abs(grad[k] - fd) <= 1e-8 * std::max(1.0, std::abs(obj.evaluate(theta).total)));
      } else {
        CHECK(oracle::rel_err(grad[k], fd) <= 1e-5);
      }
    }
  }

  TEST_CASE("chunking does not change the result beyond rounding") {
    const TruthSeries truth = small_truth();
    const SampleSet s = small_samples(truth, 50);
    const MlpParams nu = perturbed({2, 4, 2}, 5, 1e-4);
    const MlpParams nv = perturbed({1, 3, 1}, 6, 1e-4);
    PinnObjective a(s, nu, nv, AcokParams{}, LossWeights::standard(), 7);
    PinnObjective b(s, nu, nv, AcokParams{}, LossWeights::standard(), 2048);
    const auto theta = a.pack(nu, nv);
    CHECK(a.evaluate(theta).total == doctest::Approx(b.evaluate(theta).total).epsilon(1e-13));
  }

  TEST_CASE("interior subset restricts the residual terms") {
    const TruthSeries truth = small_truth();
    const SampleSet s = small_samples(truth, 20);
    const MlpParams nu = perturbed({2, 4, 2}, 7, 1e-4);
    const MlpParams nv = perturbed({1, 3, 1}, 8, 1e-4);
    PinnObjective full(s, nu, nv, AcokParams{}, LossWeights{});
    SampleSet sub = s;
    sub.interior = {s.interior[3], s.interior[11]};
    PinnObjective part(sub, nu, nv, AcokParams{}, LossWeights{});
    const auto theta = full.pack(nu, nv);
    const std::vector<std::size_t> idx{3, 11};
    const LossReport a = full.evaluate(theta, {}, idx);
    const LossReport b = part.evaluate(theta);
    CHECK(a.mse_f == doctest::Approx(b.mse_f).epsilon(1e-14));
    CHECK(a.mse_lap == doctest::Approx(b.mse_lap).epsilon(1e-14));
    CHECK(a.mse_u_in == b.mse_u_in);
  }
}

TEST_SUITE("trainer") {
  TEST_CASE("no-op training returns the initial parameters") {
    const TruthSeries truth = small_truth();
    TrainConfig c = small_config();
    c.epochs = 1;
    c.adam.eta = 0.0;
    c.lbfgs.max_iterations = 0;
    const TrainedModel m = train(c, truth);
    MlpParams u0 = init_params(c.netu_layers, derive_seed(c.seed, 10));
    MlpParams v0 = init_params(c.netv_layers, derive_seed(c.seed, 11));
    CHECK(m.model.netu.flatten() == u0.flatten());
    CHECK(m.model.netv.flatten() == v0.flatten());
    CHECK(m.history.size() == 1);
    CHECK(m.lbfgs_iterations == 0);
  }

  TEST_CASE("training is deterministic and reduces the loss") {
    const TruthSeries truth = small_truth();
    TrainConfig c = small_config();
    c.epochs = 20;
    c.lbfgs.max_iterations = 20;
    const TrainedModel a = train(c, truth);
    const TrainedModel b = train(c, truth);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) {
      CHECK(a.history[k].report == b.history[k].report);
      CHECK(a.history[k].wall_time == 0.0);
    }
    CHECK(a.model == b.model);
    CHECK(a.final_report.total < a.history.front().report.total);
    CHECK(a.history.back().phase == "lbfgs");
    CHECK(a.history.back().report.total == a.final_report.total);
  }

  TEST_CASE("mini-batches and staged updates run") {
    const TruthSeries truth = small_truth();
    TrainConfig c = small_config();
    c.minibatch_size = 16;
    c.staged = true;
    std::vector<long> epochs;
    TrainHooks hooks;
    hooks.on_epoch = [&](long e, const ModelWindow&) { epochs.push_back(e); };
    const TrainedModel m = train(c, truth, hooks);
    CHECK(epochs == std::vector<long>{1, 2, 3});
    CHECK(std::isfinite(m.final_report.total));
  }

  TEST_CASE("horizon beyond the truth is rejected") {
    const TruthSeries truth = small_truth();
    TrainConfig c = small_config();
    c.t_max = 1e-3;
    CHECK_THROWS_AS(train(c, truth), ConfigError);
  }

  TEST_CASE("one window equals plain training") {
    const TruthSeries truth = small_truth();
    const TrainConfig c = small_config();
    const AdaptiveResult r = train_time_adaptive(c, truth, 1);
    const TrainedModel m = train(c, truth);
    REQUIRE(r.windows.size() == 1);
    CHECK(r.windows[0].model == m.model);
  }

  TEST_CASE("three windows hand off exactly") {
    const TruthSeries truth = small_truth(3e-4);
    TrainConfig c = small_config();
    c.t_max = 3e-4;
    const AdaptiveResult r = train_time_adaptive(c, truth, 3);
    REQUIRE(r.stitched.windows.size() == 3);
    CHECK(r.stitched.windows[0].t_start == 0.0);
    CHECK(r.stitched.windows[2].t_end == 3e-4);
    CHECK(r.handoff_u[0] == truth.u_at(0.0));
    for (std::size_t k = 0; k + 1 < 3; ++k) {
      const ModelWindow& w = r.stitched.windows[k];
      CHECK(r.stitched.windows[k + 1].t_start == w.t_end);
      const std::vector<double> xs = truth.u[0].coordinates();
      std::vector<double> u(xs.size()), nu(xs.size());
      r.stitched.predict(w.t_end, xs, u, nu);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(u[i] == r.handoff_u[k + 1][i]);
        CHECK(nu[i] == r.handoff_nu[k + 1][i]);
      }
    }
    // Per-window budgets are the single-shot counts split three ways.
    CHECK(r.windows[1].config.n_interior == 20);
    CHECK(r.windows[1].config.n_initial == c.n_initial);
    CHECK(r.windows[1].config.seed != c.seed);
  }

  TEST_CASE("evaluating the truth itself gives zero error") {
    const TruthSeries truth = small_truth();
    const AcokParams phys;
    const PredictFn exact = [&](double t, std::span<const double>, std::span<double> u, std::span<double> nu) {
      const Field1D a = truth.u_at(t), b = truth.nu_at(t);
      std::copy(a.values().begin(), a.values().end(), u.begin());
      std::copy(b.values().begin(), b.values().end(), nu.begin());
    };
    const auto times = evaluation_times(0.0, 1e-4);
    CHECK(times.size() == 11);
    CHECK(times.back() == 1e-4);
    const auto rows = evaluate(exact, truth, times, phys);
    for (const auto& row : rows) {
      CHECK(row.rel_l2_u == 0.0);
      CHECK(row.rel_l2_nu == 0.0);
      CHECK(std::abs(row.nu_mean) <= 1e-12);
    }
    std::vector<double> reversed(times.rbegin(), times.rend());
    const auto rrows = evaluate(exact, truth, reversed, phys);
    for (std::size_t k = 0; k < rows.size(); ++k) CHECK(rrows[rows.size() - 1 - k].rel_l2_u == rows[k].rel_l2_u);
  }

  TEST_CASE("evaluation at t = 0 matches the initial fit") {
    const TruthSeries truth = small_truth();
    TrainConfig c = small_config();
    c.n_initial = 64;  // every grid node
    const TrainedModel m = train(c, truth);
    const PredictFn predict = [&](double t, std::span<const double> x, std::span<double> u, std::span<double> nu) {
      m.model.predict(t, x, u, nu);
    };
    const std::vector<double> t0{0.0};
    const auto row = evaluate(predict, truth, t0, c.physics).front();
    // mse over all nodes = ||pred - truth||^2 / N.
    const double norm = truth.u[0].norm();
    const double expected = std::sqrt(m.final_report.mse_u_in * 64.0) / norm;
    CHECK(row.rel_l2_u == doctest::Approx(expected).epsilon(1e-10));
  }
}
