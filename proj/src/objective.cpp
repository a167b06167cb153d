#include "acok/objective.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace acok {

namespace {

// Every evaluation allocates and frees tape matrices of a few MB. With glibc's
// default thresholds each of those is a fresh mmap/munmap pair, which costs
// about as much as the arithmetic; keep them on the heap instead.
void keep_large_blocks_on_heap() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
#endif
}

Eigen::MatrixXd netu_inputs(std::span<const double> t, std::span<const double> x) {
  Eigen::MatrixXd in(2, static_cast<Eigen::Index>(t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) {
    in(0, static_cast<Eigen::Index>(j)) = t[j];
    in(1, static_cast<Eigen::Index>(j)) = x[j];
  }
  return in;
}

Eigen::MatrixXd netv_inputs(std::span<const double> t) {
  Eigen::MatrixXd in(1, static_cast<Eigen::Index>(t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) in(0, static_cast<Eigen::Index>(j)) = t[j];
  return in;
}

template <typename Row>
std::span<const double> row_span(const Row& row) {
  return {row.data(), static_cast<std::size_t>(row.size())};
}

template <typename Row>
std::span<double> row_span_mut(Row&& row) {
  return {row.data(), static_cast<std::size_t>(row.size())};
}

}  // namespace

PinnObjective::PinnObjective(SampleSet samples, MlpParams netu, MlpParams netv,
                             AcokParams physics, LossWeights weights, std::size_t chunk_size)
    : samples_(std::move(samples)),
      netu_(std::move(netu)),
      netv_(std::move(netv)),
      physics_(physics),
      weights_(weights),
      chunk_size_(chunk_size),
      netu_count_(netu_.parameter_count()),
      netv_count_(netv_.parameter_count()) {
  netu_.validate();
  netv_.validate();
  if (netu_.input_width() != 2 || netu_.output_width() != 2) {
    throw std::invalid_argument("PinnObjective: Net_u must map (t, x) to (u, nu)");
  }
  if (netv_.input_width() != 1 || netv_.output_width() != 1) {
    throw std::invalid_argument("PinnObjective: Net_v must map t to v");
  }
  if (chunk_size_ == 0) throw std::invalid_argument("PinnObjective: chunk size must be positive");
  if (samples_.initial.size() == 0 || samples_.boundary.size() == 0 || samples_.interior.empty() ||
      samples_.mesh.n_t() == 0 || samples_.mesh.n_x() == 0) {
    throw std::invalid_argument("PinnObjective: every sample collection must be non-empty");
  }
  physics_.validate();
  weights_.validate();
  keep_large_blocks_on_heap();
}

std::vector<double> PinnObjective::pack(const MlpParams& netu, const MlpParams& netv) const {
  std::vector<double> theta(parameter_count());
  netu.copy_to(std::span<double>(theta).first(netu_count_));
  netv.copy_to(std::span<double>(theta).subspan(netu_count_));
  return theta;
}

void PinnObjective::unpack(std::span<const double> theta, MlpParams& netu, MlpParams& netv) const {
  if (theta.size() != parameter_count()) throw std::invalid_argument("unpack: size mismatch");
  netu.assign_from(theta.first(netu_count_));
  netv.assign_from(theta.subspan(netu_count_));
}

LossReport PinnObjective::evaluate(std::span<const double> theta, std::span<double> grad,
                                   std::span<const std::size_t> interior_subset) {
  unpack(theta, netu_, netv_);
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != parameter_count()) throw std::invalid_argument("evaluate: gradient size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const auto grad_u = want_grad ? grad.first(netu_count_) : std::span<double>{};
  const auto grad_v = want_grad ? grad.subspan(netu_count_) : std::span<double>{};
  const auto& w = weights_;
  LossReport report;

  // Initial data.
  {
    const auto& init = samples_.initial;
    std::vector<double> t(init.size(), init.t);
    ValueTape tape(netu_, netu_inputs(t, init.x));
    RowMatrix adj = RowMatrix::Zero(2, tape.outputs().cols());
    PairAdjoint pa;
    if (want_grad) pa = {row_span_mut(adj.row(0)), row_span_mut(adj.row(1))};
    const PairMse mse = mse_initial(row_span(tape.outputs().row(0)), row_span(tape.outputs().row(1)),
                                    init.u, init.nu, pa, w.w_u_in, w.w_nu_in);
    report.mse_u_in = mse.u;
    report.mse_nu_in = mse.nu;
    if (want_grad) tape.backward(netu_, adj, grad_u);
  }

  // Periodic boundary: columns [0, nb) sit on x = -X, [nb, 2nb) on x = +X.
  {
    const auto& bnd = samples_.boundary;
    const std::size_t nb = bnd.size();
    std::vector<double> t(2 * nb);
    std::vector<double> x(2 * nb);
    for (std::size_t i = 0; i < nb; ++i) {
      t[i] = t[nb + i] = bnd.t[i];
      x[i] = bnd.lower_x;
      x[nb + i] = bnd.upper_x;
    }
    ValueTape tape(netu_, netu_inputs(t, x));
    const auto& out = tape.outputs();
    RowMatrix adj = RowMatrix::Zero(2, out.cols());
    PairAdjoint lower;
    PairAdjoint upper;
    if (want_grad) {
      lower = {row_span_mut(adj.row(0)).first(nb), row_span_mut(adj.row(1)).first(nb)};
      upper = {row_span_mut(adj.row(0)).subspan(nb), row_span_mut(adj.row(1)).subspan(nb)};
    }
    const auto u_row = row_span(out.row(0));
    const auto nu_row = row_span(out.row(1));
    const PairMse mse = mse_boundary(u_row.first(nb), nu_row.first(nb), u_row.subspan(nb),
                                     nu_row.subspan(nb), lower, upper, w.w_u_b, w.w_nu_b);
    report.mse_u_b = mse.u;
    report.mse_nu_b = mse.nu;
    if (want_grad) tape.backward(netu_, adj, grad_u);
  }

  // Residual and Laplacian consistency on interior points; Net_v is queried
  // at each point's time.
  {
    std::vector<std::size_t> all;
    if (interior_subset.empty()) {
      all.resize(samples_.interior.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      interior_subset = all;
    }
    const std::size_t n = interior_subset.size();
    std::vector<double> t(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = samples_.interior.at(interior_subset[i]);
      t[i] = p.t;
      x[i] = p.x;
    }
    ValueTape vtape(netv_, netv_inputs(t));
    const auto v_all = row_span(vtape.outputs().row(0));
    RowMatrix v_adj = RowMatrix::Zero(1, static_cast<Eigen::Index>(n));

    const double total = static_cast<double>(n);
    for (std::size_t start = 0; start < n; start += chunk_size_) {
      const std::size_t len = std::min(chunk_size_, n - start);
      const std::span<const double> tc = std::span<const double>(t).subspan(start, len);
      const std::span<const double> xc = std::span<const double>(x).subspan(start, len);
      JetTape tape(netu_, tc, xc);
      const auto& out = tape.outputs();
      const InteriorJets jets{row_span(out.value.row(0)), row_span(out.value.row(1)),
                              row_span(out.d_t.row(0)), row_span(out.d_xx.row(0)),
                              row_span(out.d_xx.row(1))};
      JetOutputs adj = JetOutputs::zeros(2, tape.batch());
      InteriorAdjoint ia;
      if (want_grad) {
        ia.u = row_span_mut(adj.value.row(0));
        ia.nu = row_span_mut(adj.value.row(1));
        ia.u_t = row_span_mut(adj.d_t.row(0));
        ia.u_xx = row_span_mut(adj.d_xx.row(0));
        ia.nu_xx = row_span_mut(adj.d_xx.row(1));
        ia.v = row_span_mut(v_adj.row(0)).subspan(start, len);
      }
      const double share = static_cast<double>(len) / total;
      report.mse_f += share * mse_residual(jets, v_all.subspan(start, len), physics_, ia,
                                           w.w_f * share);
      report.mse_lap += share * mse_laplacian(jets, physics_.omega, ia, w.w_lap * share);
      if (want_grad) tape.backward(netu_, adj, grad_u);
    }
    if (want_grad) vtape.backward(netv_, v_adj, grad_v);
  }

  // Integral network and zero-mean constraint on the uniform mesh.
  {
    const auto& mesh = samples_.mesh;
    const std::size_t n_t = mesh.n_t();
    const std::size_t n_x = mesh.n_x();
    std::vector<double> t(n_t * n_x);
    std::vector<double> x(n_t * n_x);
    for (std::size_t j = 0; j < n_t; ++j) {
      for (std::size_t i = 0; i < n_x; ++i) {
        t[j * n_x + i] = mesh.t[j];
        x[j * n_x + i] = mesh.x[i];
      }
    }
    ValueTape utape(netu_, netu_inputs(t, x));
    ValueTape vtape(netv_, netv_inputs(mesh.t));
    RowMatrix u_adj = RowMatrix::Zero(2, utape.outputs().cols());
    RowMatrix v_adj = RowMatrix::Zero(1, vtape.outputs().cols());
    MeshAdjoint ma;
    if (want_grad) {
      ma.v = row_span_mut(v_adj.row(0));
      ma.u = row_span_mut(u_adj.row(0));
      ma.nu = row_span_mut(u_adj.row(1));
    }
    report.mse_int = mse_integral(row_span(vtape.outputs().row(0)), row_span(utape.outputs().row(0)),
                                  n_x, physics_.omega, mesh.dx, ma, w.w_int);
    report.mse_zm = mse_zero_mean(row_span(utape.outputs().row(1)), n_x, mesh.dx, ma, w.w_zm);
    if (want_grad) {
      utape.backward(netu_, u_adj, grad_u);
      vtape.backward(netv_, v_adj, grad_v);
    }
  }

  double total = 0.0;
  const auto c = report.components();
  const auto ws = w.as_array();
  for (std::size_t k = 0; k < c.size(); ++k) total += ws[k] * c[k];
  report.total = total;
  return report;
}

}  // namespace acok
