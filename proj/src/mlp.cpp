#include "acok/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "acok/errors.hpp"
#include "text_format.hpp"

namespace acok {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

using RowMap = Eigen::Map<RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

// Flat offset of layer `l`'s weight block.
std::size_t layer_offset(const MlpParams& params, std::size_t l) {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < l; ++i) {
    offset += static_cast<std::size_t>(params.weights(i).size() + params.biases(i).size());
  }
  return offset;
}

void accumulate_layer(const MlpParams& params, std::size_t l, const MatrixXd& zbar_value,
                      const MatrixXd& zbar_all, const MatrixXd& layer_input,
                      std::span<double> grad) {
  const auto& w = params.weights(l);
  double* base = grad.data() + layer_offset(params, l);
  RowMap(base, w.rows(), w.cols()).noalias() += zbar_all * layer_input.transpose();
  VecMap(base + w.size(), w.rows()) += zbar_value.rowwise().sum();
}

void check_batch(std::span<const double> t, std::span<const double> x) {
  if (t.size() != x.size()) throw std::invalid_argument("jet batch: t and x sizes differ");
}

}  // namespace

MlpParams::MlpParams(std::vector<int> layer_sizes) : layer_sizes_(std::move(layer_sizes)) {
  validate_layer_sizes(layer_sizes_);
  for (std::size_t i = 0; i + 1 < layer_sizes_.size(); ++i) {
    weights_.emplace_back(MatrixXd::Zero(layer_sizes_[i + 1], layer_sizes_[i]));
    biases_.emplace_back(Eigen::VectorXd::Zero(layer_sizes_[i + 1]));
  }
  input_shift_ = Eigen::VectorXd::Zero(layer_sizes_.front());
  input_scale_ = Eigen::VectorXd::Ones(layer_sizes_.front());
}

void validate_layer_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 3) {
    throw std::invalid_argument("layer_sizes needs an input, at least one hidden, and an output layer");
  }
  for (int n : layer_sizes) {
    if (n <= 0) throw std::invalid_argument("layer_sizes entries must be positive");
  }
}

std::size_t MlpParams::parameter_count() const noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    count += static_cast<std::size_t>(weights_[i].size() + biases_[i].size());
  }
  return count;
}

void MlpParams::copy_to(std::span<double> flat) const {
  if (flat.size() != parameter_count()) throw std::invalid_argument("copy_to: size mismatch");
  double* p = flat.data();
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    RowMap(p, weights_[i].rows(), weights_[i].cols()) = weights_[i];
    p += weights_[i].size();
    VecMap(p, biases_[i].size()) = biases_[i];
    p += biases_[i].size();
  }
}

void MlpParams::assign_from(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("assign_from: size mismatch");
  const double* p = flat.data();
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    weights_[i] = Eigen::Map<const RowMatrix>(p, weights_[i].rows(), weights_[i].cols());
    p += weights_[i].size();
    biases_[i] = Eigen::Map<const Eigen::VectorXd>(p, biases_[i].size());
    p += biases_[i].size();
  }
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat(parameter_count());
  copy_to(flat);
  return flat;
}

void MlpParams::validate() const {
  validate_layer_sizes(layer_sizes_);
  if (weights_.size() + 1 != layer_sizes_.size() || biases_.size() != weights_.size()) {
    throw std::invalid_argument("MlpParams: layer count does not match layer_sizes");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].rows() != layer_sizes_[i + 1] || weights_[i].cols() != layer_sizes_[i] ||
        biases_[i].size() != layer_sizes_[i + 1]) {
      throw std::invalid_argument("MlpParams: layer " + std::to_string(i) +
                                  " shape does not match layer_sizes");
    }
    if (!weights_[i].allFinite() || !biases_[i].allFinite()) {
      throw std::invalid_argument("MlpParams: non-finite parameter in layer " + std::to_string(i));
    }
  }
  if (input_shift_.size() != layer_sizes_.front() || input_scale_.size() != layer_sizes_.front()) {
    throw std::invalid_argument("MlpParams: input map width does not match the input layer");
  }
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (layer_sizes_ != other.layer_sizes_) return false;
  if (input_shift_ != other.input_shift_ || input_scale_ != other.input_scale_) return false;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] != other.weights_[i] || biases_[i] != other.biases_[i]) return false;
  }
  return true;
}

MlpParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  MlpParams params(layer_sizes);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    auto& w = params.weights(l);
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return params;
}

Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input) {
  if (static_cast<int>(input.size()) != params.input_width()) {
    throw std::invalid_argument("forward: input length " + std::to_string(input.size()) +
                                " does not match input width " +
                                std::to_string(params.input_width()));
  }
  MatrixXd column(params.input_width(), 1);
  for (std::size_t i = 0; i < input.size(); ++i) column(static_cast<Index>(i), 0) = input[i];
  ValueTape tape(params, column);
  return tape.outputs().col(0);
}

NetworkJet forward_jet(const MlpParams& params, double t, double x) {
  if (params.input_width() != 2 || params.output_width() != 2) {
    throw std::invalid_argument("forward_jet: network must map (t, x) to (u, nu)");
  }
  const double tt[1] = {t};
  const double xx[1] = {x};
  JetTape tape(params, tt, xx);
  const auto& out = tape.outputs();
  return NetworkJet{out.value(0, 0), out.value(1, 0), out.d_t(0, 0),
                    out.d_x(0, 0),   out.d_xx(0, 0),  out.d_xx(1, 0)};
}

JetOutputs JetOutputs::zeros(Index outputs, Index batch) {
  return JetOutputs{RowMatrix::Zero(outputs, batch), RowMatrix::Zero(outputs, batch),
                    RowMatrix::Zero(outputs, batch), RowMatrix::Zero(outputs, batch)};
}

JetTape::JetTape(const MlpParams& params, std::span<const double> t, std::span<const double> x) {
  if (params.input_width() != 2) throw std::invalid_argument("JetTape: network needs 2 inputs");
  check_batch(t, x);
  const Index b = static_cast<Index>(t.size());
  batch_ = b;

  const double shift_t = params.input_shift()(0);
  const double shift_x = params.input_shift()(1);
  const double scale_t = params.input_scale()(0);
  const double scale_x = params.input_scale()(1);

  MatrixXd a = MatrixXd::Zero(2, 4 * b);
  for (Index j = 0; j < b; ++j) {
    a(0, j) = (t[static_cast<std::size_t>(j)] - shift_t) * scale_t;
    a(1, j) = (x[static_cast<std::size_t>(j)] - shift_x) * scale_x;
    a(0, b + j) = scale_t;
    a(1, 2 * b + j) = scale_x;
  }

  const std::size_t layers = params.num_layers();
  inputs_.reserve(layers);
  hidden_.reserve(layers - 1);
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    const auto& w = params.weights(l);
    const Index n = w.rows();
    MatrixXd h(n, 4 * b);
    h.leftCols(b).noalias() = w * a.leftCols(b);
    h.rightCols(3 * b).noalias() = w * a.rightCols(3 * b);
    h.leftCols(b).colwise() += params.biases(l);
    h.leftCols(b) = h.leftCols(b).array().tanh().matrix();

    MatrixXd next(n, 4 * b);
    const auto s = h.leftCols(b).array();
    const auto zx = h.middleCols(2 * b, b).array();
    const Eigen::ArrayXXd d = 1.0 - s.square();
    next.leftCols(b) = h.leftCols(b);
    next.middleCols(b, b) = (d * h.middleCols(b, b).array()).matrix();
    next.middleCols(2 * b, b) = (d * zx).matrix();
    next.rightCols(b) = (d * h.rightCols(b).array() - 2.0 * s * d * zx.square()).matrix();

    inputs_.push_back(std::move(a));
    hidden_.push_back(std::move(h));
    a = std::move(next);
  }

  const auto& w = params.weights(layers - 1);
  MatrixXd value = w * a.leftCols(b);
  value.colwise() += params.biases(layers - 1);
  const MatrixXd derivs = w * a.rightCols(3 * b);
  inputs_.push_back(std::move(a));

  outputs_.value = value;
  outputs_.d_t = derivs.leftCols(b);
  outputs_.d_x = derivs.middleCols(b, b);
  outputs_.d_xx = derivs.rightCols(b);
}

void JetTape::backward(const MlpParams& params, const JetOutputs& adjoint,
                       std::span<double> grad) const {
  if (grad.size() != params.parameter_count()) {
    throw std::invalid_argument("JetTape::backward: gradient size mismatch");
  }
  const Index b = batch_;
  const std::size_t layers = params.num_layers();
  const Index outs = params.output_width();
  if (adjoint.value.rows() != outs || adjoint.value.cols() != b) {
    throw std::invalid_argument("JetTape::backward: adjoint shape mismatch");
  }

  MatrixXd g(outs, 4 * b);
  g.leftCols(b) = adjoint.value;
  g.middleCols(b, b) = adjoint.d_t;
  g.middleCols(2 * b, b) = adjoint.d_x;
  g.rightCols(b) = adjoint.d_xx;

  accumulate_layer(params, layers - 1, g.leftCols(b), g, inputs_[layers - 1], grad);
  MatrixXd abar = params.weights(layers - 1).transpose() * g;

  for (std::size_t l = layers - 1; l-- > 0;) {
    const MatrixXd& h = hidden_[l];
    const auto s = h.leftCols(b).array();
    const auto zt = h.middleCols(b, b).array();
    const auto zx = h.middleCols(2 * b, b).array();
    const auto zxx = h.rightCols(b).array();
    const auto av = abar.leftCols(b).array();
    const auto at = abar.middleCols(b, b).array();
    const auto ax = abar.middleCols(2 * b, b).array();
    const auto axx = abar.rightCols(b).array();
    const Eigen::ArrayXXd d = 1.0 - s.square();

    // Pull back through a = tanh z, a_t = d z_t, a_x = d z_x,
    // a_xx = d z_xx - 2 s d z_x^2 with d = 1 - s^2.
    MatrixXd zbar(h.rows(), 4 * b);
    zbar.leftCols(b) = (av * d - 2.0 * s * d * (at * zt + ax * zx + axx * zxx) -
                        2.0 * axx * zx.square() * d * (1.0 - 3.0 * s.square()))
                           .matrix();
    zbar.middleCols(b, b) = (at * d).matrix();
    zbar.middleCols(2 * b, b) = (ax * d - 4.0 * axx * s * d * zx).matrix();
    zbar.rightCols(b) = (axx * d).matrix();

    accumulate_layer(params, l, zbar.leftCols(b), zbar, inputs_[l], grad);
    if (l > 0) abar = params.weights(l).transpose() * zbar;
  }
}

ValueTape::ValueTape(const MlpParams& params, const MatrixXd& inputs) {
  if (inputs.rows() != params.input_width()) {
    throw std::invalid_argument("ValueTape: input rows do not match the input width");
  }
  MatrixXd a = ((inputs.colwise() - params.input_shift()).array().colwise() *
                params.input_scale().array())
                   .matrix();
  const std::size_t layers = params.num_layers();
  inputs_.reserve(layers);
  hidden_.reserve(layers - 1);
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    MatrixXd h = params.weights(l) * a;
    h.colwise() += params.biases(l);
    h = h.array().tanh().matrix();
    inputs_.push_back(std::move(a));
    a = h;
    hidden_.push_back(std::move(h));
  }
  MatrixXd out = params.weights(layers - 1) * a;
  out.colwise() += params.biases(layers - 1);
  inputs_.push_back(std::move(a));
  outputs_ = out;
}

void ValueTape::backward(const MlpParams& params, const RowMatrix& adjoint,
                         std::span<double> grad) const {
  if (grad.size() != params.parameter_count()) {
    throw std::invalid_argument("ValueTape::backward: gradient size mismatch");
  }
  if (adjoint.rows() != outputs_.rows() || adjoint.cols() != outputs_.cols()) {
    throw std::invalid_argument("ValueTape::backward: adjoint shape mismatch");
  }
  const std::size_t layers = params.num_layers();
  MatrixXd g = adjoint;
  accumulate_layer(params, layers - 1, g, g, inputs_[layers - 1], grad);
  MatrixXd abar = params.weights(layers - 1).transpose() * g;
  for (std::size_t l = layers - 1; l-- > 0;) {
    const auto s = hidden_[l].array();
    MatrixXd zbar = (abar.array() * (1.0 - s.square())).matrix();
    accumulate_layer(params, l, zbar, zbar, inputs_[l], grad);
    if (l > 0) abar = params.weights(l).transpose() * zbar;
  }
}

LossAndGradient loss_gradient(const MlpParams& params, std::span<const double> t,
                              std::span<const double> x, const JetLoss& loss) {
  JetTape tape(params, t, x);
  JetOutputs adjoint = JetOutputs::zeros(params.output_width(), tape.batch());
  LossAndGradient result;
  result.value = loss(tape.outputs(), adjoint);
  if (!std::isfinite(result.value)) {
    throw DivergenceError("loss_gradient: non-finite loss", 0);
  }
  result.gradient.assign(params.parameter_count(), 0.0);
  tape.backward(params, adjoint, result.gradient);
  return result;
}

void write_mlp(std::ostream& out, const MlpParams& params) {
  using detail::format_double;
  const auto& sizes = params.layer_sizes();
  out << "acok-mlp 1\n";
  out << "layers " << sizes.size();
  for (int n : sizes) out << ' ' << n;
  out << '\n';
  out << "input_shift";
  for (Index i = 0; i < params.input_shift().size(); ++i) {
    out << ' ' << format_double(params.input_shift()(i));
  }
  out << "\ninput_scale";
  for (Index i = 0; i < params.input_scale().size(); ++i) {
    out << ' ' << format_double(params.input_scale()(i));
  }
  out << '\n';
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const auto& w = params.weights(l);
    out << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) {
        out << (c == 0 ? "" : " ") << format_double(w(r, c));
      }
      out << '\n';
    }
    const auto& bias = params.biases(l);
    for (Index r = 0; r < bias.size(); ++r) out << (r == 0 ? "" : " ") << format_double(bias(r));
    out << '\n';
  }
}

MlpParams read_mlp(std::istream& in) {
  constexpr const char* ctx = "mlp snapshot";
  try {
    detail::expect_token(in, "acok-mlp", ctx);
    const long version = detail::read_long(in, ctx);
    if (version != 1) throw std::runtime_error("mlp snapshot: unsupported version " + std::to_string(version));
    detail::expect_token(in, "layers", ctx);
    const long count = detail::read_long(in, ctx);
    if (count < 3 || count > 10000) throw std::runtime_error("mlp snapshot: bad layer count");
    std::vector<int> sizes;
    for (long i = 0; i < count; ++i) sizes.push_back(static_cast<int>(detail::read_long(in, ctx)));
    MlpParams params(sizes);
    detail::expect_token(in, "input_shift", ctx);
    for (Index i = 0; i < params.input_shift().size(); ++i) params.input_shift()(i) = detail::read_double(in, ctx);
    detail::expect_token(in, "input_scale", ctx);
    for (Index i = 0; i < params.input_scale().size(); ++i) params.input_scale()(i) = detail::read_double(in, ctx);
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
      auto& w = params.weights(l);
      detail::expect_token(in, "layer", ctx);
      if (detail::read_long(in, ctx) != static_cast<long>(l) || detail::read_long(in, ctx) != w.rows() ||
          detail::read_long(in, ctx) != w.cols()) {
        throw std::runtime_error("mlp snapshot: layer header does not match layer sizes");
      }
      for (Index r = 0; r < w.rows(); ++r) {
        for (Index c = 0; c < w.cols(); ++c) w(r, c) = detail::read_double(in, ctx);
      }
      auto& bias = params.biases(l);
      for (Index r = 0; r < bias.size(); ++r) bias(r) = detail::read_double(in, ctx);
    }
    params.validate();
    return params;
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("mlp snapshot: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

}  // namespace acok
