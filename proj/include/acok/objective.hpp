#pragma once

#include <span>
#include <vector>

#include "acok/losses.hpp"
#include "acok/mlp.hpp"
#include "acok/model.hpp"
#include "acok/sampling.hpp"

namespace acok {

/// The composite training objective over the joint parameter vector
/// theta = (Net_u params, Net_v params).
///
/// Interior jets are processed in fixed-size chunks, so memory stays bounded
/// and the summation order depends only on the chunk size.
class PinnObjective {
 public:
  PinnObjective(SampleSet samples, MlpParams netu, MlpParams netv, AcokParams physics,
                LossWeights weights, std::size_t chunk_size = 2048);

  std::size_t parameter_count() const noexcept { return netu_count_ + netv_count_; }
  std::size_t netu_parameter_count() const noexcept { return netu_count_; }

  std::vector<double> pack(const MlpParams& netu, const MlpParams& netv) const;
  /// Copies theta into the networks, which must share the objective's shapes.
  void unpack(std::span<const double> theta, MlpParams& netu, MlpParams& netv) const;

  /// Components and weighted total at theta. When `grad` is non-empty it
  /// receives d(total)/d(theta). `interior_subset` restricts the residual and
  /// Laplacian terms to the listed interior points (empty means all).
  LossReport evaluate(std::span<const double> theta, std::span<double> grad = {},
                      std::span<const std::size_t> interior_subset = {});

  const SampleSet& samples() const noexcept { return samples_; }
  const MlpParams& netu() const noexcept { return netu_; }
  const MlpParams& netv() const noexcept { return netv_; }

 private:
  SampleSet samples_;
  MlpParams netu_;
  MlpParams netv_;
  AcokParams physics_;
  LossWeights weights_;
  std::size_t chunk_size_;
  std::size_t netu_count_;
  std::size_t netv_count_;
};

}  // namespace acok
