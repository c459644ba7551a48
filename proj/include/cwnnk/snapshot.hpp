#pragma once

#include "cwnnk/kernels.hpp"
#include "cwnnk/labels.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace cwnnk {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Penultimate-layer activations at one training step, split by channel. The
// full-layer feature vector of sample i is the concatenation of row i of each
// channel matrix in channel order.
struct FeatureSnapshot {
  std::uint64_t step = 0;
  LabelSet labels;
  std::vector<FloatMatrix> channels;  // each N x D_c

  std::size_t num_samples() const noexcept { return labels.size(); }
  std::size_t num_channels() const noexcept { return channels.size(); }
  std::vector<std::uint32_t> dims() const;
  std::size_t full_dim() const;

  FeatureMatrix channel_features(std::size_t c) const;
  FeatureMatrix full_layer_features() const;

  // Throws InputError on shape mismatches or invalid labels, DataError on
  // non-finite entries.
  void validate() const;

  friend bool operator==(const FeatureSnapshot& a, const FeatureSnapshot& b);
};

}  // namespace cwnnk
