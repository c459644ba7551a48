#pragma once

#include "cwnnk/labels.hpp"
#include "cwnnk/nnk_graph.hpp"
#include "cwnnk/snapshot.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace cwnnk {

using ChannelId = std::int32_t;

// Channel id reported for the concatenated full layer.
inline constexpr ChannelId kFullLayer = -1;

struct ChannelLooReport {
  ChannelId channel = 0;
  double loo_risk = 0.0;                 // 0/1 LOO error over evaluated nodes
  std::vector<NodeId> nodes;             // evaluated nodes, ascending
  std::vector<ClassId> predictions;      // parallel to nodes
  std::vector<bool> per_node_correct;    // parallel to nodes
  std::vector<NodeId> failed_nodes;      // solves that degenerated; scored as errors
  double mean_neighbor_count = 0.0;
  double mean_same_class_weight = 0.0;
  double zero_fraction = 0.0;            // over all N x D_c entries of the channel
  double sigma = 0.0;                    // bandwidth used (gaussian only)
  std::size_t rebuilt_nodes = 0;         // cache misses, when a cache is in use

  std::size_t evaluated_nodes() const noexcept { return nodes.size(); }
};

struct EvalOptions {
  std::optional<std::vector<std::size_t>> channel_subset;
  std::optional<std::size_t> subsample;  // evaluate this many random nodes
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double zero_tolerance = 1e-7;
};

// Cached neighborhoods per channel, reused across evaluation steps and
// refreshed with refresh_cached_neighborhood.
struct NeighborhoodCache {
  std::map<ChannelId, std::map<NodeId, NnkNeighborhood>> channels;
};

// sum_i theta_i onehot(y_i) / sum_j theta_j
std::vector<double> nnk_interpolate(const NnkNeighborhood& nbhd, const LabelSet& labels);

// Votes this close to the maximum count as tied. Exactly tied neighborhoods
// come back from the solver with ~1e-9 noise in the weights.
inline constexpr double kVoteTieTolerance = 1e-6;

// Argmax; lowest class id wins ties.
ClassId classify(std::span<const double> probs, double tie_tolerance = kVoteTieTolerance);

// Mean 0/1 error.
double empirical_risk(std::span<const ClassId> predictions, const LabelSet& labels);

// m distinct nodes out of n, ascending, drawn deterministically from seed.
std::vector<NodeId> select_nodes(std::size_t n, std::size_t m, std::uint64_t seed);

ChannelLooReport loo_risk_channel(const FeatureMatrix& features, const LabelSet& labels,
                                  const NnkConfig& config,
                                  const std::optional<std::vector<NodeId>>& node_subset = std::nullopt,
                                  unsigned workers = 1, double zero_tolerance = 1e-7);

// Same sweep, reusing neighborhoods from cache where the refresh rule allows.
ChannelLooReport loo_risk_channel_cached(const FeatureMatrix& features, const LabelSet& labels,
                                         const NnkConfig& config,
                                         std::map<NodeId, NnkNeighborhood>& cache,
                                         const std::optional<std::vector<NodeId>>& node_subset = std::nullopt,
                                         unsigned workers = 1, double zero_tolerance = 1e-7);

// One report per requested channel, in ascending channel order. The node
// subset (when subsampling) is shared by all channels of the call.
std::vector<ChannelLooReport> loo_risk_all_channels(const FeatureSnapshot& snapshot,
                                                    const NnkConfig& config,
                                                    const EvalOptions& options = {},
                                                    NeighborhoodCache* cache = nullptr);

ChannelLooReport loo_risk_full_layer(const FeatureSnapshot& snapshot, const NnkConfig& config,
                                     const EvalOptions& options = {});

}  // namespace cwnnk
