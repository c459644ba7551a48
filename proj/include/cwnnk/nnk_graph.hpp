#pragma once

#include "cwnnk/kernels.hpp"

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace cwnnk {

using NodeId = std::size_t;

// Sparse neighbor set of one query node. Weights are the raw (unnormalized)
// non-negative regression coefficients; every stored weight is positive.
struct NnkNeighborhood {
  NodeId query_index = 0;
  std::vector<NodeId> neighbor_indices;
  std::vector<double> weights;
  // 0.5 theta'K theta - theta'k + 0.5, i.e. the kernel-space reconstruction
  // error of the query (0 means exact).
  double objective_residual = 0.0;

  std::size_t size() const noexcept { return neighbor_indices.size(); }
  double total_weight() const noexcept;

  friend bool operator==(const NnkNeighborhood&, const NnkNeighborhood&) = default;
};

struct NnkConfig {
  std::size_t k = 15;
  KernelSpec kernel{};
  double jitter = 1e-8;
  double nnls_tolerance = 1e-8;
  double cache_rebuild_factor = 2.0;  // rho

  // Throws InputError unless 1 <= k < n (n = population size), jitter >= 0,
  // nnls_tolerance > 0, rho > 1.
  void validate(std::size_t n) const;
};

// The k nodes most similar to the query (query excluded), by descending
// similarity with ties going to the lower node id. Similarities are compared
// on a 2^-40 grid so mathematically equal values that pick up different
// rounding (collinear rows under cosine, say) still tie.
std::vector<NodeId> knn_candidates(NodeId query, const FeatureMatrix& features, std::size_t k,
                                   const KernelSpec& kernel);

// Non-negative kernel regression of the query onto the candidates:
//   min_{theta >= 0} 0.5 theta'(K_SS + jitter I) theta - theta'k_Sq
// Weights below nnls_tolerance are dropped. Throws DegenerateInputError when
// nothing survives.
NnkNeighborhood nnk_solve(NodeId query, std::span<const NodeId> candidates,
                          const FeatureMatrix& features, const NnkConfig& config);

// Neighborhood for each requested node (all nodes by default), each solved
// against the population with that node removed.
std::map<NodeId, NnkNeighborhood> build_channel_graph(
    const FeatureMatrix& features, const NnkConfig& config,
    const std::optional<std::vector<NodeId>>& node_subset = std::nullopt,
    unsigned workers = 1);

struct RefreshResult {
  NnkNeighborhood neighborhood;
  bool rebuilt = false;
};

// Re-solves prev's support on the current features. Falls back to a fresh
// KNN + NNK build when the residual grew by more than cache_rebuild_factor
// (or went from ~0 to above nnls_tolerance).
RefreshResult refresh_cached_neighborhood(const NnkNeighborhood& prev,
                                          const FeatureMatrix& features, const NnkConfig& config);

}  // namespace cwnnk
