#include "cwnnk/nnk_graph.hpp"

#include "cwnnk/errors.hpp"
#include "cwnnk/nnls.hpp"
#include "cwnnk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace cwnnk {

double NnkNeighborhood::total_weight() const noexcept {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void NnkConfig::validate(std::size_t n) const {
  if (k < 1 || k >= n) {
    throw InputError("need 1 <= K < N (K=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  }
  if (!(jitter >= 0.0)) throw InputError("jitter must be >= 0");
  if (!(nnls_tolerance > 0.0)) throw InputError("nnls_tolerance must be > 0");
  if (!(cache_rebuild_factor > 1.0)) throw InputError("cache rebuild factor must be > 1");
  kernel.validate();
}

namespace {

void check_node(NodeId node, const FeatureMatrix& features) {
  if (node >= static_cast<NodeId>(features.rows())) {
    throw InputError("node " + std::to_string(node) + " out of range (N=" +
                     std::to_string(features.rows()) + ")");
  }
}

std::vector<NodeId> knn_resolved(NodeId query, const FeatureMatrix& features, std::size_t k,
                                 const KernelSpec& kernel) {
  const auto n = static_cast<std::size_t>(features.rows());
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(n - 1);
  const auto q = row_span(features, static_cast<Eigen::Index>(query));
  for (NodeId j = 0; j < n; ++j) {
    if (j == query) continue;
    const double s = kernel_value(q, row_span(features, static_cast<Eigen::Index>(j)), kernel);
    scored.emplace_back(std::round(std::ldexp(s, 40)), j);
  }
  const auto by_similarity = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    by_similarity);
  std::vector<NodeId> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = scored[i].second;
  return out;
}

NnkNeighborhood solve_resolved(NodeId query, std::span<const NodeId> candidates,
                               const FeatureMatrix& features, const NnkConfig& config) {
  if (candidates.empty()) throw InputError("nnk_solve needs at least one candidate");
  const auto m = static_cast<Eigen::Index>(candidates.size());
  const auto q = row_span(features, static_cast<Eigen::Index>(query));

  Eigen::MatrixXd gram(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const NodeId ci = candidates[static_cast<std::size_t>(i)];
    if (ci == query) throw InputError("candidate list contains the query node");
    check_node(ci, features);
    const auto xi = row_span(features, static_cast<Eigen::Index>(ci));
    rhs(i) = kernel_value(xi, q, config.kernel);
    gram(i, i) = 1.0 + config.jitter;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double v = kernel_value(xi, row_span(features, static_cast<Eigen::Index>(candidates[static_cast<std::size_t>(j)])),
                                    config.kernel);
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }

  NnlsResult sol = solve_nnls_gram(gram, rhs);

  Eigen::VectorXd kept = Eigen::VectorXd::Zero(m);
  NnkNeighborhood out;
  out.query_index = query;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sol.x(i) >= config.nnls_tolerance) {
      kept(i) = sol.x(i);
      out.neighbor_indices.push_back(candidates[static_cast<std::size_t>(i)]);
      out.weights.push_back(sol.x(i));
    }
  }
  if (out.neighbor_indices.empty()) {
    throw DegenerateInputError(query, "all NNK weights pruned (no candidate has positive similarity)");
  }
  out.objective_residual = std::max(0.0, quadratic_objective(gram, rhs, kept) + 0.5);
  return out;
}

}  // namespace

std::vector<NodeId> knn_candidates(NodeId query, const FeatureMatrix& features, std::size_t k,
                                   const KernelSpec& kernel) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (k < 1 || n <= k) {
    throw InputError("knn_candidates needs N > K >= 1 (N=" + std::to_string(n) +
                     ", K=" + std::to_string(k) + ")");
  }
  check_node(query, features);
  return knn_resolved(query, features, k, resolve_kernel(kernel, features, k));
}

NnkNeighborhood nnk_solve(NodeId query, std::span<const NodeId> candidates,
                          const FeatureMatrix& features, const NnkConfig& config) {
  check_node(query, features);
  NnkConfig resolved = config;
  resolved.kernel = resolve_kernel(config.kernel, features, config.k);
  return solve_resolved(query, candidates, features, resolved);
}

std::map<NodeId, NnkNeighborhood> build_channel_graph(
    const FeatureMatrix& features, const NnkConfig& config,
    const std::optional<std::vector<NodeId>>& node_subset, unsigned workers) {
  const auto n = static_cast<std::size_t>(features.rows());
  config.validate(n);
  require_finite(features);

  std::vector<NodeId> nodes;
  if (node_subset) {
    nodes = *node_subset;
    for (NodeId v : nodes) check_node(v, features);
  } else {
    nodes.resize(n);
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
  }

  NnkConfig resolved = config;
  resolved.kernel = resolve_kernel(config.kernel, features, config.k);

  std::vector<NnkNeighborhood> built(nodes.size());
  parallel_for(nodes.size(), workers, [&](std::size_t i) {
    const auto cand = knn_resolved(nodes[i], features, resolved.k, resolved.kernel);
    built[i] = solve_resolved(nodes[i], cand, features, resolved);
  });

  std::map<NodeId, NnkNeighborhood> graph;
  for (std::size_t i = 0; i < nodes.size(); ++i) graph.emplace(nodes[i], std::move(built[i]));
  return graph;
}

RefreshResult refresh_cached_neighborhood(const NnkNeighborhood& prev,
                                          const FeatureMatrix& features, const NnkConfig& config) {
  const auto n = static_cast<std::size_t>(features.rows());
  config.validate(n);
  check_node(prev.query_index, features);

  NnkConfig resolved = config;
  resolved.kernel = resolve_kernel(config.kernel, features, config.k);

  const auto rebuild = [&] {
    const auto cand = knn_resolved(prev.query_index, features, resolved.k, resolved.kernel);
    return RefreshResult{solve_resolved(prev.query_index, cand, features, resolved), true};
  };

  const double rho = config.cache_rebuild_factor;
  NnkNeighborhood reused;
  try {
    reused = solve_resolved(prev.query_index, prev.neighbor_indices, features, resolved);
  } catch (const DegenerateInputError&) {
    // The old support lost all similarity to the query (residual 0.5).
    if (std::isinf(rho)) throw;
    return rebuild();
  }
  if (std::isinf(rho)) return {std::move(reused), false};

  const bool grew = prev.objective_residual <= 1e-12
                        ? reused.objective_residual > config.nnls_tolerance
                        : reused.objective_residual > rho * prev.objective_residual;
  if (grew) return rebuild();
  return {std::move(reused), false};
}

}  // namespace cwnnk
