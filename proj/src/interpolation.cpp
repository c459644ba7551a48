#include "cwnnk/interpolation.hpp"

#include "cwnnk/diagnostics.hpp"
#include "cwnnk/errors.hpp"
#include "cwnnk/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace cwnnk {

std::vector<double> nnk_interpolate(const NnkNeighborhood& nbhd, const LabelSet& labels) {
  if (nbhd.size() == 0) throw InputError("cannot interpolate over an empty neighborhood");
  std::vector<double> probs(labels.num_classes, 0.0);
  const double total = nbhd.total_weight();
  for (std::size_t i = 0; i < nbhd.size(); ++i) {
    probs[labels[nbhd.neighbor_indices[i]]] += nbhd.weights[i] / total;
  }
  return probs;
}

ClassId classify(std::span<const double> probs, double tie_tolerance) {
  if (probs.empty()) throw InputError("classify needs a nonempty probability vector");
  const double top = *std::max_element(probs.begin(), probs.end());
  std::size_t c = 0;
  while (probs[c] < top - tie_tolerance) ++c;
  return static_cast<ClassId>(c);
}

double empirical_risk(std::span<const ClassId> predictions, const LabelSet& labels) {
  if (predictions.size() != labels.size()) {
    throw InputError("prediction count " + std::to_string(predictions.size()) +
                     " differs from label count " + std::to_string(labels.size()));
  }
  if (predictions.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) wrong += predictions[i] != labels[i];
  return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

std::vector<NodeId> select_nodes(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  if (m >= n) return pool;
  // Partial Fisher-Yates on raw engine output: identical across standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace {

struct NodeOutcome {
  bool failed = false;
  ClassId prediction = 0;
  NnkNeighborhood nbhd;
  bool rebuilt = false;
};

std::vector<NodeId> sweep_nodes(std::size_t n, const std::optional<std::vector<NodeId>>& subset) {
  if (!subset) {
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    return all;
  }
  std::vector<NodeId> nodes = *subset;
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    throw InputError("node subset contains duplicates");
  }
  if (!nodes.empty() && nodes.back() >= n) {
    throw InputError("node " + std::to_string(nodes.back()) + " out of range (N=" +
                     std::to_string(n) + ")");
  }
  return nodes;
}

ChannelLooReport loo_sweep(const FeatureMatrix& features, const LabelSet& labels,
                           const NnkConfig& config, const std::optional<std::vector<NodeId>>& subset,
                           unsigned workers, double zero_tolerance,
                           std::map<NodeId, NnkNeighborhood>* cache) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) {
    throw InputError("label count " + std::to_string(labels.size()) + " differs from N=" +
                     std::to_string(n));
  }
  labels.validate();
  if (n < config.k + 2) {
    throw InputError("LOO needs N >= K + 2 (N=" + std::to_string(n) + ", K=" +
                     std::to_string(config.k) + ")");
  }
  config.validate(n);
  require_finite(features);

  NnkConfig resolved = config;
  resolved.kernel = resolve_kernel(config.kernel, features, config.k);

  const std::vector<NodeId> nodes = sweep_nodes(n, subset);
  std::vector<const NnkNeighborhood*> cached(nodes.size(), nullptr);
  if (cache) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (auto it = cache->find(nodes[i]); it != cache->end()) cached[i] = &it->second;
    }
  }

  std::vector<NodeOutcome> outcomes(nodes.size());
  parallel_for(nodes.size(), workers, [&](std::size_t i) {
    NodeOutcome& out = outcomes[i];
    try {
      if (cached[i]) {
        auto refreshed = refresh_cached_neighborhood(*cached[i], features, resolved);
        out.nbhd = std::move(refreshed.neighborhood);
        out.rebuilt = refreshed.rebuilt;
      } else {
        const auto cand = knn_candidates(nodes[i], features, resolved.k, resolved.kernel);
        out.nbhd = nnk_solve(nodes[i], cand, features, resolved);
        out.rebuilt = cache != nullptr;
      }
      out.prediction = classify(nnk_interpolate(out.nbhd, labels));
    } catch (const DegenerateInputError&) {
      out.failed = true;
    }
  });

  ChannelLooReport report;
  report.nodes = nodes;
  report.sigma = resolved.kernel.kind == KernelKind::gaussian ? resolved.kernel.sigma : 0.0;
  report.zero_fraction = zero_stats(features, zero_tolerance);
  std::size_t wrong = 0, solved = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeOutcome& out = outcomes[i];
    if (out.rebuilt) ++report.rebuilt_nodes;
    if (out.failed) {
      report.failed_nodes.push_back(nodes[i]);
      report.predictions.push_back(0);
      report.per_node_correct.push_back(false);
      ++wrong;
      continue;
    }
    const bool correct = out.prediction == labels[nodes[i]];
    report.predictions.push_back(out.prediction);
    report.per_node_correct.push_back(correct);
    wrong += !correct;
    ++solved;
    report.mean_neighbor_count += static_cast<double>(out.nbhd.size());
    report.mean_same_class_weight += same_class_weight(out.nbhd, labels);
    if (cache) (*cache)[nodes[i]] = out.nbhd;
  }
  if (solved > 0) {
    report.mean_neighbor_count /= static_cast<double>(solved);
    report.mean_same_class_weight /= static_cast<double>(solved);
  }
  report.loo_risk = nodes.empty() ? 0.0
                                  : static_cast<double>(wrong) / static_cast<double>(nodes.size());
  return report;
}

std::vector<std::size_t> requested_channels(const FeatureSnapshot& snapshot,
                                            const EvalOptions& options) {
  std::vector<std::size_t> channels;
  if (options.channel_subset) {
    channels = *options.channel_subset;
    std::sort(channels.begin(), channels.end());
    channels.erase(std::unique(channels.begin(), channels.end()), channels.end());
    for (std::size_t c : channels) {
      if (c >= snapshot.num_channels()) {
        throw InputError("channel " + std::to_string(c) + " out of range (C=" +
                         std::to_string(snapshot.num_channels()) + ")");
      }
    }
  } else {
    channels.resize(snapshot.num_channels());
    std::iota(channels.begin(), channels.end(), std::size_t{0});
  }
  return channels;
}

std::optional<std::vector<NodeId>> subsample_nodes(const FeatureSnapshot& snapshot,
                                                   const EvalOptions& options) {
  if (!options.subsample) return std::nullopt;
  if (*options.subsample == 0) throw InputError("subsample size must be >= 1");
  return select_nodes(snapshot.num_samples(), *options.subsample, options.seed);
}

}  // namespace

ChannelLooReport loo_risk_channel(const FeatureMatrix& features, const LabelSet& labels,
                                  const NnkConfig& config,
                                  const std::optional<std::vector<NodeId>>& node_subset,
                                  unsigned workers, double zero_tolerance) {
  return loo_sweep(features, labels, config, node_subset, workers, zero_tolerance, nullptr);
}

ChannelLooReport loo_risk_channel_cached(const FeatureMatrix& features, const LabelSet& labels,
                                         const NnkConfig& config,
                                         std::map<NodeId, NnkNeighborhood>& cache,
                                         const std::optional<std::vector<NodeId>>& node_subset,
                                         unsigned workers, double zero_tolerance) {
  return loo_sweep(features, labels, config, node_subset, workers, zero_tolerance, &cache);
}

std::vector<ChannelLooReport> loo_risk_all_channels(const FeatureSnapshot& snapshot,
                                                    const NnkConfig& config,
                                                    const EvalOptions& options,
                                                    NeighborhoodCache* cache) {
  snapshot.validate();
  const auto channels = requested_channels(snapshot, options);
  const auto nodes = subsample_nodes(snapshot, options);

  std::vector<ChannelLooReport> reports;
  reports.reserve(channels.size());
  for (std::size_t c : channels) {
    const FeatureMatrix features = snapshot.channel_features(c);
    const auto id = static_cast<ChannelId>(c);
    ChannelLooReport r =
        cache ? loo_sweep(features, snapshot.labels, config, nodes, options.workers,
                          options.zero_tolerance, &cache->channels[id])
              : loo_sweep(features, snapshot.labels, config, nodes, options.workers,
                          options.zero_tolerance, nullptr);
    r.channel = id;
    reports.push_back(std::move(r));
  }
  return reports;
}

ChannelLooReport loo_risk_full_layer(const FeatureSnapshot& snapshot, const NnkConfig& config,
                                     const EvalOptions& options) {
  snapshot.validate();
  ChannelLooReport r = loo_sweep(snapshot.full_layer_features(), snapshot.labels, config,
                                 subsample_nodes(snapshot, options), options.workers,
                                 options.zero_tolerance, nullptr);
  r.channel = kFullLayer;
  return r;
}

}  // namespace cwnnk
