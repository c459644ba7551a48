#pragma once

#include "cwnnk/interpolation.hpp"

#include <map>
#include <vector>

namespace cwnnk {

// Channel-importance signals: activation sparsity, NNK neighborhood size and
// how much of each neighborhood's weight lands on the query's own class.
struct ImportanceMetrics {
  ChannelId channel = 0;
  double zero_fraction = 0.0;
  double mean_neighbors = 0.0;
  double mean_same_class_weight = 0.0;
  double rank_score = 0.0;  // == loo_risk, lower is better
};

struct NeighborhoodStats {
  double mean_neighbors = 0.0;
  double mean_same_class_weight = 0.0;
};

struct ChannelRanking {
  std::vector<ChannelId> order;    // ascending risk, ties by id
  std::vector<ChannelId> passing;  // risk < threshold, in ranking order
};

inline constexpr double kDefaultZeroTolerance = 1e-7;
inline constexpr double kDefaultRiskThreshold = 0.4;

// Fraction of entries with |v| <= zero_tol.
double zero_stats(const FeatureMatrix& features, double zero_tol = kDefaultZeroTolerance);
double zero_stats(const FloatMatrix& features, double zero_tol = kDefaultZeroTolerance);

NeighborhoodStats neighborhood_stats(const std::map<NodeId, NnkNeighborhood>& graph,
                                     const LabelSet& labels);

// Same-class share of one neighborhood's normalized weights.
double same_class_weight(const NnkNeighborhood& nbhd, const LabelSet& labels);

ChannelRanking rank_channels(const std::vector<ChannelLooReport>& reports,
                             double risk_threshold = kDefaultRiskThreshold);

std::vector<ImportanceMetrics> importance_metrics(const std::vector<ChannelLooReport>& reports);

}  // namespace cwnnk
