#include "cwnnk/diagnostics.hpp"

#include "cwnnk/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cwnnk {

namespace {

template <typename Matrix>
double zero_fraction_of(const Matrix& m, double zero_tol) {
  if (zero_tol < 0.0) throw InputError("zero tolerance must be >= 0");
  if (m.size() == 0) return 0.0;
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (std::abs(static_cast<double>(m.data()[i])) <= zero_tol) ++zeros;
  }
  return static_cast<double>(zeros) / static_cast<double>(m.size());
}

}  // namespace

double zero_stats(const FeatureMatrix& features, double zero_tol) {
  return zero_fraction_of(features, zero_tol);
}

double zero_stats(const FloatMatrix& features, double zero_tol) {
  return zero_fraction_of(features, zero_tol);
}

double same_class_weight(const NnkNeighborhood& nbhd, const LabelSet& labels) {
  const ClassId own = labels[nbhd.query_index];
  double same = 0.0, total = 0.0;
  for (std::size_t i = 0; i < nbhd.size(); ++i) {
    total += nbhd.weights[i];
    if (labels[nbhd.neighbor_indices[i]] == own) same += nbhd.weights[i];
  }
  return total > 0.0 ? same / total : 0.0;
}

NeighborhoodStats neighborhood_stats(const std::map<NodeId, NnkNeighborhood>& graph,
                                     const LabelSet& labels) {
  if (graph.empty()) throw InputError("neighborhood_stats needs a nonempty graph");
  NeighborhoodStats s;
  for (const auto& [node, nbhd] : graph) {
    s.mean_neighbors += static_cast<double>(nbhd.size());
    s.mean_same_class_weight += same_class_weight(nbhd, labels);
  }
  const auto n = static_cast<double>(graph.size());
  s.mean_neighbors /= n;
  s.mean_same_class_weight /= n;
  return s;
}

ChannelRanking rank_channels(const std::vector<ChannelLooReport>& reports, double risk_threshold) {
  if (reports.empty()) throw InputError("rank_channels needs at least one report");
  std::vector<const ChannelLooReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->loo_risk != b->loo_risk ? a->loo_risk < b->loo_risk : a->channel < b->channel;
  });
  ChannelRanking out;
  for (const auto* r : sorted) {
    out.order.push_back(r->channel);
    if (r->loo_risk < risk_threshold) out.passing.push_back(r->channel);
  }
  return out;
}

std::vector<ImportanceMetrics> importance_metrics(const std::vector<ChannelLooReport>& reports) {
  std::vector<ImportanceMetrics> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    out.push_back({r.channel, r.zero_fraction, r.mean_neighbor_count, r.mean_same_class_weight,
                   r.loo_risk});
  }
  return out;
}

}  // namespace cwnnk
