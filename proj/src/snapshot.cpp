#include "cwnnk/snapshot.hpp"

#include "cwnnk/errors.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace cwnnk {

std::vector<ClassId> LabelSet::validate() const {
  if (num_classes < 2) throw InputError("num_classes must be >= 2");
  std::vector<bool> seen(num_classes, false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw InputError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                       " is not below num_classes=" + std::to_string(num_classes));
    }
    seen[labels[i]] = true;
  }
  std::vector<ClassId> missing;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (!seen[c]) missing.push_back(static_cast<ClassId>(c));
  }
  return missing;
}

std::vector<std::uint32_t> FeatureSnapshot::dims() const {
  std::vector<std::uint32_t> d;
  d.reserve(channels.size());
  for (const auto& ch : channels) d.push_back(static_cast<std::uint32_t>(ch.cols()));
  return d;
}

std::size_t FeatureSnapshot::full_dim() const {
  std::size_t total = 0;
  for (const auto& ch : channels) total += static_cast<std::size_t>(ch.cols());
  return total;
}

FeatureMatrix FeatureSnapshot::channel_features(std::size_t c) const {
  if (c >= channels.size()) {
    throw InputError("channel " + std::to_string(c) + " out of range (C=" +
                     std::to_string(channels.size()) + ")");
  }
  return channels[c].cast<double>();
}

FeatureMatrix FeatureSnapshot::full_layer_features() const {
  FeatureMatrix full(static_cast<Eigen::Index>(num_samples()), static_cast<Eigen::Index>(full_dim()));
  Eigen::Index col = 0;
  for (const auto& ch : channels) {
    full.middleCols(col, ch.cols()) = ch.cast<double>();
    col += ch.cols();
  }
  return full;
}

void FeatureSnapshot::validate() const {
  labels.validate();
  if (channels.empty()) throw InputError("snapshot has no channels");
  std::vector<DataError::Location> bad;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& ch = channels[c];
    if (static_cast<std::size_t>(ch.rows()) != labels.size()) {
      throw InputError("channel " + std::to_string(c) + " has " + std::to_string(ch.rows()) +
                       " rows, expected " + std::to_string(labels.size()));
    }
    if (ch.cols() < 1) throw InputError("channel " + std::to_string(c) + " has zero width");
    for (Eigen::Index r = 0; r < ch.rows(); ++r) {
      if (!ch.row(r).allFinite()) {
        bad.emplace_back(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r));
      }
    }
  }
  if (!bad.empty()) {
    std::string msg = "non-finite activations at (channel,row):";
    for (std::size_t i = 0; i < bad.size() && i < 16; ++i) {
      msg += " (" + std::to_string(bad[i].first) + "," + std::to_string(bad[i].second) + ")";
    }
    if (bad.size() > 16) msg += " ... " + std::to_string(bad.size()) + " total";
    throw DataError(msg, std::move(bad));
  }
}

bool operator==(const FeatureSnapshot& a, const FeatureSnapshot& b) {
  if (a.step != b.step || !(a.labels == b.labels) || a.channels.size() != b.channels.size()) {
    return false;
  }
  for (std::size_t c = 0; c < a.channels.size(); ++c) {
    const auto& x = a.channels[c];
    const auto& y = b.channels[c];
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      // Bitwise comparison so NaN payloads and signed zeros count.
      if (std::memcmp(x.data() + i, y.data() + i, sizeof(float)) != 0) return false;
    }
  }
  return true;
}

}  // namespace cwnnk
