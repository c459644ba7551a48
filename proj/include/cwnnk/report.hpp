#pragma once

#include "cwnnk/interpolation.hpp"
#include "cwnnk/stopping_controller.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace cwnnk {

inline constexpr const char* kRecordSchema = "cwnnk.record/1";

struct ChannelSummary {
  ChannelId channel = 0;
  double loo_risk = 0.0;
  double mean_neighbors = 0.0;
  double mean_same_class_weight = 0.0;
  double zero_fraction = 0.0;
  std::size_t evaluated_nodes = 0;
  std::vector<NodeId> failed_nodes;

  static ChannelSummary from_report(const ChannelLooReport& r);
  friend bool operator==(const ChannelSummary&, const ChannelSummary&) = default;
};

// One evaluation step of a run.
struct HistoryEntry {
  Step step = 0;
  std::string token;
  std::uint64_t seed = 0;
  double duration_ms = 0.0;
  std::vector<ChannelSummary> channels;
  Decision decision;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

// Settings a history was produced with; written as the first record.
struct RunHeader {
  ControllerConfig controller;
  NnkConfig nnk;
  std::optional<std::size_t> subsample;
  std::uint64_t seed = 0;
};

struct RunHistory {
  RunHeader header;
  std::vector<HistoryEntry> entries;
};

nlohmann::json to_json(const RunHeader& header);
RunHeader header_from_json(const nlohmann::json& j);

// Evaluation record. with_duration=false yields the deterministic form used
// in serve responses.
nlohmann::json to_json(const HistoryEntry& entry, bool with_duration = true);
HistoryEntry entry_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StoppingState& state);
nlohmann::json to_json(const Decision& decision);

// One line per record, flushed.
void write_report(std::ostream& out, const HistoryEntry& entry);
void write_header(std::ostream& out, const RunHeader& header);

// Parses a line-delimited history (header record first). Throws InputError
// on malformed records or non-increasing steps.
RunHistory read_history(std::istream& in);

// Re-runs the controller over the recorded risks. Returns the index of the
// first entry whose recomputed decision differs, or -1 when all match.
long replay_history(const RunHistory& history, std::string* mismatch = nullptr);

}  // namespace cwnnk
