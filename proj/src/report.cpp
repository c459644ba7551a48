#include "cwnnk/report.hpp"

#include "cwnnk/errors.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace cwnnk {

using nlohmann::json;

namespace {

// JSON has no infinity; unset best risks travel as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("record is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("record field '") + key + "': " + e.what());
  }
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  k.kind = parse_kernel_kind(field<std::string>(j, "kind"));
  k.sigma = field<double>(j, "sigma");
  const auto policy = field<std::string>(j, "sigma_policy");
  if (policy == "fixed") {
    k.sigma_policy = SigmaPolicy::fixed;
  } else if (policy == "median_knn_distance") {
    k.sigma_policy = SigmaPolicy::median_knn_distance;
  } else {
    throw InputError("unknown sigma_policy '" + policy + "'");
  }
  return k;
}

}  // namespace

ChannelSummary ChannelSummary::from_report(const ChannelLooReport& r) {
  return {r.channel,         r.loo_risk,           r.mean_neighbor_count, r.mean_same_class_weight,
          r.zero_fraction,   r.evaluated_nodes(),  r.failed_nodes};
}

json to_json(const RunHeader& h) {
  json j;
  j["schema"] = kRecordSchema;
  j["type"] = "run";
  j["controller"] = {{"channels", h.controller.channels},
                     {"patience", h.controller.patience},
                     {"eval_interval", h.controller.eval_interval},
                     {"eval_period", h.controller.eval_period},
                     {"combined_best", h.controller.combined_best}};
  j["nnk"] = {{"k", h.nnk.k},
              {"jitter", h.nnk.jitter},
              {"nnls_tolerance", h.nnk.nnls_tolerance},
              {"cache_rebuild_factor", finite_or_null(h.nnk.cache_rebuild_factor)},
              {"kernel",
               {{"kind", std::string(to_string(h.nnk.kernel.kind))},
                {"sigma", h.nnk.kernel.sigma},
                {"sigma_policy", h.nnk.kernel.sigma_policy == SigmaPolicy::fixed
                                     ? "fixed"
                                     : "median_knn_distance"}}}};
  j["subsample"] = h.subsample ? json(*h.subsample) : json(nullptr);
  j["seed"] = h.seed;
  return j;
}

RunHeader header_from_json(const json& j) {
  if (field<std::string>(j, "type") != "run") throw InputError("expected a run header record");
  RunHeader h;
  const json& c = j.at("controller");
  h.controller.channels = field<std::size_t>(c, "channels");
  h.controller.patience = field<std::uint32_t>(c, "patience");
  h.controller.eval_interval = field<Step>(c, "eval_interval");
  h.controller.eval_period = field<Step>(c, "eval_period");
  h.controller.combined_best = field<bool>(c, "combined_best");
  const json& n = j.at("nnk");
  h.nnk.k = field<std::size_t>(n, "k");
  h.nnk.jitter = field<double>(n, "jitter");
  h.nnk.nnls_tolerance = field<double>(n, "nnls_tolerance");
  h.nnk.cache_rebuild_factor = n.at("cache_rebuild_factor").is_null()
                                   ? std::numeric_limits<double>::infinity()
                                   : field<double>(n, "cache_rebuild_factor");
  h.nnk.kernel = kernel_from_json(n.at("kernel"));
  if (!j.at("subsample").is_null()) h.subsample = field<std::size_t>(j, "subsample");
  h.seed = field<std::uint64_t>(j, "seed");
  return h;
}

json to_json(const Decision& d) {
  return {{"freeze_now", d.freeze_now},
          {"best_updated", d.best_updated},
          {"t_star", d.best_step},
          {"stopped", d.stopped}};
}

json to_json(const HistoryEntry& e, bool with_duration) {
  json j;
  j["schema"] = kRecordSchema;
  j["type"] = "evaluation";
  j["step"] = e.step;
  j["token"] = e.token;
  j["seed"] = e.seed;
  if (with_duration) j["duration_ms"] = e.duration_ms;
  json channels = json::array();
  for (const auto& c : e.channels) {
    channels.push_back({{"channel", c.channel},
                        {"loo_risk", c.loo_risk},
                        {"mean_neighbors", c.mean_neighbors},
                        {"mean_same_class_weight", c.mean_same_class_weight},
                        {"zero_fraction", c.zero_fraction},
                        {"evaluated_nodes", c.evaluated_nodes},
                        {"failed_nodes", c.failed_nodes}});
  }
  j["channels"] = std::move(channels);
  j["decision"] = to_json(e.decision);
  return j;
}

HistoryEntry entry_from_json(const json& j) {
  if (field<std::string>(j, "type") != "evaluation") {
    throw InputError("expected an evaluation record");
  }
  HistoryEntry e;
  e.step = field<Step>(j, "step");
  e.token = field<std::string>(j, "token");
  e.seed = field<std::uint64_t>(j, "seed");
  if (j.contains("duration_ms")) e.duration_ms = field<double>(j, "duration_ms");
  for (const json& c : j.at("channels")) {
    ChannelSummary s;
    s.channel = field<ChannelId>(c, "channel");
    s.loo_risk = field<double>(c, "loo_risk");
    s.mean_neighbors = field<double>(c, "mean_neighbors");
    s.mean_same_class_weight = field<double>(c, "mean_same_class_weight");
    s.zero_fraction = field<double>(c, "zero_fraction");
    s.evaluated_nodes = field<std::size_t>(c, "evaluated_nodes");
    s.failed_nodes = field<std::vector<NodeId>>(c, "failed_nodes");
    e.channels.push_back(std::move(s));
  }
  const json& d = j.at("decision");
  e.decision.freeze_now = field<std::vector<ChannelId>>(d, "freeze_now");
  e.decision.best_updated = field<bool>(d, "best_updated");
  e.decision.best_step = field<Step>(d, "t_star");
  e.decision.stopped = field<bool>(d, "stopped");
  return e;
}

json to_json(const StoppingState& s) {
  json best = json::array();
  for (double r : s.best_risk) best.push_back(finite_or_null(r));
  std::vector<ChannelId> frozen;
  for (std::size_t c = 0; c < s.frozen.size(); ++c) {
    if (s.frozen[c]) frozen.push_back(static_cast<ChannelId>(c));
  }
  return {{"q", s.remaining_patience},
          {"r", std::move(best)},
          {"t", s.step},
          {"t_star", s.best_step},
          {"best_checkpoint", s.best_checkpoint},
          {"frozen", frozen},
          {"stopped", s.stopped}};
}

void write_header(std::ostream& out, const RunHeader& header) {
  out << to_json(header).dump() << '\n' << std::flush;
}

void write_report(std::ostream& out, const HistoryEntry& entry) {
  out << to_json(entry).dump() << '\n' << std::flush;
}

RunHistory read_history(std::istream& in) {
  RunHistory h;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError("history line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header) {
      h.header = header_from_json(j);
      have_header = true;
      continue;
    }
    HistoryEntry e = entry_from_json(j);
    if (!h.entries.empty() && e.step <= h.entries.back().step) {
      throw InputError("history line " + std::to_string(lineno) + ": step " +
                       std::to_string(e.step) + " is not increasing");
    }
    h.entries.push_back(std::move(e));
  }
  if (!have_header) throw InputError("history has no run header");
  return h;
}

long replay_history(const RunHistory& history, std::string* mismatch) {
  StoppingState state = controller_new(history.header.controller);
  for (std::size_t i = 0; i < history.entries.size(); ++i) {
    const HistoryEntry& e = history.entries[i];
    ChannelRisks risks;
    for (const auto& c : e.channels) risks[c.channel] = c.loo_risk;
    Decision d;
    try {
      std::tie(state, d) = observe(state, history.header.controller, e.step, risks, e.token);
    } catch (const Error& err) {
      if (mismatch) *mismatch = "step " + std::to_string(e.step) + ": " + err.what();
      return static_cast<long>(i);
    }
    if (!(d == e.decision)) {
      if (mismatch) {
        *mismatch = "step " + std::to_string(e.step) + ": recorded " + to_json(e.decision).dump() +
                    ", replayed " + to_json(d).dump();
      }
      return static_cast<long>(i);
    }
  }
  return -1;
}

}  // namespace cwnnk
