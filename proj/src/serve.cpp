#include "cwnnk/serve.hpp"

#include "cwnnk/errors.hpp"
#include "cwnnk/snapshot_io.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

namespace cwnnk {

using nlohmann::json;

namespace {

bool non_negative_integer(const json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

}  // namespace

json error_record(const std::string& code, const std::string& message) {
  return {{"schema", kRecordSchema}, {"type", "error"}, {"code", code}, {"message", message}};
}

ServeSession::ServeSession(ServeConfig config, std::ostream* history)
    : config_(std::move(config)), history_(history) {
  ControllerConfig check = config_.controller;
  check.channels = std::max<std::size_t>(check.channels, 1);
  check.validate();
  config_.nnk.kernel.validate();
  if (config_.controller.channels > 0) ensure_controller(config_.controller.channels);
}

void ServeSession::ensure_controller(std::size_t channels) {
  if (state_) return;
  config_.controller.channels = channels;
  state_ = controller_new(config_.controller);
  if (history_) {
    write_header(*history_, RunHeader{config_.controller, config_.nnk, config_.eval.subsample,
                                      config_.eval.seed});
  }
}

json ServeSession::status() const {
  json j{{"schema", kRecordSchema}, {"type", "status"}, {"initialized", state_.has_value()}};
  j["state"] = state_ ? to_json(*state_) : json(nullptr);
  return j;
}

json ServeSession::handle(const json& request, std::span<const std::uint8_t> payload) {
  if (!request.is_object() || !request.contains("op") || !request["op"].is_string()) {
    return error_record("protocol", "request header needs a string 'op'");
  }
  const auto op = request["op"].get<std::string>();
  if (op == "status") return status();
  if (op == "observe") return observe_request(request, payload);
  return error_record("protocol", "unknown op '" + op + "'");
}

json ServeSession::observe_request(const json& request, std::span<const std::uint8_t> payload) {
  if (state_ && state_->stopped) return error_record("run-stopped", "all channels are frozen");
  if (!request.contains("step") || !non_negative_integer(request["step"])) {
    return error_record("protocol", "observe needs an unsigned integer 'step'");
  }
  const auto step = request["step"].get<Step>();
  const std::string token =
      request.contains("token") && request["token"].is_string() ? request["token"].get<std::string>() : "";
  if (last_step_ && step <= *last_step_) {
    return error_record("contract", "step " + std::to_string(step) + " does not follow step " +
                                        std::to_string(*last_step_));
  }

  // Grid check needs no snapshot; the controller's stopped flag is handled above.
  const StoppingState probe = state_ ? *state_ : StoppingState{};
  if (!should_evaluate(probe, step, config_.controller)) {
    last_step_ = step;
    return {{"schema", kRecordSchema}, {"type", "skipped"}, {"step", step}};
  }

  const auto started = std::chrono::steady_clock::now();
  FeatureSnapshot snapshot;
  try {
    if (request.contains("snapshot_path")) {
      if (!request["snapshot_path"].is_string()) {
        return error_record("protocol", "'snapshot_path' must be a string");
      }
      snapshot = read_snapshot(std::filesystem::path(request["snapshot_path"].get<std::string>()));
    } else if (request.contains("snapshot_bytes")) {
      snapshot = decode_snapshot(payload);
    } else {
      return error_record("protocol", "observe needs 'snapshot_bytes' or 'snapshot_path'");
    }
  } catch (const FormatError& e) {
    return error_record("format", e.what());
  } catch (const DataError& e) {
    return error_record("data", e.what());
  } catch (const InputError& e) {
    return error_record("input", e.what());
  }

  if (state_ && snapshot.num_channels() != state_->frozen.size()) {
    return error_record("input", "snapshot has " + std::to_string(snapshot.num_channels()) +
                                     " channels, run monitors " +
                                     std::to_string(state_->frozen.size()));
  }

  HistoryEntry entry;
  try {
    ensure_controller(snapshot.num_channels());
    EvalOptions options = config_.eval;
    std::vector<std::size_t> active;
    for (ChannelId c : active_channels(*state_)) active.push_back(static_cast<std::size_t>(c));
    options.channel_subset = active;
    const auto reports =
        loo_risk_all_channels(snapshot, config_.nnk, options, config_.use_cache ? &cache_ : nullptr);

    auto [next, decision] = observe(*state_, config_.controller, step, risks_of(reports), token);
    state_ = std::move(next);
    last_step_ = step;

    entry.step = step;
    entry.token = token;
    entry.seed = config_.eval.seed;
    for (const auto& r : reports) entry.channels.push_back(ChannelSummary::from_report(r));
    entry.decision = std::move(decision);
  } catch (const ContractError& e) {
    return error_record("contract", e.what());
  } catch (const Error& e) {
    return error_record("input", e.what());
  }
  entry.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  if (history_) write_report(*history_, entry);
  return to_json(entry, false);
}

int serve_loop(std::istream& in, std::ostream& out, const ServeConfig& config,
               std::ostream* history) {
  ServeSession session(config, history);
  const auto respond = [&out](const json& j) { out << j.dump() << '\n' << std::flush; };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    json request;
    try {
      request = json::parse(line);
    } catch (const json::parse_error& e) {
      respond(error_record("protocol", std::string("bad request header: ") + e.what()));
      continue;
    }

    std::vector<std::uint8_t> payload;
    if (request.is_object() && request.contains("snapshot_bytes")) {
      const auto& len = request["snapshot_bytes"];
      if (!non_negative_integer(len)) {
        respond(error_record("protocol", "'snapshot_bytes' must be an unsigned integer"));
        continue;
      }
      // grow as bytes arrive so a bogus length cannot force a huge allocation
      const auto want = len.get<std::uint64_t>();
      constexpr std::size_t kChunk = std::size_t{1} << 20;
      while (payload.size() < want && in) {
        const auto take = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, want - payload.size()));
        const auto at = payload.size();
        payload.resize(at + take);
        in.read(reinterpret_cast<char*>(payload.data() + at), static_cast<std::streamsize>(take));
        payload.resize(at + static_cast<std::size_t>(in.gcount()));
      }
      if (payload.size() != want) {
        respond(error_record("format", "stream ended inside a " + std::to_string(want) + "-byte frame"));
        return 1;
      }
    }
    respond(session.handle(request, payload));
  }
  return 0;
}

}  // namespace cwnnk
