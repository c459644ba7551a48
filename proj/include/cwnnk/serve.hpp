#pragma once

#include "cwnnk/report.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cwnnk {

// Request/response service around the stopping controller.
//
// Each request is one JSON header line, optionally followed by a binary
// frame whose length the header announces:
//
//   {"op":"observe","step":10,"token":"ckpt-10","snapshot_bytes":1234}\n<1234 bytes NNKA>
//   {"op":"observe","step":10,"token":"ckpt-10","snapshot_path":"/tmp/s10.nnka"}\n
//   {"op":"status"}\n
//
// Every request gets exactly one JSON line back: an evaluation record, a
// {"type":"skipped"} record for steps off the evaluation grid, a status
// record, or an error record {"type":"error","code":...,"message":...}.
struct ServeConfig {
  ControllerConfig controller;  // channels == 0: take C from the first snapshot
  NnkConfig nnk;
  EvalOptions eval;
  bool use_cache = false;       // reuse neighborhoods across steps
};

class ServeSession {
 public:
  explicit ServeSession(ServeConfig config, std::ostream* history = nullptr);

  // Handles one parsed request. payload holds the frame bytes, if any.
  nlohmann::json handle(const nlohmann::json& request, std::span<const std::uint8_t> payload);

  const std::optional<StoppingState>& state() const noexcept { return state_; }

 private:
  nlohmann::json observe_request(const nlohmann::json& request, std::span<const std::uint8_t> payload);
  nlohmann::json status() const;
  void ensure_controller(std::size_t channels);

  ServeConfig config_;
  std::ostream* history_;
  std::optional<StoppingState> state_;
  std::optional<Step> last_step_;
  NeighborhoodCache cache_;
};

nlohmann::json error_record(const std::string& code, const std::string& message);

// Reads requests until EOF, answering each before reading the next. Returns
// 0 on clean EOF and 1 when the stream ends inside a frame.
int serve_loop(std::istream& in, std::ostream& out, const ServeConfig& config,
               std::ostream* history = nullptr);

}  // namespace cwnnk
