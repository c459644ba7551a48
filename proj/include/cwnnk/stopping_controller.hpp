#pragma once

#include "cwnnk/interpolation.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cwnnk {

using Step = std::uint64_t;

struct ControllerConfig {
  std::size_t channels = 1;     // C
  std::uint32_t patience = 20;  // p
  Step eval_interval = 1;       // n: harness steps between evaluations
  Step eval_period = 1;         // T: LOO runs on every T-th evaluation
  // When set, the best step/checkpoint follow the mean risk over the
  // reported channels instead of any single channel's improvement.
  bool combined_best = false;

  void validate() const;
};

// Progressive channel-wise early stopping state.
struct StoppingState {
  std::vector<std::uint32_t> remaining_patience;  // q
  std::vector<double> best_risk;                  // r, +inf until first observation
  std::vector<bool> frozen;
  Step step = 0;                                  // t
  Step best_step = 0;                             // t*
  std::string best_checkpoint;                    // opaque stand-in for w*
  bool stopped = false;
  double best_combined_risk = 0.0;                // only with combined_best; +inf initially

  friend bool operator==(const StoppingState&, const StoppingState&) = default;
};

struct Decision {
  std::vector<ChannelId> freeze_now;
  bool best_updated = false;
  Step best_step = 0;
  bool stopped = false;

  friend bool operator==(const Decision&, const Decision&) = default;
};

using ChannelRisks = std::map<ChannelId, double>;

StoppingState controller_new(const ControllerConfig& config);

// One pass of the per-channel patience update. risks must hold exactly the
// active channels; a strict improvement resets that channel's patience and
// moves the best step/checkpoint to this step, anything else spends one unit
// of patience. Throws ContractError on a frozen or unknown channel, a missing
// active channel, a non-increasing step, or a stopped state.
std::pair<StoppingState, Decision> observe(const StoppingState& state, const ControllerConfig& config,
                                           Step step, const ChannelRisks& risks,
                                           const std::string& checkpoint_token);

// True iff step is a positive multiple of n*T and the run has not stopped.
bool should_evaluate(const StoppingState& state, Step step, const ControllerConfig& config);

std::vector<ChannelId> active_channels(const StoppingState& state);

ChannelRisks risks_of(const std::vector<ChannelLooReport>& reports);

}  // namespace cwnnk
