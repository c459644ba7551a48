#include "cwnnk/stopping_controller.hpp"

#include "cwnnk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cwnnk {

void ControllerConfig::validate() const {
  if (channels < 1) throw InputError("controller needs at least one channel");
  if (patience < 1) throw InputError("patience must be >= 1");
  if (eval_interval < 1) throw InputError("eval interval must be >= 1");
  if (eval_period < 1) throw InputError("eval period must be >= 1");
}

StoppingState controller_new(const ControllerConfig& config) {
  config.validate();
  StoppingState s;
  s.remaining_patience.assign(config.channels, config.patience);
  s.best_risk.assign(config.channels, std::numeric_limits<double>::infinity());
  s.frozen.assign(config.channels, false);
  s.best_combined_risk = std::numeric_limits<double>::infinity();
  return s;
}

std::pair<StoppingState, Decision> observe(const StoppingState& state, const ControllerConfig& config,
                                           Step step, const ChannelRisks& risks,
                                           const std::string& checkpoint_token) {
  if (state.stopped) throw ContractError("observe called on a stopped run");
  if (step <= state.step) {
    throw ContractError("step " + std::to_string(step) + " does not follow step " +
                        std::to_string(state.step));
  }
  const auto c_count = state.remaining_patience.size();
  for (const auto& [c, risk] : risks) {
    if (c < 0 || static_cast<std::size_t>(c) >= c_count) {
      throw ContractError("risk reported for unknown channel " + std::to_string(c));
    }
    if (state.frozen[static_cast<std::size_t>(c)]) {
      throw ContractError("risk reported for frozen channel " + std::to_string(c));
    }
    if (std::isnan(risk)) throw ContractError("NaN risk for channel " + std::to_string(c));
  }
  for (std::size_t c = 0; c < c_count; ++c) {
    if (!state.frozen[c] && !risks.contains(static_cast<ChannelId>(c))) {
      throw ContractError("no risk reported for active channel " + std::to_string(c));
    }
  }

  StoppingState next = state;
  Decision d;
  next.step = step;

  // std::map iterates in ascending channel id, the order of the per-channel loop.
  for (const auto& [c, risk] : risks) {
    const auto i = static_cast<std::size_t>(c);
    if (risk < next.best_risk[i]) {
      next.best_risk[i] = risk;
      next.remaining_patience[i] = config.patience;
      if (!config.combined_best) {
        next.best_step = step;
        next.best_checkpoint = checkpoint_token;
        d.best_updated = true;
      }
    } else {
      --next.remaining_patience[i];
    }
    if (next.remaining_patience[i] == 0) {
      next.frozen[i] = true;
      d.freeze_now.push_back(c);
    }
  }

  if (config.combined_best && !risks.empty()) {
    double mean = 0.0;
    for (const auto& [c, risk] : risks) mean += risk;
    mean /= static_cast<double>(risks.size());
    if (mean < next.best_combined_risk) {
      next.best_combined_risk = mean;
      next.best_step = step;
      next.best_checkpoint = checkpoint_token;
      d.best_updated = true;
    }
  }

  next.stopped = std::all_of(next.frozen.begin(), next.frozen.end(), [](bool f) { return f; });
  d.best_step = next.best_step;
  d.stopped = next.stopped;
  return {std::move(next), std::move(d)};
}

bool should_evaluate(const StoppingState& state, Step step, const ControllerConfig& config) {
  if (state.stopped || step == 0) return false;
  return step % (config.eval_interval * config.eval_period) == 0;
}

std::vector<ChannelId> active_channels(const StoppingState& state) {
  std::vector<ChannelId> out;
  for (std::size_t c = 0; c < state.frozen.size(); ++c) {
    if (!state.frozen[c]) out.push_back(static_cast<ChannelId>(c));
  }
  return out;
}

ChannelRisks risks_of(const std::vector<ChannelLooReport>& reports) {
  ChannelRisks out;
  for (const auto& r : reports) out[r.channel] = r.loo_risk;
  return out;
}

}  // namespace cwnnk
