#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "adalloc/fcap.hpp"
#include "adalloc/model.hpp"
#include "adalloc/risk.hpp"

namespace adalloc::engine {

struct Exhausted : std::logic_error {
  using std::logic_error::logic_error;
};
struct StaleDecision : std::logic_error {
  using std::logic_error::logic_error;
};

// Sequential allocation state. Owned by a single consumer; never mutated by
// decide(), only by apply().
struct EngineState {
  CampaignBook book;
  Position position;
  std::int64_t served = 0;  // h, bumps once per processed impression
  PolicyConfig policy;
  risk::ValueFunctionSpec value_spec;  // derived from book + policy
  fcap::UserCapCounter caps;
  bool caps_enabled = false;
  bool audit_prices = false;
};

EngineState make_state(CampaignBook book, PolicyConfig policy, bool enforce_caps = false);

// The rule's current dual price for campaign i, evaluated at the state's
// remaining budget (callers pass post-allocation state when scoring by
// hand). Clamped to [0, p_max]; 0 for the house campaign.
double effective_price(const EngineState& state, std::int32_t i);

// Scores every listed feasible entry with r - effective_price * a at the
// post-allocation remaining budget and picks the max, ties to the lowest
// campaign index. chosen is empty when no feasible entry scores > 0.
Decision decide(const EngineState& state, const Impression& imp);

// Commits a decision produced by decide() on this exact state.
void apply(EngineState& state, const Decision& decision);

// Swaps in freshly estimated dual prices (rolling-horizon period boundary).
void set_prices(EngineState& state, const DualPriceVector& prices);

using StepHook = std::function<void(std::int64_t h, const Decision&, const EngineState&)>;

// Folds decide + apply over the stream in arrival order and returns the
// decision log.
std::vector<Decision> run_stream(EngineState& state, std::span<const Impression> impressions,
                                 const StepHook& hook = {});

}  // namespace adalloc::engine
