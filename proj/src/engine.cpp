#include "adalloc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adalloc::engine {
namespace {

double price_at(const EngineState& state, std::int32_t i, double remaining_currency) {
  if (state.book.at(i).is_house) return 0.0;
  if (state.policy.kind == PolicyKind::zero) return 0.0;
  const double d = risk::value_derivative(state.value_spec, i, remaining_currency);
  return std::clamp(d, 0.0, state.policy.price_cap());
}

}  // namespace

EngineState make_state(CampaignBook book, PolicyConfig policy, bool enforce_caps) {
  EngineState st;
  st.position.remaining.reserve(static_cast<std::size_t>(book.size()));
  for (const Campaign& c : book.campaigns()) st.position.remaining.push_back(c.remaining());
  st.value_spec.kind = policy.kind;
  st.value_spec.log_weight = policy.log_weight;
  st.value_spec.kappa = policy.kappa;
  st.value_spec.horizon = policy.horizon;
  st.value_spec.epsilon_floor = policy.epsilon_floor;
  st.value_spec.price_cap = policy.price_cap();
  if (policy.kind != PolicyKind::zero) {
    if (policy.initial_prices.prices.size() != static_cast<std::size_t>(book.size())) {
      throw std::invalid_argument("policy price vector does not match the campaign count");
    }
    st.value_spec.price_estimate = policy.initial_prices.prices;
    st.value_spec.budget.reserve(static_cast<std::size_t>(book.size()));
    for (const Campaign& c : book.campaigns()) {
      st.value_spec.budget.push_back(c.is_house ? 1.0 : to_currency(c.budget));
    }
  }
  st.book = std::move(book);
  st.policy = std::move(policy);
  st.caps_enabled = enforce_caps;
  return st;
}

double effective_price(const EngineState& state, std::int32_t i) {
  const Campaign& c = state.book.at(i);
  if (c.is_house) return 0.0;
  const Money remaining = state.position.remaining.at(static_cast<std::size_t>(i));
  if (remaining <= 0) throw Exhausted("campaign " + c.id + " is out of budget");
  return price_at(state, i, to_currency(remaining));
}

Decision decide(const EngineState& state, const Impression& imp) {
  Decision d;
  d.impression_id = imp.id;
  d.user = imp.user;
  double best_score = 0.0;
  std::int32_t best = -1;
  Money best_revenue = 0, best_cost = 0;
  std::vector<double> audit;
  if (state.audit_prices) audit.assign(imp.entries.size(), 0.0);

  for (std::size_t e = 0; e < imp.entries.size(); ++e) {
    const BidEntry& bid = imp.entries[e];
    const Campaign& c = state.book.at(bid.campaign);
    Money remaining_after = 0;
    if (!c.is_house) {
      const Money remaining = state.position.remaining[static_cast<std::size_t>(bid.campaign)];
      if (bid.cost > remaining) continue;
      remaining_after = remaining - bid.cost;
    }
    if (state.caps_enabled && c.fcap && !state.caps.allowed(imp.user, bid.campaign, *c.fcap)) {
      continue;
    }
    const double price =
        c.is_house ? 0.0 : price_at(state, bid.campaign, to_currency(remaining_after));
    if (state.audit_prices) audit[e] = price;
    const double score = to_currency(bid.revenue) - price * to_currency(bid.cost);
    if (score > best_score || (score == best_score && best >= 0 && bid.campaign < best)) {
      best_score = score;
      best = bid.campaign;
      best_revenue = bid.revenue;
      best_cost = bid.cost;
    }
  }
  if (best >= 0 && best_score > 0.0) {
    d.chosen = best;
    d.score = best_score;
    d.revenue = best_revenue;
    d.cost = best_cost;
  }
  if (state.audit_prices) d.effective_prices = std::move(audit);
  return d;
}

void apply(EngineState& state, const Decision& decision) {
  if (decision.chosen) {
    const std::int32_t i = *decision.chosen;
    Campaign& c = state.book.at(i);
    if (!c.is_house) {
      if (c.spent + decision.cost > c.budget) {
        throw StaleDecision("budget of campaign " + c.id + " no longer covers the decision");
      }
      state.position.remaining[static_cast<std::size_t>(i)] -= decision.cost;
    }
    if (state.caps_enabled && c.fcap &&
        !state.caps.check_and_count(decision.user, i, *c.fcap)) {
      throw StaleDecision("frequency cap for campaign " + c.id + " no longer allows the serve");
    }
    c.spent += decision.cost;
    state.position.collected += decision.revenue;
  }
  state.served += 1;
  state.value_spec.served = state.served;
}

void set_prices(EngineState& state, const DualPriceVector& prices) {
  if (prices.prices.size() != static_cast<std::size_t>(state.book.size())) {
    throw std::invalid_argument("price vector does not match the campaign count");
  }
  state.policy.initial_prices = prices;
  state.value_spec.price_estimate = prices.prices;
  state.value_spec.price_cap = prices.price_cap;
}

std::vector<Decision> run_stream(EngineState& state, std::span<const Impression> impressions,
                                 const StepHook& hook) {
  std::vector<Decision> log;
  log.reserve(impressions.size());
  for (const Impression& imp : impressions) {
    Decision d = decide(state, imp);
    apply(state, d);
    if (hook) hook(state.served, d, state);
    log.push_back(std::move(d));
  }
  return log;
}

}  // namespace adalloc::engine
