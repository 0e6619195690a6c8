#include "adalloc/risk.hpp"

#include <algorithm>
#include <cmath>

namespace adalloc::risk {
namespace {

struct KindParams {
  double price = 0.0;   // p^eps_i
  double budget = 0.0;  // b_i
};

KindParams params_for(const ValueFunctionSpec& spec, std::int32_t i) {
  if (spec.kind == PolicyKind::zero) return {};
  const auto idx = static_cast<std::size_t>(i);
  if (idx >= spec.price_estimate.size() || idx >= spec.budget.size()) {
    throw ParamMissing("value function: missing p^eps or budget for campaign " +
                       std::to_string(i));
  }
  KindParams kp{spec.price_estimate[idx], spec.budget[idx]};
  switch (spec.kind) {
    case PolicyKind::log:
      if (!(spec.log_weight > 0)) throw ParamMissing("log value function needs log_weight > 0");
      break;
    case PolicyKind::exponential:
      if (!(spec.kappa > 0)) throw ParamMissing("exponential value function needs kappa > 0");
      if (spec.horizon < 1) throw ParamMissing("exponential value function needs horizon >= 1");
      break;
    default:
      break;
  }
  return kp;
}

double raw_value(const ValueFunctionSpec& spec, const KindParams& kp, double s) {
  switch (spec.kind) {
    case PolicyKind::zero:
      return 0.0;
    case PolicyKind::linear:
      return kp.price * s;
    case PolicyKind::log:
      return kp.price * s + spec.log_weight * std::log(s / kp.budget);
    case PolicyKind::exponential: {
      const double z = (kp.budget - s) / kp.budget - spec.progress();
      return kp.price * (-kp.budget / spec.kappa) * std::exp(spec.kappa * z);
    }
  }
  return 0.0;
}

double raw_derivative(const ValueFunctionSpec& spec, const KindParams& kp, double s) {
  switch (spec.kind) {
    case PolicyKind::zero:
      return 0.0;
    case PolicyKind::linear:
      return kp.price;
    case PolicyKind::log:
      return kp.price + spec.log_weight / s;
    case PolicyKind::exponential: {
      const double z = (kp.budget - s) / kp.budget - spec.progress();
      return kp.price * std::exp(spec.kappa * z);
    }
  }
  return 0.0;
}

// Smallest s at which the raw derivative stops exceeding price_cap, clamped
// to [0, b]; below this point v continues linearly with slope price_cap.
double cap_crossing(const ValueFunctionSpec& spec, const KindParams& kp) {
  const double cap = spec.price_cap;
  if (!std::isfinite(cap)) return 0.0;
  switch (spec.kind) {
    case PolicyKind::zero:
      return 0.0;
    case PolicyKind::linear:
      return kp.price > cap ? kp.budget : 0.0;
    case PolicyKind::log: {
      if (kp.price >= cap) return kp.budget;
      const double s = spec.log_weight / (cap - kp.price);
      return std::clamp(s, 0.0, kp.budget);
    }
    case PolicyKind::exponential: {
      if (!(kp.price > 0)) return 0.0;
      if (kp.price >= cap) return kp.budget;
      const double s = kp.budget * (1.0 - spec.progress() - std::log(cap / kp.price) / spec.kappa);
      return std::clamp(s, 0.0, kp.budget);
    }
  }
  return 0.0;
}

double floored(const ValueFunctionSpec& spec, const KindParams& kp, double s) {
  if (spec.kind == PolicyKind::log) return std::max(s, spec.epsilon_floor * kp.budget);
  return s;
}

}  // namespace

double ValueFunctionSpec::progress() const {
  if (horizon <= 0) return 1.0;
  const double q = static_cast<double>(served) / static_cast<double>(horizon);
  return std::clamp(q, 0.0, 1.0);
}

double value(const ValueFunctionSpec& spec, std::int32_t i, double s) {
  if (spec.kind == PolicyKind::zero) return 0.0;
  const KindParams kp = params_for(spec, i);
  const double se = floored(spec, kp, s);
  const double sc = cap_crossing(spec, kp);
  if (se < sc) return raw_value(spec, kp, sc) - spec.price_cap * (sc - se);
  return raw_value(spec, kp, se);
}

double value_derivative(const ValueFunctionSpec& spec, std::int32_t i, double s) {
  if (spec.kind == PolicyKind::zero) return 0.0;
  const KindParams kp = params_for(spec, i);
  const double se = floored(spec, kp, s);
  return std::min(raw_derivative(spec, kp, se), spec.price_cap);
}

double theta(double collected, std::span<const double> remaining, const ValueFunctionSpec& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    total += value(spec, static_cast<std::int32_t>(i), remaining[i]);
  }
  return -collected - total;
}

double theta(const Position& pos, const ValueFunctionSpec& spec) {
  std::vector<double> s(pos.remaining.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = to_currency(pos.remaining[i]);
  return theta(to_currency(pos.collected), s, spec);
}

double penalty_linear(const PenaltyInput& in) {
  double total = 0.0;
  for (std::size_t i = 0; i < in.budget.size(); ++i) {
    const double x = (in.price_estimate[i] - in.expected_price[i]) * in.budget[i];
    if (x > 0) total += x;
  }
  return total;
}

double penalty_log(const PenaltyInput& in, double log_weight) {
  if (!(log_weight > 0)) throw ParamMissing("penalty_log needs log_weight > 0");
  double total = 0.0;
  for (std::size_t i = 0; i < in.budget.size(); ++i) {
    const double x = (in.price_estimate[i] - in.expected_price[i]) * in.budget[i];
    if (x >= -log_weight) {
      total += x;
    } else {
      total += -log_weight + log_weight * std::log(log_weight / -x);
    }
  }
  return total;
}

double penalty_exponential(const PenaltyInput& in, double kappa, std::int64_t served,
                           std::int64_t horizon) {
  if (!(kappa > 0)) throw ParamMissing("penalty_exponential needs kappa > 0");
  if (horizon < 1) throw ParamMissing("penalty_exponential needs horizon >= 1");
  double sum_u = 0.0, sum_v = 0.0;
  std::vector<double> u(in.budget.size()), v(in.budget.size());
  for (std::size_t i = 0; i < in.budget.size(); ++i) {
    u[i] = in.price_estimate[i] * in.budget[i];
    v[i] = in.expected_price[i] * in.budget[i];
    if ((u[i] == 0.0) != (v[i] == 0.0)) {
      throw ZeroWeight("penalty_exponential: weight vanishes on one side only at campaign " +
                       std::to_string(i));
    }
    sum_u += u[i];
    sum_v += v[i];
  }
  if (sum_v == 0.0) return 0.0;  // nothing supported
  // Divergence between the normalized weight vectors, expectation taken
  // under the p*-weights (Appendix-style expansion of the per-campaign
  // optima).
  double kl = 0.0;
  for (std::size_t i = 0; i < in.budget.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double vh = v[i] / sum_v;
    const double uh = u[i] / sum_u;
    kl += vh * std::log(vh / uh);
  }
  const double q = static_cast<double>(served) / static_cast<double>(horizon);
  const double progress = std::clamp(q, 0.0, 1.0);
  return sum_v * (-(1.0 - progress) + (kl - 1.0) / kappa);
}

double penalty_numeric(const ValueFunctionSpec& spec, std::span<const double> expected_price,
                       int grid_resolution) {
  if (grid_resolution < 100) throw std::invalid_argument("penalty_numeric: grid too coarse");
  double total = 0.0;
  const std::size_t n = spec.kind == PolicyKind::zero ? expected_price.size() : spec.budget.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double b = spec.kind == PolicyKind::zero ? 1.0 : spec.budget[i];
    const double p_star = expected_price[i];
    const auto objective = [&](double s) {
      return value(spec, static_cast<std::int32_t>(i), s) - p_star * s;
    };
    // Coarse sweep, then two refinement passes around the best cell.
    double lo = 0.0, hi = b;
    double best_s = 0.0, best = objective(0.0);
    for (int pass = 0; pass < 3; ++pass) {
      const double step = (hi - lo) / grid_resolution;
      if (step <= 0) break;
      for (int k = 0; k <= grid_resolution; ++k) {
        const double s = lo + step * k;
        const double g = objective(s);
        if (g > best) {
          best = g;
          best_s = s;
        }
      }
      lo = std::max(0.0, best_s - step);
      hi = std::min(b, best_s + step);
    }
    total += best;
  }
  return total;
}

}  // namespace adalloc::risk
