#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "adalloc/model.hpp"

namespace adalloc::risk {

// Budget value function family. All quantities are in currency units
// (doubles); `served`/`horizon` give the h/H progress ratio used by the
// exponential kind, clamped to [0, 1].
//
// The price ceiling caps the slope of every kind: wherever the raw
// derivative would exceed `price_cap`, the value function continues as the
// straight line of slope `price_cap` and the reported derivative is capped.
// For the log kind, evaluation additionally floors s at
// epsilon_floor * budget, which keeps v finite at s = 0 (the reported
// derivative below the floor is the floored-formula value, not the zero
// slope of the flattened curve).
struct ValueFunctionSpec {
  PolicyKind kind = PolicyKind::zero;
  std::vector<double> price_estimate;  // p^eps per campaign
  std::vector<double> budget;          // b_i per campaign
  double log_weight = 0.0;
  double kappa = 0.0;
  std::int64_t served = 0;    // h
  std::int64_t horizon = 1;   // H >= 1
  double epsilon_floor = 1e-6;
  double price_cap = std::numeric_limits<double>::infinity();

  double progress() const;  // clamp(h / H, 0, 1)
};

struct ParamMissing : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ZeroWeight : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

double value(const ValueFunctionSpec& spec, std::int32_t i, double s);
double value_derivative(const ValueFunctionSpec& spec, std::int32_t i, double s);

// theta(S) = -w - sum_i v_i(s_i); equals the risk measure on positional
// returns.
double theta(double collected, std::span<const double> remaining, const ValueFunctionSpec& spec);
double theta(const Position& pos, const ValueFunctionSpec& spec);

// Inputs for the probability penalty closed forms. `price_estimate` is
// p^eps, `expected_price` is p* = E_Q[p].
struct PenaltyInput {
  std::vector<double> price_estimate;
  std::vector<double> expected_price;
  std::vector<double> budget;
};

// sum_i (p^eps_i b_i - p*_i b_i)_+
double penalty_linear(const PenaltyInput& in);

// sum_i |p^eps_i b_i - p*_i b_i|_lam with |x|_lam = x for x >= -lam and
// -lam + lam*log(lam / -x) below.
double penalty_log(const PenaltyInput& in, double log_weight);

// (sum_i p*_i b_i) * (-(1 - h/H) + (KL - 1) / kappa) where KL is the
// divergence sum_i vhat_i log(vhat_i / uhat_i) over the normalized weight
// vectors uhat = p^eps.b / |p^eps.b| and vhat = p*.b / |p*.b|. Valid when
// both weight vectors are normalized; components where both weights vanish
// are dropped, mixed zeros raise ZeroWeight.
double penalty_exponential(const PenaltyInput& in, double kappa, std::int64_t served,
                           std::int64_t horizon);

// Independent oracle: maximizes sum_i (v_i(s_i) - p*_i s_i) by per-campaign
// 1-D grid search over [0, b_i] with local refinement. grid_resolution is
// the number of cells per sweep (>= 100).
double penalty_numeric(const ValueFunctionSpec& spec, std::span<const double> expected_price,
                       int grid_resolution);

}  // namespace adalloc::risk
