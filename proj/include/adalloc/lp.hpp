#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adalloc/model.hpp"

namespace adalloc::lp {

// One bid option of an LP impression, in currency units.
struct LpBid {
  std::int32_t campaign = 0;
  double revenue = 0.0;
  double cost = 0.0;
};

// Extra packing row sum_{j in members} x_{ji} <= cap for one campaign
// (partition frequency caps).
struct CapRow {
  std::int32_t campaign = 0;
  double cap = 0.0;
  std::vector<std::int64_t> members;  // impression indices, strictly increasing
};

// The offline/sample packing LP: maximize total revenue subject to budget
// rows, at-most-one rows per impression, and optional cap rows. Campaigns
// with bounded[i] == false (the house campaign) contribute no budget row.
struct LpInstance {
  std::int32_t n_campaigns = 0;
  std::vector<double> budgets;  // scaled budgets, currency units
  std::vector<char> bounded;
  std::vector<std::vector<LpBid>> impressions;
  std::vector<CapRow> cap_rows;
};

struct PrimalDualSolution {
  // Nonzero assignment per impression: (campaign, fraction).
  std::vector<std::vector<std::pair<std::int32_t, double>>> x;
  std::vector<double> p;          // campaign budget duals (0 for unbounded)
  std::vector<double> p_hat;      // per-impression duals
  std::vector<double> cap_duals;  // aligned with LpInstance::cap_rows
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  std::int64_t iterations = 0;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IterationLimit : SolverError {
  using SolverError::SolverError;
};
struct EpsilonOutOfRange : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptySample : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class BudgetScaling {
  conservative,  // eps * (1 - eps) * b, the sample-LP default
  proportional,  // eps * b, used where prefix sizes must stay comparable
};

// b_i^eps = eps * (1 - eps) * b_i componentwise; eps must lie in (0, 1).
std::vector<double> scale_budgets(std::span<const double> budgets, double epsilon);

std::vector<double> scale_budgets(std::span<const double> budgets, double epsilon,
                                  BudgetScaling mode);

// Builds the sample LP from a stream window; budgets are passed already
// scaled, in currency units.
LpInstance make_instance(std::span<const Impression> sample, const CampaignBook& book,
                         std::span<const double> scaled_budgets);

// Deterministic primal simplex with Bland ordering; impression rows are
// kept implicit so the working basis spans only budget and cap rows. The
// returned pair satisfies primal/dual feasibility and complementary
// slackness within tol.
PrimalDualSolution solve_lp(const LpInstance& instance, double tol);

// Price ceiling heuristic: 10x the largest observed revenue/cost ratio in
// the sample (1.0 when no entry has positive cost).
double default_price_cap(std::span<const Impression> sample);

// Scales budgets, solves the sample LP, and returns campaign duals clamped
// to [0, p_max].
DualPriceVector estimate_initial_duals(std::span<const Impression> sample,
                                       const CampaignBook& book, double epsilon, double tol,
                                       BudgetScaling mode = BudgetScaling::conservative,
                                       std::optional<double> price_cap = std::nullopt);

// argmax_i { r_ji - a_ji p_i } over listed entries and its value; nullopt
// with value 0 when the best is <= 0.
std::pair<std::optional<std::int32_t>, double> reduced_price(const Impression& imp,
                                                             const DualPriceVector& prices);

// gamma = max over listed (j, i) of a_ji / b_i, house campaign excluded.
double bid_budget_ratio(std::span<const Impression> sample, const CampaignBook& book);

// Fractional LP optimum of the full stream against remaining budgets, in
// currency units. Experiment upper-bound oracle only.
double offline_optimum(std::span<const Impression> stream, const CampaignBook& book, double tol);

// Plain-text one-constraint-per-line listing for debugging.
std::string dump_instance(const LpInstance& instance);

}  // namespace adalloc::lp
