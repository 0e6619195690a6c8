#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adalloc/engine.hpp"
#include "adalloc/lp.hpp"
#include "adalloc/model.hpp"
#include "adalloc/synth.hpp"

namespace adalloc::harness {

// Two-phase (or rolling) experiment description. Exactly one input source:
// file paths or a synthetic spec. A fixed seed makes every output byte
// reproducible.
struct ExperimentConfig {
  std::optional<std::filesystem::path> impressions_path;
  std::optional<std::filesystem::path> campaigns_path;
  std::optional<SynthSpec> synth;

  double delta = 0.05;                  // T1 sampling rate in (0, 1]
  std::optional<double> epsilon;        // budget scaling; defaults to delta
  lp::BudgetScaling scaling = lp::BudgetScaling::conservative;
  std::vector<PolicyKind> policies{PolicyKind::zero, PolicyKind::linear, PolicyKind::log,
                                   PolicyKind::exponential};
  bool reverse_stream = false;
  std::int32_t rolling_periods = 0;     // >= 2 enables the rolling scheme
  bool fcap_mode = false;
  int n_bins = 10;
  std::uint64_t seed = 0;

  std::optional<double> log_weight;     // defaults from the estimated duals
  std::optional<double> kappa;          // default 1.0
  std::optional<double> price_cap;      // default 10x max r/a in the sample
  std::optional<std::int64_t> horizon;  // default |T2|
  std::optional<Money> oob_threshold;   // absolute override of the oob rule

  double split_fraction = 0.5;          // |T1| / |stream|
  int series_points = 50;
  double tol = 1e-9;
  bool include_lp_bound = false;
  std::optional<std::filesystem::path> output_dir;
};

struct SeriesPoint {
  std::int64_t step = 0;
  Money cum_revenue = 0;
  std::int32_t oob = 0;
};

struct PolicyResult {
  PolicyKind kind = PolicyKind::zero;
  Money total_revenue = 0;
  double improvement_over_greedy = 0.0;  // rev / rev_greedy - 1
  std::int32_t mid_flight_oob = 0;
  std::int32_t final_oob = 0;
  std::int64_t decisions = 0;
  std::int64_t allocated = 0;
  std::vector<SeriesPoint> series;
  std::vector<Decision> log;
};

struct Report {
  std::uint64_t seed = 0;
  std::int64_t t1_size = 0;
  std::int64_t t2_size = 0;
  std::int64_t sample_size = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  DualPriceVector duals;
  std::vector<PolicyResult> policies;
  std::optional<double> lp_bound;  // currency units
  bool partial = false;            // set when a failure interrupted the run
};

// Minimum nonzero cost seen per campaign in the learning window; a campaign
// is out of budget once its remaining budget falls below this. `override_abs`
// replaces the per-campaign rule with one absolute threshold.
std::vector<Money> oob_thresholds(std::span<const Impression> learning, const CampaignBook& book,
                                  std::optional<Money> override_abs);

// Replays decision logs against the initial book and fills revenue, oob and
// series columns; improvement is computed against the zero policy when
// present.
std::vector<PolicyResult> compute_metrics(
    std::vector<std::pair<PolicyKind, std::vector<Decision>>> logs, const CampaignBook& book,
    std::span<const Money> thresholds, std::span<const std::int64_t> checkpoints);

Report run_experiment(const ExperimentConfig& config);

// Figure-5-style study: permute the stream with the seed, then solve the
// sample LP on each prefix with budgets scaled by prefix/stream size.
struct StabilityResult {
  std::vector<std::int64_t> sizes;
  std::vector<std::vector<double>> duals;               // [size][campaign]
  std::vector<std::vector<std::int64_t>> bid_counts;    // [size][campaign]
};

StabilityResult dual_stability_study(std::span<const Impression> stream,
                                     const CampaignBook& book,
                                     std::span<const std::int64_t> sizes, std::uint64_t seed,
                                     double tol = 1e-9);

// Mean over campaigns of |dual@sizes[b] - dual@sizes[a]|.
double mean_abs_dual_change(const StabilityResult& result, std::size_t a, std::size_t b);

std::string report_to_json(const Report& report, const ExperimentConfig& config);
void write_report(const std::filesystem::path& dir, const Report& report,
                  const ExperimentConfig& config);
void write_series_csv(const std::filesystem::path& path, const Report& report);
void write_decision_log(const std::filesystem::path& path, std::span<const Decision> log,
                        const CampaignBook& book);
void write_stability_csv(const std::filesystem::path& path, const StabilityResult& result,
                         const CampaignBook& book);

}  // namespace adalloc::harness
