#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "adalloc/model.hpp"

namespace adalloc {

// Deterministic generator state (splitmix64 core). Distributions are
// hand-rolled so that streams are bit-identical for a given seed on any
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t uniform_int(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }
  bool bernoulli(double p) { return uniform() < p; }
  double normal();  // Box-Muller, one sample per call

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Synthetic stream shaped like sparse display-ad logs: most campaigns skip
// most impressions, bid values are lognormal around a per-campaign scale,
// and budgets cover only a fraction of each campaign's reachable spend.
struct SynthSpec {
  std::int32_t n_campaigns = 50;
  std::int64_t n_impressions = 40000;
  std::int32_t n_users = 0;      // 0 -> n_impressions / 10
  double sparsity = 0.3;         // mean fraction of campaigns bidding per impression
  double drift = 0.0;            // 0 = stationary; 1 = strong interest shift over time
  double budget_tightness = 0.35;  // budgets as a fraction of equal-share demand
  double budget_spread = 0.5;    // relative spread of tightness across campaigns
  double value_sigma = 0.6;      // lognormal sigma of bid values
  double base_value = 0.05;      // currency scale of bids
  bool house = false;            // append an unbounded house campaign
  double fcap_rate = 0.0;        // fraction of campaigns carrying a frequency cap
  std::int32_t fcap_min = 1;
  std::int32_t fcap_max = 4;
};

std::pair<std::vector<Impression>, CampaignBook> synth_generate(const SynthSpec& spec,
                                                                std::uint64_t seed);

}  // namespace adalloc
