#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "adalloc/lp.hpp"
#include "adalloc/model.hpp"

namespace adalloc::fcap {

struct NoBids : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct PartitionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Quantile partition of one campaign's non-zero-bid impressions in a
// sample window.
struct PartitionSet {
  std::int32_t campaign = 0;
  std::vector<std::vector<std::int64_t>> bins;  // impression indices
};

// Splits the campaign's non-zero-bid impressions into n_bins quantile bins
// by bid value. Bin edges sit at empirical quantiles; impressions whose
// bid equals an edge go to the lower bin; empty bins are dropped. Raises
// NoBids when the campaign never bids in the sample.
std::vector<std::vector<std::int64_t>> partition_bids(std::span<const Impression> sample,
                                                      std::int32_t campaign, int n_bins);

// f(i, P): the largest subset of P servable to campaign i without any user
// exceeding cap; one pass, sum over users of min(cap, multiplicity).
std::int64_t partition_cap(std::span<const std::int64_t> members,
                           std::span<const Impression> sample, std::int32_t cap);

// Sample LP augmented with one row per (campaign, bin): sum_{j in P} x_ji
// <= f(i, P). Campaigns without a cap contribute no rows.
lp::LpInstance build_fcap_lp(std::span<const Impression> sample, const CampaignBook& book,
                             double epsilon, std::span<const PartitionSet> partitions,
                             lp::BudgetScaling mode = lp::BudgetScaling::conservative);

// Per-(user, campaign) serve counts for exact cap enforcement in the
// serving window.
class UserCapCounter {
 public:
  // True iff the pair is still under cap (cap < 0 means uncapped).
  bool allowed(const std::string& user, std::int32_t campaign, std::int32_t cap) const;
  void record(const std::string& user, std::int32_t campaign);
  // allowed() + record() in one step; returns whether the serve was taken.
  bool check_and_count(const std::string& user, std::int32_t campaign, std::int32_t cap);

  std::int32_t count(const std::string& user, std::int32_t campaign) const;
  std::size_t size() const { return counts_.size(); }

 private:
  static std::string key(const std::string& user, std::int32_t campaign) {
    return user + '\x1f' + std::to_string(campaign);
  }
  std::unordered_map<std::string, std::int32_t> counts_;
};

}  // namespace adalloc::fcap
