#include "adalloc/fcap.hpp"

#include <algorithm>

namespace adalloc::fcap {

std::vector<std::vector<std::int64_t>> partition_bids(std::span<const Impression> sample,
                                                      std::int32_t campaign, int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  std::vector<std::pair<Money, std::int64_t>> bids;  // (bid value, impression index)
  for (std::size_t j = 0; j < sample.size(); ++j) {
    for (const BidEntry& e : sample[j].entries) {
      if (e.campaign == campaign && e.revenue > 0) {
        bids.emplace_back(e.revenue, static_cast<std::int64_t>(j));
      }
    }
  }
  if (bids.empty()) {
    throw NoBids("campaign " + std::to_string(campaign) + " has no non-zero bids in the sample");
  }
  std::vector<Money> sorted_vals;
  sorted_vals.reserve(bids.size());
  for (const auto& [v, j] : bids) sorted_vals.push_back(v);
  std::sort(sorted_vals.begin(), sorted_vals.end());
  // edge k sits at the k/n_bins empirical quantile; bids equal to an edge
  // fall into the lower bin
  std::vector<Money> edges;
  const std::size_t len = sorted_vals.size();
  for (int kq = 1; kq < n_bins; ++kq) {
    std::size_t idx = static_cast<std::size_t>(kq) * len / static_cast<std::size_t>(n_bins);
    if (idx == 0) idx = 1;
    edges.push_back(sorted_vals[idx - 1]);
  }
  std::vector<std::vector<std::int64_t>> bins(static_cast<std::size_t>(n_bins));
  for (const auto& [v, j] : bids) {
    std::size_t bin = 0;
    for (Money e : edges) {
      if (v > e) ++bin;
    }
    bins[bin].push_back(j);
  }
  std::erase_if(bins, [](const auto& b) { return b.empty(); });
  return bins;
}

std::int64_t partition_cap(std::span<const std::int64_t> members,
                           std::span<const Impression> sample, std::int32_t cap) {
  if (cap <= 0) return 0;
  std::unordered_map<std::string, std::int64_t> per_user;
  for (std::int64_t j : members) {
    if (j < 0 || static_cast<std::size_t>(j) >= sample.size()) {
      throw PartitionMismatch("partition references impression " + std::to_string(j) +
                              " outside the sample");
    }
    ++per_user[sample[static_cast<std::size_t>(j)].user];
  }
  std::int64_t total = 0;
  for (const auto& [user, count] : per_user) total += std::min<std::int64_t>(cap, count);
  return total;
}

lp::LpInstance build_fcap_lp(std::span<const Impression> sample, const CampaignBook& book,
                             double epsilon, std::span<const PartitionSet> partitions,
                             lp::BudgetScaling mode) {
  std::vector<double> budgets(static_cast<std::size_t>(book.size()), 0.0);
  for (std::int32_t i = 0; i < book.size(); ++i) {
    const Campaign& c = book.at(i);
    budgets[static_cast<std::size_t>(i)] = c.is_house ? 0.0 : to_currency(c.remaining());
  }
  const std::vector<double> scaled = lp::scale_budgets(budgets, epsilon, mode);
  lp::LpInstance inst = lp::make_instance(sample, book, scaled);
  for (const PartitionSet& ps : partitions) {
    if (ps.campaign < 0 || ps.campaign >= book.size()) {
      throw PartitionMismatch("partition campaign index out of range");
    }
    const Campaign& c = book.at(ps.campaign);
    if (!c.fcap) continue;
    for (const auto& bin : ps.bins) {
      lp::CapRow row;
      row.campaign = ps.campaign;
      row.cap = static_cast<double>(partition_cap(bin, sample, *c.fcap));
      row.members = bin;
      std::sort(row.members.begin(), row.members.end());
      inst.cap_rows.push_back(std::move(row));
    }
  }
  return inst;
}

bool UserCapCounter::allowed(const std::string& user, std::int32_t campaign,
                             std::int32_t cap) const {
  if (cap < 0) return true;
  if (cap == 0) return false;
  auto it = counts_.find(key(user, campaign));
  return it == counts_.end() || it->second < cap;
}

void UserCapCounter::record(const std::string& user, std::int32_t campaign) {
  ++counts_[key(user, campaign)];
}

bool UserCapCounter::check_and_count(const std::string& user, std::int32_t campaign,
                                     std::int32_t cap) {
  if (!allowed(user, campaign, cap)) return false;
  record(user, campaign);
  return true;
}

std::int32_t UserCapCounter::count(const std::string& user, std::int32_t campaign) const {
  auto it = counts_.find(key(user, campaign));
  return it == counts_.end() ? 0 : it->second;
}

}  // namespace adalloc::fcap
