#include "adalloc/model.hpp"

#include <unordered_set>

namespace adalloc {

CampaignBook::CampaignBook(std::vector<Campaign> campaigns) : campaigns_(std::move(campaigns)) {
  by_id_.reserve(campaigns_.size());
  for (std::size_t i = 0; i < campaigns_.size(); ++i) {
    const Campaign& c = campaigns_[i];
    if (!by_id_.emplace(c.id, static_cast<std::int32_t>(i)).second) {
      throw std::invalid_argument("duplicate campaign id: " + c.id);
    }
    if (!c.is_house) {
      if (c.budget <= 0) throw std::invalid_argument("campaign " + c.id + ": budget must be > 0");
      if (c.spent < 0 || c.spent > c.budget) {
        throw std::invalid_argument("campaign " + c.id + ": spent outside [0, budget]");
      }
    } else {
      if (house_) throw std::invalid_argument("more than one house campaign");
      if (c.fcap) throw std::invalid_argument("house campaign cannot carry a frequency cap");
      house_ = static_cast<std::int32_t>(i);
    }
    if (c.fcap && *c.fcap < 0) {
      throw std::invalid_argument("campaign " + c.id + ": negative frequency cap");
    }
  }
}

std::optional<std::int32_t> CampaignBook::index_of(const std::string& external_id) const {
  auto it = by_id_.find(external_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::zero: return "zero";
    case PolicyKind::linear: return "linear";
    case PolicyKind::log: return "log";
    case PolicyKind::exponential: return "exponential";
  }
  return "?";
}

std::optional<PolicyKind> policy_kind_from_string(const std::string& name) {
  if (name == "zero" || name == "greedy") return PolicyKind::zero;
  if (name == "linear" || name == "fixed" || name == "fixed-dual") return PolicyKind::linear;
  if (name == "log") return PolicyKind::log;
  if (name == "exponential" || name == "exp") return PolicyKind::exponential;
  return std::nullopt;
}

std::optional<ValidationIssue> validate_instance(std::span<const Impression> impressions,
                                                 const CampaignBook& book) {
  const std::int32_t n = book.size();
  std::unordered_set<std::int32_t> seen;
  for (std::size_t pos = 0; pos < impressions.size(); ++pos) {
    const Impression& imp = impressions[pos];
    seen.clear();
    for (const BidEntry& e : imp.entries) {
      if (e.campaign < 0 || e.campaign >= n) {
        return ValidationIssue{ValidationIssueKind::IndexOutOfRange, pos,
                               "impression " + imp.id + ": campaign index " +
                                   std::to_string(e.campaign) + " outside [0, " +
                                   std::to_string(n) + ")"};
      }
      if (e.revenue < 0 || e.cost < 0) {
        return ValidationIssue{ValidationIssueKind::NegativeMoney, pos,
                               "impression " + imp.id + ": negative revenue or cost for campaign " +
                                   std::to_string(e.campaign)};
      }
      if (!seen.insert(e.campaign).second) {
        return ValidationIssue{ValidationIssueKind::DuplicateEntry, pos,
                               "impression " + imp.id + ": campaign " +
                                   std::to_string(e.campaign) + " listed twice"};
      }
    }
  }
  return std::nullopt;
}

}  // namespace adalloc
