#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "adalloc/money.hpp"

namespace adalloc {

// One sparse bid: campaign `campaign` values this impression at `revenue`
// and serving it would consume `cost` of the campaign's budget.
struct BidEntry {
  std::int32_t campaign = 0;
  Money revenue = 0;
  Money cost = 0;

  bool operator==(const BidEntry&) const = default;
};

// One arriving ad request. Campaigns not listed in `entries` implicitly bid
// (revenue=0, cost=0).
struct Impression {
  std::string id;
  std::string user;
  std::vector<BidEntry> entries;

  bool operator==(const Impression&) const = default;
};

struct Campaign {
  std::string id;
  Money budget = 0;  // ignored for the house campaign (unbounded)
  Money spent = 0;
  std::optional<std::int32_t> fcap;
  bool is_house = false;

  Money remaining() const {
    return is_house ? std::numeric_limits<Money>::max() : budget - spent;
  }

  bool operator==(const Campaign&) const = default;
};

// Dense, 0-based campaign table. External string ids are kept in a side
// lookup built at construction.
class CampaignBook {
 public:
  CampaignBook() = default;
  explicit CampaignBook(std::vector<Campaign> campaigns);

  std::int32_t size() const { return static_cast<std::int32_t>(campaigns_.size()); }
  const Campaign& at(std::int32_t i) const { return campaigns_.at(static_cast<std::size_t>(i)); }
  Campaign& at(std::int32_t i) { return campaigns_.at(static_cast<std::size_t>(i)); }
  const std::vector<Campaign>& campaigns() const { return campaigns_; }

  std::optional<std::int32_t> index_of(const std::string& external_id) const;
  std::optional<std::int32_t> house_index() const { return house_; }

 private:
  std::vector<Campaign> campaigns_;
  std::unordered_map<std::string, std::int32_t> by_id_;
  std::optional<std::int32_t> house_;
};

// Allocation state S = (w, s_1..s_N): collected revenue plus remaining
// budgets.
struct Position {
  Money collected = 0;
  std::vector<Money> remaining;
};

// Estimated dual prices, each in [0, price_cap].
struct DualPriceVector {
  std::vector<double> prices;
  double price_cap = std::numeric_limits<double>::infinity();

  double at(std::int32_t i) const { return prices.at(static_cast<std::size_t>(i)); }
};

enum class PolicyKind { zero, linear, log, exponential };

const char* to_string(PolicyKind kind);
std::optional<PolicyKind> policy_kind_from_string(const std::string& name);

// Which update rule the engine runs plus its parameters. `initial_prices`
// carries the price ceiling p_max; ties always break toward the lowest
// campaign index.
struct PolicyConfig {
  PolicyKind kind = PolicyKind::zero;
  DualPriceVector initial_prices;       // p^eps, unused for zero
  double log_weight = 0.0;              // log rule regularizer
  double kappa = 0.0;                   // exponential rule regularizer
  std::int64_t horizon = 1;             // H, expected impressions in the window
  double epsilon_floor = 1e-6;          // log rule floor, relative to b_i

  double price_cap() const { return initial_prices.price_cap; }
};

struct Decision {
  std::string impression_id;
  std::string user;
  std::optional<std::int32_t> chosen;
  double score = 0.0;  // winning adjusted score, 0 when dropped
  Money revenue = 0;
  Money cost = 0;
  // Per-listed-entry effective prices, filled only when auditing is enabled.
  std::optional<std::vector<double>> effective_prices;
};

enum class ValidationIssueKind { IndexOutOfRange, NegativeMoney, DuplicateEntry };

struct ValidationIssue {
  ValidationIssueKind kind;
  std::size_t impression_pos = 0;  // 0-based position in the stream
  std::string detail;
};

// Returns the first violation found, scanning impressions in order, or
// nullopt when the stream is consistent with the book.
std::optional<ValidationIssue> validate_instance(std::span<const Impression> impressions,
                                                 const CampaignBook& book);

}  // namespace adalloc
