#include "adalloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace adalloc {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::pair<std::vector<Impression>, CampaignBook> synth_generate(const SynthSpec& spec,
                                                                std::uint64_t seed) {
  if (spec.n_campaigns < 1 || spec.n_impressions < 0) {
    throw std::invalid_argument("synth spec needs >= 1 campaign and >= 0 impressions");
  }
  Rng rng(seed);
  const std::int32_t n = spec.n_campaigns;
  const std::int64_t m = spec.n_impressions;
  const std::int32_t users = spec.n_users > 0 ? spec.n_users
                                              : std::max<std::int32_t>(1, static_cast<std::int32_t>(m / 10));

  // per-campaign interest weight (mild zipf), value scale, drift phase
  std::vector<double> weight(static_cast<std::size_t>(n));
  std::vector<double> scale(static_cast<std::size_t>(n));
  std::vector<double> phase(static_cast<std::size_t>(n));
  double weight_sum = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    weight[static_cast<std::size_t>(i)] = std::pow(static_cast<double>(i + 1), -0.3);
    scale[static_cast<std::size_t>(i)] = spec.base_value * std::exp(0.5 * rng.normal());
    phase[static_cast<std::size_t>(i)] = rng.uniform();
    weight_sum += weight[static_cast<std::size_t>(i)];
  }
  // bid probability per campaign, normalized so the mean bidder fraction
  // matches the sparsity target
  std::vector<double> base_prob(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) {
    base_prob[static_cast<std::size_t>(i)] =
        std::min(1.0, spec.sparsity * n * weight[static_cast<std::size_t>(i)] / weight_sum);
  }

  std::vector<Impression> stream;
  stream.reserve(static_cast<std::size_t>(m));
  // expected cost volume per campaign, accumulated to size budgets
  std::vector<double> cost_volume(static_cast<std::size_t>(n), 0.0);
  const double cost_lo = 0.7, cost_hi = 1.3;

  for (std::int64_t t = 0; t < m; ++t) {
    Impression imp;
    imp.id = "i" + std::to_string(t);
    imp.user = "u" + std::to_string(rng.uniform_int(static_cast<std::uint64_t>(users)));
    const double progress = m > 1 ? static_cast<double>(t) / static_cast<double>(m - 1) : 0.0;
    for (std::int32_t i = 0; i < n; ++i) {
      double prob = base_prob[static_cast<std::size_t>(i)];
      if (spec.drift > 0.0) {
        const double swing =
            std::sin(2.0 * std::numbers::pi * (progress + phase[static_cast<std::size_t>(i)]));
        prob = std::clamp(prob * (1.0 + spec.drift * swing), 0.0, 1.0);
      }
      if (!rng.bernoulli(prob)) continue;
      const double value =
          scale[static_cast<std::size_t>(i)] * std::exp(spec.value_sigma * rng.normal());
      const double cost = value * rng.uniform(cost_lo, cost_hi);
      BidEntry e;
      e.campaign = i;
      e.revenue = std::max<Money>(1, money_from_currency(value));
      e.cost = std::max<Money>(1, money_from_currency(cost));
      imp.entries.push_back(e);
      cost_volume[static_cast<std::size_t>(i)] += to_currency(e.cost);
    }
    stream.push_back(std::move(imp));
  }

  // budgets: a tightness fraction of the campaign's equal-share spend;
  // equal share assumes each impression goes to one of its mean bidders
  const double mean_bidders = std::max(1.0, spec.sparsity * n);
  std::vector<Campaign> campaigns;
  campaigns.reserve(static_cast<std::size_t>(n) + (spec.house ? 1 : 0));
  for (std::int32_t i = 0; i < n; ++i) {
    Campaign c;
    c.id = "c" + std::to_string(i);
    const double tightness =
        spec.budget_tightness *
        (1.0 + spec.budget_spread * (2.0 * rng.uniform() - 1.0));
    const double b = std::max(1e-6, cost_volume[static_cast<std::size_t>(i)] / mean_bidders *
                                        std::max(0.01, tightness));
    c.budget = std::max<Money>(1, money_from_currency(b));
    if (spec.fcap_rate > 0.0 && rng.bernoulli(spec.fcap_rate)) {
      c.fcap = spec.fcap_min +
               static_cast<std::int32_t>(rng.uniform_int(
                   static_cast<std::uint64_t>(std::max(1, spec.fcap_max - spec.fcap_min + 1))));
    }
    campaigns.push_back(std::move(c));
  }
  if (spec.house) {
    Campaign h;
    h.id = "house";
    h.is_house = true;
    campaigns.push_back(std::move(h));
    const std::int32_t house_idx = n;
    const Money house_r = std::max<Money>(1, money_from_currency(spec.base_value * 1e-3));
    for (Impression& imp : stream) {
      imp.entries.push_back({house_idx, house_r, 0});
    }
  }
  return {std::move(stream), CampaignBook(std::move(campaigns))};
}

}  // namespace adalloc
