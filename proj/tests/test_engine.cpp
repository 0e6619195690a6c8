#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>

#include "adalloc/engine.hpp"
#include "test_helpers.hpp"

using namespace adalloc;
using namespace adalloc::engine;
using testing::make_impression;
using testing::simple_book;

namespace {

PolicyConfig policy_of(PolicyKind kind, std::vector<double> prices, double cap = 1e9,
                       double log_weight = 0.0, double kappa = 0.0, std::int64_t horizon = 1) {
  PolicyConfig p;
  p.kind = kind;
  p.initial_prices.prices = std::move(prices);
  p.initial_prices.price_cap = cap;
  p.log_weight = log_weight;
  p.kappa = kappa;
  p.horizon = horizon;
  return p;
}

// Standalone greedy reference: max revenue among budget-feasible entries,
// ties to the lowest campaign index, drop when nothing has revenue > 0.
std::optional<std::int32_t> greedy_oracle(const std::vector<Money>& remaining,
                                          const Impression& imp) {
  std::optional<std::int32_t> best;
  Money best_r = 0;
  for (const BidEntry& e : imp.entries) {
    if (e.cost > remaining[static_cast<std::size_t>(e.campaign)]) continue;
    if (e.revenue > best_r || (best && e.revenue == best_r && e.campaign < *best)) {
      best = e.campaign;
      best_r = e.revenue;
    }
  }
  if (best_r <= 0) return std::nullopt;
  return best;
}

}  // namespace

TEST_CASE("decide follows the closed-form rules") {
  SUBCASE("greedy takes the max revenue") {
    auto st = make_state(simple_book({9'000'000, 9'000'000}),
                         policy_of(PolicyKind::zero, {0.0, 0.0}));
    const auto imp = make_impression("i", "u", {{0, 3'000'000, 1'000'000},
                                                {1, 5'000'000, 1'000'000}});
    const Decision d = decide(st, imp);
    CHECK(d.chosen == 1);
    CHECK(d.score == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("linear discounts by fixed duals") {
    auto st = make_state(simple_book({100'000'000, 100'000'000}),
                         policy_of(PolicyKind::linear, {0.5, 1.0}));
    const auto imp = make_impression("i", "u", {{0, 3'000'000, 2'000'000},
                                                {1, 5'000'000, 4'000'000}});
    const Decision d = decide(st, imp);
    CHECK(d.chosen == 0);  // scores (2, 1)
    CHECK(d.score == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("log rule scores at the post-allocation budget and drops at zero") {
    // the worked setup lands both scores exactly at 0: no allocation
    auto st = make_state(simple_book({3'000'000, 8'000'000}),
                         policy_of(PolicyKind::log, {0.5, 1.0}, 1e9, 1.0));
    const auto imp = make_impression("i", "u", {{0, 3'000'000, 2'000'000},
                                                {1, 5'000'000, 4'000'000}});
    const Decision d = decide(st, imp);
    CHECK(!d.chosen);
    CHECK(d.score == 0.0);
    // shifting both revenues up by the same amount keeps the tie but makes
    // it positive: lowest index wins
    const auto imp2 = make_impression("i", "u", {{0, 3'200'000, 2'000'000},
                                                 {1, 5'200'000, 4'000'000}});
    const Decision d2 = decide(st, imp2);
    CHECK(d2.chosen == 0);
    CHECK(d2.score == doctest::Approx(0.2).epsilon(1e-9));
  }
  SUBCASE("exponential rule matches the derivative price") {
    auto st = make_state(simple_book({10'000'000}),
                         policy_of(PolicyKind::exponential, {1.0}, 1e9, 0.0, 2.0, 2));
    st.served = 1;
    st.value_spec.served = 1;
    // spend so that the post-allocation exhausted fraction is 0.6
    st.book.at(0).spent = 4'000'000;
    st.position.remaining[0] = 6'000'000;
    const auto imp = make_impression("i", "u", {{0, 5'000'000, 2'000'000}});
    const Decision d = decide(st, imp);
    REQUIRE(d.chosen == 0);
    const double price = std::exp(2.0 * (0.6 - 0.5));
    CHECK(d.score == doctest::Approx(5.0 - price * 2.0).epsilon(1e-12));
  }
  SUBCASE("infeasible entries are skipped") {
    auto st = make_state(simple_book({1'000'000}), policy_of(PolicyKind::zero, {0.0}));
    const auto imp = make_impression("i", "u", {{0, 9'000'000, 2'000'000}});
    CHECK(!decide(st, imp).chosen);
  }
  SUBCASE("house campaign absorbs otherwise dropped impressions") {
    CampaignBook book({{.id = "c0", .budget = 1'000'000}, {.id = "h", .is_house = true}});
    auto st = make_state(book, policy_of(PolicyKind::linear, {5.0, 0.0}));
    const auto imp = make_impression("i", "u", {{0, 1'000'000, 1'000'000}, {1, 50, 0}});
    const Decision d = decide(st, imp);  // campaign 0 scores 1 - 5 < 0
    CHECK(d.chosen == 1);
    CHECK(d.revenue == 50);
  }
}

TEST_CASE("effective_price") {
  SUBCASE("zero kind is always 0") {
    auto st = make_state(simple_book({5'000'000}), policy_of(PolicyKind::zero, {3.0}));
    CHECK(effective_price(st, 0) == 0.0);
  }
  SUBCASE("log kind matches the derivative at the current remaining budget") {
    auto st = make_state(simple_book({10'000'000}),
                         policy_of(PolicyKind::log, {0.5}, 1e9, 1.0));
    st.book.at(0).spent = 8'000'000;
    st.position.remaining[0] = 2'000'000;
    CHECK(effective_price(st, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(effective_price(st, 0) ==
          doctest::Approx(risk::value_derivative(st.value_spec, 0, 2.0)).epsilon(1e-15));
  }
  SUBCASE("exponential kind matches the derivative") {
    auto st = make_state(simple_book({10'000'000}),
                         policy_of(PolicyKind::exponential, {1.0}, 1e9, 0.0, 2.0, 2));
    st.served = 1;
    st.value_spec.served = 1;
    st.book.at(0).spent = 6'000'000;
    st.position.remaining[0] = 4'000'000;
    CHECK(effective_price(st, 0) == doctest::Approx(1.2214027581601698).epsilon(1e-12));
  }
  SUBCASE("exhausted campaigns are rejected") {
    auto st = make_state(simple_book({1'000'000}), policy_of(PolicyKind::linear, {1.0}));
    st.book.at(0).spent = 1'000'000;
    st.position.remaining[0] = 0;
    CHECK_THROWS_AS(effective_price(st, 0), Exhausted);
  }
}

TEST_CASE("apply updates the position and guards misuse") {
  auto st = make_state(simple_book({5'000'000}), policy_of(PolicyKind::zero, {0.0}));
  SUBCASE("drop only advances h") {
    Decision none;
    apply(st, none);
    CHECK(st.served == 1);
    CHECK(st.position.collected == 0);
    CHECK(st.position.remaining[0] == 5'000'000);
  }
  SUBCASE("accepted decision moves w and s") {
    Decision d;
    d.chosen = 0;
    d.revenue = 5'000'000;
    d.cost = 4'000'000;
    apply(st, d);
    CHECK(st.served == 1);
    CHECK(st.position.collected == 5'000'000);
    CHECK(st.position.remaining[0] == 1'000'000);
    CHECK(st.book.at(0).spent == 4'000'000);
  }
  SUBCASE("stale decisions throw") {
    Decision d;
    d.chosen = 0;
    d.revenue = 1;
    d.cost = 6'000'000;
    CHECK_THROWS_AS(apply(st, d), StaleDecision);
  }
}

TEST_CASE("run_stream") {
  SUBCASE("empty stream leaves the state unchanged") {
    auto st = make_state(simple_book({1'000'000}), policy_of(PolicyKind::zero, {0.0}));
    const auto log = run_stream(st, {});
    CHECK(log.empty());
    CHECK(st.served == 0);
  }
  SUBCASE("revenue equals the sum of accepted entries, recomputed from the log") {
    Rng rng(2024);
    auto [stream, book] = testing::random_instance(rng, 300, 6, 0.4);
    auto st = make_state(book, policy_of(PolicyKind::zero, std::vector<double>(6, 0.0)));
    const auto log = run_stream(st, stream);
    Money total = 0;
    for (const Decision& d : log) {
      if (d.chosen) total += d.revenue;
    }
    CHECK(total == st.position.collected);
    CHECK(st.served == 300);
  }
  SUBCASE("single-bidder full-exhaustion stream drains every budget") {
    // each impression bid by exactly one campaign with a = r and budgets
    // equal to each campaign's total bids: everything allocates
    std::vector<Impression> stream;
    std::vector<Money> totals(3, 0);
    Rng rng(77);
    for (int j = 0; j < 60; ++j) {
      const std::int32_t i = static_cast<std::int32_t>(rng.uniform_int(3));
      const Money r = 1 + static_cast<Money>(rng.uniform_int(1'000'000));
      stream.push_back(make_impression("i" + std::to_string(j), "u", {{i, r, r}}));
      totals[static_cast<std::size_t>(i)] += r;
    }
    auto st = make_state(simple_book(totals), policy_of(PolicyKind::zero, {0, 0, 0}));
    const auto log = run_stream(st, stream);
    for (const Decision& d : log) CHECK(d.chosen);
    for (std::int32_t i = 0; i < 3; ++i) {
      CHECK(st.book.at(i).spent == st.book.at(i).budget);
      CHECK(st.position.remaining[static_cast<std::size_t>(i)] == 0);
    }
  }
  SUBCASE("hook sees every step") {
    Rng rng(3);
    auto [stream, book] = testing::random_instance(rng, 50, 3, 0.5);
    auto st = make_state(book, policy_of(PolicyKind::zero, std::vector<double>(3, 0.0)));
    std::int64_t calls = 0;
    const StepHook hook = [&](std::int64_t h, const Decision&, const EngineState& s) {
      ++calls;
      CHECK(h == calls);
      CHECK(s.served == h);
    };
    run_stream(st, stream, hook);
    CHECK(calls == 50);
  }
}

TEST_CASE("zero-kind engine equals the standalone greedy oracle") {
  Rng rng(909);
  for (int trial = 0; trial < 120; ++trial) {
    auto [stream, book] = testing::random_instance(rng, 80, 5, 0.5);
    auto st = make_state(book, policy_of(PolicyKind::zero, std::vector<double>(5, 0.0)));
    std::vector<Money> remaining;
    for (std::int32_t i = 0; i < book.size(); ++i) remaining.push_back(book.at(i).remaining());
    for (const Impression& imp : stream) {
      const auto expected = greedy_oracle(remaining, imp);
      const Decision d = decide(st, imp);
      CHECK(d.chosen == expected);
      apply(st, d);
      if (d.chosen) remaining[static_cast<std::size_t>(*d.chosen)] -= d.cost;
    }
  }
}

TEST_CASE("budget feasibility is exact under every policy") {
  Rng rng(4321);
  for (PolicyKind kind : {PolicyKind::zero, PolicyKind::linear, PolicyKind::log,
                          PolicyKind::exponential}) {
    auto [stream, book] = testing::random_instance(rng, 400, 6, 0.5);
    std::vector<double> prices;
    for (int i = 0; i < 6; ++i) prices.push_back(rng.uniform(0.0, 2.0));
    auto st = make_state(book, policy_of(kind, prices, 1e9, 0.05, 1.5, 400));
    run_stream(st, stream);
    for (std::int32_t i = 0; i < book.size(); ++i) {
      CHECK(st.book.at(i).spent >= 0);
      CHECK(st.book.at(i).spent <= st.book.at(i).budget);
    }
  }
}

TEST_CASE("replay confirms rule-score optimality of every decision") {
  Rng rng(5150);
  auto [stream, book] = testing::random_instance(rng, 250, 5, 0.5);
  std::vector<double> prices;
  for (int i = 0; i < 5; ++i) prices.push_back(rng.uniform(0.0, 1.5));
  for (PolicyKind kind : {PolicyKind::linear, PolicyKind::log, PolicyKind::exponential}) {
    auto st = make_state(book, policy_of(kind, prices, 1e9, 0.08, 2.0, 250));
    st.audit_prices = true;
    std::vector<Money> remaining;
    for (std::int32_t i = 0; i < book.size(); ++i) remaining.push_back(book.at(i).remaining());
    for (const Impression& imp : stream) {
      const Decision d = decide(st, imp);
      REQUIRE(d.effective_prices);
      // recompute every feasible score from the audit prices
      double best = 0.0;
      for (std::size_t e = 0; e < imp.entries.size(); ++e) {
        const BidEntry& bid = imp.entries[e];
        if (bid.cost > remaining[static_cast<std::size_t>(bid.campaign)]) continue;
        const double score =
            to_currency(bid.revenue) - (*d.effective_prices)[e] * to_currency(bid.cost);
        best = std::max(best, score);
      }
      if (d.chosen) {
        CHECK(d.score == doctest::Approx(best).epsilon(1e-12));
      } else {
        CHECK(best <= 1e-12);
      }
      apply(st, d);
      if (d.chosen) remaining[static_cast<std::size_t>(*d.chosen)] -= d.cost;
    }
  }
}

TEST_CASE("linear-kind decisions maximize the risk objective over integral choices") {
  Rng rng(66);
  auto [stream, book] = testing::random_instance(rng, 200, 4, 0.5);
  std::vector<double> prices;
  for (int i = 0; i < 4; ++i) prices.push_back(rng.uniform(0.0, 1.5));
  auto st = make_state(book, policy_of(PolicyKind::linear, prices, 1e9));
  for (const Impression& imp : stream) {
    const Decision d = decide(st, imp);
    // evaluate the allocation objective for every integral choice
    const auto objective = [&](std::optional<std::int32_t> choice) {
      double total = 0.0;
      for (std::int32_t i = 0; i < st.book.size(); ++i) {
        double s = to_currency(st.position.remaining[static_cast<std::size_t>(i)]);
        Money r = 0;
        if (choice && *choice == i) {
          for (const BidEntry& e : imp.entries) {
            if (e.campaign == i) {
              s -= to_currency(e.cost);
              r = e.revenue;
            }
          }
        }
        total += to_currency(r) + risk::value(st.value_spec, i, s);
      }
      return total;
    };
    double best = objective(std::nullopt);
    for (const BidEntry& e : imp.entries) {
      if (e.cost > st.position.remaining[static_cast<std::size_t>(e.campaign)]) continue;
      best = std::max(best, objective(e.campaign));
    }
    CHECK(objective(d.chosen) == doctest::Approx(best).epsilon(1e-9));
    apply(st, d);
  }
}

TEST_CASE("exponential price is nondecreasing in spend at fixed progress") {
  Rng rng(10101);
  for (int trial = 0; trial < 200; ++trial) {
    auto st = make_state(simple_book({10'000'000}),
                         policy_of(PolicyKind::exponential, {rng.uniform(0.1, 2.0)}, 1e9, 0.0,
                                   rng.uniform(0.5, 3.0), 100));
    st.served = static_cast<std::int64_t>(rng.uniform_int(100));
    st.value_spec.served = st.served;
    const Money s1 = 1 + static_cast<Money>(rng.uniform_int(9'999'999));
    const Money s2 = 1 + static_cast<Money>(rng.uniform_int(9'999'999));
    const Money lo = std::min(s1, s2), hi = std::max(s1, s2);
    // more spend = less remaining; price must not decrease
    st.position.remaining[0] = hi;
    const double p_low_spend = effective_price(st, 0);
    st.position.remaining[0] = lo;
    const double p_high_spend = effective_price(st, 0);
    CHECK(p_high_spend >= p_low_spend - 1e-15);
  }
}

TEST_CASE("identical runs produce identical logs") {
  Rng rng(31415);
  auto [stream, book] = testing::random_instance(rng, 300, 6, 0.4);
  std::vector<double> prices(6, 0.7);
  const auto run_once = [&]() {
    auto st = make_state(book, policy_of(PolicyKind::log, prices, 1e9, 0.05));
    return run_stream(st, stream);
  };
  const auto a = run_once();
  const auto b = run_once();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].chosen == b[i].chosen);
    CHECK(a[i].score == b[i].score);
    CHECK(a[i].revenue == b[i].revenue);
    CHECK(a[i].cost == b[i].cost);
  }
}

TEST_CASE("per-user frequency caps hold exactly when enforced") {
  CampaignBook book({{.id = "c0", .budget = 1'000'000'000, .fcap = 2}});
  auto st = make_state(book, policy_of(PolicyKind::zero, {0.0}), /*enforce_caps=*/true);
  std::vector<Impression> stream;
  for (int j = 0; j < 6; ++j) {
    stream.push_back(make_impression("i" + std::to_string(j), j % 2 ? "alice" : "bob",
                                     {{0, 1'000'000, 1'000}}));
  }
  const auto log = run_stream(st, stream);
  int alice = 0, bob = 0;
  for (const Decision& d : log) {
    if (d.chosen) (d.user == "alice" ? alice : bob) += 1;
  }
  CHECK(alice == 2);
  CHECK(bob == 2);
  CHECK(st.caps.count("alice", 0) == 2);
}
