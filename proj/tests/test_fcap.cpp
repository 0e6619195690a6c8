#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <unordered_map>

#include "adalloc/fcap.hpp"
#include "adalloc/lp.hpp"
#include "test_helpers.hpp"

using namespace adalloc;
using namespace adalloc::fcap;
using testing::make_impression;
using testing::simple_book;

namespace {

// exhaustive oracle for f(i, P): largest subset respecting per-user caps,
// by enumerating all subsets (|P| <= 20ish)
std::int64_t brute_force_cap(std::span<const std::int64_t> members,
                             std::span<const Impression> sample, std::int32_t cap) {
  const std::size_t n = members.size();
  std::int64_t best = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    std::unordered_map<std::string, std::int32_t> per_user;
    bool ok = true;
    std::int64_t size = 0;
    for (std::size_t k = 0; k < n && ok; ++k) {
      if (!(mask & (1ULL << k))) continue;
      ++size;
      if (++per_user[sample[static_cast<std::size_t>(members[k])].user] > cap) ok = false;
    }
    if (ok) best = std::max(best, size);
  }
  return best;
}

std::vector<Impression> bids_with_values(const std::vector<Money>& values) {
  std::vector<Impression> out;
  for (std::size_t j = 0; j < values.size(); ++j) {
    out.push_back(make_impression("i" + std::to_string(j), "u" + std::to_string(j),
                                  {{0, values[j], 1'000}}));
  }
  return out;
}

}  // namespace

TEST_CASE("partition_bids") {
  SUBCASE("distinct values split into equal quantile bins") {
    const auto sample = bids_with_values({10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
    const auto bins = partition_bids(sample, 0, 2);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].size() == 5);
    CHECK(bins[1].size() == 5);
    // sort-and-split oracle: lower half by value must be bin 0
    for (std::int64_t j : bins[0]) CHECK(sample[static_cast<std::size_t>(j)].entries[0].revenue <= 50);
    for (std::int64_t j : bins[1]) CHECK(sample[static_cast<std::size_t>(j)].entries[0].revenue > 50);
  }
  SUBCASE("single bin keeps everything") {
    const auto sample = bids_with_values({5, 1, 9});
    const auto bins = partition_bids(sample, 0, 1);
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].size() == 3);
  }
  SUBCASE("equal bids collapse to one bin") {
    const auto sample = bids_with_values({7, 7, 7, 7});
    const auto bins = partition_bids(sample, 0, 5);
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].size() == 4);
  }
  SUBCASE("zero bids are excluded and absence raises") {
    auto sample = bids_with_values({5});
    sample.push_back(make_impression("iz", "uz", {{0, 0, 400}}));
    const auto bins = partition_bids(sample, 0, 2);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.size();
    CHECK(total == 1);
    CHECK_THROWS_AS(partition_bids(sample, 1, 2), NoBids);
  }
  SUBCASE("deterministic given the sample") {
    Rng rng(88);
    auto [stream, book] = testing::random_instance(rng, 200, 3, 0.5);
    const auto a = partition_bids(stream, 1, 10);
    const auto b = partition_bids(stream, 1, 10);
    CHECK(a == b);
  }
}

TEST_CASE("partition_cap") {
  SUBCASE("worked example") {
    std::vector<Impression> sample = {
        make_impression("a", "u1", {{0, 1, 1}}), make_impression("b", "u1", {{0, 1, 1}}),
        make_impression("c", "u1", {{0, 1, 1}}), make_impression("d", "u2", {{0, 1, 1}})};
    const std::vector<std::int64_t> members = {0, 1, 2, 3};
    CHECK(partition_cap(members, sample, 2) == 3);
    CHECK(partition_cap(members, sample, 2) == brute_force_cap(members, sample, 2));
  }
  SUBCASE("zero cap") {
    std::vector<Impression> sample = {make_impression("a", "u1", {{0, 1, 1}})};
    const std::vector<std::int64_t> members = {0};
    CHECK(partition_cap(members, sample, 0) == 0);
  }
  SUBCASE("slack cap returns |P|") {
    std::vector<Impression> sample = {
        make_impression("a", "u1", {{0, 1, 1}}), make_impression("b", "u2", {{0, 1, 1}}),
        make_impression("c", "u1", {{0, 1, 1}})};
    const std::vector<std::int64_t> members = {0, 1, 2};
    CHECK(partition_cap(members, sample, 5) == 3);
  }
  SUBCASE("matches brute force on random cases up to |P| = 12") {
    Rng rng(1212);
    for (int trial = 0; trial < 250; ++trial) {
      const std::size_t n = 1 + rng.uniform_int(12);
      std::vector<Impression> sample;
      std::vector<std::int64_t> members;
      for (std::size_t j = 0; j < n; ++j) {
        sample.push_back(make_impression("i" + std::to_string(j),
                                         "u" + std::to_string(rng.uniform_int(1 + n / 2)),
                                         {{0, 1, 1}}));
        members.push_back(static_cast<std::int64_t>(j));
      }
      const std::int32_t cap = static_cast<std::int32_t>(rng.uniform_int(5));
      CHECK(partition_cap(members, sample, cap) == brute_force_cap(members, sample, cap));
    }
  }
  SUBCASE("out-of-sample member raises") {
    std::vector<Impression> sample = {make_impression("a", "u1", {{0, 1, 1}})};
    const std::vector<std::int64_t> members = {4};
    CHECK_THROWS_AS(partition_cap(members, sample, 1), PartitionMismatch);
  }
}

TEST_CASE("build_fcap_lp") {
  SUBCASE("no caps means no extra rows") {
    Rng rng(5);
    auto [stream, book] = testing::random_instance(rng, 30, 3, 0.5);
    const auto inst = build_fcap_lp(stream, book, 0.3, {});
    CHECK(inst.cap_rows.empty());
  }
  SUBCASE("a binding partition cap picks the higher bid") {
    // two unit impressions from the same user, cap 1: the LP can place at
    // most one and chooses the higher revenue
    std::vector<Impression> sample = {make_impression("a", "u1", {{0, 3'000'000, 1'000'000}}),
                                      make_impression("b", "u1", {{0, 5'000'000, 1'000'000}})};
    CampaignBook book({{.id = "c0", .budget = 100'000'000, .fcap = 1}});
    PartitionSet ps;
    ps.campaign = 0;
    ps.bins = {{0, 1}};
    const auto inst = build_fcap_lp(sample, book, 0.5, std::vector<PartitionSet>{ps},
                                    lp::BudgetScaling::proportional);
    REQUIRE(inst.cap_rows.size() == 1);
    CHECK(inst.cap_rows[0].cap == 1.0);
    const auto sol = lp::solve_lp(inst, 1e-9);
    CHECK(sol.primal_value == doctest::Approx(5.0).epsilon(1e-9));
  }
  SUBCASE("slack caps reproduce the uncapped optimum") {
    Rng rng(31);
    auto [stream, book0] = testing::random_instance(rng, 60, 4, 0.5);
    std::vector<Campaign> cs = book0.campaigns();
    for (auto& c : cs) c.fcap = 1000;  // never binds
    CampaignBook book(cs);
    std::vector<PartitionSet> partitions;
    for (std::int32_t i = 0; i < book.size(); ++i) {
      PartitionSet ps;
      ps.campaign = i;
      ps.bins = partition_bids(stream, i, 4);
      partitions.push_back(std::move(ps));
    }
    const auto capped = build_fcap_lp(stream, book, 0.4, partitions);
    lp::LpInstance uncapped = capped;
    uncapped.cap_rows.clear();
    CHECK(lp::solve_lp(capped, 1e-9).primal_value ==
          doctest::Approx(lp::solve_lp(uncapped, 1e-9).primal_value).epsilon(1e-9));
  }
  SUBCASE("caps only remove feasible points") {
    Rng rng(77);
    auto [stream, book0] = testing::random_instance(rng, 80, 4, 0.5);
    std::vector<Campaign> cs = book0.campaigns();
    for (auto& c : cs) c.fcap = 1;
    CampaignBook book(cs);
    std::vector<PartitionSet> partitions;
    for (std::int32_t i = 0; i < book.size(); ++i) {
      PartitionSet ps;
      ps.campaign = i;
      ps.bins = partition_bids(stream, i, 3);
      partitions.push_back(std::move(ps));
    }
    const auto capped = build_fcap_lp(stream, book, 0.4, partitions);
    lp::LpInstance uncapped = capped;
    uncapped.cap_rows.clear();
    CHECK(lp::solve_lp(capped, 1e-9).primal_value <=
          lp::solve_lp(uncapped, 1e-9).primal_value + 1e-9);
    // row count matches sum of partition sizes
    std::size_t rows = 0;
    for (const auto& ps : partitions) rows += ps.bins.size();
    CHECK(capped.cap_rows.size() == rows);
  }
}

TEST_CASE("check_and_count") {
  UserCapCounter counter;
  SUBCASE("cap of one allows exactly one serve") {
    CHECK(counter.check_and_count("u1", 0, 1));
    CHECK(!counter.check_and_count("u1", 0, 1));
    CHECK(counter.check_and_count("u1", 1, 1));  // other campaign unaffected
    CHECK(counter.check_and_count("u2", 0, 1));  // other user unaffected
  }
  SUBCASE("negative cap means uncapped") {
    for (int k = 0; k < 10; ++k) CHECK(counter.check_and_count("u", 0, -1));
    CHECK(counter.count("u", 0) == 10);
  }
  SUBCASE("interleaved users never exceed the cap") {
    Rng rng(9);
    std::unordered_map<std::string, int> audit;
    for (int step = 0; step < 500; ++step) {
      const std::string user = "u" + std::to_string(rng.uniform_int(7));
      if (counter.check_and_count(user, 2, 2)) audit[user] += 1;
    }
    for (const auto& [user, served] : audit) {
      CHECK(served <= 2);
      CHECK(counter.count(user, 2) == served);
    }
  }
}
