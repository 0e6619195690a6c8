#include "adalloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "adalloc/fcap.hpp"
#include "adalloc/io.hpp"

namespace adalloc::harness {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<Impression> bernoulli_sample(std::span<const Impression> window, double rate,
                                         std::uint64_t seed) {
  std::vector<Impression> out;
  if (rate >= 1.0) {
    out.assign(window.begin(), window.end());
    return out;
  }
  Rng rng(seed);
  for (const Impression& imp : window) {
    if (rng.bernoulli(rate)) out.push_back(imp);
  }
  return out;
}

// Regularizer scale for the log rule: a slice of the typical budget value
// at the estimated prices, falling back to the sample's revenue/cost ratio
// when the duals are all slack.
double default_log_weight(const CampaignBook& book, const DualPriceVector& duals,
                          std::span<const Impression> sample) {
  double mean_pb = 0.0;
  std::int32_t counted = 0;
  for (std::int32_t i = 0; i < book.size(); ++i) {
    const Campaign& c = book.at(i);
    if (c.is_house) continue;
    mean_pb += duals.at(i) * to_currency(c.budget);
    ++counted;
  }
  if (counted > 0) mean_pb /= counted;
  if (mean_pb > 0.0) return 0.01 * mean_pb;
  double ratio = 0.0;
  std::int64_t n = 0;
  for (const Impression& imp : sample) {
    for (const BidEntry& e : imp.entries) {
      if (e.cost > 0) {
        ratio += static_cast<double>(e.revenue) / static_cast<double>(e.cost);
        ++n;
      }
    }
  }
  ratio = n > 0 ? ratio / static_cast<double>(n) : 1.0;
  double mean_b = 0.0;
  for (std::int32_t i = 0; i < book.size(); ++i) {
    if (!book.at(i).is_house) mean_b += to_currency(book.at(i).budget);
  }
  if (counted > 0) mean_b /= counted;
  return 0.01 * std::max(1e-9, ratio * mean_b);
}

DualPriceVector estimate_duals_for(const ExperimentConfig& config,
                                   std::span<const Impression> sample, const CampaignBook& book,
                                   double epsilon, double price_cap) {
  if (sample.empty()) {
    DualPriceVector d;
    d.prices.assign(static_cast<std::size_t>(book.size()), 0.0);
    d.price_cap = price_cap;
    return d;
  }
  lp::LpInstance inst;
  if (config.fcap_mode) {
    std::vector<fcap::PartitionSet> partitions;
    for (std::int32_t i = 0; i < book.size(); ++i) {
      const Campaign& c = book.at(i);
      if (!c.fcap) continue;
      fcap::PartitionSet ps;
      ps.campaign = i;
      try {
        ps.bins = fcap::partition_bids(sample, i, config.n_bins);
      } catch (const fcap::NoBids&) {
        continue;  // no bids in this window, nothing to cap in the LP
      }
      partitions.push_back(std::move(ps));
    }
    inst = fcap::build_fcap_lp(sample, book, epsilon, partitions, config.scaling);
  } else {
    std::vector<double> budgets(static_cast<std::size_t>(book.size()), 0.0);
    for (std::int32_t i = 0; i < book.size(); ++i) {
      const Campaign& c = book.at(i);
      budgets[static_cast<std::size_t>(i)] = c.is_house ? 0.0 : to_currency(c.remaining());
    }
    inst = lp::make_instance(sample, book, lp::scale_budgets(budgets, epsilon, config.scaling));
  }
  const lp::PrimalDualSolution sol = lp::solve_lp(inst, config.tol);
  DualPriceVector out;
  out.price_cap = price_cap;
  out.prices.resize(sol.p.size());
  for (std::size_t i = 0; i < sol.p.size(); ++i) {
    out.prices[i] = std::clamp(sol.p[i], 0.0, price_cap);
  }
  return out;
}

}  // namespace

std::vector<Money> oob_thresholds(std::span<const Impression> learning, const CampaignBook& book,
                                  std::optional<Money> override_abs) {
  std::vector<Money> thr(static_cast<std::size_t>(book.size()), 1);
  if (override_abs) {
    std::fill(thr.begin(), thr.end(), *override_abs);
    return thr;
  }
  std::vector<Money> min_cost(static_cast<std::size_t>(book.size()),
                              std::numeric_limits<Money>::max());
  for (const Impression& imp : learning) {
    for (const BidEntry& e : imp.entries) {
      if (e.cost > 0) {
        auto& m = min_cost[static_cast<std::size_t>(e.campaign)];
        m = std::min(m, e.cost);
      }
    }
  }
  for (std::size_t i = 0; i < thr.size(); ++i) {
    if (min_cost[i] != std::numeric_limits<Money>::max()) thr[i] = min_cost[i];
  }
  return thr;
}

std::vector<PolicyResult> compute_metrics(
    std::vector<std::pair<PolicyKind, std::vector<Decision>>> logs, const CampaignBook& book,
    std::span<const Money> thresholds, std::span<const std::int64_t> checkpoints) {
  std::vector<PolicyResult> results;
  results.reserve(logs.size());
  for (auto& [kind, log] : logs) {
    PolicyResult r;
    r.kind = kind;
    r.decisions = static_cast<std::int64_t>(log.size());
    std::vector<Money> remaining(static_cast<std::size_t>(book.size()));
    for (std::int32_t i = 0; i < book.size(); ++i) remaining[static_cast<std::size_t>(i)] = book.at(i).remaining();
    const auto oob_now = [&]() {
      std::int32_t n = 0;
      for (std::int32_t i = 0; i < book.size(); ++i) {
        if (book.at(i).is_house) continue;
        if (remaining[static_cast<std::size_t>(i)] < thresholds[static_cast<std::size_t>(i)]) ++n;
      }
      return n;
    };
    std::size_t next_cp = 0;
    Money cum = 0;
    std::int64_t step = 0;
    const auto flush_checkpoints = [&](std::int64_t upto) {
      while (next_cp < checkpoints.size() && checkpoints[next_cp] <= upto) {
        r.series.push_back({checkpoints[next_cp], cum, oob_now()});
        ++next_cp;
      }
    };
    for (const Decision& d : log) {
      ++step;
      if (d.chosen) {
        cum += d.revenue;
        remaining[static_cast<std::size_t>(*d.chosen)] -= d.cost;
        ++r.allocated;
      }
      flush_checkpoints(step);
    }
    flush_checkpoints(std::numeric_limits<std::int64_t>::max());
    r.total_revenue = cum;
    const std::int64_t mid = static_cast<std::int64_t>(log.size()) / 2;
    // series rows at mid and final exist because checkpoints include them
    for (const SeriesPoint& sp : r.series) {
      if (sp.step == mid) r.mid_flight_oob = sp.oob;
    }
    r.final_oob = oob_now();
    r.log = std::move(log);
    results.push_back(std::move(r));
  }
  const auto greedy = std::find_if(results.begin(), results.end(),
                                   [](const PolicyResult& r) { return r.kind == PolicyKind::zero; });
  if (greedy != results.end() && greedy->total_revenue > 0) {
    for (PolicyResult& r : results) {
      r.improvement_over_greedy = static_cast<double>(r.total_revenue) /
                                      static_cast<double>(greedy->total_revenue) -
                                  1.0;
    }
  }
  return results;
}

Report run_experiment(const ExperimentConfig& config) {
  if (config.synth.has_value() == (config.impressions_path.has_value())) {
    throw std::invalid_argument("experiment needs exactly one input source (files or synth)");
  }
  std::vector<Impression> stream;
  CampaignBook book;
  if (config.synth) {
    auto [s, b] = synth_generate(*config.synth, config.seed);
    stream = std::move(s);
    book = std::move(b);
  } else {
    if (!config.campaigns_path) throw std::invalid_argument("campaign file path missing");
    book = io::load_campaigns(*config.campaigns_path);
    stream = io::load_impressions(*config.impressions_path, book);
  }
  if (auto issue = validate_instance(stream, book)) {
    throw std::invalid_argument("invalid stream: " + issue->detail);
  }
  if (!(config.delta > 0.0 && config.delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1]");
  }

  Report report;
  report.seed = config.seed;
  report.delta = config.delta;

  const bool rolling = config.rolling_periods >= 2;
  const std::int64_t split =
      rolling ? static_cast<std::int64_t>(stream.size()) / config.rolling_periods
              : static_cast<std::int64_t>(std::llround(
                    static_cast<double>(stream.size()) * config.split_fraction));
  std::span<const Impression> t1(stream.data(), static_cast<std::size_t>(split));
  std::span<const Impression> t2(stream.data() + split, stream.size() - static_cast<std::size_t>(split));
  report.t1_size = static_cast<std::int64_t>(t1.size());
  report.t2_size = static_cast<std::int64_t>(t2.size());

  double epsilon = config.epsilon.value_or(config.delta);
  if (config.scaling == lp::BudgetScaling::conservative && epsilon >= 1.0) epsilon = 0.5;
  report.epsilon = epsilon;

  const std::vector<Impression> sample = bernoulli_sample(t1, config.delta, config.seed ^ 0x5a5a5a5aULL);
  report.sample_size = static_cast<std::int64_t>(sample.size());
  report.gamma = lp::bid_budget_ratio(sample, book);
  const double price_cap = config.price_cap.value_or(lp::default_price_cap(sample));
  report.duals = estimate_duals_for(config, sample, book, epsilon, price_cap);

  // Evaluation stream: T2 in the plain two-phase setup, the whole stream in
  // rolling mode (period 1 runs on zero prices).
  std::vector<Impression> eval;
  if (rolling) {
    eval.assign(stream.begin(), stream.end());
  } else {
    eval.assign(t2.begin(), t2.end());
  }
  if (config.reverse_stream) std::reverse(eval.begin(), eval.end());
  const std::int64_t horizon = config.horizon.value_or(std::max<std::int64_t>(1, static_cast<std::int64_t>(eval.size())));

  const double log_weight = config.log_weight.value_or(default_log_weight(book, report.duals, sample));
  const double kappa = config.kappa.value_or(1.0);

  std::vector<std::int64_t> checkpoints;
  {
    const std::int64_t n = static_cast<std::int64_t>(eval.size());
    const int points = std::max(1, config.series_points);
    for (int k = 1; k <= points; ++k) {
      checkpoints.push_back(static_cast<std::int64_t>(static_cast<double>(n) * k / points));
    }
    checkpoints.push_back(n / 2);  // the mid-flight probe
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  }

  const std::vector<Money> thresholds = oob_thresholds(t1, book, config.oob_threshold);

  std::vector<std::pair<PolicyKind, std::vector<Decision>>> logs;
  try {
    for (PolicyKind kind : config.policies) {
      PolicyConfig policy;
      policy.kind = kind;
      policy.initial_prices = rolling ? DualPriceVector{std::vector<double>(
                                            static_cast<std::size_t>(book.size()), 0.0),
                                        report.duals.price_cap}
                                      : report.duals;
      policy.log_weight = log_weight;
      policy.kappa = kappa;
      policy.horizon = horizon;
      engine::EngineState state = engine::make_state(book, policy, config.fcap_mode);

      std::vector<Decision> log;
      log.reserve(eval.size());
      if (!rolling) {
        log = engine::run_stream(state, eval);
      } else {
        const std::int64_t d = config.rolling_periods;
        const std::int64_t n = static_cast<std::int64_t>(eval.size());
        for (std::int64_t t = 0; t < d; ++t) {
          const std::int64_t lo = n * t / d;
          const std::int64_t hi = t + 1 == d ? n : n * (t + 1) / d;
          if (t > 0) {
            std::span<const Impression> prev(eval.data() + n * (t - 1) / d,
                                             static_cast<std::size_t>(lo - n * (t - 1) / d));
            const std::vector<Impression> period_sample =
                bernoulli_sample(prev, config.delta, config.seed ^ (0xabcdULL + static_cast<std::uint64_t>(t)));
            engine::set_prices(state, estimate_duals_for(config, period_sample, state.book,
                                                         epsilon, price_cap));
          }
          std::span<const Impression> period(eval.data() + lo, static_cast<std::size_t>(hi - lo));
          auto part = engine::run_stream(state, period);
          log.insert(log.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
        }
      }
      logs.emplace_back(kind, std::move(log));
    }
  } catch (...) {
    report.policies = compute_metrics(std::move(logs), book, thresholds, checkpoints);
    report.partial = true;
    if (config.output_dir) write_report(*config.output_dir, report, config);
    throw;
  }

  report.policies = compute_metrics(std::move(logs), book, thresholds, checkpoints);
  if (config.include_lp_bound) {
    report.lp_bound = lp::offline_optimum(eval, book, config.tol);
  }
  if (config.output_dir) write_report(*config.output_dir, report, config);
  return report;
}

StabilityResult dual_stability_study(std::span<const Impression> stream, const CampaignBook& book,
                                     std::span<const std::int64_t> sizes, std::uint64_t seed,
                                     double tol) {
  StabilityResult out;
  if (stream.empty()) throw std::invalid_argument("stability study needs a nonempty stream");
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 1 || sizes[k] > static_cast<std::int64_t>(stream.size())) {
      throw std::invalid_argument("prefix size outside the stream");
    }
    if (k > 0 && sizes[k] < sizes[k - 1]) throw std::invalid_argument("sizes must be ascending");
  }
  std::vector<Impression> permuted(stream.begin(), stream.end());
  Rng rng(seed);
  for (std::size_t i = permuted.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(permuted[i - 1], permuted[j]);
  }
  std::vector<double> budgets(static_cast<std::size_t>(book.size()), 0.0);
  for (std::int32_t i = 0; i < book.size(); ++i) {
    const Campaign& c = book.at(i);
    budgets[static_cast<std::size_t>(i)] = c.is_house ? 0.0 : to_currency(c.remaining());
  }
  out.sizes.assign(sizes.begin(), sizes.end());
  for (std::int64_t size : sizes) {
    std::span<const Impression> prefix(permuted.data(), static_cast<std::size_t>(size));
    const double frac = static_cast<double>(size) / static_cast<double>(permuted.size());
    const std::vector<double> scaled =
        lp::scale_budgets(budgets, frac, lp::BudgetScaling::proportional);
    const lp::LpInstance inst = lp::make_instance(prefix, book, scaled);
    const lp::PrimalDualSolution sol = lp::solve_lp(inst, tol);
    out.duals.push_back(sol.p);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(book.size()), 0);
    for (const Impression& imp : prefix) {
      for (const BidEntry& e : imp.entries) {
        if (e.revenue > 0) ++counts[static_cast<std::size_t>(e.campaign)];
      }
    }
    out.bid_counts.push_back(std::move(counts));
  }
  return out;
}

double mean_abs_dual_change(const StabilityResult& result, std::size_t a, std::size_t b) {
  const auto& pa = result.duals.at(a);
  const auto& pb = result.duals.at(b);
  double total = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) total += std::abs(pb[i] - pa[i]);
  return pa.empty() ? 0.0 : total / static_cast<double>(pa.size());
}

std::string report_to_json(const Report& report, const ExperimentConfig& config) {
  ordered_json j;
  j["schema"] = "adalloc-report-v1";
  j["seed"] = report.seed;
  j["partial"] = report.partial;
  j["t1_size"] = report.t1_size;
  j["t2_size"] = report.t2_size;
  j["sample_size"] = report.sample_size;
  j["delta"] = report.delta;
  j["epsilon"] = report.epsilon;
  j["scaling"] =
      config.scaling == lp::BudgetScaling::conservative ? "conservative" : "proportional";
  j["reverse_stream"] = config.reverse_stream;
  j["rolling_periods"] = config.rolling_periods;
  j["fcap_mode"] = config.fcap_mode;
  j["gamma"] = report.gamma;
  j["price_cap"] = report.duals.price_cap;
  j["duals"] = report.duals.prices;
  if (report.lp_bound) {
    j["lp_bound"] = *report.lp_bound;
  } else {
    j["lp_bound"] = nullptr;
  }
  ordered_json policies = ordered_json::array();
  for (const PolicyResult& r : report.policies) {
    ordered_json p;
    p["policy"] = to_string(r.kind);
    p["total_revenue_micro"] = r.total_revenue;
    p["total_revenue"] = to_currency(r.total_revenue);
    p["improvement_over_greedy"] = r.improvement_over_greedy;
    p["mid_flight_oob"] = r.mid_flight_oob;
    p["final_oob"] = r.final_oob;
    p["decisions"] = r.decisions;
    p["allocated"] = r.allocated;
    policies.push_back(std::move(p));
  }
  j["policies"] = std::move(policies);
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const Report& report,
                  const ExperimentConfig& config) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << report_to_json(report, config);
  }
  write_series_csv(dir / "series.csv", report);
  CampaignBook book;
  if (config.synth) {
    book = synth_generate(*config.synth, config.seed).second;
  } else if (config.campaigns_path) {
    book = io::load_campaigns(*config.campaigns_path);
  }
  for (const PolicyResult& r : report.policies) {
    write_decision_log(dir / (std::string("decisions_") + to_string(r.kind) + ".log"), r.log,
                       book);
  }
}

void write_series_csv(const std::filesystem::path& path, const Report& report) {
  std::ofstream out(path);
  out << "step,policy,cum_revenue_micro,cum_revenue,oob_count\n";
  for (const PolicyResult& r : report.policies) {
    for (const SeriesPoint& sp : r.series) {
      out << sp.step << ',' << to_string(r.kind) << ',' << sp.cum_revenue << ','
          << format_score(to_currency(sp.cum_revenue)) << ',' << sp.oob << '\n';
    }
  }
}

void write_decision_log(const std::filesystem::path& path, std::span<const Decision> log,
                        const CampaignBook& book) {
  std::ofstream out(path);
  std::int64_t h = 0;
  for (const Decision& d : log) {
    ++h;
    out << h << ' ' << d.impression_id << ' ';
    if (d.chosen && *d.chosen >= 0 && *d.chosen < book.size()) {
      out << book.at(*d.chosen).id;
    } else if (d.chosen) {
      out << *d.chosen;
    } else {
      out << '-';
    }
    out << ' ' << format_score(d.score) << ' ' << d.revenue << ' ' << d.cost << '\n';
  }
}

void write_stability_csv(const std::filesystem::path& path, const StabilityResult& result,
                         const CampaignBook& book) {
  std::ofstream out(path);
  out << "campaign,size_a,dual_a,size_b,dual_b,nonzero_bids_b\n";
  for (std::size_t k = 0; k + 1 < result.sizes.size(); ++k) {
    for (std::int32_t i = 0; i < book.size(); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      out << book.at(i).id << ',' << result.sizes[k] << ','
          << format_score(result.duals[k][idx]) << ',' << result.sizes[k + 1] << ','
          << format_score(result.duals[k + 1][idx]) << ',' << result.bid_counts[k + 1][idx]
          << '\n';
    }
  }
}

}  // namespace adalloc::harness
