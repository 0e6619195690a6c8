// Command-line harness: synthetic stream generation, dual estimation, policy
// runs, multi-policy comparisons, the dual-stability study, and fcap LP
// diagnostics. Exit codes: 0 ok, 1 usage, 2 data error, 3 solver failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adalloc/engine.hpp"
#include "adalloc/fcap.hpp"
#include "adalloc/harness.hpp"
#include "adalloc/io.hpp"
#include "adalloc/lp.hpp"
#include "adalloc/synth.hpp"

namespace {

using namespace adalloc;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

struct SynthFlags {
  SynthSpec spec;
  std::string out_dir = ".";

  // `prefix` keeps the generator knobs from colliding with the file flags
  // on subcommands that accept both.
  void attach(CLI::App* cmd, const std::string& prefix = "") {
    const auto opt = [&](const char* name) { return "--" + prefix + name; };
    cmd->add_option(opt("campaigns"), spec.n_campaigns, "number of campaigns");
    cmd->add_option(opt("impressions"), spec.n_impressions, "number of impressions");
    cmd->add_option(opt("users"), spec.n_users, "distinct users (default impressions/10)");
    cmd->add_option(opt("sparsity"), spec.sparsity, "mean fraction of campaigns bidding");
    cmd->add_option(opt("drift"), spec.drift, "interest drift over time, 0 = stationary");
    cmd->add_option(opt("tightness"), spec.budget_tightness, "budget / equal-share demand");
    cmd->add_option(opt("tightness-spread"), spec.budget_spread,
                    "tightness spread across campaigns");
    cmd->add_option(opt("value-sigma"), spec.value_sigma, "lognormal sigma of bid values");
    cmd->add_option(opt("base-value"), spec.base_value, "bid value scale, currency");
    cmd->add_flag(opt("house"), spec.house, "append an unbounded house campaign");
    cmd->add_option(opt("fcap-rate"), spec.fcap_rate,
                    "fraction of campaigns with a frequency cap");
    cmd->add_option(opt("fcap-min"), spec.fcap_min, "minimum cap value");
    cmd->add_option(opt("fcap-max"), spec.fcap_max, "maximum cap value");
  }
};

std::vector<PolicyKind> parse_policies(const std::string& csv) {
  std::vector<PolicyKind> out;
  std::string tok;
  std::istringstream is(csv);
  while (std::getline(is, tok, ',')) {
    const auto kind = policy_kind_from_string(tok);
    if (!kind) throw CLI::ValidationError("--policies", "unknown policy '" + tok + "'");
    out.push_back(*kind);
  }
  if (out.empty()) throw CLI::ValidationError("--policies", "empty policy list");
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"risk-based online impression allocation harness"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic stream + campaign file");
  SynthFlags synth_flags;
  synth_flags.attach(synth);
  std::uint64_t synth_seed = 0;
  synth->add_option("--seed", synth_seed, "rng seed")->required();
  synth->add_option("--out-dir", synth_flags.out_dir, "output directory");

  // ---- shared input flags builder ----
  struct InputFlags {
    std::string impressions, campaigns;
    void attach(CLI::App* cmd, bool required = true) {
      auto* a = cmd->add_option("--impressions", impressions, "impression file");
      auto* b = cmd->add_option("--campaigns", campaigns, "campaign file");
      if (required) {
        a->required();
        b->required();
      }
    }
  };

  // ---- duals ----
  auto* duals = app.add_subcommand("duals", "estimate initial dual prices from a stream");
  InputFlags duals_in;
  duals_in.attach(duals);
  double duals_delta = 1.0, duals_eps = 0.1, duals_tol = 1e-9;
  std::uint64_t duals_seed = 0;
  std::string duals_scaling = "conservative";
  std::string duals_out;
  duals->add_option("--delta", duals_delta, "sampling rate over the input stream");
  duals->add_option("--epsilon", duals_eps, "budget scaling parameter");
  duals->add_option("--scaling", duals_scaling, "conservative | proportional");
  duals->add_option("--tol", duals_tol, "solver tolerance");
  duals->add_option("--seed", duals_seed, "sampling seed");
  duals->add_option("--out", duals_out, "output json (default stdout)");

  // ---- run / compare ----
  harness::ExperimentConfig run_cfg;
  SynthFlags run_synth;
  bool run_use_synth = false;
  std::string run_policy = "linear", run_policies_csv = "zero,linear,log,exponential";
  std::string run_impressions, run_campaigns, run_out, run_scaling = "conservative";
  double run_epsilon = -1.0;
  double run_log_weight = -1.0, run_kappa = -1.0, run_price_cap = -1.0;
  std::int64_t run_horizon = -1, run_oob_threshold = -1;

  const auto attach_common = [&](CLI::App* cmd) {
    cmd->add_option("--impressions", run_impressions, "impression file");
    cmd->add_option("--campaigns", run_campaigns, "campaign file");
    cmd->add_flag("--synth", run_use_synth, "generate the stream instead of loading files");
    run_synth.attach(cmd, "synth-");
    cmd->add_option("--delta", run_cfg.delta, "T1 sampling rate");
    cmd->add_option("--epsilon", run_epsilon, "budget scaling parameter (default delta)");
    cmd->add_option("--scaling", run_scaling, "conservative | proportional");
    cmd->add_flag("--reverse", run_cfg.reverse_stream, "feed the evaluation stream in reverse");
    cmd->add_option("--rolling", run_cfg.rolling_periods, "rolling-horizon period count (>= 2)");
    cmd->add_flag("--fcap", run_cfg.fcap_mode, "enforce frequency caps and use the fcap LP");
    cmd->add_option("--bins", run_cfg.n_bins, "partition bins per campaign in fcap mode");
    cmd->add_option("--log-weight", run_log_weight, "log rule regularizer");
    cmd->add_option("--kappa", run_kappa, "exponential rule regularizer");
    cmd->add_option("--price-cap", run_price_cap, "dual price ceiling");
    cmd->add_option("--horizon", run_horizon, "expected serving-window length H");
    cmd->add_option("--oob-threshold", run_oob_threshold, "absolute oob threshold, micro");
    cmd->add_option("--split", run_cfg.split_fraction, "T1 fraction of the stream");
    cmd->add_option("--series-points", run_cfg.series_points, "time-series checkpoints");
    cmd->add_option("--tol", run_cfg.tol, "solver tolerance");
    cmd->add_flag("--lp-bound", run_cfg.include_lp_bound, "also compute the offline LP bound");
    cmd->add_option("--out-dir", run_out, "artifact directory");
  };

  auto* run = app.add_subcommand("run", "run a single policy over a two-phase experiment");
  attach_common(run);
  run->add_option("--policy", run_policy, "zero | linear | log | exponential");
  std::uint64_t run_seed = 0;
  run->add_option("--seed", run_seed, "rng seed");

  auto* compare = app.add_subcommand("compare", "compare policies and emit a report");
  attach_common(compare);
  compare->add_option("--policies", run_policies_csv, "comma-separated policy list");
  std::uint64_t compare_seed = 0;
  compare->add_option("--seed", compare_seed, "rng seed")->required();

  // ---- stability ----
  auto* stability = app.add_subcommand("stability", "dual-price stability across prefix sizes");
  InputFlags stab_in;
  bool stab_use_synth = false;
  SynthFlags stab_synth;
  stab_in.attach(stability, /*required=*/false);
  stability->add_flag("--synth", stab_use_synth, "generate the stream instead of loading files");
  stab_synth.attach(stability, "synth-");
  std::string stab_sizes = "100,200,6400,12800";
  std::uint64_t stab_seed = 0;
  std::string stab_out;
  double stab_tol = 1e-9;
  stability->add_option("--sizes", stab_sizes, "comma-separated ascending prefix sizes");
  stability->add_option("--seed", stab_seed, "permutation seed")->required();
  stability->add_option("--tol", stab_tol, "solver tolerance");
  stability->add_option("--out", stab_out, "output csv (default stdout)");

  // ---- fcap-lp ----
  auto* fcaplp = app.add_subcommand("fcap-lp", "dump partition caps and relaxed-LP diagnostics");
  InputFlags fcap_in;
  fcap_in.attach(fcaplp);
  int fcap_bins = 10;
  double fcap_eps = 0.1;
  double fcap_tol = 1e-9;
  std::string fcap_out;
  fcaplp->add_option("--bins", fcap_bins, "partition bins per campaign");
  fcaplp->add_option("--epsilon", fcap_eps, "budget scaling parameter");
  fcaplp->add_option("--tol", fcap_tol, "solver tolerance");
  fcaplp->add_option("--out", fcap_out, "output csv (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      auto [stream, book] = synth_generate(synth_flags.spec, synth_seed);
      const std::filesystem::path dir(synth_flags.out_dir);
      std::filesystem::create_directories(dir);
      io::write_campaigns(dir / "campaigns.txt", book);
      io::write_impressions(dir / "impressions.txt", stream, book);
      std::cout << "wrote " << stream.size() << " impressions, " << book.size()
                << " campaigns to " << dir.string() << "\n";
      return kExitOk;
    }

    if (duals->parsed()) {
      const CampaignBook book = io::load_campaigns(duals_in.campaigns);
      const std::vector<Impression> stream = io::load_impressions(duals_in.impressions, book);
      std::vector<Impression> sample;
      if (duals_delta >= 1.0) {
        sample = stream;
      } else {
        Rng rng(duals_seed);
        for (const Impression& imp : stream) {
          if (rng.bernoulli(duals_delta)) sample.push_back(imp);
        }
      }
      const auto mode = duals_scaling == "proportional" ? lp::BudgetScaling::proportional
                                                        : lp::BudgetScaling::conservative;
      const auto d = lp::estimate_initial_duals(sample, book, duals_eps, duals_tol, mode);
      ordered_json j;
      j["sample_size"] = sample.size();
      j["epsilon"] = duals_eps;
      j["price_cap"] = d.price_cap;
      j["gamma"] = lp::bid_budget_ratio(sample, book);
      ordered_json per = ordered_json::array();
      for (std::int32_t i = 0; i < book.size(); ++i) {
        per.push_back({{"campaign", book.at(i).id}, {"dual", d.at(i)}});
      }
      j["duals"] = std::move(per);
      if (duals_out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream out(duals_out);
        out << j.dump(2) << "\n";
      }
      return kExitOk;
    }

    if (run->parsed() || compare->parsed()) {
      if (run_use_synth) {
        run_cfg.synth = run_synth.spec;
      } else {
        if (run_impressions.empty() || run_campaigns.empty()) {
          std::cerr << "either --synth or both --impressions and --campaigns are required\n";
          return kExitUsage;
        }
        run_cfg.impressions_path = run_impressions;
        run_cfg.campaigns_path = run_campaigns;
      }
      run_cfg.seed = compare->parsed() ? compare_seed : run_seed;
      if (run_epsilon >= 0) run_cfg.epsilon = run_epsilon;
      run_cfg.scaling = run_scaling == "proportional" ? lp::BudgetScaling::proportional
                                                      : lp::BudgetScaling::conservative;
      if (run_log_weight >= 0) run_cfg.log_weight = run_log_weight;
      if (run_kappa >= 0) run_cfg.kappa = run_kappa;
      if (run_price_cap >= 0) run_cfg.price_cap = run_price_cap;
      if (run_horizon >= 0) run_cfg.horizon = run_horizon;
      if (run_oob_threshold >= 0) run_cfg.oob_threshold = run_oob_threshold;
      if (!run_out.empty()) run_cfg.output_dir = run_out;
      if (compare->parsed()) {
        run_cfg.policies = parse_policies(run_policies_csv);
      } else {
        const auto kind = policy_kind_from_string(run_policy);
        if (!kind) {
          std::cerr << "unknown policy '" << run_policy << "'\n";
          return kExitUsage;
        }
        run_cfg.policies = {*kind};
      }
      const harness::Report report = harness::run_experiment(run_cfg);
      std::cout << harness::report_to_json(report, run_cfg);
      return kExitOk;
    }

    if (stability->parsed()) {
      std::vector<Impression> stream;
      CampaignBook book;
      if (stab_use_synth) {
        auto [s, b] = synth_generate(stab_synth.spec, stab_seed);
        stream = std::move(s);
        book = std::move(b);
      } else {
        if (stab_in.campaigns.empty() || stab_in.impressions.empty()) {
          std::cerr << "either --synth or both --impressions and --campaigns are required\n";
          return kExitUsage;
        }
        book = io::load_campaigns(stab_in.campaigns);
        stream = io::load_impressions(stab_in.impressions, book);
      }
      std::vector<std::int64_t> sizes;
      std::istringstream is(stab_sizes);
      std::string tok;
      while (std::getline(is, tok, ',')) sizes.push_back(std::stoll(tok));
      const auto result = harness::dual_stability_study(stream, book, sizes, stab_seed, stab_tol);
      if (stab_out.empty()) {
        const auto tmp = std::filesystem::temp_directory_path() / "adalloc_stability.csv";
        harness::write_stability_csv(tmp, result, book);
        std::cout << std::ifstream(tmp).rdbuf();
      } else {
        harness::write_stability_csv(stab_out, result, book);
      }
      for (std::size_t k = 0; k + 1 < result.sizes.size(); ++k) {
        std::cerr << "mean |dual change| " << result.sizes[k] << " -> " << result.sizes[k + 1]
                  << ": " << harness::mean_abs_dual_change(result, k, k + 1) << "\n";
      }
      return kExitOk;
    }

    if (fcaplp->parsed()) {
      const CampaignBook book = io::load_campaigns(fcap_in.campaigns);
      const std::vector<Impression> stream = io::load_impressions(fcap_in.impressions, book);
      std::vector<fcap::PartitionSet> partitions;
      for (std::int32_t i = 0; i < book.size(); ++i) {
        if (!book.at(i).fcap) continue;
        fcap::PartitionSet ps;
        ps.campaign = i;
        try {
          ps.bins = fcap::partition_bids(stream, i, fcap_bins);
        } catch (const fcap::NoBids&) {
          continue;
        }
        partitions.push_back(std::move(ps));
      }
      std::ostringstream table;
      table << "campaign,bin,size,cap\n";
      for (const auto& ps : partitions) {
        const Campaign& c = book.at(ps.campaign);
        for (std::size_t bin = 0; bin < ps.bins.size(); ++bin) {
          table << c.id << ',' << bin << ',' << ps.bins[bin].size() << ','
                << fcap::partition_cap(ps.bins[bin], stream, *c.fcap) << '\n';
        }
      }
      const lp::LpInstance capped = fcap::build_fcap_lp(stream, book, fcap_eps, partitions);
      const auto capped_sol = lp::solve_lp(capped, fcap_tol);
      lp::LpInstance uncapped = capped;
      uncapped.cap_rows.clear();
      const auto uncapped_sol = lp::solve_lp(uncapped, fcap_tol);
      table << "# cap_rows=" << capped.cap_rows.size() << " capped_optimum="
            << capped_sol.primal_value << " uncapped_optimum=" << uncapped_sol.primal_value
            << "\n";
      if (fcap_out.empty()) {
        std::cout << table.str();
      } else {
        std::ofstream out(fcap_out);
        out << table.str();
      }
      return kExitOk;
    }
  } catch (const io::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const io::SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const lp::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
