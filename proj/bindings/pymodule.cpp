// Python bindings for the allocation core: model types, dual estimation,
// value/penalty functions, the engine loop, frequency caps, and the
// experiment harness.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "adalloc/engine.hpp"
#include "adalloc/fcap.hpp"
#include "adalloc/harness.hpp"
#include "adalloc/io.hpp"
#include "adalloc/lp.hpp"
#include "adalloc/risk.hpp"
#include "adalloc/synth.hpp"

namespace py = pybind11;
using namespace adalloc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "risk-based online impression allocation core";

  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("zero", PolicyKind::zero)
      .value("linear", PolicyKind::linear)
      .value("log", PolicyKind::log)
      .value("exponential", PolicyKind::exponential);

  py::class_<BidEntry>(m, "BidEntry")
      .def(py::init<std::int32_t, Money, Money>(), py::arg("campaign"), py::arg("revenue"),
           py::arg("cost"))
      .def_readwrite("campaign", &BidEntry::campaign)
      .def_readwrite("revenue", &BidEntry::revenue)
      .def_readwrite("cost", &BidEntry::cost);

  py::class_<Impression>(m, "Impression")
      .def(py::init<>())
      .def(py::init([](std::string id, std::string user, std::vector<BidEntry> entries) {
             Impression imp;
             imp.id = std::move(id);
             imp.user = std::move(user);
             imp.entries = std::move(entries);
             return imp;
           }),
           py::arg("id"), py::arg("user"), py::arg("entries"))
      .def_readwrite("id", &Impression::id)
      .def_readwrite("user", &Impression::user)
      .def_readwrite("entries", &Impression::entries);

  py::class_<Campaign>(m, "Campaign")
      .def(py::init([](std::string id, Money budget, std::optional<std::int32_t> fcap,
                       bool is_house) {
             Campaign c;
             c.id = std::move(id);
             c.budget = budget;
             c.fcap = fcap;
             c.is_house = is_house;
             return c;
           }),
           py::arg("id"), py::arg("budget") = 0, py::arg("fcap") = std::nullopt,
           py::arg("is_house") = false)
      .def_readwrite("id", &Campaign::id)
      .def_readwrite("budget", &Campaign::budget)
      .def_readwrite("spent", &Campaign::spent)
      .def_readwrite("fcap", &Campaign::fcap)
      .def_readwrite("is_house", &Campaign::is_house)
      .def("remaining", &Campaign::remaining);

  py::class_<CampaignBook>(m, "CampaignBook")
      .def(py::init<std::vector<Campaign>>())
      .def("__len__", &CampaignBook::size)
      .def("at", [](const CampaignBook& b, std::int32_t i) { return b.at(i); })
      .def("index_of", &CampaignBook::index_of)
      .def("house_index", &CampaignBook::house_index);

  py::class_<DualPriceVector>(m, "DualPriceVector")
      .def(py::init([](std::vector<double> prices, double price_cap) {
             DualPriceVector d;
             d.prices = std::move(prices);
             d.price_cap = price_cap;
             return d;
           }),
           py::arg("prices"), py::arg("price_cap"))
      .def_readwrite("prices", &DualPriceVector::prices)
      .def_readwrite("price_cap", &DualPriceVector::price_cap);

  py::class_<PolicyConfig>(m, "PolicyConfig")
      .def(py::init<>())
      .def_readwrite("kind", &PolicyConfig::kind)
      .def_readwrite("initial_prices", &PolicyConfig::initial_prices)
      .def_readwrite("log_weight", &PolicyConfig::log_weight)
      .def_readwrite("kappa", &PolicyConfig::kappa)
      .def_readwrite("horizon", &PolicyConfig::horizon)
      .def_readwrite("epsilon_floor", &PolicyConfig::epsilon_floor);

  py::class_<Decision>(m, "Decision")
      .def_readonly("impression_id", &Decision::impression_id)
      .def_readonly("user", &Decision::user)
      .def_readonly("chosen", &Decision::chosen)
      .def_readonly("score", &Decision::score)
      .def_readonly("revenue", &Decision::revenue)
      .def_readonly("cost", &Decision::cost);

  m.def("to_currency", &to_currency);
  m.def("money_from_currency", &money_from_currency);
  m.def("validate_instance", [](const std::vector<Impression>& imps, const CampaignBook& book) {
    const auto issue = validate_instance(imps, book);
    return issue ? std::optional<std::string>(issue->detail) : std::nullopt;
  });

  // lp
  m.def(
      "scale_budgets",
      [](std::vector<double> b, double eps, bool proportional) {
        return lp::scale_budgets(b, eps,
                                 proportional ? lp::BudgetScaling::proportional
                                              : lp::BudgetScaling::conservative);
      },
      py::arg("budgets"), py::arg("epsilon"), py::arg("proportional") = false);
  m.def(
      "estimate_initial_duals",
      [](const std::vector<Impression>& sample, const CampaignBook& book, double epsilon,
         double tol, bool proportional, std::optional<double> price_cap) {
        return lp::estimate_initial_duals(sample, book, epsilon, tol,
                                          proportional ? lp::BudgetScaling::proportional
                                                       : lp::BudgetScaling::conservative,
                                          price_cap);
      },
      py::arg("sample"), py::arg("book"), py::arg("epsilon"), py::arg("tol") = 1e-9,
      py::arg("proportional") = false, py::arg("price_cap") = std::nullopt);
  m.def("reduced_price", &lp::reduced_price);
  m.def("bid_budget_ratio", [](const std::vector<Impression>& s, const CampaignBook& b) {
    return lp::bid_budget_ratio(s, b);
  });
  m.def(
      "offline_optimum",
      [](const std::vector<Impression>& s, const CampaignBook& b, double tol) {
        return lp::offline_optimum(s, b, tol);
      },
      py::arg("stream"), py::arg("book"), py::arg("tol") = 1e-9);

  // risk
  py::class_<risk::ValueFunctionSpec>(m, "ValueFunctionSpec")
      .def(py::init<>())
      .def_readwrite("kind", &risk::ValueFunctionSpec::kind)
      .def_readwrite("price_estimate", &risk::ValueFunctionSpec::price_estimate)
      .def_readwrite("budget", &risk::ValueFunctionSpec::budget)
      .def_readwrite("log_weight", &risk::ValueFunctionSpec::log_weight)
      .def_readwrite("kappa", &risk::ValueFunctionSpec::kappa)
      .def_readwrite("served", &risk::ValueFunctionSpec::served)
      .def_readwrite("horizon", &risk::ValueFunctionSpec::horizon)
      .def_readwrite("epsilon_floor", &risk::ValueFunctionSpec::epsilon_floor)
      .def_readwrite("price_cap", &risk::ValueFunctionSpec::price_cap);

  m.def("value", &risk::value);
  m.def("value_derivative", &risk::value_derivative);
  m.def("theta", [](double collected, const std::vector<double>& remaining,
                    const risk::ValueFunctionSpec& spec) {
    return risk::theta(collected, remaining, spec);
  });

  py::class_<risk::PenaltyInput>(m, "PenaltyInput")
      .def(py::init([](std::vector<double> pe, std::vector<double> ps, std::vector<double> b) {
             return risk::PenaltyInput{std::move(pe), std::move(ps), std::move(b)};
           }),
           py::arg("price_estimate"), py::arg("expected_price"), py::arg("budget"));

  m.def("penalty_linear", &risk::penalty_linear);
  m.def("penalty_log", &risk::penalty_log);
  m.def("penalty_exponential", &risk::penalty_exponential);
  m.def(
      "penalty_numeric",
      [](const risk::ValueFunctionSpec& spec, const std::vector<double>& p_star, int grid) {
        return risk::penalty_numeric(spec, p_star, grid);
      },
      py::arg("spec"), py::arg("expected_price"), py::arg("grid_resolution") = 10000);

  // engine
  py::class_<engine::EngineState>(m, "EngineState")
      .def_readonly("served", &engine::EngineState::served)
      .def_property_readonly("collected",
                             [](const engine::EngineState& s) { return s.position.collected; })
      .def_property_readonly("remaining",
                             [](const engine::EngineState& s) { return s.position.remaining; })
      .def_property_readonly("book", [](const engine::EngineState& s) { return s.book; });

  m.def("make_state", &engine::make_state, py::arg("book"), py::arg("policy"),
        py::arg("enforce_caps") = false);
  m.def("effective_price", &engine::effective_price);
  m.def("decide", &engine::decide);
  m.def("apply", &engine::apply);
  m.def(
      "run_stream",
      [](engine::EngineState& state, const std::vector<Impression>& impressions) {
        return engine::run_stream(state, impressions);
      },
      py::arg("state"), py::arg("impressions"));

  // fcap
  m.def("partition_bids",
        [](const std::vector<Impression>& sample, std::int32_t campaign, int n_bins) {
          return fcap::partition_bids(sample, campaign, n_bins);
        });
  m.def("partition_cap",
        [](const std::vector<std::int64_t>& members, const std::vector<Impression>& sample,
           std::int32_t cap) { return fcap::partition_cap(members, sample, cap); });

  // synth + harness
  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("n_campaigns", &SynthSpec::n_campaigns)
      .def_readwrite("n_impressions", &SynthSpec::n_impressions)
      .def_readwrite("n_users", &SynthSpec::n_users)
      .def_readwrite("sparsity", &SynthSpec::sparsity)
      .def_readwrite("drift", &SynthSpec::drift)
      .def_readwrite("budget_tightness", &SynthSpec::budget_tightness)
      .def_readwrite("budget_spread", &SynthSpec::budget_spread)
      .def_readwrite("value_sigma", &SynthSpec::value_sigma)
      .def_readwrite("base_value", &SynthSpec::base_value)
      .def_readwrite("house", &SynthSpec::house)
      .def_readwrite("fcap_rate", &SynthSpec::fcap_rate)
      .def_readwrite("fcap_min", &SynthSpec::fcap_min)
      .def_readwrite("fcap_max", &SynthSpec::fcap_max);

  m.def("synth_generate", &synth_generate, py::arg("spec"), py::arg("seed"));

  py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("impressions_path", &harness::ExperimentConfig::impressions_path)
      .def_readwrite("campaigns_path", &harness::ExperimentConfig::campaigns_path)
      .def_readwrite("synth", &harness::ExperimentConfig::synth)
      .def_readwrite("delta", &harness::ExperimentConfig::delta)
      .def_readwrite("epsilon", &harness::ExperimentConfig::epsilon)
      .def_readwrite("policies", &harness::ExperimentConfig::policies)
      .def_readwrite("reverse_stream", &harness::ExperimentConfig::reverse_stream)
      .def_readwrite("rolling_periods", &harness::ExperimentConfig::rolling_periods)
      .def_readwrite("fcap_mode", &harness::ExperimentConfig::fcap_mode)
      .def_readwrite("n_bins", &harness::ExperimentConfig::n_bins)
      .def_readwrite("seed", &harness::ExperimentConfig::seed)
      .def_readwrite("log_weight", &harness::ExperimentConfig::log_weight)
      .def_readwrite("kappa", &harness::ExperimentConfig::kappa)
      .def_readwrite("price_cap", &harness::ExperimentConfig::price_cap)
      .def_readwrite("horizon", &harness::ExperimentConfig::horizon)
      .def_readwrite("split_fraction", &harness::ExperimentConfig::split_fraction)
      .def_readwrite("series_points", &harness::ExperimentConfig::series_points)
      .def_readwrite("tol", &harness::ExperimentConfig::tol)
      .def_readwrite("include_lp_bound", &harness::ExperimentConfig::include_lp_bound)
      .def_readwrite("output_dir", &harness::ExperimentConfig::output_dir);

  m.def("run_experiment", [](const harness::ExperimentConfig& cfg) {
    const harness::Report r = harness::run_experiment(cfg);
    return harness::report_to_json(r, cfg);
  });
  m.def(
      "dual_stability_study",
      [](const std::vector<Impression>& stream, const CampaignBook& book,
         const std::vector<std::int64_t>& sizes, std::uint64_t seed, double tol) {
        const auto res = harness::dual_stability_study(stream, book, sizes, seed, tol);
        return py::make_tuple(res.sizes, res.duals, res.bid_counts);
      },
      py::arg("stream"), py::arg("book"), py::arg("sizes"), py::arg("seed"),
      py::arg("tol") = 1e-9);
}
