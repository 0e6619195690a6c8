"""Risk-based online impression allocation: python surface over the C++ core."""

from adalloc._core import (
    BidEntry,
    Campaign,
    CampaignBook,
    Decision,
    DualPriceVector,
    ExperimentConfig,
    Impression,
    PenaltyInput,
    PolicyConfig,
    PolicyKind,
    SynthSpec,
    ValueFunctionSpec,
    EngineState,
    apply,
    bid_budget_ratio,
    decide,
    dual_stability_study,
    effective_price,
    estimate_initial_duals,
    make_state,
    money_from_currency,
    offline_optimum,
    partition_bids,
    partition_cap,
    penalty_exponential,
    penalty_linear,
    penalty_log,
    penalty_numeric,
    reduced_price,
    run_experiment,
    run_stream,
    scale_budgets,
    synth_generate,
    theta,
    to_currency,
    validate_instance,
    value,
    value_derivative,
)

__all__ = [
    "BidEntry",
    "Campaign",
    "CampaignBook",
    "Decision",
    "DualPriceVector",
    "EngineState",
    "ExperimentConfig",
    "Impression",
    "PenaltyInput",
    "PolicyConfig",
    "PolicyKind",
    "SynthSpec",
    "ValueFunctionSpec",
    "apply",
    "bid_budget_ratio",
    "decide",
    "dual_stability_study",
    "effective_price",
    "estimate_initial_duals",
    "make_state",
    "money_from_currency",
    "offline_optimum",
    "partition_bids",
    "partition_cap",
    "penalty_exponential",
    "penalty_linear",
    "penalty_log",
    "penalty_numeric",
    "reduced_price",
    "run_experiment",
    "run_stream",
    "scale_budgets",
    "synth_generate",
    "theta",
    "to_currency",
    "validate_instance",
    "value",
    "value_derivative",
]
