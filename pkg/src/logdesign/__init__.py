"""Logging-policy design for low-error off-policy evaluation."""

from .design import (
    DesignReport,
    ShrinkageFit,
    TargetEnsemble,
    apply_shrinkage,
    design_known_mu_minimax,
    design_match_target,
    design_neyman,
    design_pseudo_target,
    design_uniform,
    fit_shrinkage,
    sufficiency_threshold,
)
from .env import (
    Environment,
    GeometricSpec,
    RewardModel,
    exact_model,
    make_geometric_env,
    make_linear_env,
    make_noisy_model,
)
from .evaluation import (
    LoggedDataset,
    McSummary,
    MseBreakdown,
    closed_form_mse,
    ipw_estimate,
    monte_carlo_mse,
    on_policy_mse,
    policy_value,
    simulate_dataset,
    worst_case_mse,
)
from .experiments import (
    ExperimentConfig,
    ResultRow,
    builtin_configs,
    run_experiment,
    summarize,
)
from .policy import (
    GreedinessSpec,
    Policy,
    build_policy,
    explicit_policy,
    mix_policies,
    power_normalized_policy,
    softmax_policy,
    top_k_policy,
    truncated_policy,
    uniform_policy,
)

__all__ = [
    "DesignReport",
    "Environment",
    "ExperimentConfig",
    "GeometricSpec",
    "GreedinessSpec",
    "LoggedDataset",
    "McSummary",
    "MseBreakdown",
    "Policy",
    "ResultRow",
    "RewardModel",
    "ShrinkageFit",
    "TargetEnsemble",
    "apply_shrinkage",
    "build_policy",
    "builtin_configs",
    "closed_form_mse",
    "design_known_mu_minimax",
    "design_match_target",
    "design_neyman",
    "design_pseudo_target",
    "design_uniform",
    "exact_model",
    "explicit_policy",
    "fit_shrinkage",
    "ipw_estimate",
    "make_geometric_env",
    "make_linear_env",
    "make_noisy_model",
    "mix_policies",
    "monte_carlo_mse",
    "on_policy_mse",
    "policy_value",
    "power_normalized_policy",
    "run_experiment",
    "simulate_dataset",
    "softmax_policy",
    "summarize",
    "sufficiency_threshold",
    "top_k_policy",
    "truncated_policy",
    "uniform_policy",
    "worst_case_mse",
]

__version__ = "0.1.0"
