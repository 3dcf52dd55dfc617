"""Optimal logging-policy constructors for every informational regime.

Which constructor applies depends on what the designer knows at logging time:

====================  =======================  ==============================
target policy         reward matrix            constructor
====================  =======================  ==============================
unknown               unknown                  ``design_uniform``
unknown               known                    ``design_known_mu_minimax``
known                 unknown                  ``design_match_target``
known                 known                    ``design_neyman``
distribution known    known                    ``design_pseudo_target``
====================  =======================  ==============================

When only a noisy reward estimate is available, ``fit_shrinkage`` +
``apply_shrinkage`` regularize it toward the per-context mean before it is
plugged into a constructor; the shrinkage weight is estimated from held-out
logged data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .env import SIMPLEX_ATOL, Environment, RewardModel
from .evaluation import LoggedDataset
from .policy import Policy

REGIME_UNIFORM = "unknown-mu/unknown-target minimax"
REGIME_KNOWN_MU = "known-mu/unknown-target minimax"
REGIME_MATCH_TARGET = "unknown-mu/known-target minimax"
REGIME_NEYMAN = "known-mu/known-target variance-optimal"
REGIME_PSEUDO_TARGET = "known-mu/target-distribution variance-optimal"

# Bisection stopping rule for the known-mu normalizing constant.
_RESIDUAL_TOL = 1e-12
_MAX_BISECTIONS = 200


@dataclass(frozen=True)
class TargetEnsemble:
    """Finite distribution over candidate target policies."""

    policies: Sequence[Policy]
    weights: np.ndarray

    def __post_init__(self):
        policies = tuple(self.policies)
        object.__setattr__(self, "policies", policies)
        w = np.asarray(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if len(policies) < 1 or w.shape != (len(policies),):
            raise ValueError("need one weight per policy")
        if np.any(w < 0) or abs(w.sum() - 1.0) > SIMPLEX_ATOL:
            raise ValueError("ensemble weights must be a probability vector")
        shape = policies[0].probs.shape
        for p in policies:
            if p.probs.shape != shape:
                raise ValueError("ensemble policies must share one (action, context) shape")


@dataclass(frozen=True)
class ShrinkageFit:
    """Empirically estimated shrinkage weight and its ingredients."""

    weight: float
    context_means: np.ndarray
    cov_estimate: float
    var_estimate: float
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("weight must lie in [0, 1]")
        if self.var_estimate < 0:
            raise ValueError("var_estimate must be nonnegative")
        cm = np.asarray(self.context_means, dtype=np.float64)
        cm.setflags(write=False)
        object.__setattr__(self, "context_means", cm)


@dataclass(frozen=True)
class DesignReport:
    """A constructed logging policy plus bookkeeping about how it was built.

    ``normalizing_constants`` carries the per-context constant solved for by
    the known-mu minimax design (None for other regimes).  ``flags`` maps a
    condition name to the list of context indices where it occurred, e.g.
    contexts whose support had to be reduced or defaulted to uniform.
    """

    policy: Policy
    regime: str
    normalizing_constants: Optional[np.ndarray] = None
    flags: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "regime": self.regime,
            "probs": self.policy.probs.tolist(),
            "normalizing_constants": (
                None if self.normalizing_constants is None else self.normalizing_constants.tolist()
            ),
            "flags": {k: list(v) for k, v in self.flags.items()},
        }
        return json.dumps(doc)


def design_uniform(env: Environment) -> DesignReport:
    """Uniform propensities: worst-case optimal with no knowledge at all."""
    probs = np.full(env.mu.shape, 1.0 / env.n_actions)
    return DesignReport(policy=Policy(probs=probs), regime=REGIME_UNIFORM)


def _solve_normalizer(mu_col: np.ndarray) -> float:
    """Root of g(c) = sum_a mu/(c + mu^2) - 1 = 0 over positive-mu actions.

    g is strictly decreasing with g(0) >= 1 (each term 1/mu >= 1) and
    g(sum mu) <= 1, so bisection on [0, sum mu] converges; we stop when the
    residual is below 1e-12 or after 200 halvings.
    """
    lo, hi = 0.0, float(mu_col.sum())

    def g(c: float) -> float:
        return float(np.sum(mu_col / (c + mu_col**2)))

    if abs(g(lo) - 1.0) <= _RESIDUAL_TOL:
        return lo
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val - 1.0) <= _RESIDUAL_TOL:
            return mid
        if val > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def design_known_mu_minimax(env: Environment) -> DesignReport:
    """Worst-case optimal design when rewards are known but the target is not.

    Per context, propensities follow mu/(c + mu^2) with c solved numerically
    so they sum to one.  Zero-reward actions get zero propensity (they
    contribute neither bias nor variance); an all-zero context falls back to
    uniform.  Both situations are flagged in the report.
    """
    probs = np.zeros(env.mu.shape)
    constants = np.zeros(env.n_contexts)
    reduced: list[int] = []
    fallback: list[int] = []
    for x in range(env.n_contexts):
        col = env.mu[:, x]
        positive = col > 0
        if not np.any(positive):
            probs[:, x] = 1.0 / env.n_actions
            constants[x] = np.nan
            fallback.append(x)
            continue
        if not np.all(positive):
            reduced.append(x)
        c = _solve_normalizer(col[positive])
        constants[x] = c
        weights = col[positive] / (c + col[positive] ** 2)
        probs[positive, x] = weights / weights.sum()
    flags = {}
    if reduced:
        flags["reduced_support"] = reduced
    if fallback:
        flags["uniform_fallback"] = fallback
    constants.setflags(write=False)
    return DesignReport(
        policy=Policy(probs=probs),
        regime=REGIME_KNOWN_MU,
        normalizing_constants=constants,
        flags=flags,
    )


def design_match_target(target: Policy) -> DesignReport:
    """With unknown rewards, logging the known target itself is minimax."""
    return DesignReport(policy=target, regime=REGIME_MATCH_TARGET)


def _sqrt_allocation(env: Environment, mass: np.ndarray, regime: str) -> DesignReport:
    """Allocate propensities proportional to mass * sqrt(mu) per context.

    Contexts where every massed action has zero reward get uniform
    propensities over the mass support, flagged as a degenerate fallback.
    """
    weights = mass * np.sqrt(env.mu)
    totals = weights.sum(axis=0)
    probs = np.zeros(env.mu.shape)
    fallback: list[int] = []
    for x in range(env.n_contexts):
        if totals[x] > 0:
            probs[:, x] = weights[:, x] / totals[x]
        else:
            support = mass[:, x] > 0
            probs[support, x] = 1.0 / support.sum()
            fallback.append(x)
    flags = {"uniform_fallback": fallback} if fallback else {}
    return DesignReport(policy=Policy(probs=probs), regime=regime, flags=flags)


def design_neyman(env: Environment, target: Policy) -> DesignReport:
    """Variance-optimal allocation with full knowledge.

    pi_l(a|x) proportional to pi_t(a|x) * sqrt(mu(a, x)), normalized over the
    target support; actions outside the target support get zero mass.
    """
    if target.probs.shape != env.mu.shape:
        raise ValueError("target shape does not match environment")
    return _sqrt_allocation(env, target.probs, REGIME_NEYMAN)


def design_pseudo_target(env: Environment, ensemble: TargetEnsemble) -> DesignReport:
    """Average-case optimal design against a distribution of targets.

    The ensemble is collapsed into the pseudo-target
    sqrt(E[pi_t(a|x)^2]), which then receives the same sqrt-reward
    allocation as a single known target.
    """
    if ensemble.policies[0].probs.shape != env.mu.shape:
        raise ValueError("ensemble shape does not match environment")
    if len(ensemble.policies) == 1 and ensemble.weights[0] == 1.0:
        pseudo = ensemble.policies[0].probs  # exact single-target reduction
    else:
        second_moment = np.zeros(env.mu.shape)
        for w, p in zip(ensemble.weights, ensemble.policies):
            second_moment += w * p.probs**2
        pseudo = np.sqrt(second_moment)
    return _sqrt_allocation(env, pseudo, REGIME_PSEUDO_TARGET)


def fit_shrinkage(model: RewardModel, aux: LoggedDataset) -> ShrinkageFit:
    """Estimate the shrinkage weight from held-out logged data.

    weight = clamp(1 - Cov(mu_hat(x_i, a_i), r_i) / Var(mu_hat(x_i, a_i)), 0, 1)
    over the auxiliary records.  The caller must ensure ``aux`` is disjoint
    from any data used to fit ``model``; reusing training data inflates the
    covariance and biases the weight downward.  Zero variance in the
    predictions carries no cross-pair signal, so the weight degenerates to 1.
    """
    if aux.logging_policy.probs.shape != model.mu_hat.shape:
        raise ValueError("aux dataset shape does not match model")
    values = model.mu_hat[aux.actions, aux.contexts]
    rewards = aux.rewards.astype(np.float64)
    context_means = model.mu_hat.mean(axis=0)
    var = float(np.var(values, ddof=1)) if aux.n > 1 else 0.0
    if var == 0.0:
        return ShrinkageFit(
            weight=1.0,
            context_means=context_means,
            cov_estimate=0.0,
            var_estimate=0.0,
            degenerate=True,
        )
    cov = float(np.cov(values, rewards, ddof=1)[0, 1])
    weight = float(np.clip(1.0 - cov / var, 0.0, 1.0))
    return ShrinkageFit(
        weight=weight,
        context_means=context_means,
        cov_estimate=cov,
        var_estimate=var,
    )


def apply_shrinkage(model: RewardModel, fit: ShrinkageFit) -> RewardModel:
    """Pull each estimate toward its context mean by the fitted weight."""
    if fit.context_means.shape != (model.n_contexts,):
        raise ValueError("fit does not match model shape")
    shrunk = (1.0 - fit.weight) * model.mu_hat + fit.weight * fit.context_means[np.newaxis, :]
    return RewardModel(mu_hat=np.clip(shrunk, model.floor, 1.0), floor=model.floor)


def sufficiency_threshold(env: Environment, x: int, a: int, n: int) -> float:
    """Minimum propensity guaranteeing that sampling (a, x) lowers the MSE.

    Returns 1 / (mu(a, x) * (n * Pr(x) + 1)).  A value above 1 means no
    feasible propensity satisfies the guarantee.  Zero-reward actions add
    neither bias nor variance, so the condition is vacuous and an error is
    raised.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    mu = float(env.mu[a, x])
    pr = float(env.arrival_probs[x])
    if mu <= 0.0:
        raise ValueError(f"threshold undefined: mu({a}, {x}) = 0 contributes no bias")
    if pr <= 0.0:
        raise ValueError(f"context {x} has zero arrival probability")
    return 1.0 / (mu * (n * pr + 1.0))
