"""IPW estimation, exact MSE decomposition, and Monte Carlo replication.

The closed-form decomposition treats context arrivals as exogenous: squared
bias collects the target mass falling outside the logging support, and the
variance term aggregates per-context single-draw variances divided by the
sample size.  ``worst_case_mse`` searches the adversarial (target, reward)
pair over deterministic targets and a reward grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .env import Environment
from .policy import Policy

# Propensities at or below this are treated as outside the logging support,
# avoiding catastrophic division by denormal-sized probabilities.
SUPPORT_EPS = 1e-15


@dataclass(frozen=True)
class LoggedDataset:
    """Ordered (context, action, reward) triples plus the policy that logged them."""

    contexts: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    logging_policy: Policy

    def __post_init__(self):
        contexts = np.asarray(self.contexts, dtype=np.int64)
        actions = np.asarray(self.actions, dtype=np.int64)
        rewards = np.asarray(self.rewards, dtype=np.int64)
        for name, arr in (("contexts", contexts), ("actions", actions), ("rewards", rewards)):
            if arr.ndim != 1:
                raise ValueError(f"{name} must be 1-d")
            arr.setflags(write=False)
        if not (len(contexts) == len(actions) == len(rewards)):
            raise ValueError("contexts, actions, rewards must have equal length")
        if len(contexts) == 0:
            raise ValueError("dataset must contain at least one record")
        if np.any((rewards != 0) & (rewards != 1)):
            raise ValueError("rewards must be 0 or 1")
        propensities = self.logging_policy.probs[actions, contexts]
        if np.any(propensities <= 0):
            bad = int(np.argmax(propensities <= 0))
            raise ValueError(
                f"record {bad} logs action {actions[bad]} outside the logging support "
                f"at context {contexts[bad]}"
            )
        object.__setattr__(self, "contexts", contexts)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "rewards", rewards)

    @property
    def n(self) -> int:
        return len(self.contexts)


@dataclass(frozen=True)
class MseBreakdown:
    """Squared bias, variance (including the 1/n factor), and their sum."""

    bias_sq: float
    variance: float
    mse: float
    n: int

    def to_dict(self) -> dict:
        return {"bias_sq": self.bias_sq, "variance": self.variance, "mse": self.mse, "n": self.n}


@dataclass(frozen=True)
class McSummary:
    """Replicated sampling of the IPW estimator against the true value."""

    replications: int
    estimates: np.ndarray
    empirical_mse: float
    empirical_mean: float

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "estimates": self.estimates.tolist(),
            "empirical_mse": self.empirical_mse,
            "empirical_mean": self.empirical_mean,
        }


def _check_shapes(env: Environment, *policies: Policy):
    for p in policies:
        if p.probs.shape != env.mu.shape:
            raise ValueError(f"policy shape {p.probs.shape} does not match environment shape {env.mu.shape}")


def policy_value(env: Environment, policy: Policy) -> float:
    """Expected reward: sum_x Pr(x) sum_a pi(a|x) mu(a,x)."""
    _check_shapes(env, policy)
    return float(env.arrival_probs @ np.sum(policy.probs * env.mu, axis=0))


def ipw_estimate(data: LoggedDataset, target: Policy) -> float:
    """Propensity-weighted mean reward: (1/N) sum_i [pi_t/pi_l](A_i|X_i) R_i."""
    if target.probs.shape != data.logging_policy.probs.shape:
        raise ValueError("target and logging policies must share a shape")
    logged = data.logging_policy.probs[data.actions, data.contexts]
    if np.any(logged <= 0):
        raise ValueError("dataset contains a record outside the logging support")
    ratios = target.probs[data.actions, data.contexts] / logged
    return float(np.mean(ratios * data.rewards))


def closed_form_mse(env: Environment, target: Policy, logging: Policy, n: int) -> MseBreakdown:
    """Exact bias/variance of the IPW estimate under the given design.

    bias_sq: squared total target mass-weighted reward outside the logging
    support. variance: (1/n) * sum_x Pr(x) [sum_supp pi_t^2 mu / pi_l -
    (sum_supp pi_t mu)^2].
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_shapes(env, target, logging)
    supp = logging.probs > SUPPORT_EPS
    pt_mu = target.probs * env.mu

    bias_terms = np.where(supp, 0.0, pt_mu).sum(axis=0)
    bias = float(env.arrival_probs @ bias_terms)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_terms = np.where(supp, target.probs**2 * env.mu / logging.probs, 0.0)
    second_moment = ratio_terms.sum(axis=0)
    first_moment = np.where(supp, pt_mu, 0.0).sum(axis=0)
    variance = float(env.arrival_probs @ (second_moment - first_moment**2)) / n

    bias_sq = bias * bias
    return MseBreakdown(bias_sq=bias_sq, variance=variance, mse=bias_sq + variance, n=n)


def on_policy_mse(env: Environment, target: Policy, n: int) -> MseBreakdown:
    """Closed-form error of running the target itself and averaging rewards.

    The on-policy sample mean is the IPW estimate with logging = target, so
    this is closed_form_mse(env, target, target, n); bias is zero and the
    variance is the aggregated per-context Bernoulli mixture variance.
    """
    return closed_form_mse(env, target, target, n)


def simulate_dataset(env: Environment, logging: Policy, n: int, seed: int) -> LoggedDataset:
    """Draw n i.i.d. records: context ~ arrival_probs, action ~ logging(.|x),
    reward ~ Bernoulli(mu[a, x]).  All three streams use inverse-CDF draws on
    uniforms from one seeded generator, so output is reproducible bit-for-bit.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_shapes(env, logging)
    rng = np.random.default_rng(seed)
    u_ctx = rng.random(n)
    u_act = rng.random(n)
    u_rew = rng.random(n)

    ctx_cdf = np.cumsum(env.arrival_probs)
    contexts = np.minimum(np.searchsorted(ctx_cdf, u_ctx, side="right"), env.n_contexts - 1)

    actions = np.empty(n, dtype=np.int64)
    act_cdf = np.cumsum(logging.probs, axis=0)
    for x in np.unique(contexts):
        mask = contexts == x
        idx = np.searchsorted(act_cdf[:, x], u_act[mask], side="right")
        actions[mask] = np.minimum(idx, env.n_actions - 1)

    rewards = (u_rew < env.mu[actions, contexts]).astype(np.int64)
    return LoggedDataset(contexts=contexts, actions=actions, rewards=rewards, logging_policy=logging)


def monte_carlo_mse(
    env: Environment,
    target: Policy,
    logging: Policy,
    n: int,
    replications: int,
    seed: int,
) -> McSummary:
    """Replicate simulate + estimate; empirical MSE is the mean squared
    deviation from the true target value.  Replication j uses seed + j, so
    results do not depend on execution order."""
    if replications < 1:
        raise ValueError("replications must be at least 1")
    truth = policy_value(env, target)
    estimates = np.empty(replications)
    for j in range(replications):
        data = simulate_dataset(env, logging, n, seed + j)
        estimates[j] = ipw_estimate(data, target)
    estimates.setflags(write=False)
    return McSummary(
        replications=replications,
        estimates=estimates,
        empirical_mse=float(np.mean((estimates - truth) ** 2)),
        empirical_mean=float(np.mean(estimates)),
    )


def _mu_grid(step: float) -> np.ndarray:
    if not 0.0 < step < 1.0:
        raise ValueError("mu_grid_step must lie in (0, 1)")
    grid = np.arange(0.0, 1.0, step)
    return np.unique(np.concatenate([grid, [0.0, 1.0]]))


def worst_case_mse(
    arrival_probs,
    logging: Policy,
    n: int,
    mu_grid_step: float = 1e-3,
) -> float:
    """Maximum closed-form MSE over deterministic targets and gridded rewards.

    Per context the adversary either (a) points the target at an off-support
    action, contributing reward mass to the shared squared-bias term (maximal
    at mu = 1), or (b) points it at a supported action, contributing
    max_mu (mu/pi_l - mu^2) to the variance.  The per-context choices couple
    only through the squared bias sum, so contexts are assigned to the bias
    or variance side by exhaustive subset search.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    pr = np.asarray(arrival_probs, dtype=np.float64)
    if pr.shape != (logging.n_contexts,):
        raise ValueError("arrival_probs must have one entry per logging-policy context")
    grid = _mu_grid(mu_grid_step)

    n_ctx = logging.n_contexts
    if n_ctx > 16:
        raise ValueError("worst-case search enumerates context subsets; limited to 16 contexts")

    var_best = np.empty(n_ctx)
    can_bias = np.empty(n_ctx, dtype=bool)
    for x in range(n_ctx):
        col = logging.probs[:, x]
        supported = col > SUPPORT_EPS
        can_bias[x] = bool(np.any(~supported))
        # mu/p - mu^2 is pointwise largest at the smallest supported
        # propensity, so only that action needs scanning.
        p_min = float(col[supported].min())
        var_best[x] = float(np.max(grid / p_min - grid**2))

    best_total = 0.0
    bias_candidates = [x for x in range(n_ctx) if can_bias[x]]
    for size in range(len(bias_candidates) + 1):
        for subset in combinations(bias_candidates, size):
            chosen = np.zeros(n_ctx, dtype=bool)
            chosen[list(subset)] = True
            # Off-support reward fixed at the grid max (1.0) maximizes bias.
            bias = float(np.sum(pr[chosen]))
            variance = float(np.sum(pr[~chosen] * var_best[~chosen])) / n
            best_total = max(best_total, bias * bias + variance)
    return best_total
