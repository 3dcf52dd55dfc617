"""Finite contextual-bandit environments and synthetic reward-model generators.

An :class:`Environment` is the ground truth of a simulation: a finite set of
contexts arriving with known probabilities, a finite action set, and a matrix
of Bernoulli success probabilities ``mu[a, x]``.  A :class:`RewardModel` is an
estimate of that matrix, possibly corrupted by multiplicative noise and always
clamped to ``[floor, 1]`` so that downstream constructions (power weighting,
square roots, propensity ratios) never divide by zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SIMPLEX_ATOL = 1e-9


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d (action, context) matrix, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} needs at least one action and one context, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Environment:
    """Ground-truth bandit environment.

    ``mu`` has shape ``(n_actions, n_contexts)``; ``mu[a, x]`` is the
    probability of reward 1 when action ``a`` is shown in context ``x``.
    Instances are immutable and safe to share across workers.
    """

    contexts: tuple
    arrival_probs: np.ndarray
    actions: tuple
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "actions", tuple(self.actions))
        mu = _as_matrix(self.mu, "mu")
        object.__setattr__(self, "mu", mu)
        arrival = np.asarray(self.arrival_probs, dtype=np.float64)
        arrival.setflags(write=False)
        object.__setattr__(self, "arrival_probs", arrival)

        if mu.shape != (len(self.actions), len(self.contexts)):
            raise ValueError(
                f"mu shape {mu.shape} does not match "
                f"({len(self.actions)} actions, {len(self.contexts)} contexts)"
            )
        if arrival.shape != (len(self.contexts),):
            raise ValueError("arrival_probs must have one entry per context")
        if np.any(arrival < 0):
            raise ValueError("arrival_probs must be nonnegative")
        if abs(arrival.sum() - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"arrival_probs sum to {arrival.sum()!r}, not 1")
        if np.any(mu < 0) or np.any(mu > 1):
            raise ValueError("mu entries must lie in [0, 1]")

    @property
    def n_actions(self) -> int:
        return self.mu.shape[0]

    @property
    def n_contexts(self) -> int:
        return self.mu.shape[1]

    def to_json(self) -> str:
        doc = {
            "contexts": list(self.contexts),
            "arrival_probs": self.arrival_probs.tolist(),
            "actions": list(self.actions),
            "mu": self.mu.tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Environment":
        doc = json.loads(text)
        return cls(
            contexts=tuple(doc["contexts"]),
            arrival_probs=np.asarray(doc["arrival_probs"], dtype=np.float64),
            actions=tuple(doc["actions"]),
            mu=np.asarray(doc["mu"], dtype=np.float64),
        )


@dataclass(frozen=True)
class RewardModel:
    """Estimated reward matrix, clamped entrywise to ``[floor, 1]``.

    The positive floor keeps every estimate strictly positive so that
    power-normalized weights and the square roots used by variance-optimal
    allocations are always defined.
    """

    mu_hat: np.ndarray
    floor: float = 1e-6

    def __post_init__(self):
        mat = _as_matrix(self.mu_hat, "mu_hat")
        object.__setattr__(self, "mu_hat", mat)
        if not self.floor > 0:
            raise ValueError("floor must be positive")
        if np.any(mat < self.floor) or np.any(mat > 1.0):
            raise ValueError("mu_hat entries must lie in [floor, 1]")

    @property
    def n_actions(self) -> int:
        return self.mu_hat.shape[0]

    @property
    def n_contexts(self) -> int:
        return self.mu_hat.shape[1]

    def to_json(self) -> str:
        return json.dumps({"mu_hat": self.mu_hat.tolist(), "floor": self.floor})

    @classmethod
    def from_json(cls, text: str) -> "RewardModel":
        doc = json.loads(text)
        return cls(mu_hat=np.asarray(doc["mu_hat"], dtype=np.float64), floor=doc["floor"])


@dataclass(frozen=True)
class GeometricSpec:
    """Parameters of the geometric reward family: per context the i-th best
    action (under a random permutation) has mu = scale * decay**i, i >= 1."""

    scale: float
    decay: float
    seed: int = 0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not 0.0 <= self.decay <= 1.0:
            raise ValueError("decay must lie in [0, 1]")
        if self.scale * self.decay > 1.0:
            raise ValueError(f"scale * decay = {self.scale * self.decay} exceeds 1; mu would leave [0, 1]")


def _uniform_arrival(n_contexts: int) -> np.ndarray:
    return np.full(n_contexts, 1.0 / n_contexts)


def make_geometric_env(
    n_contexts: int,
    n_actions: int,
    spec: GeometricSpec,
    arrival_probs=None,
) -> Environment:
    """Generate an environment with geometrically decaying rewards.

    For every context a fresh random permutation of actions is drawn from the
    seeded generator and the permuted action at position i (1-based) receives
    mu = scale * decay**i.  Identical inputs yield bit-identical outputs.
    """
    if n_contexts < 1 or n_actions < 1:
        raise ValueError("n_contexts and n_actions must be at least 1")
    rng = np.random.default_rng(spec.seed)
    ladder = spec.scale * spec.decay ** np.arange(1, n_actions + 1, dtype=np.float64)
    mu = np.empty((n_actions, n_contexts))
    for x in range(n_contexts):
        mu[rng.permutation(n_actions), x] = ladder
    if arrival_probs is None:
        arrival_probs = _uniform_arrival(n_contexts)
    return Environment(
        contexts=tuple(range(n_contexts)),
        arrival_probs=arrival_probs,
        actions=tuple(range(n_actions)),
        mu=mu,
    )


def make_linear_env(
    n_contexts: int,
    n_actions: int,
    top_value: float,
    seed: int = 0,
    arrival_probs=None,
) -> Environment:
    """Generate an environment whose per-context rewards fall on the equally
    spaced lattice from ``top_value`` down to 0, assigned through a random
    permutation of the actions."""
    if n_contexts < 1 or n_actions < 1:
        raise ValueError("n_contexts and n_actions must be at least 1")
    if not 0.0 < top_value <= 1.0:
        raise ValueError("top_value must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    ladder = np.linspace(top_value, 0.0, n_actions)
    mu = np.empty((n_actions, n_contexts))
    for x in range(n_contexts):
        mu[rng.permutation(n_actions), x] = ladder
    if arrival_probs is None:
        arrival_probs = _uniform_arrival(n_contexts)
    return Environment(
        contexts=tuple(range(n_contexts)),
        arrival_probs=arrival_probs,
        actions=tuple(range(n_actions)),
        mu=mu,
    )


def make_noisy_model(
    env: Environment,
    noise_sd: float,
    floor: float = 1e-6,
    seed: int = 0,
) -> RewardModel:
    """Corrupt the true rewards with multiplicative Gaussian noise.

    mu_hat[a, x] = clamp(eps[a, x] * mu[a, x], floor, 1) with eps drawn
    i.i.d. from a Gaussian with mean 1 and standard deviation ``noise_sd``.
    The noise parameter is always a standard deviation.
    """
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    eps = rng.normal(1.0, noise_sd, size=env.mu.shape)
    mu_hat = np.clip(eps * env.mu, floor, 1.0)
    return RewardModel(mu_hat=mu_hat, floor=floor)


def exact_model(env: Environment, floor: float = 1e-6) -> RewardModel:
    """Noise-free estimate: the true rewards clamped to [floor, 1]."""
    return RewardModel(mu_hat=np.clip(env.mu, floor, 1.0), floor=floor)
