"""Stochastic policies over actions and the soft-greedy constructor families.

A :class:`Policy` stores the full propensity matrix ``probs[a, x]``.  The
soft-greedy families map a reward model to a policy through one greediness
knob: ``top_k`` (uniform over the k best estimates), ``softmax`` (Boltzmann
weights with inverse temperature alpha), ``power_normalized`` (weights
proportional to ``mu_hat**degree``), plus the truncated combinations
``top_k_pn`` and ``top_k_sm`` that renormalize the smooth weights over the
top-k set only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .env import SIMPLEX_ATOL, RewardModel

VALID_FAMILIES = ("top_k", "softmax", "power_normalized", "top_k_pn", "top_k_sm")


@dataclass(frozen=True)
class Policy:
    """Per-context probability distribution over actions, shape (A, X)."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] < 1 or probs.shape[1] < 1:
            raise ValueError(f"probs must be a nonempty (action, context) matrix, got shape {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probs entries must be finite and nonnegative")
        sums = probs.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > SIMPLEX_ATOL):
            worst = float(np.max(np.abs(sums - 1.0)))
            raise ValueError(f"per-context probabilities must sum to 1 (worst deviation {worst:.3e})")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n_actions(self) -> int:
        return self.probs.shape[0]

    @property
    def n_contexts(self) -> int:
        return self.probs.shape[1]

    @property
    def support(self) -> np.ndarray:
        """Boolean (A, X) mask of strictly positive propensities."""
        return self.probs > 0

    def support_of(self, x: int) -> np.ndarray:
        return np.flatnonzero(self.probs[:, x] > 0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "actions": list(range(self.n_actions)),
                "contexts": list(range(self.n_contexts)),
                "probs": self.probs.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Policy":
        return cls(probs=np.asarray(json.loads(text)["probs"], dtype=np.float64))


@dataclass(frozen=True)
class GreedinessSpec:
    """One soft-greedy family member: a family name plus its parameter(s)."""

    family: str
    k: Optional[int] = None
    alpha: Optional[float] = None
    degree: Optional[float] = None

    def __post_init__(self):
        if self.family not in VALID_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {VALID_FAMILIES}")
        if self.family in ("top_k", "top_k_pn", "top_k_sm") and self.k is None:
            raise ValueError(f"family {self.family!r} requires k")
        if self.family in ("softmax", "top_k_sm") and self.alpha is None:
            raise ValueError(f"family {self.family!r} requires alpha")
        if self.family in ("power_normalized", "top_k_pn") and self.degree is None:
            raise ValueError(f"family {self.family!r} requires degree")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")
        if self.alpha is not None and not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError("alpha must be finite and nonnegative")
        if self.degree is not None and not (np.isfinite(self.degree) and self.degree >= 0):
            raise ValueError("degree must be finite and nonnegative")


def _topk_orders(mu_hat: np.ndarray) -> np.ndarray:
    # Stable sort on -mu_hat: ties resolve to the lower action index.
    return np.argsort(-mu_hat, axis=0, kind="stable")


def top_k_policy(model: RewardModel, k: int) -> Policy:
    """Uniform probability 1/k on the k actions with highest mu_hat per context."""
    a = model.n_actions
    if not 1 <= k <= a:
        raise ValueError(f"k must lie in [1, {a}], got {k}")
    order = _topk_orders(model.mu_hat)
    probs = np.zeros_like(model.mu_hat)
    cols = np.arange(model.n_contexts)
    probs[order[:k, :], cols] = 1.0 / k
    return Policy(probs=probs)


def softmax_policy(model: RewardModel, alpha: float) -> Policy:
    """Probabilities proportional to exp(alpha * mu_hat).

    Computed with per-context max subtraction so large alpha cannot
    overflow.  Support is full whenever alpha * (max - min estimate) stays
    below ~708; beyond that the smallest weights underflow float64 to zero.
    """
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    z = alpha * (model.mu_hat - model.mu_hat.max(axis=0, keepdims=True))
    w = np.exp(z)
    return Policy(probs=w / w.sum(axis=0, keepdims=True))


def power_normalized_policy(model: RewardModel, degree: float) -> Policy:
    """Probabilities proportional to mu_hat**degree; the floor clamp keeps
    every weight positive, so support is always full."""
    if not np.isfinite(degree) or degree < 0:
        raise ValueError("degree must be finite and nonnegative")
    # Divide by the per-context max before exponentiating so large degrees
    # cannot underflow every weight at once.
    ratio = model.mu_hat / model.mu_hat.max(axis=0, keepdims=True)
    w = ratio**degree
    return Policy(probs=w / w.sum(axis=0, keepdims=True))


def truncated_policy(
    model: RewardModel,
    k: int,
    alpha: Optional[float] = None,
    degree: Optional[float] = None,
) -> Policy:
    """Restrict to the per-context top-k set, then apply softmax(alpha) or
    power(degree) weights renormalized over that set; zero mass outside."""
    a = model.n_actions
    if not 1 <= k <= a:
        raise ValueError(f"k must lie in [1, {a}], got {k}")
    if (alpha is None) == (degree is None):
        raise ValueError("exactly one of alpha (softmax) or degree (power) must be given")
    order = _topk_orders(model.mu_hat)
    cols = np.arange(model.n_contexts)
    mask = np.zeros(model.mu_hat.shape, dtype=bool)
    mask[order[:k, :], cols] = True
    # The top-k set always contains the per-context argmax, so the global
    # column max is the right stabilizer for both inner weightings.
    colmax = model.mu_hat.max(axis=0, keepdims=True)
    if alpha is not None:
        w = np.where(mask, np.exp(alpha * (model.mu_hat - colmax)), 0.0)
    else:
        w = np.where(mask, (model.mu_hat / colmax) ** degree, 0.0)
    return Policy(probs=w / w.sum(axis=0, keepdims=True))


def build_policy(model: RewardModel, spec: GreedinessSpec) -> Policy:
    """Construct the policy named by a GreedinessSpec."""
    if spec.family == "top_k":
        return top_k_policy(model, spec.k)
    if spec.family == "softmax":
        return softmax_policy(model, spec.alpha)
    if spec.family == "power_normalized":
        return power_normalized_policy(model, spec.degree)
    if spec.family == "top_k_pn":
        return truncated_policy(model, spec.k, degree=spec.degree)
    return truncated_policy(model, spec.k, alpha=spec.alpha)


def mix_policies(weights: Sequence[float], policies: Sequence[Policy]) -> Policy:
    """Convex combination of policies (plumbing for ensemble experiments)."""
    w = np.asarray(weights, dtype=np.float64)
    if len(policies) != w.shape[0] or w.ndim != 1 or w.shape[0] < 1:
        raise ValueError("need one weight per policy")
    if np.any(w < 0) or abs(w.sum() - 1.0) > SIMPLEX_ATOL:
        raise ValueError("weights must be a probability vector")
    shape = policies[0].probs.shape
    for p in policies:
        if p.probs.shape != shape:
            raise ValueError("policies must share the same (action, context) shape")
    # A convex combination of simplex columns is already on the simplex; no
    # renormalization, so a weight vector like (1, 0) returns the first
    # policy's probabilities unchanged.
    mixed = np.zeros(shape)
    for wi, p in zip(w, policies):
        mixed += wi * p.probs
    return Policy(probs=mixed)


def uniform_policy(n_actions: int, n_contexts: int) -> Policy:
    return Policy(probs=np.full((n_actions, n_contexts), 1.0 / n_actions))


def explicit_policy(probs) -> Policy:
    return Policy(probs=np.asarray(probs, dtype=np.float64))
