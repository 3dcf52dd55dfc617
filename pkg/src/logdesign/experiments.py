"""Declarative experiment configs that regenerate the reference figures.

Each experiment sweeps logging policies against one or more target policies
in a synthetic environment and emits one CSV row per (label, parameter, n,
trial).  The CSV schema is fixed:

    experiment,label,parameter,n,trial,mse,bias_sq,variance,logging_value,target_value

written UTF-8 with LF endings and 17-significant-digit floats so downstream
plotting is lossless.  Error columns are closed form by default; configs may
opt into Monte Carlo sampling-distribution rows, which add

* ``<label>:mc`` summary rows (empirical MSE split into empirical squared
  bias plus empirical variance), and
* ``<label>:estimate`` rows, one per replication, carrying the replication's
  IPW estimate in the ``parameter`` column and its squared deviation in
  ``mse`` (trial column = replication index).

Seeding: the environment derives from the base seed alone; trial t draws its
target noise, logging-model noise, auxiliary data, and Monte Carlo streams
from fixed substreams of (base_seed, t), so trials are order-independent and
equal configs reproduce byte-identical CSVs.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .design import (
    ShrinkageFit,
    apply_shrinkage,
    design_known_mu_minimax,
    design_match_target,
    design_neyman,
    design_uniform,
    fit_shrinkage,
)
from .env import Environment, GeometricSpec, RewardModel, exact_model, make_geometric_env, make_linear_env, make_noisy_model
from .evaluation import closed_form_mse, monte_carlo_mse, policy_value, simulate_dataset
from .policy import GreedinessSpec, Policy, build_policy, uniform_policy

CSV_HEADER = (
    "experiment",
    "label",
    "parameter",
    "n",
    "trial",
    "mse",
    "bias_sq",
    "variance",
    "logging_value",
    "target_value",
)

DESIGN_REGIMES = ("uniform", "minimax-mu", "match-target", "neyman")


def _subseed(base_seed: int, *key: int) -> int:
    """Deterministic integer seed for a named substream of the base seed."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1)[0])


# ---------------------------------------------------------------------------
# Config dataclasses (JSON schema mirrors the field names 1:1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnvSpec:
    """Environment recipe: geometric / linear synthetic family or an explicit
    reward matrix (mu rows indexed by action)."""

    kind: str
    n_actions: int = 0
    n_contexts: int = 1
    scale: float = 0.1
    decay: float = 0.99
    top_value: float = 0.4
    mu: Optional[tuple] = None
    arrival_probs: Optional[tuple] = None

    def build(self, seed: int) -> Environment:
        if self.kind == "geometric":
            return make_geometric_env(
                self.n_contexts,
                self.n_actions,
                GeometricSpec(scale=self.scale, decay=self.decay, seed=seed),
                arrival_probs=self.arrival_probs,
            )
        if self.kind == "linear":
            return make_linear_env(
                self.n_contexts, self.n_actions, self.top_value, seed=seed, arrival_probs=self.arrival_probs
            )
        if self.kind == "explicit":
            mu = np.asarray(self.mu, dtype=np.float64)
            arrival = self.arrival_probs
            if arrival is None:
                arrival = np.full(mu.shape[1], 1.0 / mu.shape[1])
            return Environment(
                contexts=tuple(range(mu.shape[1])),
                arrival_probs=arrival,
                actions=tuple(range(mu.shape[0])),
                mu=mu,
            )
        raise ValueError(f"unknown environment kind {self.kind!r}")


@dataclass(frozen=True)
class TargetSpec:
    """Target policy recipe: a greediness family applied to (possibly noisy)
    reward estimates, or explicit probabilities."""

    family: Optional[str] = None
    k: Optional[int] = None
    alpha: Optional[float] = None
    degree: Optional[float] = None
    noise_sd: float = 0.0
    probs: Optional[tuple] = None

    def build(self, env: Environment, seed: int) -> Policy:
        if self.probs is not None:
            return Policy(probs=np.asarray(self.probs, dtype=np.float64))
        if self.noise_sd > 0:
            model = make_noisy_model(env, self.noise_sd, seed=seed)
        else:
            model = exact_model(env)
        return build_policy(model, GreedinessSpec(self.family, k=self.k, alpha=self.alpha, degree=self.degree))


@dataclass(frozen=True)
class LoggingSpec:
    """One swept logging construction.

    kind = "family":      grid over the family's greediness parameter.
    kind = "design":      a single designed policy (regime in DESIGN_REGIMES);
                          built from noisy/shrunk estimates when requested.
    kind = "scalar_grid": grid over pi_l(a1) for 2-action single-context runs.
    kind = "on_policy":   the target itself (the A/B-test baseline).

    ``model_stream`` keys the logging-model noise substream: specs sharing a
    stream id see the same estimate draw within a trial, so sweeps at a fixed
    noise level trace a curve against one realization.  ``shrinkage`` is
    None, a fixed weight in [0, 1], or "empirical" (fit on a fresh auxiliary
    dataset of ``aux_n`` uniform-logging records).  ``record_weight`` stores
    the fitted weight in the row's parameter column.
    """

    label: str
    kind: str
    family: Optional[str] = None
    grid: Optional[tuple] = None
    k: Optional[int] = None
    alpha: Optional[float] = None
    degree: Optional[float] = None
    regime: Optional[str] = None
    noise_sd: float = 0.0
    shrinkage: object = None
    aux_n: int = 0
    parameter: float = 0.0
    model_stream: int = 0
    record_weight: bool = False


@dataclass(frozen=True)
class McSpec:
    """Opt-in Monte Carlo sampling-distribution rows."""

    replications: int
    mc_trials: int = 1
    labels: Optional[tuple] = None
    emit_estimates: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    environment: EnvSpec
    targets: tuple  # of (label, TargetSpec)
    logging_specs: tuple  # of LoggingSpec
    n_values: tuple
    trials: int
    base_seed: int
    output_path: str = ""
    mc: Optional[McSpec] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.n_values:
            raise ValueError("n_values must be nonempty")
        if not self.targets or not self.logging_specs:
            raise ValueError("need at least one target and one logging spec")
        for spec in self.logging_specs:
            if spec.kind in ("family", "scalar_grid") and not spec.grid:
                raise ValueError(f"logging spec {spec.label!r} needs a nonempty grid")
        if not self.output_path:
            object.__setattr__(self, "output_path", f"{self.name}.csv")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    label: str
    parameter: float
    n: int
    trial: int
    mse: float
    bias_sq: float
    variance: float
    logging_value: float
    target_value: float


# ---------------------------------------------------------------------------
# Config JSON round trip
# ---------------------------------------------------------------------------


def config_to_dict(config: ExperimentConfig) -> dict:
    def envdoc(e: EnvSpec) -> dict:
        doc = {"kind": e.kind}
        if e.kind == "explicit":
            doc["mu"] = [list(r) for r in e.mu]
        else:
            doc.update(n_actions=e.n_actions, n_contexts=e.n_contexts)
            if e.kind == "geometric":
                doc.update(scale=e.scale, decay=e.decay)
            else:
                doc.update(top_value=e.top_value)
        if e.arrival_probs is not None:
            doc["arrival_probs"] = list(e.arrival_probs)
        return doc

    def targetdoc(item) -> dict:
        label, t = item
        doc = {"label": label, "noise_sd": t.noise_sd}
        if t.probs is not None:
            doc["probs"] = [list(r) for r in t.probs]
        else:
            doc["family"] = t.family
            for name in ("k", "alpha", "degree"):
                if getattr(t, name) is not None:
                    doc[name] = getattr(t, name)
        return doc

    def loggingdoc(s: LoggingSpec) -> dict:
        doc = {"label": s.label, "kind": s.kind}
        for name in ("family", "grid", "k", "alpha", "degree", "regime", "shrinkage"):
            value = getattr(s, name)
            if value is not None:
                doc[name] = list(value) if name == "grid" else value
        for name, default in (
            ("noise_sd", 0.0),
            ("aux_n", 0),
            ("parameter", 0.0),
            ("model_stream", 0),
            ("record_weight", False),
        ):
            if getattr(s, name) != default:
                doc[name] = getattr(s, name)
        return doc

    doc = {
        "name": config.name,
        "environment": envdoc(config.environment),
        "targets": [targetdoc(t) for t in config.targets],
        "logging": [loggingdoc(s) for s in config.logging_specs],
        "n_values": list(config.n_values),
        "trials": config.trials,
        "base_seed": config.base_seed,
        "output_path": config.output_path,
    }
    if config.mc is not None:
        doc["monte_carlo"] = {
            "replications": config.mc.replications,
            "mc_trials": config.mc.mc_trials,
            "labels": None if config.mc.labels is None else list(config.mc.labels),
            "emit_estimates": config.mc.emit_estimates,
        }
    return doc


def config_from_dict(doc: dict) -> ExperimentConfig:
    e = doc["environment"]
    env = EnvSpec(
        kind=e["kind"],
        n_actions=e.get("n_actions", 0),
        n_contexts=e.get("n_contexts", 1),
        scale=e.get("scale", 0.1),
        decay=e.get("decay", 0.99),
        top_value=e.get("top_value", 0.4),
        mu=None if "mu" not in e else tuple(tuple(r) for r in e["mu"]),
        arrival_probs=None if e.get("arrival_probs") is None else tuple(e["arrival_probs"]),
    )
    targets = tuple(
        (
            t["label"],
            TargetSpec(
                family=t.get("family"),
                k=t.get("k"),
                alpha=t.get("alpha"),
                degree=t.get("degree"),
                noise_sd=t.get("noise_sd", 0.0),
                probs=None if t.get("probs") is None else tuple(tuple(r) for r in t["probs"]),
            ),
        )
        for t in doc["targets"]
    )
    logging_specs = tuple(
        LoggingSpec(
            label=s["label"],
            kind=s["kind"],
            family=s.get("family"),
            grid=None if s.get("grid") is None else tuple(s["grid"]),
            k=s.get("k"),
            alpha=s.get("alpha"),
            degree=s.get("degree"),
            regime=s.get("regime"),
            noise_sd=s.get("noise_sd", 0.0),
            shrinkage=s.get("shrinkage"),
            aux_n=s.get("aux_n", 0),
            parameter=s.get("parameter", 0.0),
            model_stream=s.get("model_stream", 0),
            record_weight=s.get("record_weight", False),
        )
        for s in doc["logging"]
    )
    mc = None
    if doc.get("monte_carlo"):
        m = doc["monte_carlo"]
        mc = McSpec(
            replications=m["replications"],
            mc_trials=m.get("mc_trials", 1),
            labels=None if m.get("labels") is None else tuple(m["labels"]),
            emit_estimates=m.get("emit_estimates", True),
        )
    return ExperimentConfig(
        name=doc["name"],
        environment=env,
        targets=targets,
        logging_specs=logging_specs,
        n_values=tuple(doc["n_values"]),
        trials=doc["trials"],
        base_seed=doc["base_seed"],
        output_path=doc.get("output_path", ""),
        mc=mc,
    )


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

_ENV_CACHE: dict = {}


def _build_env(config: ExperimentConfig) -> Environment:
    # Worker processes rebuild the environment from the (deterministic) spec
    # once and reuse it across the trials they execute.
    key = (config.environment, config.base_seed)
    if key not in _ENV_CACHE:
        _ENV_CACHE.clear()
        _ENV_CACHE[key] = config.environment.build(seed=_subseed(config.base_seed, 0))
    return _ENV_CACHE[key]


def _logging_model(config: ExperimentConfig, env: Environment, spec: LoggingSpec, trial: int) -> RewardModel:
    if spec.noise_sd > 0:
        seed = _subseed(config.base_seed, 2, trial, spec.model_stream)
        return make_noisy_model(env, spec.noise_sd, seed=seed)
    return exact_model(env)


def _shrink(config: ExperimentConfig, env: Environment, spec: LoggingSpec, model: RewardModel, trial: int):
    """Apply the spec's shrinkage mode; returns (model, fitted weight)."""
    if spec.shrinkage is None:
        return model, None
    if spec.shrinkage == "empirical":
        if spec.aux_n < 1:
            raise ValueError(f"logging spec {spec.label!r} needs aux_n for empirical shrinkage")
        aux = simulate_dataset(
            env,
            uniform_policy(env.n_actions, env.n_contexts),
            spec.aux_n,
            seed=_subseed(config.base_seed, 3, trial, spec.model_stream),
        )
        fit = fit_shrinkage(model, aux)
    else:
        weight = float(spec.shrinkage)
        fit = ShrinkageFit(
            weight=weight,
            context_means=model.mu_hat.mean(axis=0),
            cov_estimate=float("nan"),
            var_estimate=0.0,
            degenerate=False,
        )
    return apply_shrinkage(model, fit), fit.weight


def _designed_policy(env: Environment, regime: str, target: Policy, model: RewardModel) -> Policy:
    """Dispatch a design regime using the model's estimates as plug-in truth."""
    if regime == "uniform":
        return design_uniform(env).policy
    if regime == "match-target":
        return design_match_target(target).policy
    plugin_env = Environment(
        contexts=env.contexts, arrival_probs=env.arrival_probs, actions=env.actions, mu=model.mu_hat
    )
    if regime == "minimax-mu":
        return design_known_mu_minimax(plugin_env).policy
    if regime == "neyman":
        return design_neyman(plugin_env, target).policy
    raise ValueError(f"unknown design regime {regime!r}; expected one of {DESIGN_REGIMES}")


def _policies_for_spec(
    config: ExperimentConfig, env: Environment, spec: LoggingSpec, target: Policy, trial: int
):
    """Yield (parameter, policy) pairs for one logging spec in one trial."""
    if spec.kind == "on_policy":
        yield spec.parameter, target
        return
    if spec.kind == "design":
        model = _logging_model(config, env, spec, trial)
        model, weight = _shrink(config, env, spec, model, trial)
        parameter = weight if (spec.record_weight and weight is not None) else spec.parameter
        yield parameter, _designed_policy(env, spec.regime, target, model)
        return
    if spec.kind == "scalar_grid":
        if env.n_actions != 2 or env.n_contexts != 1:
            raise ValueError("scalar_grid sweeps require 2 actions and a single context")
        for p in spec.grid:
            yield float(p), Policy(probs=np.array([[float(p)], [1.0 - float(p)]]))
        return
    if spec.kind == "family":
        model = _logging_model(config, env, spec, trial)
        for value in spec.grid:
            if spec.family == "top_k":
                g = GreedinessSpec("top_k", k=int(value))
            elif spec.family == "softmax":
                g = GreedinessSpec("softmax", alpha=float(value))
            elif spec.family == "power_normalized":
                g = GreedinessSpec("power_normalized", degree=float(value))
            elif spec.family == "top_k_pn":
                g = GreedinessSpec("top_k_pn", k=int(value), degree=spec.degree)
            elif spec.family == "top_k_sm":
                g = GreedinessSpec("top_k_sm", k=int(value), alpha=spec.alpha)
            else:
                raise ValueError(f"unknown family {spec.family!r}")
            yield float(value), build_policy(model, g)
        return
    raise ValueError(f"unknown logging spec kind {spec.kind!r}")


def _row_label(config: ExperimentConfig, target_label: str, spec: LoggingSpec) -> str:
    if len(config.targets) == 1:
        return spec.label
    if len(config.logging_specs) == 1:
        return target_label
    return f"{target_label}/{spec.label}"


def _trial_rows(config: ExperimentConfig, trial: int) -> list:
    env = _build_env(config)
    rows = []
    mc = config.mc
    for ti, (target_label, tspec) in enumerate(config.targets):
        target = tspec.build(env, seed=_subseed(config.base_seed, 1, trial, ti))
        target_value = policy_value(env, target)
        for spec in config.logging_specs:
            label = _row_label(config, target_label, spec)
            for parameter, pl in _policies_for_spec(config, env, spec, target, trial):
                logging_value = policy_value(env, pl)
                for n in config.n_values:
                    bd = closed_form_mse(env, target, pl, n)
                    rows.append(
                        ResultRow(
                            experiment=config.name,
                            label=label,
                            parameter=parameter,
                            n=n,
                            trial=trial,
                            mse=bd.mse,
                            bias_sq=bd.bias_sq,
                            variance=bd.variance,
                            logging_value=logging_value,
                            target_value=target_value,
                        )
                    )
                if mc is not None and trial < mc.mc_trials and (mc.labels is None or spec.label in mc.labels):
                    for ni, n in enumerate(config.n_values):
                        summary = monte_carlo_mse(
                            env,
                            target,
                            pl,
                            n,
                            mc.replications,
                            seed=_subseed(config.base_seed, 4, trial, ti, ni),
                        )
                        emp_bias_sq = (summary.empirical_mean - target_value) ** 2
                        rows.append(
                            ResultRow(
                                experiment=config.name,
                                label=f"{label}:mc",
                                parameter=parameter,
                                n=n,
                                trial=trial,
                                mse=summary.empirical_mse,
                                bias_sq=emp_bias_sq,
                                variance=summary.empirical_mse - emp_bias_sq,
                                logging_value=logging_value,
                                target_value=target_value,
                            )
                        )
                        if mc.emit_estimates:
                            for j, est in enumerate(summary.estimates):
                                sq = (float(est) - target_value) ** 2
                                rows.append(
                                    ResultRow(
                                        experiment=config.name,
                                        label=f"{label}:estimate",
                                        parameter=float(est),
                                        n=n,
                                        trial=j,
                                        mse=sq,
                                        bias_sq=0.0,
                                        variance=sq,
                                        logging_value=logging_value,
                                        target_value=target_value,
                                    )
                                )
    return rows


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def rows_to_csv_text(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            [
                r.experiment,
                r.label,
                _fmt(r.parameter),
                str(r.n),
                str(r.trial),
                _fmt(r.mse),
                _fmt(r.bias_sq),
                _fmt(r.variance),
                _fmt(r.logging_value),
                _fmt(r.target_value),
            ]
        )
    return buf.getvalue()


def write_rows(rows: Sequence[ResultRow], path) -> None:
    text = rows_to_csv_text(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run_experiment(config: ExperimentConfig, out_path=None, jobs: int = 1) -> list:
    """Run every trial and return the rows, writing CSV when a path is given.

    Trials are independent given their substream seeds; with jobs > 1 they
    run in worker processes and are concatenated in trial order, so the
    output is identical to a serial run.
    """
    _build_env(config)  # fail fast on a bad environment spec
    if jobs > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            buffers = list(pool.map(_trial_rows, [config] * config.trials, range(config.trials)))
        rows = [row for buf in buffers for row in buf]
    else:
        rows = []
        for trial in range(config.trials):
            rows.extend(_trial_rows(config, trial))
    if out_path is not None:
        write_rows(rows, out_path)
    return rows


# ---------------------------------------------------------------------------
# Built-in figure configurations
# ---------------------------------------------------------------------------


def _div(value: int, scale: int, minimum: int = 1) -> int:
    return max(minimum, value // scale)


def _fig1(scale: int) -> ExperimentConfig:
    actions = _div(10_000, scale)
    k = min(10, actions)
    return ExperimentConfig(
        name="fig1",
        environment=EnvSpec(kind="geometric", n_actions=actions, n_contexts=1, scale=0.1, decay=0.99),
        targets=(("target", TargetSpec(family="top_k", k=k)),),
        logging_specs=(
            LoggingSpec(label="personalized", kind="family", family="top_k", grid=(k,), noise_sd=0.0625),
            LoggingSpec(label="uniform", kind="family", family="top_k", grid=(actions,)),
        ),
        n_values=(_div(1_000, scale), _div(100_000, scale)),
        trials=_div(100, scale),
        base_seed=101,
        mc=McSpec(replications=_div(200, scale), mc_trials=1, labels=("personalized", "uniform")),
    )


def _fig2(scale: int) -> ExperimentConfig:
    del scale  # already desk-sized
    grid = tuple(np.round(np.arange(0.001, 1.0, 0.001), 9))
    return ExperimentConfig(
        name="fig2",
        environment=EnvSpec(kind="explicit", mu=((0.9,), (0.1,))),
        targets=(
            ("aligned", TargetSpec(probs=((0.9,), (0.1,)))),
            ("misaligned", TargetSpec(probs=((0.1,), (0.9,)))),
        ),
        logging_specs=(LoggingSpec(label="scan", kind="scalar_grid", grid=grid),),
        n_values=(100,),
        trials=1,
        base_seed=102,
    )


def _fig3(scale: int) -> ExperimentConfig:
    actions = _div(1_000, scale)
    noise_grid = tuple(np.linspace(0.0, 0.25, 11))
    plugin = tuple(
        LoggingSpec(
            label="plugin-optimal",
            kind="design",
            regime="neyman",
            noise_sd=s,
            parameter=s,
            model_stream=i,
        )
        for i, s in enumerate(noise_grid)
    )
    return ExperimentConfig(
        name="fig3",
        environment=EnvSpec(kind="geometric", n_actions=actions, n_contexts=1, scale=0.1, decay=0.99),
        targets=(("target", TargetSpec(family="top_k", k=min(30, actions), noise_sd=0.25)),),
        logging_specs=plugin + (LoggingSpec(label="on-policy", kind="on_policy"),),
        n_values=(100,),
        trials=_div(1_000, scale),
        base_seed=103,
    )


def _fig5(scale: int) -> ExperimentConfig:
    actions = _div(1_000, scale)
    contexts = _div(1_000, scale)
    aux_n = _div(50_000, scale)
    noise_grid = tuple(np.linspace(0.0, 0.25, 6))
    specs = []
    for i, s in enumerate(noise_grid):
        specs.append(
            LoggingSpec(
                label="shrunk-optimal",
                kind="design",
                regime="neyman",
                noise_sd=s,
                shrinkage="empirical",
                aux_n=aux_n,
                parameter=s,
                model_stream=i,
            )
        )
        specs.append(
            LoggingSpec(
                label="plugin-optimal",
                kind="design",
                regime="neyman",
                noise_sd=s,
                parameter=s,
                model_stream=i,
            )
        )
    sweep_sds = (noise_grid[1], noise_grid[3], noise_grid[5])
    for s in sweep_sds:
        i = noise_grid.index(s)
        for w in np.linspace(0.0, 1.0, 11):
            specs.append(
                LoggingSpec(
                    label=f"w-sweep:sd={s:g}",
                    kind="design",
                    regime="neyman",
                    noise_sd=s,
                    shrinkage=float(w),
                    parameter=float(w),
                    model_stream=i,
                )
            )
        specs.append(
            LoggingSpec(
                label=f"w-star:sd={s:g}",
                kind="design",
                regime="neyman",
                noise_sd=s,
                shrinkage="empirical",
                aux_n=aux_n,
                record_weight=True,
                model_stream=i,
            )
        )
    specs.append(LoggingSpec(label="on-policy", kind="on_policy"))
    return ExperimentConfig(
        name="fig5",
        environment=EnvSpec(kind="linear", n_actions=actions, n_contexts=contexts, top_value=0.4),
        targets=(("target", TargetSpec(family="top_k", k=min(100, actions), noise_sd=0.05)),),
        logging_specs=tuple(specs),
        n_values=(_div(50_000, scale),),
        trials=_div(30, scale, minimum=2),
        base_seed=105,
    )


def _softgreedy_specs(actions: int, alpha_points: int, degree_points: int) -> tuple:
    k_grid = tuple(range(1, actions + 1)) if actions <= 2_000 else tuple(
        int(v) for v in np.unique(np.geomspace(1, actions, 200).astype(int))
    )
    alpha_grid = (0.0,) + tuple(np.geomspace(0.5, 2_000.0, alpha_points))
    degree_grid = tuple(np.linspace(0.0, 3.0, degree_points))
    return (
        LoggingSpec(label="top-k", kind="family", family="top_k", grid=k_grid),
        LoggingSpec(label="softmax", kind="family", family="softmax", grid=alpha_grid),
        LoggingSpec(label="power", kind="family", family="power_normalized", grid=degree_grid),
        LoggingSpec(label="optimal", kind="design", regime="neyman"),
        LoggingSpec(label="on-policy", kind="on_policy"),
    )


def _fig6_small(scale: int) -> ExperimentConfig:
    actions = _div(1_000, scale)
    return ExperimentConfig(
        name="fig6_small",
        environment=EnvSpec(kind="geometric", n_actions=actions, n_contexts=1, scale=0.1, decay=0.99),
        targets=(("target", TargetSpec(family="top_k", k=min(200, actions))),),
        logging_specs=_softgreedy_specs(actions, alpha_points=80, degree_points=301),
        n_values=(_div(1_000, scale),),
        trials=_div(30, scale, minimum=2),
        base_seed=106,
    )


def _fig6_large(scale: int) -> ExperimentConfig:
    actions = _div(100_000, scale)
    return ExperimentConfig(
        name="fig6_large",
        environment=EnvSpec(kind="geometric", n_actions=actions, n_contexts=1, scale=0.1, decay=0.99),
        targets=(("target", TargetSpec(family="top_k", k=min(200, actions))),),
        logging_specs=_softgreedy_specs(actions, alpha_points=40, degree_points=31),
        n_values=(_div(100_000, scale),),
        trials=_div(5, scale, minimum=2),
        base_seed=107,
    )


def _figD1(scale: int) -> ExperimentConfig:
    actions = _div(1_000, scale)
    k_grid = tuple(range(1, actions + 1))
    specs = [LoggingSpec(label="top-k", kind="family", family="top_k", grid=k_grid)]
    for d in (0.5, 1.0, 2.0):
        specs.append(
            LoggingSpec(label=f"top-k-pn:d={d:g}", kind="family", family="top_k_pn", grid=k_grid, degree=d)
        )
    for a in (10.0, 50.0, 100.0):
        specs.append(
            LoggingSpec(label=f"top-k-sm:alpha={a:g}", kind="family", family="top_k_sm", grid=k_grid, alpha=a)
        )
    specs.append(LoggingSpec(label="on-policy", kind="on_policy"))
    return ExperimentConfig(
        name="figD1",
        environment=EnvSpec(kind="geometric", n_actions=actions, n_contexts=1, scale=0.1, decay=0.99),
        targets=(("target", TargetSpec(family="top_k", k=min(200, actions))),),
        logging_specs=tuple(specs),
        n_values=(_div(1_000, scale),),
        trials=_div(30, scale, minimum=2),
        base_seed=108,
    )


_FIGURES = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig5": _fig5,
    "fig6_small": _fig6_small,
    "fig6_large": _fig6_large,
    "figD1": _figD1,
}


def builtin_configs(scale: int = 1) -> dict:
    """The shipped figure configurations, optionally desk-scaled.

    ``scale`` divides the expensive dimensions (actions, contexts, samples,
    trials, replications) for constrained machines; argmin bands widen
    accordingly and are only asserted at scale 1.
    """
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    return {name: build(scale) for name, build in _FIGURES.items()}


def summarize(rows: Sequence[ResultRow]) -> list:
    """Per (label, n): the parameter minimizing trial-averaged MSE.

    Returns tuples (label, n, argmin_parameter, min_mean_mse), skipping the
    Monte Carlo row kinds.  Averaging over trials happens here only for the
    printed summary; the CSV keeps raw trial rows.
    """
    groups: dict = {}
    for r in rows:
        if r.label.endswith(":mc") or r.label.endswith(":estimate"):
            continue
        groups.setdefault((r.label, r.n), {}).setdefault(r.parameter, []).append(r.mse)
    out = []
    for (label, n), by_param in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        means = {p: float(np.mean(v)) for p, v in by_param.items()}
        best = min(means, key=lambda p: (means[p], p))
        out.append((label, n, best, means[best]))
    return out
