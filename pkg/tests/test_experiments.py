import csv
import json
import math

import numpy as np
import pytest

from logdesign.experiments import (
    CSV_HEADER,
    EnvSpec,
    ExperimentConfig,
    LoggingSpec,
    McSpec,
    TargetSpec,
    builtin_configs,
    config_from_dict,
    config_to_dict,
    rows_to_csv_text,
    run_experiment,
    summarize,
)


def tiny_config(**overrides):
    base = dict(
        name="tiny",
        environment=EnvSpec(kind="geometric", n_actions=20, n_contexts=2, scale=0.1, decay=0.9),
        targets=(("target", TargetSpec(family="top_k", k=5)),),
        logging_specs=(
            LoggingSpec(label="top-k", kind="family", family="top_k", grid=(1, 5, 10, 20)),
            LoggingSpec(label="optimal", kind="design", regime="neyman"),
            LoggingSpec(label="on-policy", kind="on_policy"),
        ),
        n_values=(50, 500),
        trials=3,
        base_seed=77,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_row_identity_and_shape(self):
        rows = run_experiment(tiny_config())
        assert len(rows) == 3 * (4 + 1 + 1) * 2
        for r in rows:
            assert r.mse == r.bias_sq + r.variance
            assert r.bias_sq >= 0 and r.variance >= 0
            assert 0.0 <= r.target_value <= 1.0 and 0.0 <= r.logging_value <= 1.0

    def test_deterministic_csv_bytes(self):
        a = rows_to_csv_text(run_experiment(tiny_config()))
        b = rows_to_csv_text(run_experiment(tiny_config()))
        assert a == b

    def test_seed_changes_noise_rows(self):
        cfg = tiny_config(
            logging_specs=(
                LoggingSpec(label="noisy", kind="family", family="top_k", grid=(5,), noise_sd=0.3),
            )
        )
        a = run_experiment(cfg)
        b = run_experiment(ExperimentConfig(**{**cfg.__dict__, "base_seed": 78}))
        assert any(x.mse != y.mse for x, y in zip(a, b))

    def test_trials_use_distinct_noise(self):
        cfg = tiny_config(
            logging_specs=(
                LoggingSpec(label="noisy", kind="family", family="top_k", grid=(5,), noise_sd=0.3),
            ),
            n_values=(50,),
        )
        rows = run_experiment(cfg)
        assert len({r.mse for r in rows}) > 1

    def test_jobs_match_serial(self):
        cfg = tiny_config()
        serial = rows_to_csv_text(run_experiment(cfg, jobs=1))
        parallel = rows_to_csv_text(run_experiment(cfg, jobs=2))
        assert serial == parallel

    def test_csv_file_output(self, tmp_path):
        out = tmp_path / "tiny.csv"
        rows = run_experiment(tiny_config(), out_path=out)
        text = out.read_text(encoding="utf-8")
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        assert "\r" not in text
        assert len(text.splitlines()) == len(rows) + 1

    def test_unwritable_output_path(self, tmp_path):
        with pytest.raises(OSError):
            run_experiment(tiny_config(), out_path=tmp_path / "missing_dir" / "x.csv")

    def test_full_precision_round_trip(self, tmp_path):
        out = tmp_path / "tiny.csv"
        rows = run_experiment(tiny_config(), out_path=out)
        with open(out, encoding="utf-8") as fh:
            parsed = list(csv.DictReader(fh))
        for row, r in zip(parsed, rows):
            assert float(row["mse"]) == r.mse
            assert float(row["variance"]) == r.variance


class TestMonteCarloRows:
    def test_summary_and_estimate_rows(self):
        cfg = tiny_config(
            logging_specs=(LoggingSpec(label="optimal", kind="design", regime="neyman"),),
            n_values=(40,),
            trials=2,
            mc=McSpec(replications=8, mc_trials=1),
        )
        rows = run_experiment(cfg)
        mc_rows = [r for r in rows if r.label == "optimal:mc"]
        est_rows = [r for r in rows if r.label == "optimal:estimate"]
        assert len(mc_rows) == 1 and len(est_rows) == 8
        summary = mc_rows[0]
        assert summary.mse == pytest.approx(summary.bias_sq + summary.variance)
        assert summary.mse == pytest.approx(np.mean([e.mse for e in est_rows]))
        for e in est_rows:
            assert e.mse == pytest.approx((e.parameter - e.target_value) ** 2)


class TestScalarGrid:
    def test_requires_two_action_single_context(self):
        cfg = tiny_config(
            logging_specs=(LoggingSpec(label="scan", kind="scalar_grid", grid=(0.25, 0.5)),)
        )
        with pytest.raises(ValueError):
            run_experiment(cfg)

    def test_scan_rows(self):
        cfg = ExperimentConfig(
            name="scan",
            environment=EnvSpec(kind="explicit", mu=((0.9,), (0.1,))),
            targets=(("aligned", TargetSpec(probs=((0.9,), (0.1,)))),),
            logging_specs=(LoggingSpec(label="scan", kind="scalar_grid", grid=(0.1, 0.5, 0.9)),),
            n_values=(10,),
            trials=1,
            base_seed=1,
        )
        rows = run_experiment(cfg)
        assert [r.parameter for r in rows] == [0.1, 0.5, 0.9]


class TestShrinkageSpecs:
    def test_fixed_and_empirical_weights(self):
        cfg = ExperimentConfig(
            name="shrink",
            environment=EnvSpec(kind="linear", n_actions=50, n_contexts=40, top_value=0.4),
            targets=(("target", TargetSpec(family="top_k", k=10, noise_sd=0.05)),),
            logging_specs=(
                LoggingSpec(
                    label="w-star",
                    kind="design",
                    regime="neyman",
                    noise_sd=0.1,
                    shrinkage="empirical",
                    aux_n=4_000,
                    record_weight=True,
                ),
                LoggingSpec(
                    label="w-fixed",
                    kind="design",
                    regime="neyman",
                    noise_sd=0.1,
                    shrinkage=0.5,
                    parameter=0.5,
                ),
                LoggingSpec(label="on-policy", kind="on_policy"),
            ),
            n_values=(1_000,),
            trials=2,
            base_seed=5,
        )
        rows = run_experiment(cfg)
        star = [r for r in rows if r.label == "w-star"]
        assert all(0.0 <= r.parameter <= 1.0 for r in star)
        assert len({r.parameter for r in star}) == 2  # distinct fits per trial

    def test_empirical_requires_aux(self):
        cfg = tiny_config(
            logging_specs=(
                LoggingSpec(label="bad", kind="design", regime="neyman", shrinkage="empirical"),
            )
        )
        with pytest.raises(ValueError):
            run_experiment(cfg)


class TestBuiltinConfigs:
    def test_figure_ids(self):
        configs = builtin_configs()
        assert set(configs) == {"fig1", "fig2", "fig3", "fig5", "fig6_small", "fig6_large", "figD1"}

    def test_fig1_parameters(self):
        cfg = builtin_configs()["fig1"]
        assert cfg.environment.n_actions == 10_000
        assert cfg.environment.kind == "geometric"
        assert cfg.environment.scale == 0.1 and cfg.environment.decay == 0.99
        assert cfg.targets[0][1].k == 10
        assert cfg.n_values == (1_000, 100_000)
        labels = [s.label for s in cfg.logging_specs]
        assert labels == ["personalized", "uniform"]

    def test_fig5_parameters(self):
        cfg = builtin_configs()["fig5"]
        assert cfg.environment.kind == "linear"
        assert cfg.environment.n_actions == 1_000 and cfg.environment.n_contexts == 1_000
        assert cfg.environment.top_value == 0.4
        assert cfg.targets[0][1].k == 100
        assert cfg.n_values == (50_000,)

    def test_fig6_small_parameters(self):
        cfg = builtin_configs()["fig6_small"]
        assert cfg.environment.n_actions == 1_000
        assert cfg.targets[0][1].k == 200
        assert cfg.n_values == (1_000,)
        assert cfg.trials >= 30

    def test_scale_divides_dimensions(self):
        cfg = builtin_configs(scale=10)["fig6_small"]
        assert cfg.environment.n_actions == 100
        assert cfg.n_values == (100,)
        with pytest.raises(ValueError):
            builtin_configs(scale=0)

    def test_scaled_fig5_runs(self):
        cfg = builtin_configs(scale=20)["fig5"]
        rows = run_experiment(cfg)
        labels = {r.label for r in rows}
        assert "shrunk-optimal" in labels and "plugin-optimal" in labels and "on-policy" in labels
        assert any(lbl.startswith("w-sweep") for lbl in labels)
        star = [r for r in rows if r.label.startswith("w-star")]
        assert star and all(0.0 <= r.parameter <= 1.0 for r in star)

    def test_config_json_round_trip(self):
        for name, cfg in builtin_configs(scale=50).items():
            doc = json.loads(json.dumps(config_to_dict(cfg)))
            restored = config_from_dict(doc)
            assert restored == cfg, name


class TestNoiseCurveShape:
    def test_plugin_design_error_convex_increasing_in_noise(self):
        # trial-averaged MSE of the plug-in design rises convexly with the
        # estimate noise and crosses the on-policy baseline inside the grid
        rows = run_experiment(builtin_configs(scale=2)["fig3"])
        by_noise = {}
        baseline = []
        for r in rows:
            if r.label == "plugin-optimal":
                by_noise.setdefault(r.parameter, []).append(r.mse)
            elif r.label == "on-policy":
                baseline.append(r.mse)
        means = np.array([np.mean(by_noise[p]) for p in sorted(by_noise)])
        assert len(means) == 11
        assert np.all(np.diff(means) > 0)
        assert np.all(np.diff(means, 2) > 0)
        assert means[0] < np.mean(baseline) < means[-1]


class TestSummarize:
    def test_argmin_per_label(self):
        rows = run_experiment(tiny_config())
        table = summarize(rows)
        entries = {(label, n): (p, m) for label, n, p, m in table}
        assert ("top-k", 50) in entries and ("optimal", 500) in entries
        p, m = entries[("top-k", 50)]
        assert p in (1, 5, 10, 20)
        assert math.isfinite(m)

    def test_skips_mc_rows(self):
        cfg = tiny_config(
            logging_specs=(LoggingSpec(label="optimal", kind="design", regime="neyman"),),
            n_values=(40,),
            trials=1,
            mc=McSpec(replications=4),
        )
        table = summarize(run_experiment(cfg))
        assert all(not label.endswith(":mc") and not label.endswith(":estimate") for label, _, _, _ in table)
