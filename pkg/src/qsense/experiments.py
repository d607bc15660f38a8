"""Batch studies over system size: inference-error scaling, parameter
prediction against the cosine-fit baseline, and sensitivity reconstruction.

Each study takes an ExperimentConfig, fans independent (n, repeat) jobs out
over the worker pool, merges results in a fixed order and persists three
artifacts under the output directory: ``config.json`` (the config echo),
``summary.json`` (one record per system size) and per-trial / per-curve
CSV files.  Everything except the recorded runtimes is bit-reproducible
from (config, base_seed).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._workers import parallel_map
from .inference import (
    cosine_fit,
    estimate_parameter,
    infer_response,
    polylog_shot_schedule,
    response_polynomial,
    sensitivity_error_check,
    shot_budget,
)
from .sim import (
    SensingSetup,
    build_ghz_setup,
    build_random_ansatz_setup,
    build_squeezing_setup,
    exact_response,
    sample_response,
)
from .trig import write_curve_csv

SETUP_KINDS = ("ghz", "squeezing", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one study run.

    ``shots`` is the policy string ``exact | <int> | paper | polylog |
    budget:<delta>,<alpha>``.  ``exact_curves`` makes the prediction study
    build its response curves from exact expectations while still sampling
    the measured test responses with the shots policy.
    """

    kind: str
    n_values: tuple[int, ...]
    noise: float = 0.0
    shots: str = "exact"
    repeats: int = 1
    base_seed: int = 0
    out_dir: str = "results"
    layers: int = 4
    test_points: int = 10_000
    prediction_fields: int = 30
    exact_curves: bool = False

    def __post_init__(self) -> None:
        if self.kind not in SETUP_KINDS:
            raise ValueError(f"kind must be one of {SETUP_KINDS}")
        values = tuple(int(n) for n in self.n_values)
        if not values:
            raise ValueError("n_values must be nonempty")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        cap = 8 if self.noise > 0 else 12
        if max(values) > cap:
            path = "noisy (density-matrix)" if self.noise > 0 else "statevector"
            raise ValueError(
                f"n={max(values)} exceeds the desk-scale {path} study cap of {cap}"
            )
        object.__setattr__(self, "n_values", values)
        resolve_shots(self.shots, max(2, values[0]))  # validate the policy early

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["n_values"] = list(self.n_values)
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in doc.items() if k in known})


@dataclass(frozen=True)
class ScalingRecord:
    """Per-system-size aggregate of a study; unused fields stay None."""

    n: int
    runtime_seconds: float
    median_error: float | None = None
    max_error: float | None = None
    bound_value: float | None = None
    all_trials_within_bound: bool | None = None
    median_prediction_error: float | None = None
    upper_quartile_prediction_error: float | None = None
    median_prediction_error_baseline: float | None = None
    upper_quartile_prediction_error_baseline: float | None = None
    worst_case_prediction_error: float | None = None
    median_relative_sensitivity_error: float | None = None
    max_relative_sensitivity_error: float | None = None
    bound_holds_all_trials: bool | None = None

    def __post_init__(self) -> None:
        if self.median_error is not None and self.max_error is not None:
            if self.median_error > self.max_error + 1e-15:
                raise ValueError("median error cannot exceed max error")

    def to_json_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def resolve_shots(policy: str, n: int) -> int | None:
    """Parse the shots mini-language for system size n.

    ``exact`` -> None (exact expectations); an integer literal -> that many
    shots; ``paper`` or ``polylog`` -> the built-in poly-logarithmic
    schedule; ``budget:<delta>,<alpha>`` -> the guaranteed-error budget.
    """
    text = str(policy).strip().lower()
    if text == "exact":
        return None
    if text in ("paper", "polylog"):
        return polylog_shot_schedule(n)
    if text.startswith("budget:"):
        parts = text[len("budget:") :].split(",")
        try:
            delta, alpha = (float(p) for p in parts)
        except ValueError:
            raise ValueError(
                f"bad budget policy {policy!r}; use budget:<delta>,<alpha>"
            ) from None
        return shot_budget(n, delta, alpha)
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"unknown shots policy {policy!r}") from None


def make_setup(config: ExperimentConfig, n: int) -> SensingSetup:
    if config.kind == "ghz":
        return build_ghz_setup(n, noise=config.noise)
    if config.kind == "squeezing":
        return build_squeezing_setup(n, noise=config.noise)
    ansatz_seed = int(np.random.default_rng([config.base_seed, n, 424242]).integers(2**63))
    return build_random_ansatz_setup(n, layers=config.layers, seed=ansatz_seed, noise=config.noise)


def _trial_seed(base: int, n: int, repeat: int, salt: int = 0) -> int:
    return int(np.random.default_rng([base, n, repeat, salt]).integers(2**31))


def _prepare_out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "config.json", config.to_json_dict())
    return out


def _dump_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n")


def _write_trials_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


_PLOT_GRID = np.linspace(0.0, 2.0 * math.pi, 1001)


def run_inference_study(config: ExperimentConfig) -> list[ScalingRecord]:
    """Infer the response for each (n, repeat), score |R - R~| on random test
    angles against the simulator and bound it by 5 eps ln(degree)."""
    out = _prepare_out_dir(config)
    records: list[ScalingRecord] = []
    trial_rows: list[list] = []
    for n in config.n_values:
        start = time.perf_counter()
        setup = make_setup(config, n)
        shots_n = resolve_shots(config.shots, n)
        exact_poly = response_polynomial(setup)
        grid = np.random.default_rng([config.base_seed, n, 101]).uniform(
            0.0, 2.0 * math.pi, config.test_points
        )
        truth = np.array([exact_response(setup, t) for t in grid])

        def trial(repeat: int):
            res = infer_response(
                setup, shots=shots_n, seed=_trial_seed(config.base_seed, n, repeat)
            )
            err = np.abs(res.poly.evaluate(grid) - truth)
            node_truth = exact_poly.evaluate(res.samples.nodes.angles)
            eps_true = float(np.abs(res.samples.values - node_truth).max())
            bound = 5.0 * eps_true * math.log(max(res.poly.degree, 2))
            return (
                float(np.median(err)),
                float(err.max()),
                eps_true,
                bound,
                res,
            )

        trials = parallel_map(trial, range(config.repeats))
        for repeat, (med, worst, eps, bound, _) in enumerate(trials):
            trial_rows.append([n, repeat, med, worst, eps, bound])
        meds = [t[0] for t in trials]
        records.append(
            ScalingRecord(
                n=n,
                runtime_seconds=time.perf_counter() - start,
                median_error=float(np.median(meds)),
                max_error=float(max(t[1] for t in trials)),
                bound_value=float(np.median([t[3] for t in trials])),
                # +1e-8 absorbs float round-off in the exact-expectation mode,
                # where both the errors and the bound sit at machine scale
                all_trials_within_bound=bool(all(t[1] <= t[3] + 1e-8 for t in trials)),
            )
        )
        write_curve_csv(
            out / f"curves_{config.kind}_{n}.csv",
            _PLOT_GRID,
            trials[0][4].poly.evaluate(_PLOT_GRID),
        )
    _write_trials_csv(
        out / f"trials_inference_{config.kind}.csv",
        ["n", "repeat", "median_error", "max_error", "epsilon", "bound_value"],
        trial_rows,
    )
    _dump_json(
        out / "summary.json",
        {"study": "inference", "kind": config.kind, "records": [r.to_json_dict() for r in records]},
    )
    return records


def run_prediction_study(config: ExperimentConfig) -> list[ScalingRecord]:
    """Estimate random fields from measured responses via the inferred
    polynomial and via the cosine-fit baseline, over windows theta' +/-
    pi/(10 n); the window width is also the worst possible error."""
    if config.kind != "ghz":
        raise ValueError("the prediction study is defined for the ghz kind")
    out = _prepare_out_dir(config)
    records: list[ScalingRecord] = []
    rows: list[list] = []
    for n in config.n_values:
        start = time.perf_counter()
        setup = make_setup(config, n)
        shots_n = resolve_shots(config.shots, n)
        window = math.pi / (10.0 * n)

        def trial(repeat: int):
            curve_shots = None if config.exact_curves else shots_n
            res = infer_response(
                setup, shots=curve_shots, seed=_trial_seed(config.base_seed, n, repeat)
            )
            fit = cosine_fit(res.samples)
            rng = np.random.default_rng([config.base_seed, n, repeat, 55])
            results = []
            for field in range(config.prediction_fields):
                theta_true = float(rng.uniform(0.0, 2.0 * math.pi))
                if shots_n is None:
                    measured = exact_response(setup, theta_true)
                else:
                    measured = sample_response(
                        setup,
                        theta_true,
                        shots_n,
                        seed=[config.base_seed, n, repeat, 1000 + field],
                    ).mean
                domain = (theta_true - window, theta_true + window)
                est_inf = estimate_parameter(res.poly, measured, domain)
                est_fit = estimate_parameter(fit, measured, domain)
                results.append((theta_true, est_inf.theta_star, est_fit.theta_star))
            return res, results

        trials = parallel_map(trial, range(config.repeats))
        err_inf: list[float] = []
        err_fit: list[float] = []
        for repeat, (_, results) in enumerate(trials):
            for theta_true, t_inf, t_fit in results:
                rows.append([n, repeat, theta_true, t_inf, t_fit])
                err_inf.append(abs(t_inf - theta_true))
                err_fit.append(abs(t_fit - theta_true))
        records.append(
            ScalingRecord(
                n=n,
                runtime_seconds=time.perf_counter() - start,
                median_prediction_error=float(np.median(err_inf)),
                upper_quartile_prediction_error=float(np.quantile(err_inf, 0.75)),
                median_prediction_error_baseline=float(np.median(err_fit)),
                upper_quartile_prediction_error_baseline=float(np.quantile(err_fit, 0.75)),
                worst_case_prediction_error=window,
            )
        )
        write_curve_csv(
            out / f"curves_{config.kind}_{n}.csv",
            _PLOT_GRID,
            trials[0][0].poly.evaluate(_PLOT_GRID),
        )
    _write_trials_csv(
        out / f"predictions_{config.kind}.csv",
        ["n", "repeat", "theta_true", "theta_inferred", "theta_fit"],
        rows,
    )
    _dump_json(
        out / "summary.json",
        {"study": "prediction", "kind": config.kind, "records": [r.to_json_dict() for r in records]},
    )
    return records


def run_sensitivity_study(config: ExperimentConfig) -> list[ScalingRecord]:
    """Reconstruct sensitivity curves from inferred responses and score the
    exact-vs-inferred error against the slope-normalized bound."""
    if config.kind not in ("ghz", "squeezing"):
        raise ValueError("the sensitivity study is defined for ghz or squeezing kinds")
    out = _prepare_out_dir(config)
    records: list[ScalingRecord] = []
    trial_rows: list[list] = []
    for n in config.n_values:
        start = time.perf_counter()
        setup = make_setup(config, n)
        shots_n = resolve_shots(config.shots, n)

        def trial(repeat: int):
            return sensitivity_error_check(
                setup, shots=shots_n, seed=_trial_seed(config.base_seed, n, repeat)
            )

        reports = parallel_map(trial, range(config.repeats))
        for repeat, rep in enumerate(reports):
            trial_rows.append(
                [n, repeat, rep.median_relative_error, rep.max_relative_error,
                 rep.epsilon, rep.bound_value, int(rep.holds)]
            )
        first = reports[0]
        write_curve_csv(
            out / f"sensitivity_{config.kind}_{n}.csv",
            first.thetas,
            np.column_stack(
                [
                    first.exact_delta**2,
                    first.inferred_delta**2,
                    (~np.isfinite(first.inferred_delta) | ~np.isfinite(first.exact_delta)).astype(float),
                ]
            ),
            header=("theta", "exact_delta_sq", "inferred_delta_sq", "divergent"),
        )
        records.append(
            ScalingRecord(
                n=n,
                runtime_seconds=time.perf_counter() - start,
                median_relative_sensitivity_error=float(
                    np.median([r.median_relative_error for r in reports])
                ),
                max_relative_sensitivity_error=float(
                    max(r.max_relative_error for r in reports)
                ),
                bound_holds_all_trials=bool(all(r.holds for r in reports)),
            )
        )
    _write_trials_csv(
        out / f"trials_sensitivity_{config.kind}.csv",
        ["n", "repeat", "median_relative_error", "max_relative_error",
         "epsilon", "bound_value", "holds"],
        trial_rows,
    )
    _dump_json(
        out / "summary.json",
        {"study": "sensitivity", "kind": config.kind, "records": [r.to_json_dict() for r in records]},
    )
    return records


STUDIES = {
    "inference": run_inference_study,
    "prediction": run_prediction_study,
    "sensitivity": run_sensitivity_study,
}


def run_study(name: str, config: ExperimentConfig) -> list[ScalingRecord]:
    try:
        fn = STUDIES[name]
    except KeyError:
        raise ValueError(f"unknown study {name!r}; choose from {sorted(STUDIES)}") from None
    return fn(config)
