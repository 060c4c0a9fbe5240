"""Seeded experiment harness: run grids of trials, summarize, serialize.

A config names a task, channels, a parameter grid and a trial count; the
harness executes every (cell, trial) pair on its own RNG stream derived
from (master_seed, cell_index, trial_index), so no two cells ever share
randomness and re-running a config byte-reproduces every non-timing field.
Failures are recorded per cell and the run continues; the report is marked
partial.  Reports serialize to JSON plus a flat CSV (one row per record,
fixed versioned header).
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    PauliDistribution,
    load_channel,
    make_channel,
    parse_norm_order,
    shannon_entropy,
    support_size,
)
from .diamond import (
    diamond_estimate_plugin,
    diamond_estimate_unseen,
    diamond_exact,
)
from .learner import SamplePlan, plan_sample_size, run_learning_trial
from .quantum import draw_samples, verify_bell_sampling
from .tester import default_c_plan, plan_test_samples, test_uniformity
from .unseen import estimate_entropy_unseen, estimate_support_unseen

FORMAT_VERSION = 1

TASKS = ("learn", "test", "entropy", "support", "diamond", "verify-bell")

CSV_COLUMNS = [
    "format_version", "task", "cell", "trial", "n", "p", "epsilon", "delta",
    "N", "seed", "value", "error", "success", "reject", "failure",
    "wall_time_s",
]


class ConfigError(ValueError):
    """Experiment configuration is invalid."""


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    channels: tuple
    grid: tuple
    trials: int
    master_seed: int
    constants: dict = field(default_factory=dict)
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            task = data["task"]
            grid = tuple(data["grid"])
            trials = int(data["trials"])
            master_seed = int(data["master_seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"config missing or malformed field: {exc}") from exc
        if task not in TASKS:
            raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")
        if not grid:
            raise ConfigError("grid must be non-empty")
        if trials < 1:
            raise ConfigError(f"trials must be >= 1, got {trials}")
        channels = tuple(data.get("channels", ()))
        config = cls(
            task=task,
            channels=channels,
            grid=grid,
            trials=trials,
            master_seed=master_seed,
            constants=dict(data.get("constants", {})),
            workers=int(data.get("workers", 1)),
        )
        # fail fast: every referenced channel must load
        for cell_index, cell in enumerate(config.grid):
            for key in ("channel", "channel2"):
                if key in cell or key == "channel":
                    try:
                        config.resolve_channel(cell.get(key, 0))
                    except Exception as exc:
                        raise ConfigError(
                            f"grid cell {cell_index}: cannot load {key}: {exc}"
                        ) from exc
        return config

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def resolve_channel(self, spec) -> PauliDistribution:
        """Resolve an index into ``channels``, a file path, or a preset dict."""
        if isinstance(spec, int):
            try:
                spec = self.channels[spec]
            except IndexError:
                raise ConfigError(f"channel index {spec} out of range")
        if isinstance(spec, str):
            return load_channel(spec)
        if isinstance(spec, dict):
            if "file" in spec:
                return load_channel(spec["file"])
            kwargs = {k: spec[k] for k in ("q", "s", "seed") if k in spec}
            return make_channel(spec["preset"], int(spec["n"]), **kwargs)
        raise ConfigError(f"cannot interpret channel spec {spec!r}")


@dataclass
class ExperimentReport:
    config: dict
    records: list
    summaries: list
    tool_version: str
    format_version: int
    partial: bool
    total_wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "tool_version": self.tool_version,
            "partial": self.partial,
            "config": self.config,
            "summaries": self.summaries,
            "records": self.records,
            "total_wall_time_s": self.total_wall_time_s,
        }


def _cell_plan(config: ExperimentConfig, cell: dict) -> dict:
    """Static (trial-independent) inputs of one grid cell."""
    out = dict(cell)
    if "p" in out:
        out["p"] = parse_norm_order(out["p"])
    return out


def _run_one(config: ExperimentConfig, cell_index: int, trial: int) -> dict:
    cell = _cell_plan(config, config.grid[cell_index])
    seed = (config.master_seed, cell_index, trial)
    record = {
        "task": config.task,
        "cell": cell_index,
        "trial": trial,
        "seed": list(seed),
        "n": None, "p": None, "epsilon": None, "delta": None, "N": None,
        "value": None, "error": None, "success": None, "reject": None,
        "failure": None,
    }
    started = time.perf_counter()
    try:
        _dispatch(config, cell, seed, record)
    except Exception as exc:  # record-and-continue per-cell failure policy
        record["failure"] = f"{type(exc).__name__}: {exc}"
    record["wall_time_s"] = time.perf_counter() - started
    return record


def _dispatch(config: ExperimentConfig, cell: dict, seed, record: dict) -> None:
    task = config.task
    channel = config.resolve_channel(cell.get("channel", 0))
    record["n"] = channel.n

    if task == "learn":
        p = cell["p"]
        epsilon = float(cell["epsilon"])
        delta = float(cell.get("delta", 1 / 3))
        record.update(p=_p_repr(p), epsilon=epsilon, delta=delta)
        plan = plan_sample_size(p, channel.n, epsilon, delta)
        if "N" in cell:
            plan = SamplePlan(p=p, epsilon=epsilon, delta=delta, n=channel.n,
                              N_upper=int(cell["N"]), N_lower=plan.N_lower,
                              regime=plan.regime)
        trial = run_learning_trial(channel, plan, seed)
        record.update(N=trial.N, value=trial.error, error=trial.error,
                      success=trial.success)

    elif task == "test":
        p = cell["p"]
        epsilon = float(cell["epsilon"])
        c_plan = float(cell.get("c_plan", config.constants.get("c_plan", 0))) or default_c_plan(p)
        record.update(p=_p_repr(p), epsilon=epsilon)
        plan = plan_test_samples(p, channel.n, epsilon, c_plan)
        N = int(cell.get("N", plan.N))
        batch = draw_samples(channel, N, seed)
        verdict = test_uniformity(batch, p, epsilon, c_plan)
        record.update(N=N, value=verdict.statistic, reject=verdict.reject)

    elif task in ("entropy", "support"):
        epsilon = float(cell.get("epsilon", 0.5))
        gamma = float(cell.get("gamma", config.constants.get("gamma", 2.0)))
        from .unseen import recommend_sample_size

        N = int(cell.get("samples", 0)) or recommend_sample_size(channel.k, 1.0, gamma)
        record.update(epsilon=epsilon, N=N)
        batch = draw_samples(channel, N, seed)
        if task == "entropy":
            estimate = estimate_entropy_unseen(batch, channel.k)
            error = abs(estimate - shannon_entropy(channel))
        else:
            estimate = estimate_support_unseen(batch, channel.k)
            error = abs(estimate - support_size(channel)) / channel.k
        record.update(value=float(estimate), error=error, success=bool(error <= epsilon))

    elif task == "diamond":
        method = cell.get("method", "unseen")
        epsilon = float(cell["epsilon"])
        channel2 = config.resolve_channel(cell.get("channel2", 1))
        truth = diamond_exact(channel, channel2)
        record.update(epsilon=epsilon)
        if method == "plugin":
            delta = float(cell.get("delta", 1 / 3))
            record["delta"] = delta
            est = diamond_estimate_plugin(channel, channel2, epsilon, delta, seed)
        elif method == "unseen":
            gamma = float(cell.get("gamma", config.constants.get("gamma", 2.0)))
            est = diamond_estimate_unseen(channel, channel2, epsilon, gamma, seed)
        else:
            raise ConfigError(f"unknown diamond method {method!r}")
        error = abs(est.value - truth)
        record.update(N=est.queries_per_channel, value=est.value, error=error,
                      success=bool(error <= est.epsilon_target))

    elif task == "verify-bell":
        tol = float(cell.get("tol", 1e-10))
        deviations = verify_bell_sampling(channel)
        worst = max(deviations.values())
        record.update(value=worst, error=worst, success=bool(worst < tol))

    else:  # pragma: no cover - guarded by config validation
        raise ConfigError(f"unknown task {task!r}")


def _p_repr(p: float):
    return "inf" if math.isinf(p) else p


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute all cells x trials; summaries aggregate per cell."""
    started = time.perf_counter()
    jobs = [(ci, t) for ci in range(len(config.grid)) for t in range(config.trials)]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(lambda j: _run_one(config, *j), jobs))
    else:
        records = [_run_one(config, *job) for job in jobs]

    summaries = []
    partial = False
    for ci, cell in enumerate(config.grid):
        rows = [r for r in records if r["cell"] == ci]
        failures = [r for r in rows if r["failure"] is not None]
        partial = partial or bool(failures)
        errors = [r["error"] for r in rows if r["error"] is not None]
        successes = [r["success"] for r in rows if r["success"] is not None]
        rejects = [r["reject"] for r in rows if r["reject"] is not None]
        summary = {
            "cell": ci,
            "params": dict(cell),
            "trials": len(rows),
            "failures": len(failures),
            "N": rows[0]["N"] if rows else None,
            "error_median": float(np.median(errors)) if errors else None,
            "error_q25": float(np.percentile(errors, 25)) if errors else None,
            "error_q75": float(np.percentile(errors, 75)) if errors else None,
            "success_rate": float(np.mean(successes)) if successes else None,
            "reject_rate": float(np.mean(rejects)) if rejects else None,
        }
        summaries.append(summary)

    return ExperimentReport(
        config={
            "task": config.task,
            "channels": list(config.channels),
            "grid": [dict(c) for c in config.grid],
            "trials": config.trials,
            "master_seed": config.master_seed,
            "constants": dict(config.constants),
            "workers": config.workers,
        },
        records=records,
        summaries=summaries,
        tool_version=__version__,
        format_version=FORMAT_VERSION,
        partial=partial,
        total_wall_time_s=time.perf_counter() - started,
    )


def fit_scaling(report: ExperimentReport, x: str, y: str) -> dict:
    """Log-log least squares over per-cell values; returns slope/intercept/r2.

    ``x`` and ``y`` name summary fields or cell parameters (e.g. x="N",
    y="error_median").
    """
    xs, ys = [], []
    for summary in report.summaries:
        xv = summary.get(x, summary["params"].get(x))
        yv = summary.get(y, summary["params"].get(y))
        if xv is None or yv is None:
            continue
        if xv <= 0 or yv <= 0:
            raise ValueError(f"fit_scaling needs positive values, got ({xv}, {yv})")
        xs.append(math.log(xv))
        ys.append(math.log(yv))
    if len(xs) < 3:
        raise ValueError(f"fit_scaling needs at least 3 cells, got {len(xs)}")
    slope, intercept = np.polyfit(xs, ys, 1)
    predicted = slope * np.asarray(xs) + intercept
    resid = np.asarray(ys) - predicted
    total = np.asarray(ys) - np.mean(ys)
    r2 = 1.0 - float(resid @ resid) / float(total @ total) if total.any() else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def write_report(report: ExperimentReport, outdir) -> tuple[Path, Path]:
    """Write report.json and records.csv under ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report_path = outdir / "report.json"
    csv_path = outdir / "records.csv"
    report_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    with csv_path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for record in report.records:
            row = dict(record)
            row["format_version"] = FORMAT_VERSION
            row["seed"] = ":".join(str(s) for s in record["seed"])
            writer.writerow(row)
    return report_path, csv_path
