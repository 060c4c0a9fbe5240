"""Command-line entry point.

One executable, one subcommand per task.  Every stochastic command echoes
the master seed it used (drawn from OS entropy unless --seed is given), so
any output can be reproduced byte-for-byte by rerunning with that seed.
Exit codes: 0 success, 1 validation/usage error, 2 runtime or estimation
failure (including a failed verification), 3 partial bench run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .bench import ConfigError, ExperimentConfig, fit_scaling, run_experiment, write_report
from .core import (
    ResourceLimitError,
    decode,
    load_channel,
    lp_distance,
    make_channel,
    parse_norm_order,
    random_dense_channel,
    shannon_entropy,
    support_size,
    uniform_channel,
)
from .diamond import (
    DiamondEstimate,
    diamond_estimate_plugin,
    diamond_estimate_unseen,
    diamond_exact,
)
from .learner import learn_empirical, median_estimate, plan_sample_size, run_learning_trial
from .quantum import draw_samples, verify_bell_sampling
from .tester import default_c_plan, plan_test_samples, test_uniformity
from .unseen import (
    EstimationError,
    estimate_entropy_unseen,
    estimate_support_unseen,
    plugin_entropy,
    recommend_channel_samples,
)
from .rng import fresh_entropy


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (default: OS entropy, echoed in output)")
    common.add_argument("--output", choices=("json", "csv", "text"), default="json")
    common.add_argument("--quiet", action="store_true", help="suppress warnings")

    parser = argparse.ArgumentParser(prog="paulikit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("plan", parents=[common], help="learning sample-size planner")
    sp.add_argument("--p", required=True, help="norm order (>= 1 or 'inf')")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)

    sp = sub.add_parser("sample", parents=[common], help="draw channel samples")
    sp.add_argument("--channel", required=True)
    sp.add_argument("-N", "--samples", dest="samples", type=int, required=True)

    sp = sub.add_parser("learn", parents=[common], help="plan and run empirical learning trials")
    sp.add_argument("--channel", required=True)
    sp.add_argument("-p", "--p", dest="p", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--boost", type=int, default=0,
                    help="median of this many independent estimates per trial (0 = off)")

    sp = sub.add_parser("test-uniformity", parents=[common], help="white-noise hypothesis test")
    sp.add_argument("--channel", required=True)
    sp.add_argument("-p", "--p", dest="p", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--cplan", type=float, default=None,
                    help="planning multiplier (default: calibrated per statistic)")

    for name in ("estimate-entropy", "estimate-support"):
        sp = sub.add_parser(name, parents=[common], help=f"{name.split('-')[1]} via unseen estimator")
        sp.add_argument("--channel", required=True)
        sp.add_argument("--samples", type=int, required=True)
        sp.add_argument("--eps", type=float, default=0.5,
                        help="accuracy used for the query recommendation")
        sp.add_argument("--gamma", type=float, default=2.0)

    sp = sub.add_parser("estimate-diamond", parents=[common], help="diamond distance between two channels")
    sp.add_argument("--channel1", required=True)
    sp.add_argument("--channel2", required=True)
    sp.add_argument("--eps", type=float, default=0.25)
    sp.add_argument("--method", choices=("exact", "plugin", "unseen"), default="exact")
    sp.add_argument("--delta", type=float, default=1 / 3)
    sp.add_argument("--gamma", type=float, default=2.0)

    sp = sub.add_parser("verify-bell", parents=[common],
                        help="check Bell sampling against the channel law")
    sp.add_argument("--channel", action="append", default=[],
                    help="channel file; repeatable (default: built-in suite)")
    sp.add_argument("--nmax", type=int, default=3)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--random", type=int, default=0,
                    help="extra random dense channels per qubit count")

    sp = sub.add_parser("bench", parents=[common], help="run an experiment config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=None)

    return parser


# ---------------------------------------------------------------------------
# command handlers; each returns (payload, exit_code)


def _cmd_plan(args) -> tuple[dict, int]:
    plan = plan_sample_size(parse_norm_order(args.p), args.n, args.eps, args.delta)
    return {
        "command": "plan",
        "p": _p_out(plan.p),
        "n": plan.n,
        "epsilon": plan.epsilon,
        "delta": plan.delta,
        "N_upper": plan.N_upper,
        "N_lower": plan.N_lower,
        "regime": plan.regime,
    }, 0


def _cmd_sample(args) -> tuple[dict, int]:
    P = load_channel(args.channel)
    seed = _seed(args)
    batch = draw_samples(P, args.samples, seed)
    return {
        "command": "sample",
        "seed": seed,
        "n": P.n,
        "N": batch.count,
        "outcomes": batch.outcomes.tolist(),
        "labels": [decode(int(i), P.n).labels for i in batch.outcomes],
    }, 0


def _cmd_learn(args) -> tuple[dict, int]:
    P = load_channel(args.channel)
    p = parse_norm_order(args.p)
    plan = plan_sample_size(p, P.n, args.eps, args.delta)
    seed = _seed(args)
    if args.trials < 1:
        raise ValueError(f"trials must be >= 1, got {args.trials}")
    records = []
    for t in range(args.trials):
        if args.boost > 0:
            estimates = [
                learn_empirical(draw_samples(P, plan.N_upper, (seed, t, j)))
                for j in range(args.boost)
            ]
            estimate = median_estimate(estimates)
            error = lp_distance(estimate, P, p)
            records.append({"trial": t, "N": plan.N_upper * args.boost,
                            "error": error, "success": bool(error <= plan.epsilon)})
        else:
            trial = run_learning_trial(P, plan, (seed, t))
            records.append({"trial": t, "N": trial.N,
                            "error": trial.error, "success": trial.success})
    errors = [r["error"] for r in records]
    return {
        "command": "learn",
        "seed": seed,
        "boost": args.boost,
        "plan": {
            "p": _p_out(plan.p), "n": plan.n, "epsilon": plan.epsilon,
            "delta": plan.delta, "N_upper": plan.N_upper,
            "N_lower": plan.N_lower, "regime": plan.regime,
        },
        "records": records,
        "summary": {
            "trials": args.trials,
            "error_median": float(np.median(errors)),
            "success_rate": float(np.mean([r["success"] for r in records])),
        },
    }, 0


def _cmd_test_uniformity(args) -> tuple[dict, int]:
    P = load_channel(args.channel)
    p = parse_norm_order(args.p)
    c_plan = args.cplan if args.cplan is not None else default_c_plan(p)
    plan = plan_test_samples(p, P.n, args.eps, c_plan)
    seed = _seed(args)
    if args.trials < 1:
        raise ValueError(f"trials must be >= 1, got {args.trials}")
    records = []
    for t in range(args.trials):
        batch = draw_samples(P, plan.N, (seed, t))
        verdict = test_uniformity(batch, p, args.eps, c_plan)
        records.append({
            "trial": t,
            "statistic": verdict.statistic,
            "threshold": verdict.threshold,
            "reject": verdict.reject,
        })
    reject_rate = float(np.mean([r["reject"] for r in records]))
    true_distance = lp_distance(P, uniform_channel(P.n), p)
    return {
        "command": "test-uniformity",
        "seed": seed,
        "plan": {"p": _p_out(plan.p), "n": plan.n, "epsilon": plan.epsilon,
                 "N": plan.N, "regime": plan.regime, "c_plan": plan.c_plan},
        "records": records,
        "rates": {
            "trials": args.trials,
            "reject_rate": reject_rate,
            "true_distance": true_distance,
            "type_i_rate": reject_rate if true_distance == 0.0 else None,
            "type_ii_rate": (1.0 - reject_rate) if true_distance > args.eps else None,
        },
    }, 0


def _cmd_estimate(args, kind: str) -> tuple[dict, int]:
    P = load_channel(args.channel)
    seed = _seed(args)
    batch = draw_samples(P, args.samples, seed)
    payload = {
        "command": f"estimate-{kind}",
        "seed": seed,
        "n": P.n,
        "k": P.k,
        "samples": args.samples,
        "recommended_samples": {
            "epsilon": args.eps,
            "gamma": args.gamma,
            "N": recommend_channel_samples(P.n, args.eps, args.gamma),
        },
    }
    if kind == "entropy":
        payload["estimate_bits"] = estimate_entropy_unseen(batch, P.k)
        payload["plugin_bits"] = plugin_entropy(batch)
        payload["true_bits"] = shannon_entropy(P)
    else:
        probs = P.support_probs()
        promise_ok = bool(probs.min() >= 1.0 / P.k)
        if not promise_ok and not args.quiet:
            print(
                "warning: channel has probabilities in (0, 1/k); the support "
                "error guarantee does not apply to this input",
                file=sys.stderr,
            )
        payload["estimate"] = estimate_support_unseen(batch, P.k)
        payload["plugin"] = int(len(np.unique(batch.outcomes)))
        payload["true_support"] = support_size(P)
        payload["promise_ok"] = promise_ok
    return payload, 0


def _cmd_estimate_diamond(args) -> tuple[dict, int]:
    P1 = load_channel(args.channel1)
    P2 = load_channel(args.channel2)
    exact = diamond_exact(P1, P2)
    payload = {
        "command": "estimate-diamond",
        "n": P1.n,
        "method": args.method,
        "exact_value": exact,
    }
    if args.method == "exact":
        est = DiamondEstimate(value=exact, method="exact",
                              queries_per_channel=0, epsilon_target=0.0)
    else:
        seed = _seed(args)
        payload["seed"] = seed
        if args.method == "plugin":
            est = diamond_estimate_plugin(P1, P2, args.eps, args.delta, seed)
        else:
            est = diamond_estimate_unseen(P1, P2, args.eps, args.gamma, seed)
    payload.update({
        "value": est.value,
        "queries_per_channel": est.queries_per_channel,
        "epsilon_target": est.epsilon_target,
    })
    return payload, 0


def _builtin_suite(nmax: int, extra_random: int, seed: int):
    """Presets at every qubit count up to nmax, plus optional random channels."""
    for n in range(1, nmax + 1):
        yield f"identity(n={n})", make_channel("identity", n)
        yield f"depolarizing(0.3,n={n})", make_channel("depolarizing", n, q=0.3)
        yield f"bit_flip(0.25,n={n})", make_channel("bit_flip", n, q=0.25)
        yield f"dephasing(0.25,n={n})", make_channel("dephasing", n, q=0.25)
        s = min(4, 4**n)
        yield f"sparse_random(s={s},n={n})", make_channel(
            "sparse_random", n, s=s, seed=(seed, n, 0)
        )
        for i in range(extra_random):
            yield f"random(n={n},#{i})", random_dense_channel(n, (seed, n, 1 + i))


def _cmd_verify_bell(args) -> tuple[dict, int]:
    if args.nmax < 1:
        raise ValueError(f"--nmax must be >= 1, got {args.nmax}")
    seed = _seed(args)
    if args.channel:
        named = []
        for path in args.channel:
            P = load_channel(path)
            if P.n > args.nmax:
                raise ResourceLimitError(
                    f"{path}: n={P.n} exceeds the exact-simulation cap --nmax={args.nmax}"
                )
            named.append((path, P))
    else:
        named = list(_builtin_suite(args.nmax, args.random, seed))

    rows = []
    all_pass = True
    for name, P in named:
        deviations = verify_bell_sampling(P, n_max_exact=args.nmax)
        worst = max(deviations.values())
        ok = worst < args.tol
        all_pass = all_pass and ok
        rows.append({"name": name, "n": P.n, **deviations,
                     "max_deviation": worst, "pass": ok})
    payload = {
        "command": "verify-bell",
        "seed": seed,
        "tol": args.tol,
        "channels": rows,
        "all_pass": all_pass,
    }
    return payload, 0 if all_pass else 2


def _cmd_bench(args) -> tuple[dict, int]:
    config = ExperimentConfig.from_json(args.config)
    if args.workers is not None:
        config = ExperimentConfig(
            task=config.task, channels=config.channels, grid=config.grid,
            trials=config.trials, master_seed=config.master_seed,
            constants=config.constants, workers=args.workers,
        )
    report = run_experiment(config)
    report_path, csv_path = write_report(report, args.out)
    payload = {
        "command": "bench",
        "report": str(report_path),
        "records_csv": str(csv_path),
        "partial": report.partial,
        "summaries": report.summaries,
    }
    return payload, 3 if report.partial else 0


# ---------------------------------------------------------------------------
# plumbing


def _p_out(p: float):
    return "inf" if math.isinf(p) else p


def _seed(args) -> int:
    return args.seed if args.seed is not None else fresh_entropy()


def _render(payload: dict, mode: str) -> str:
    if mode == "json":
        return json.dumps(payload, indent=2, sort_keys=True)
    if mode == "csv":
        records = payload.get("records") or payload.get("channels")
        if not records:
            raise ValueError("csv output needs a command that produces records")
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=sorted(records[0].keys()))
        writer.writeheader()
        writer.writerows(records)
        return buffer.getvalue().rstrip("\n")
    lines = []
    _text_lines(payload, "", lines)
    return "\n".join(lines)


def _text_lines(value, prefix: str, lines: list) -> None:
    if isinstance(value, dict):
        for key in value:
            _text_lines(value[key], f"{prefix}.{key}" if prefix else str(key), lines)
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            _text_lines(item, f"{prefix}[{i}]", lines)
    else:
        lines.append(f"{prefix} = {value}")


_HANDLERS = {
    "plan": _cmd_plan,
    "sample": _cmd_sample,
    "learn": _cmd_learn,
    "test-uniformity": _cmd_test_uniformity,
    "estimate-entropy": lambda args: _cmd_estimate(args, "entropy"),
    "estimate-support": lambda args: _cmd_estimate(args, "support"),
    "estimate-diamond": _cmd_estimate_diamond,
    "verify-bell": _cmd_verify_bell,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold into the validation code,
        # but keep 0 for --help/--version
        return 0 if exc.code in (0, None) else 1

    try:
        payload, code = _HANDLERS[args.command](args)
    except (ValueError, ConfigError, FileNotFoundError, json.JSONDecodeError,
            ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 2

    print(_render(payload, args.output))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
