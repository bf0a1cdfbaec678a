"""
Command line interface.

Exit codes: 0 success, 1 usage or input error (or a failed ``validate``
check), 2 undefined correlation on a degenerate margin.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import distance_stats
from .dataset import DatasetError, RunConfig, parse_dataset, read_columns
from .dependence import dependence_report, empirical_evar, solve_ecov
from .errors import UndefinedCorrelationError
from .inference import permutation_test_ecov
from .metric import MetricError
from .transport import TransportError, TransportProblem, solve_transport
from .univariate import wasserstein_1d
from .validation import format_table, run_checks

EXIT_OK, EXIT_USAGE, EXIT_UNDEFINED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _cols(text: str) -> list[str]:
    return [c.strip() for c in text.split(",") if c.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="emcor", description="Earth mover's covariance and correlation.")
    parser.add_argument("--version", action="version", version=f"emcor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_command(name, help_text, z=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", type=Path, required=True, help="CSV file with a header row")
        p.add_argument("--x-cols", type=_cols, default=["x"])
        p.add_argument("--y-cols", type=_cols, default=["y"])
        if z:
            p.add_argument("--z-cols", type=_cols, default=None)
            p.add_argument("--metric-z", default="euclidean")
        p.add_argument("--metric-x", default="euclidean",
                       help="euclidean, manhattan, discrete or matrix:<path>")
        p.add_argument("--metric-y", default="euclidean")
        p.add_argument("--format", choices=("json", "plain"), default="json")
        return p

    p = data_command("ecor", "eCov, eVars, eCor, bounds and baselines", z=True)
    p.add_argument("--timings", action="store_true", help="include solver wall time")
    data_command("dcor", "sample distance covariance and correlation")
    p = data_command("wasserstein", "1-D earth mover distance between two columns")
    p.add_argument("--y-input", type=Path, default=None,
                   help="read the y column from this CSV instead (sizes may differ)")
    p = data_command("test-independence", "permutation test on eCov")
    p.add_argument("--permutations", type=int, default=199)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("transport", help="solve a transportation problem from JSON")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--format", choices=("json", "plain"), default="json")

    p = sub.add_parser("validate", help="run the seeded self-check suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full", action="store_true", help="run at acceptance sizes")
    p.add_argument("--format", choices=("json", "plain"), default="plain")
    return parser


def _plain(value) -> float | int | str | None | list | dict:
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def emit(payload: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    payload = _plain(payload)
    if fmt == "json":
        # repr-based floats: shortest text that parses back to the same double.
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        for key, value in payload.items():
            out.write(f"{key}: {json.dumps(value)}\n")


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        x_cols=getattr(args, "x_cols", ["x"]),
        y_cols=getattr(args, "y_cols", ["y"]),
        z_cols=getattr(args, "z_cols", None),
        metric_x=getattr(args, "metric_x", "euclidean"),
        metric_y=getattr(args, "metric_y", "euclidean"),
        metric_z=getattr(args, "metric_z", "euclidean"),
        seed=getattr(args, "seed", 0),
        permutations=getattr(args, "permutations", 199),
        format=args.format,
        timings=getattr(args, "timings", False),
        full=getattr(args, "full", False),
        y_input=getattr(args, "y_input", None),
    )


def _ecor(cfg: RunConfig) -> dict:
    s = parse_dataset(cfg.input, cfg)
    if s.trivariate:
        evars = [empirical_evar(p, m) for p, m in zip(s.margins(), s.metrics())]
        if min(evars) <= 0:
            raise UndefinedCorrelationError("eCor undefined: degenerate margin")
        ecov, plan, problem = solve_ecov(s)
        out = {
            "ecov": ecov,
            "evar_x": evars[0],
            "evar_y": evars[1],
            "evar_z": evars[2],
            "ecor": ecov / min(evars),
            "n": s.n,
            "supply_nodes": problem.shape[0],
            "demand_nodes": problem.shape[1],
            "arcs": problem.shape[0] * problem.shape[1],
            "augmentations": plan.augmentations,
        }
        if cfg.timings:
            out["solve_seconds"] = plan.seconds
        return out
    return dependence_report(s).to_dict(timings=cfg.timings)


def _dcor(cfg: RunConfig) -> dict:
    s = parse_dataset(cfg.input, cfg)
    stats = distance_stats(s)
    if stats["dcor"] is None:
        raise UndefinedCorrelationError("dCor undefined: degenerate margin")
    return {**stats, "n": s.n}


def _wasserstein(cfg: RunConfig) -> dict:
    if len(cfg.x_cols) != 1 or len(cfg.y_cols) != 1:
        raise DatasetError("wasserstein takes exactly one x and one y column")
    if cfg.metric_x != "euclidean" or cfg.metric_y != "euclidean":
        raise DatasetError("wasserstein works on real columns only")
    if cfg.y_input is None:
        data = read_columns(cfg.input, cfg.x_cols + cfg.y_cols)
        xs, ys = data[cfg.x_cols[0]], data[cfg.y_cols[0]]
    else:
        xs = read_columns(cfg.input, cfg.x_cols)[cfg.x_cols[0]]
        ys = read_columns(cfg.y_input, cfg.y_cols)[cfg.y_cols[0]]
    return {"wasserstein": wasserstein_1d(xs, ys), "n_x": len(xs), "n_y": len(ys)}


def _test_independence(cfg: RunConfig) -> dict:
    s = parse_dataset(cfg.input, cfg)
    return permutation_test_ecov(s, cfg.permutations, cfg.seed).to_dict()


def _transport(cfg: RunConfig) -> dict:
    try:
        doc = json.loads(Path(cfg.input).read_text())
        p = TransportProblem(doc["supplies"], doc["demands"], doc["costs"], doc.get("scale", 1.0))
    except (KeyError, json.JSONDecodeError) as exc:
        raise DatasetError(f"{cfg.input}: bad problem file ({exc})") from None
    plan = solve_transport(p)
    return {
        "cost": plan.total_cost,
        "flows": [[i, j, units] for (i, j), units in sorted(plan.flows.items())],
    }


COMMANDS = {
    "ecor": _ecor,
    "dcor": _dcor,
    "wasserstein": _wasserstein,
    "test-independence": _test_independence,
    "transport": _transport,
}


def run_subcommand(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if cfg.command == "validate":
        checks = run_checks(cfg.seed, cfg.full)
        if cfg.format == "json":
            emit({"seed": cfg.seed, "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks
            ]}, "json", out)
        else:
            out.write(format_table(checks) + "\n")
        return EXIT_OK if all(c.passed for c in checks) else EXIT_USAGE
    emit(COMMANDS[cfg.command](cfg), cfg.format, out)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return run_subcommand(_config(args))
    except UsageError as exc:
        print(f"emcor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UndefinedCorrelationError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_UNDEFINED
    except (DatasetError, MetricError, TransportError, ValueError, OSError) as exc:
        print(f"emcor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
