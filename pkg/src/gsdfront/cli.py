"""Command line entry point: ``gsdfront <command> ...``.

Every command prints a JSON report to stdout, or writes its report files
into ``--out`` when given. Exit codes: 0 success, 1 usage error, 2 data
error, 3 numerical failure. Set ``GSDFRONT_LOG_LEVEL`` (e.g. ``INFO``)
for progress logging on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from gsdfront import __version__
from gsdfront.baselines import marginal_front
from gsdfront.core import DataError, NumericalError, PerformanceTable, TestConfig
from gsdfront.gsd import d_matrix, egsd_front, epsilon_schedule, front_from_matrix, FrontKind, pareto_front, relation_from_matrix
from gsdfront.io import AnalysisConfig, emit_report, fetch_csv, ingest, render, validate_source
from gsdfront.permtest import ResamplingPlan, all_pairwise, dynamic_gsd_test, static_gsd_test
from gsdfront.prefsys import ConstraintCapExceeded, InconsistentSystem
from gsdfront.robust import aggregate_curve, breakdown, contamination_curve, default_k_max
from gsdfront.synth import PopulationModel, consistency_experiment, default_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("gsdfront")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(args) -> tuple[PerformanceTable, AnalysisConfig]:
    source: Any = args.csv
    if source.startswith(("http://", "https://")):
        source = fetch_csv(source, retries=args.retries)
    else:
        path = Path(source)
        if not path.is_file():
            raise DataError(f"no such file: {source}")
        source = path.read_bytes()
    config = AnalysisConfig.load(args.config) if args.config else None
    table = ingest(source, config)
    if config is None:
        config = AnalysisConfig.default_for(table.scale.names)
    return table, config


def _setting(args, config: AnalysisConfig, name: str):
    value = getattr(args, name, None)
    return getattr(config, name) if value is None else value


def _plan(args, config: AnalysisConfig, s: int) -> ResamplingPlan:
    exhaustive = args.exhaustive or config.exhaustive
    cfg = TestConfig(
        alpha=_setting(args, config, "alpha"),
        n_resamples=_setting(args, config, "n_resamples"),
        delta=_setting(args, config, "delta"),
        seed=_setting(args, config, "seed"),
        exhaustive=exhaustive,
    )
    return ResamplingPlan.from_config(cfg, s)


def _write(args, outputs: dict[str, Any], main: str) -> None:
    """``outputs`` maps file names to renderable results; ``main`` goes to stdout without ``--out``."""
    if args.out is None:
        sys.stdout.write(render(outputs[main], Path(main).suffix.lstrip(".")))
        return
    for name, results in outputs.items():
        emit_report(results, Path(args.out) / name)
    log.info("wrote %d files to %s", len(outputs), args.out)


def _matrix_rows(names: Sequence[str], d: np.ndarray):
    return [(a, b, float(d[i, j])) for i, a in enumerate(names) for j, b in enumerate(names) if i != j]


def cmd_analyze(args) -> int:
    table, config = _load(args)
    delta = _setting(args, config, "delta")
    epsilon = _setting(args, config, "epsilon")
    d = d_matrix(table, delta)
    graph = relation_from_matrix(table.classifiers, d)
    ordinal = table.with_scale(table.scale.all_ordinal())
    d_fsd = d_matrix(ordinal, delta)
    fsd_graph = relation_from_matrix(table.classifiers, d_fsd)
    fronts = {
        "egsd": egsd_front(table, epsilon, delta, d=d),
        "egsd_0": egsd_front(table, 0.0, delta, d=d),
        "pareto": pareto_front(table),
        "fsd": front_from_matrix(table.classifiers, d_fsd, epsilon, FrontKind.FSD),
    }
    report = {
        "command": "analyze",
        "seed": _setting(args, config, "seed"),
        "config": config.to_dict(),
        "classifiers": list(table.classifiers),
        "metrics": [{"name": m.name, "scale": m.scale.value} for m in table.scale.metrics],
        "s": table.s,
        "delta": delta,
        "epsilon": epsilon,
        "epsilon_schedule": epsilon_schedule(table.s),
        "fronts": {k: {"members": list(f.members), "epsilon": f.epsilon, "kind": f.kind} for k, f in fronts.items()},
        "d_matrix": {a: {b: float(d[i, j]) for j, b in enumerate(table.classifiers)} for i, a in enumerate(table.classifiers)},
        "gsd_relation": {"groups": [list(g) for g in graph.groups], "edges": [list(e) for e in graph.strict_edges]},
        "fsd_relation": {"groups": [list(g) for g in fsd_graph.groups], "edges": [list(e) for e in fsd_graph.strict_edges]},
    }
    _write(args, {
        "analysis.json": report,
        "d_matrix.csv": (["first", "second", "d"], _matrix_rows(table.classifiers, d)),
        "gsd_hasse.dot": graph.to_dot("gsd"),
        "fsd_hasse.dot": fsd_graph.to_dot("fsd"),
    }, "analysis.json")
    return EXIT_OK


def _pairwise_json(results) -> dict:
    return {
        c: {
            "observed": r.observed,
            "p_value": r.p_value,
            "critical_value": r.critical_value,
            "ell": r.ell,
            "r": r.r,
            "reject": r.reject,
            "never_rejects": r.never_rejects,
            "level": r.alpha,
        }
        for c, r in results.items()
    }


def _check_target(table: PerformanceTable, target: str) -> None:
    if target not in table.classifiers:
        raise DataError(f"unknown target classifier {target!r}; known: {list(table.classifiers)}")


def cmd_test(args) -> int:
    table, config = _load(args)
    _check_target(table, args.target)
    alpha = _setting(args, config, "alpha")
    delta = _setting(args, config, "delta")
    plan = _plan(args, config, table.s)
    pairwise = all_pairwise(args.target, table, alpha, plan, delta)
    report: dict[str, Any] = {
        "command": "test",
        "seed": plan.seed,
        "target": args.target,
        "alpha": alpha,
        "delta": delta,
        "plan": {"mode": plan.mode, "n_resamples": plan.n_resamples, "include_observed": plan.include_observed, "r": plan.r},
    }
    rows = []
    if args.mode in ("static", "both"):
        st = static_gsd_test(args.target, table, alpha, plan, delta, pairwise=pairwise)
        report["static"] = {"reject": st.reject, "pairwise": _pairwise_json(st.pairwise)}
        rows += [("static", c, r.observed, r.p_value, r.reject) for c, r in st.pairwise.items()]
    if args.mode in ("dynamic", "both"):
        dy = dynamic_gsd_test(args.target, table, alpha, plan, delta, pairwise=pairwise)
        report["dynamic"] = {"level": dy.level, "s_max": list(dy.s_max), "pairwise": _pairwise_json(dy.pairwise)}
        rows += [("dynamic", c, r.observed, r.p_value, r.reject) for c, r in dy.pairwise.items()]
    _write(args, {
        "test.json": report,
        "pairwise.csv": (["test", "candidate", "observed", "p_value", "reject"], rows),
    }, "test.json")
    return EXIT_OK


def cmd_robust(args) -> int:
    table, config = _load(args)
    _check_target(table, args.target)
    alpha = _setting(args, config, "alpha")
    delta = _setting(args, config, "delta")
    k_max = args.k_max if args.k_max is not None else (config.k_max if config.k_max is not None else default_k_max(table.s))
    if not 0 <= k_max < table.s:
        raise UsageError(f"--k-max must lie in [0, {table.s - 1}]")
    plan = _plan(args, config, table.s)
    pairwise = all_pairwise(args.target, table, alpha, plan, delta)
    curves = {c: contamination_curve(r, k_max) for c, r in pairwise.items()}
    agg = aggregate_curve(args.target, curves)
    level_dyn = alpha / (table.k - 1)
    report = {
        "command": "robust",
        "seed": plan.seed,
        "target": args.target,
        "alpha": alpha,
        "delta": delta,
        "k_max": k_max,
        "curves": {c: list(cv.values) for c, cv in curves.items()},
        "aggregate": list(agg.values),
        "breakdown": {
            "static": breakdown(agg, alpha).k_star,
            "dynamic": {c: breakdown(cv, level_dyn).k_star for c, cv in curves.items()},
            "dynamic_level": level_dyn,
        },
    }
    rows = [row for cv in curves.values() for row in cv.rows()]
    rows += [(f"F:{args.target}", k, v) for k, v in enumerate(agg.values)]
    _write(args, {
        "robust.json": report,
        "curves.csv": (["pair", "k", "p_value"], rows),
    }, "robust.json")
    return EXIT_OK


def cmd_baseline(args) -> int:
    table, config = _load(args)
    alpha = _setting(args, config, "alpha")
    try:
        res = marginal_front(table, alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = {
        "command": "baseline",
        "seed": _setting(args, config, "seed"),
        "alpha": alpha,
        "front": list(res.front),
        "friedman": {m: {"statistic": f.statistic, "p_value": f.p_value, "reject": f.reject, "mean_ranks": list(f.mean_ranks)}
                     for m, f in res.friedman.items()},
        "nemenyi": {m: {"critical_difference": n.critical_difference, "p_values": n.p_values, "significant": n.significant}
                    for m, n in res.nemenyi.items()},
    }
    rows = []
    for m, n in res.nemenyi.items():
        for i, a in enumerate(table.classifiers):
            for j, b in enumerate(table.classifiers):
                if i < j:
                    rows.append((m, a, b, n.mean_ranks[i] - n.mean_ranks[j], float(n.p_values[i, j]), bool(n.significant[i, j])))
    _write(args, {
        "baseline.json": report,
        "nemenyi.csv": (["metric", "first", "second", "rank_difference", "p_value", "significant"], rows),
    }, "baseline.json")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.model == "default":
        model = default_model()
    else:
        path = Path(args.model)
        if not path.is_file():
            raise DataError(f"no such model file: {args.model}")
        try:
            model = PopulationModel.from_dict(yaml.safe_load(path.read_text(encoding="utf-8")))
        except (KeyError, TypeError, ValueError, yaml.YAMLError) as exc:
            raise DataError(f"invalid model file {args.model}: {exc}") from None
    rep = consistency_experiment(model, args.s_grid, args.runs, args.epsilon_c, args.seed)
    summary = rep.summary()
    summary.update(command="simulate", model=model.to_dict())
    _write(args, {
        "experiment.json": summary,
        "experiment.csv": (["s", "run", "recovered", "superset"], rep.records),
    }, "experiment.json")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = AnalysisConfig.load(args.config) if args.config else None
    path = Path(args.csv)
    if not args.csv.startswith(("http://", "https://")) and not path.is_file():
        raise DataError(f"no such file: {args.csv}")
    source = fetch_csv(args.csv, retries=args.retries) if args.csv.startswith(("http://", "https://")) else path.read_bytes()
    violations = validate_source(source, config)
    _write(args, {"validate.json": {"command": "validate", "valid": not violations, "violations": violations}}, "validate.json")
    for v in violations:
        print(v, file=sys.stderr)
    return EXIT_OK if not violations else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gsdfront", description="GSD fronts, permutation tests and robustness for classifier benchmarks.")
    p.add_argument("--version", action="version", version=f"gsdfront {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_cmd(name: str, help_: str, config_required: bool = False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("csv", help="input CSV path or http(s) URL")
        sp.add_argument("--config", required=config_required, help="YAML analysis config")
        sp.add_argument("--out", help="directory for report files (default: JSON to stdout)")
        sp.add_argument("--retries", type=int, default=0, help="retries for remote CSV fetches")
        sp.add_argument("--seed", type=int)
        return sp

    def test_opts(sp):
        sp.add_argument("--target", required=True)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--n-resamples", dest="n_resamples", type=int)
        sp.add_argument("--exhaustive", action="store_true", help="use all C(2s, s) splits")

    sp = data_cmd("analyze", "fronts, d-matrix and Hasse graphs", config_required=True)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--delta", type=float)
    sp.set_defaults(func=cmd_analyze)

    sp = data_cmd("test", "static and dynamic GSD permutation tests")
    test_opts(sp)
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--static", dest="mode", action="store_const", const="static")
    mode.add_argument("--dynamic", dest="mode", action="store_const", const="dynamic")
    sp.set_defaults(func=cmd_test, mode="both")

    sp = data_cmd("robust", "contamination curves and breakdown points")
    test_opts(sp)
    sp.add_argument("--k-max", dest="k_max", type=int)
    sp.set_defaults(func=cmd_robust)

    sp = data_cmd("baseline", "marginal front from Friedman and Nemenyi tests")
    sp.add_argument("--alpha", type=float)
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("simulate", help="consistency experiment on a synthetic population")
    sp.add_argument("--model", default="default", help="'default' or a YAML model file")
    sp.add_argument("--s-grid", dest="s_grid", type=int, nargs="+", default=[50, 200, 800])
    sp.add_argument("--runs", type=int, default=50)
    sp.add_argument("--epsilon-c", dest="epsilon_c", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = data_cmd("validate", "ingestion dry run listing every violation")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("GSDFRONT_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gsdfront: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        parts = str(exc).split("; ")
        if len(parts) > 10:
            parts = parts[:10] + [f"... and {len(parts) - 10} more"]
        print("gsdfront: data error: " + "; ".join(parts), file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ConstraintCapExceeded, InconsistentSystem) as exc:
        print(f"gsdfront: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"gsdfront: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gsdfront: cannot write output: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
