"""tempsec command line: run experiments, diagnostics, oracle self-checks and bound tables.

Exit codes: 0 success, 1 oracle mismatch, 2 invalid config or arguments, 3 solver failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import re
import sys
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from . import lp as lp_mod
from . import oracles
from .arrivals import ArrivalDistribution
from .experiments import diagnostics
from .experiments.bounds import THEOREMS, theoretical_bound
from .experiments.generators import make_instance
from .experiments.harness import (
    ConfigError,
    ExperimentConfig,
    TRIAL_COLUMNS,
    default_threads,
    run_trials,
    summary_dict,
    trials_csv,
)
from .lp import SolverError
from .model import ArrivalRealization, Instance, instance_to_dict, load_instance
from .online import AlgorithmParams
from .schemas import (
    CONFIG_SCHEMA,
    DIAGNOSTIC_SUMMARY_SCHEMA,
    REPRO_SCHEMA,
    SUMMARY_SCHEMA,
)

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

DEFAULT_ORACLE = {"cardinality": "opt_star", "lengths": "opt_star", "packing": "lp"}


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


# --- config loading --------------------------------------------------------------

def _line_of(text, key):
    if key is None:
        return 1
    pattern = re.compile(r'"%s"\s*:' % re.escape(str(key)))
    for lineno, line in enumerate(text.splitlines(), 1):
        if pattern.search(line):
            return lineno
    return 1


def _error_key(err):
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(set(err.instance) - allowed)
        if extra:
            return extra[0]
    if err.validator == "required":
        return next((p for p in reversed(err.path) if isinstance(p, str)), None)
    return next((p for p in reversed(err.path) if isinstance(p, str)), None)


def _parse_value(raw):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(data, overrides):
    """Apply ``key.sub=value`` assignments; values are parsed as JSON when possible."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise CliError(f"--set {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise CliError(f"--set {item!r}: empty key")
        node = data
        for p in parts[:-1]:
            if not isinstance(node.get(p), dict):
                node[p] = {}
            node = node[p]
        node[parts[-1]] = _parse_value(raw)
    return data


def load_config(path, overrides=(), env=None):
    """Read, override and schema-check a config file; returns (data, base directory)."""
    env = os.environ if env is None else env
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}")
    if not isinstance(data, dict):
        raise CliError(f"{path}:1: config must be a JSON object")
    data = apply_overrides(data, overrides)
    if env.get("TEMPSEC_SEED") not in (None, ""):
        try:
            data["seed"] = int(env["TEMPSEC_SEED"])
        except ValueError:
            raise CliError(f"TEMPSEC_SEED must be an integer, got {env['TEMPSEC_SEED']!r}")
    err = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(data)
    )
    if err is not None:
        where = "/".join(str(p) for p in err.path) or "<root>"
        key = _error_key(err)
        raise CliError(f"{path}:{_line_of(text, key)}: {where}: {err.message}")
    return data, path.parent


def build_config(data, base_dir) -> ExperimentConfig:
    """Turn a schema-valid config dict into an ExperimentConfig (exit 2 on inconsistency)."""
    src = data["instance"]
    try:
        if "file" in src:
            file = Path(src["file"])
            instance = load_instance(file if file.is_absolute() else Path(base_dir) / file)
        else:
            instance = make_instance(src)
        alg = data["algorithm"]
        params = AlgorithmParams(variant=alg["variant"], alpha=alg.get("alpha", 0.5),
                                 epsilon=alg.get("epsilon"))
        arrivals = ArrivalDistribution.from_dict(data.get("arrivals", {"kind": "uniform"}))
        return ExperimentConfig(
            instance=instance,
            params=params,
            trials=data["trials"],
            seed=data["seed"],
            oracle=data.get("oracle", DEFAULT_ORACLE[params.variant]),
            arrivals=arrivals,
            validate=data.get("validate", True),
            instance_source=src,
        )
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        raise CliError(f"invalid configuration: {exc}")


# --- artifact writing ------------------------------------------------------------

def _write_json(path, obj, schema):
    jsonschema.validate(obj, schema)
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    Path(path).write_text(text)


def _check_csv(text, columns):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != tuple(columns):
        raise RuntimeError(f"CSV header mismatch: {rows[:1]}")
    if any(len(r) != len(columns) for r in rows[1:]):
        raise RuntimeError("CSV row width mismatch")


def _write_csv(path, text, columns):
    _check_csv(text, columns)
    Path(path).write_text(text)


def _table_csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _out_dir(args, data):
    out = args.out or (data or {}).get("output", {}).get("dir") or "."
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


# --- subcommands -------------------------------------------------------------------

def cmd_run(args):
    data, base = load_config(args.config, args.set)
    config = build_config(data, base)
    out = _out_dir(args, data)
    threads = args.threads or default_threads()
    result = run_trials(config, threads=threads, keep_traces=args.trace)
    summary = summary_dict(result)
    _write_csv(out / "trials.csv", trials_csv(result), TRIAL_COLUMNS)
    if args.trace:
        tdir = out / "traces"
        tdir.mkdir(exist_ok=True)
        width = len(str(config.trials - 1))
        for k, trace in enumerate(result.traces):
            text = trace.to_csv()
            _write_csv(tdir / f"trial_{k:0{width}d}.csv", text,
                       ("item_id", "t", "tentative", "feasible", "selected", "aux_value"))
    _write_json(out / "summary.json", summary, SUMMARY_SCHEMA)
    b = result.bound
    flags = f" [{', '.join(b.flags)}]" if b.flags else ""
    print(f"ratio {summary['ratio']:.6g}  95% CI [{summary['ci_low']:.6g}, "
          f"{summary['ci_high']:.6g}]  {b.theorem} bound {b.value:.6g}{flags}  "
          f"({config.trials} trials)")
    return EXIT_OK


def cmd_diagnose(args):
    data, base = load_config(args.config, args.set)
    config = build_config(data, base)
    inst, params = config.instance, config.params
    needs = {"block": "cardinality", "violation": "packing"}
    if args.which in needs and params.variant != needs[args.which]:
        raise CliError(f"diagnostic {args.which!r} needs variant {needs[args.which]!r}, "
                       f"config has {params.variant!r}")
    out = _out_dir(args, data)
    N = data.get("diagnostics", {}).get("N", 100 * inst.n)
    summary = {"diagnostic": args.which, "seed": config.seed, "trials": config.trials}
    if args.which == "block":
        rows = diagnostics.block_feasibility_diagnostic(
            inst, params, config.trials, N=N, seed=config.seed, dist=config.arrivals)
        _write_csv(out / "block.csv", _table_csv(rows, diagnostics.BLOCK_COLUMNS),
                   diagnostics.BLOCK_COLUMNS)
        used = [r["ratio"] for r in rows if not r["excluded"] and not math.isnan(r["ratio"])]
        summary.update({"blocks": len(rows), "N": N, "bound": rows[0]["bound"] if rows else None,
                        "min_ratio": min(used) if used else None})
        print(f"{len(rows)} blocks, min ratio {summary['min_ratio']}, bound {summary['bound']:.6g}")
    elif args.which == "walk":
        try:
            res = diagnostics.coupled_walk_diagnostic(inst.capacity, inst.gamma, N,
                                                      config.trials, seed=config.seed)
        except ValueError as exc:
            raise CliError(str(exc))
        rows = [{"trial": k, "max_window_difference": float(res["max_window_difference"][k]),
                 "boundary_deviation": float(res["boundary_deviation"][k]),
                 "Q": float(res["q"][k]), "bound": res["bound"]} for k in range(res["trials"])]
        _write_csv(out / "walk.csv", _table_csv(rows, diagnostics.WALK_COLUMNS),
                   diagnostics.WALK_COLUMNS)
        summary.update({k: res[k] for k in ("B", "gamma_N", "mean_q", "stderr_q",
                                            "mean_max_window_difference",
                                            "mean_boundary_deviation", "bound", "fine_bound")})
        print(f"mean Q {res['mean_q']:.6g} (stderr {res['stderr_q']:.3g}), "
              f"bound {res['bound']:.6g}")
    else:
        res = diagnostics.packing_violation_diagnostic(inst, params, config.trials,
                                                       seed=config.seed, dist=config.arrivals)
        rows = [{"constraint": i, "capacity": float(res["capacities"][i]),
                 "violation_rate": float(res["rates"][i]), "stderr": float(res["stderr"][i]),
                 "bound": res["bound"]} for i in range(len(res["rates"]))]
        _write_csv(out / "violation.csv", _table_csv(rows, diagnostics.VIOLATION_COLUMNS),
                   diagnostics.VIOLATION_COLUMNS)
        summary.update({k: _finite(res[k]) if isinstance(res[k], float) else res[k]
                        for k in ("max_rate", "max_rate_stderr", "bound", "epsilon", "B", "d",
                                  "tentative", "committed", "commit_ratio", "commit_bound")})
        print(f"max violation rate {res['max_rate']:.6g} (stderr {res['max_rate_stderr']:.3g}), "
              f"bound {res['bound']:.6g}; commit ratio {res['commit_ratio']:.6g}")
    _write_json(out / f"{args.which}_summary.json", summary, DIAGNOSTIC_SUMMARY_SCHEMA)
    return EXIT_OK


def _random_interval_case(rng, n_max):
    n = int(rng.integers(1, n_max + 1))
    gamma = float(rng.choice([0.1, 0.3]))
    B = int(rng.choice([1, 2, 3]))
    values = rng.integers(1, 20, size=n).astype(float)
    durations = gamma * (1.0 - rng.random(n)) if rng.random() < 0.5 else np.full(n, gamma)
    inst = Instance.from_arrays(values, durations, gamma=gamma, capacity=B)
    times = rng.random(n)
    return inst, times


def _random_lp_case(rng):
    k = int(rng.integers(1, 7))
    m = int(rng.integers(1, 5))
    A = rng.random((m, k))
    A[rng.random((m, k)) < 0.3] = 0.0
    b = rng.random(m) * k * 0.5
    v = rng.random(k)
    if rng.random() < 0.3:
        A, b, v = np.round(A * 4), np.round(b * 4), np.round(v * 4)
    return lp_mod.PackingLP(v, A, b)


def cmd_oracle_check(args):
    if not 1 <= args.n_max <= 20:
        raise CliError("--n-max must lie in [1, 20]")
    out = Path(args.out or ".")
    rng = np.random.default_rng(args.seed)
    for case in range(args.count):
        inst, times = _random_interval_case(rng, args.n_max)
        arr = ArrivalRealization(times)
        flow = oracles.opt_offline_exact(inst, arr, method="flow").value
        brute = oracles.opt_offline_exact(inst, arr, method="brute").value
        if flow != brute:
            return _report_mismatch(out, {
                "check": "flow_vs_brute", "seed": args.seed, "case": case,
                "instance": instance_to_dict(inst), "arrival_times": times.tolist(),
                "flow": flow, "brute": brute})
    for case in range(args.count):
        lp = _random_lp_case(rng)
        got = lp_mod.solve_packing_lp(lp).value
        ref = lp_mod.enumerate_vertices(lp).value
        if abs(got - ref) > 1e-8:
            return _report_mismatch(out, {
                "check": "lp_vs_vertices", "seed": args.seed, "case": case,
                "v": lp.v.tolist(), "A": lp.A.tolist(), "b": lp.b.tolist(),
                "simplex": got, "vertices": ref})
    print(f"oracle check passed: {args.count} interval instances, {args.count} LPs")
    return EXIT_OK


def _report_mismatch(out, repro):
    out.mkdir(parents=True, exist_ok=True)
    path = out / "oracle_check_repro.json"
    _write_json(path, repro, REPRO_SCHEMA)
    print(f"oracle mismatch ({repro['check']}, case {repro['case']}); repro written to {path}",
          file=sys.stderr)
    return EXIT_MISMATCH


def cmd_bounds(args):
    which = args.theorem or THEOREMS
    table = {}
    for th in which:
        try:
            table[th] = theoretical_bound(th, args.gamma, args.B, args.d, args.N).to_dict()
        except ValueError as exc:
            raise CliError(str(exc))
    print(json.dumps(table, indent=2, sort_keys=True))
    return EXIT_OK


# --- entry point -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="tempsec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
        sp.add_argument("--out", help="output directory (default: config output.dir or .)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry by dotted path (repeatable)")

    run = sub.add_parser("run", help="Monte Carlo competitive-ratio estimate")
    common(run)
    run.add_argument("--threads", type=int, default=None,
                     help="worker processes (default: available cores)")
    run.add_argument("--trace", action="store_true", help="also write per-trial traces")
    run.set_defaults(func=cmd_run)

    diag = sub.add_parser("diagnose", help="statistical diagnostics of the analysis")
    common(diag)
    diag.add_argument("--which", required=True, choices=["block", "walk", "violation"])
    diag.add_argument("--threads", type=int, default=None, help="accepted for symmetry; unused")
    diag.set_defaults(func=cmd_diagnose)

    chk = sub.add_parser("oracle-check", help="cross-check exact oracles on small cases")
    chk.add_argument("--n-max", type=int, default=12)
    chk.add_argument("--count", type=int, default=200)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--out", help="directory for the repro file on mismatch")
    chk.set_defaults(func=cmd_oracle_check)

    bnd = sub.add_parser("bounds", help="evaluate the closed-form guarantees")
    bnd.add_argument("--gamma", type=float, required=True)
    bnd.add_argument("--B", type=float, default=1.0)
    bnd.add_argument("--d", type=int, default=1)
    bnd.add_argument("--N", type=float, default=None, help="finite-round hint")
    bnd.add_argument("--theorem", action="append", choices=THEOREMS)
    bnd.set_defaults(func=cmd_bounds)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.showwarning = _show_warning
        return _dispatch(args)


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def _dispatch(args):
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
