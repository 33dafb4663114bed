"""Command-line entry point: ``proxident <command> [flags]``.

Commands
--------
run         run the chosen algorithms (default ``apg``) on one scenario
compare     run several algorithms (default pg, apg, t1, t2) and write a bundle
experiment  repeat a comparison over a seed range and summarize identification
list        print the known scenarios and algorithms
plot        redraw the SVG plots of an existing bundle from its CSV files

Exit status is 0 when every requested output was written, 2 for usage or
validation errors and 1 for I/O failures.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .experiments import COMPARE_ALGOS, SCENARIOS, make_scenario, run_scenario
from .inertia import parse_schedule
from .report import PlotSeries, emit_svg, read_csv, write_bundle
from .solvers import ALGORITHMS, resolve_gamma

__all__ = ["CliConfig", "UsageError", "main", "parse_args"]

COMMANDS = ("run", "compare", "experiment", "list", "plot")
DEFAULT_OUT = "proxident-out"
CONFIG_KEYS = ("scenario", "algo", "seed", "budget", "gamma", "schedule", "zeta", "out", "svg", "seeds")


class UsageError(ValueError):
    """Malformed or conflicting command-line input."""


class CliConfig(argparse.Namespace):
    """Parsed and validated options (an ``argparse.Namespace``)."""


def _u64(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64): {text}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text}")
    return v


def _real_or_auto(text):
    if str(text).strip().lower() == "auto":
        return None
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number or 'auto': {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text}")
    return v


def _schedule(text):
    try:
        return parse_schedule(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed_range(text):
    lo, sep, hi = str(text).partition(":")
    try:
        lo_v = int(lo)
        hi_v = int(hi) if sep else lo_v
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <first>:<last>, got {text!r}") from None
    if lo_v < 0 or hi_v < lo_v:
        raise argparse.ArgumentTypeError(f"empty or negative seed range {text!r}")
    return list(range(lo_v, hi_v + 1))


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    p = _Parser(prog="proxident", description="Provisionally accelerated proximal gradient experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", help="scenario name (see 'list')")
    p.add_argument("--algo", action="append", choices=ALGORITHMS, help="algorithm; repeat for several")
    p.add_argument("--seed", type=_u64, help="problem seed (default 0)")
    p.add_argument("--seeds", type=_seed_range, help="seed range <first>:<last> for 'experiment'")
    p.add_argument("--budget", type=_positive_int, help="proximal-gradient steps per run")
    p.add_argument("--gamma", type=_real_or_auto, default=argparse.SUPPRESS, help="step size or 'auto' (1/L)")
    p.add_argument("--schedule", type=_schedule, help="nesterov | cd:<a> | liang:<p>,<q>")
    p.add_argument("--zeta", type=_real_or_auto, default=argparse.SUPPRESS, help="Z-set radius or 'auto'")
    p.add_argument("--out", help=f"output directory (default $PROXIDENT_OUT or {DEFAULT_OUT})")
    p.add_argument("--svg", action="store_const", const=True, help="also write SVG plots")
    p.add_argument("--config", help="file of 'key = value' lines; flags override it")
    return p


_CONVERTERS = {
    "scenario": str,
    "seed": _u64,
    "seeds": _seed_range,
    "budget": _positive_int,
    "gamma": _real_or_auto,
    "schedule": _schedule,
    "zeta": _real_or_auto,
    "out": str,
    "svg": _bool,
    "algo": lambda v: [a.strip() for a in v.split(",") if a.strip()],
}


def load_config(path):
    """Parse a ``key = value`` file; ``#`` starts a comment, blank lines are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    values = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        if key in values:
            raise UsageError(f"{path}:{n}: duplicate key {key!r}")
        try:
            values[key] = _CONVERTERS[key](val)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{path}:{n}: {exc}") from None
    bad = [a for a in values.get("algo", []) if a not in ALGORITHMS]
    if bad:
        raise UsageError(f"{path}: unknown algorithm(s) {bad}")
    return values


def parse_args(argv):
    """Parse and validate ``argv`` into a :class:`CliConfig`.

    Raises :class:`UsageError` on malformed, unknown or conflicting input.
    """
    ns = _build_parser().parse_args(argv, namespace=CliConfig())
    file_vals = load_config(ns.config) if ns.config else {}
    # --gamma/--zeta use SUPPRESS so an explicit 'auto' (None) still overrides the file
    for key in ("gamma", "zeta"):
        if not hasattr(ns, key):
            setattr(ns, key, file_vals.get(key))
    for key in CONFIG_KEYS:
        if key not in ("gamma", "zeta") and getattr(ns, key) is None and key in file_vals:
            setattr(ns, key, file_vals[key])
    ns.seed = 0 if ns.seed is None else ns.seed
    ns.svg = bool(ns.svg)
    ns.out = ns.out or os.environ.get("PROXIDENT_OUT") or DEFAULT_OUT

    if ns.command in ("run", "compare", "experiment", "plot") and not ns.scenario:
        raise UsageError(f"'{ns.command}' requires --scenario")
    if ns.scenario and ns.scenario not in SCENARIOS:
        raise UsageError(f"unknown scenario {ns.scenario!r}; choose from {', '.join(sorted(SCENARIOS))}")
    if ns.algo and len(set(ns.algo)) != len(ns.algo):
        raise UsageError("each --algo may be given only once")
    if ns.seeds is not None and ns.command != "experiment":
        raise UsageError("--seeds applies to 'experiment' only")
    if ns.command == "experiment" and ns.seeds is None:
        ns.seeds = [ns.seed]
    if ns.command in ("list", "plot"):
        given = [k for k in ("algo", "budget", "gamma", "schedule", "zeta") if getattr(ns, k) is not None]
        if given:
            raise UsageError(f"'{ns.command}' does not take --{', --'.join(given)}")
    if ns.algo is None:
        ns.algo = ["apg"] if ns.command == "run" else list(COMPARE_ALGOS)
    return ns


def _scenario_for(cfg, seed):
    sc = make_scenario(cfg.scenario, seed)
    sc = sc.with_algorithms(cfg.algo, schedule=cfg.schedule, zeta=cfg.zeta, gamma=cfg.gamma, budget=cfg.budget)
    for c in sc.algorithms:
        try:
            resolve_gamma(sc.problem, c)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return sc


def _cmd_list(cfg, out):
    out.write("scenarios:\n")
    for name in sorted(SCENARIOS):
        out.write(f"  {name}\n")
    out.write("algorithms:\n")
    for a in ALGORITHMS:
        out.write(f"  {a}\n")
    out.write("schedules:\n  nesterov\n  cd:<a>\n  liang:<p>,<q>\n")
    return []


def _cmd_run(cfg, out):
    bundle = run_scenario(_scenario_for(cfg, cfg.seed))
    written = write_bundle(bundle, cfg.out, svg=cfg.svg)
    for algo, tr in bundle.traces.items():
        first, holes = bundle.metrics[algo]
        out.write(
            f"{algo}: prox_steps={tr.records[-1].prox_steps} "
            f"subopt={tr.records[-1].f_value - bundle.f_floor:.3e} "
            f"first_full_identification={first} holes={holes}\n"
        )
    if not bundle.complete:
        out.write("warning: reference run hit its budget before converging\n")
    return written


def _cmd_experiment(cfg, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("seed", "algo", "prox_steps", "final_subopt", "first_full_identification", "holes_after_first"))
    for seed in cfg.seeds:
        bundle = run_scenario(_scenario_for(cfg, seed))
        for algo, tr in bundle.traces.items():
            first, holes = bundle.metrics[algo]
            w.writerow(
                (
                    seed,
                    algo,
                    tr.records[-1].prox_steps,
                    format(tr.records[-1].f_value - bundle.f_floor, ".17g"),
                    "" if first is None else first,
                    holes,
                )
            )
        out.write(f"seed {seed} done\n")
    root = os.path.join(cfg.out, cfg.scenario)
    os.makedirs(root, exist_ok=True)
    path = os.path.join(root, "experiment.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return [path]


def _cmd_plot(cfg, out):
    root = os.path.join(cfg.out, cfg.scenario)
    ref_path = os.path.join(root, "reference.json")
    try:
        with open(ref_path, encoding="utf-8") as fh:
            ref = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {ref_path}: {exc.strerror or exc}") from exc
    n_target = len(ref["signature"])
    sub, ident = [], []
    for algo in ALGORITHMS:
        path = os.path.join(root, f"{algo}.csv")
        if not os.path.exists(path):
            continue
        cols = read_csv(path)
        full = np.flatnonzero((cols["correct_manifolds"] == n_target) & (cols["spurious_manifolds"] == 0))
        mark = int(full[0]) if full.size else None
        sub.append(PlotSeries(algo, cols["prox_steps"], cols["subopt"], mark))
        ident.append(PlotSeries(algo, cols["prox_steps"], cols["correct_manifolds"], mark))
    if not sub:
        raise OSError(f"no trace CSV files in {root}")
    plots = os.path.join(root, "plots")
    os.makedirs(plots, exist_ok=True)
    floor = np.finfo(np.float64).eps * max(1.0, abs(ref["f_floor"]))
    return [
        emit_svg(sub, "suboptimality", os.path.join(plots, "suboptimality.svg"), title=cfg.scenario, floor=floor),
        emit_svg(ident, "identification", os.path.join(plots, "identification.svg"), title=cfg.scenario),
    ]


_COMMANDS = {
    "list": _cmd_list,
    "run": _cmd_run,
    "compare": _cmd_run,
    "experiment": _cmd_experiment,
    "plot": _cmd_plot,
}


def main(argv=None, stdout=None, stderr=None):
    """Run the CLI and return its exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    if argv and argv[0] in ("-h", "--help"):
        _build_parser().print_help(stdout)
        return 0
    try:
        cfg = parse_args(argv)
        written = _COMMANDS[cfg.command](cfg, stdout)
    except UsageError as exc:
        stderr.write(f"proxident: error: {exc}\n")
        stderr.write("usage: proxident {run,compare,experiment,list,plot} [--scenario NAME] [flags]\n")
        return 2
    except OSError as exc:
        stderr.write(f"proxident: I/O error: {exc}\n")
        return 1
    for path in written:
        stdout.write(f"wrote {path}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
