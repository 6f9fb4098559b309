"""Command-line front end.

Subcommands::

    mgriemann presets                      list the bundled problem catalog
    mgriemann riemann --preset NAME        one-shot interface Riemann solve
    mgriemann sim --preset NAME --out DIR  full 1D simulation
    mgriemann audit --eos jwl A1=... --rho LO HI
                                           EOS convexity audit

Exit codes: 0 success, 1 runtime failure (solver or simulation error),
2 usage or validation error (bad flags, bad config, unknown preset).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import math
import os
import sys

from . import __version__
from .config import ProblemConfig, load_preset, parse_config, preset_names
from .eos import FIELDS, VARIANT_NAMES, EosParams, validate_convexity
from .errors import ConfigError, DomainError, MgRiemannError, SimulationError
from .riemann import RiemannInput, RiemannSide, sample_fan, solve
from .sim1d import run, write_outputs

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input (exit code 2)."""


# ---------------------------------------------------------------- helpers

def _err(msg):
    print(f"mgriemann: error: {msg}", file=sys.stderr)


def _catalog_text():
    return "available presets:\n" + "\n".join(f"  {n}" for n in preset_names())


def _parse_times(text):
    try:
        times = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--snapshots expects comma-separated numbers, got {text!r}") from None
    if not times:
        raise UsageError("--snapshots needs at least one time")
    return times


def _parse_fan(text):
    """``"t=<tau> n=<k>"`` -> (tau, k)."""
    vals = {}
    for tok in text.replace(",", " ").split():
        key, sep, val = tok.partition("=")
        if not sep or key not in ("t", "n"):
            raise UsageError(f"--fan expects 't=<time> n=<count>', got {text!r}")
        vals[key] = val
    try:
        t = float(vals["t"])
        n = int(vals["n"])
    except (KeyError, ValueError):
        raise UsageError(f"--fan expects 't=<time> n=<count>', got {text!r}") from None
    if not (t > 0.0 and math.isfinite(t)) or n < 1:
        raise UsageError("--fan needs t > 0 and n >= 1")
    return t, n


def load_problem(preset=None, config=None) -> ProblemConfig:
    if (preset is None) == (config is None):
        raise UsageError("give exactly one of --preset NAME or --config PATH")
    if config is not None:
        return parse_config(config)
    if preset not in preset_names():
        raise UsageError(f"unknown preset {preset!r}\n{_catalog_text()}")
    return load_preset(preset)


def _apply_overrides(prob: ProblemConfig, args) -> ProblemConfig:
    snaps = _parse_times(args.snapshots) if getattr(args, "snapshots", None) else None
    return prob.with_overrides(cells=getattr(args, "cells", None), cfl=getattr(args, "cfl", None),
                               t_end=getattr(args, "tend", None), tol=args.tol,
                               geometry=getattr(args, "geometry", None), snapshots=snaps)


# ---------------------------------------------------------------- riemann

def riemann_input(prob: ProblemConfig, interface=0) -> RiemannInput:
    regs = prob.regions
    if not 0 <= interface < len(regs) - 1:
        raise UsageError(f"problem {prob.name!r} has {len(regs) - 1} interface(s); "
                         f"--interface {interface} is out of range")
    a, b = regs[interface], regs[interface + 1]
    return RiemannInput(RiemannSide(a.state, a.material.eos, a.material.model),
                        RiemannSide(b.state, b.material.eos, b.material.model),
                        prob.sim.eps0, prob.sim.max_iter)


def format_star(star, name="") -> str:
    g = "{:.10g}".format
    lines = []
    if name:
        lines.append(f"problem: {name}")
    lines += [f"q* = {g(star.q)}",
              f"u* = {g(star.u)}",
              f"iterations = {star.iterations}",
              f"residual = {star.residual:.3e}",
              f"q_min = {g(star.q_min)}  vacuum margin = {g(star.margin)}"]
    for label, s in (("left", star.left), ("right", star.right)):
        lines.append(f"{label:<5} star: rho = {g(s.rho)}  p = {g(s.p)}  S = {g(s.S)}  "
                     f"q = {g(s.q)}  branch = {s.branch_kind}")
    lines.append("waves (left to right):")
    lines.append(f"  {'side':<6}{'type':<12}{'phase':<6}{'head':>16}{'tail':>16}")
    for w in star.waves:
        lines.append(f"  {w.side:<6}{w.type:<12}{w.phase.letter:<6}"
                     f"{g(w.head):>16}{g(w.tail):>16}")
    return "\n".join(lines)


def fan_rows(star, prob: ProblemConfig, interface, t, n):
    """``n`` fan samples at time ``t`` spread over the problem domain."""
    x0 = prob.interfaces[interface]
    grid = prob.sim.grid
    h = (grid.x1 - grid.x0) / n
    rows = []
    for k in range(n):
        x = grid.x0 + (k + 0.5) * h
        s = sample_fan(star, (x - x0) / t)
        rows.append((x, s.xi, s.rho, s.u, s.p, s.S, s.material))
    return rows


def write_fan_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("x,xi,rho,u,p,S,material\n")
        for r in rows:
            fh.write(",".join(f"{v:.17g}" for v in r[:6]) + f",{int(r[6])}\n")


def cmd_riemann(args):
    prob = _apply_overrides(load_problem(args.preset, args.config), args)
    fan = _parse_fan(args.fan) if args.fan else None
    inp = riemann_input(prob, args.interface)
    star = solve(inp)
    print(format_star(star, prob.name))
    if fan is not None:
        rows = fan_rows(star, prob, args.interface, *fan)
        out = args.out or "."
        os.makedirs(out, exist_ok=True)
        path = os.path.join(out, "fan.csv")
        write_fan_csv(path, rows)
        print(f"fan samples: {len(rows)} rows at t = {fan[0]:.10g} -> {path}")
    return EXIT_OK


# ---------------------------------------------------------------- sim

PLOT_SCRIPT = '''\
#!/usr/bin/env python3
"""Plot the snapshots of this run: density, pressure and velocity panels.

Usage: python3 plot.py [output.png]   (needs matplotlib)
"""
import csv
import glob
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
TITLE = {title!r}
XLABEL = {xlabel!r}


def load(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {{k: [float(r[k]) for r in rows] for k in ("x", "rho", "u", "p")}}


def main():
    files = sorted(glob.glob(os.path.join(HERE, "snapshot_*.csv")))
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.2))
    for path in files:
        d = load(path)
        label = os.path.basename(path)[:-4]
        for ax, key in zip(axes, ("rho", "p", "u")):
            ax.plot(d["x"], d[key], ".-", ms=2, lw=0.8, label=label)
    for ax, name in zip(axes, ("density", "pressure", "velocity")):
        ax.set_xlabel(XLABEL)
        ax.set_title(name)
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=7)
    fig.suptitle(TITLE)
    fig.tight_layout()
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "profiles.png")
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
'''


def write_plot_script(out_dir, prob: ProblemConfig):
    geom = prob.sim.grid.geometry
    text = PLOT_SCRIPT.format(title=f"{prob.name} ({geom}, N={prob.sim.grid.cells})",
                              xlabel="r" if geom == "spherical" else "x")
    path = os.path.join(out_dir, "plot.py")
    with open(path, "w") as fh:
        fh.write(text)
    return path


def run_problem(prob: ProblemConfig, out_dir):
    """Run one problem and write its outputs; returns (exit code, message)."""
    try:
        result = run(prob.sim, audit=True)
    except SimulationError as exc:
        result = getattr(exc, "result", None)
        if result is None:
            return EXIT_RUNTIME, f"{prob.name}: simulation failed before start: {exc}"
        write_outputs(result, out_dir)
        write_plot_script(out_dir, prob)
        return EXIT_RUNTIME, (f"{prob.name}: simulation aborted at t = {result.state.t:.6g} "
                              f"after {result.state.steps} steps: {exc}; partial outputs "
                              f"in {out_dir}")
    files = write_outputs(result, out_dir)
    write_plot_script(out_dir, prob)
    its = [i for row in result.iterations for i in row]
    return EXIT_OK, (f"{prob.name}: t = {result.state.t:.6g}, {result.state.steps} steps, "
                     f"max interface iterations {max(its) if its else 0}, "
                     f"{len(files)} snapshot(s) in {out_dir}")


def _run_named(name, overrides, out_dir):
    # worker entry point for --jobs (module level so it pickles)
    prob = load_preset(name).with_overrides(**overrides)
    return run_problem(prob, out_dir)


def cmd_sim(args):
    snaps = _parse_times(args.snapshots) if args.snapshots else None
    overrides = dict(cells=args.cells, cfl=args.cfl, t_end=args.tend, tol=args.tol,
                     geometry=args.geometry, snapshots=snaps)
    if args.cells is not None and args.cells < 1:
        raise UsageError(f"--cells must be a positive integer, got {args.cells}")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    presets = args.preset or []
    if args.config is not None and presets:
        raise UsageError("give either --preset or --config, not both")
    if args.config is None and not presets:
        raise UsageError("give --preset NAME (repeatable, or 'all') or --config PATH")
    if presets == ["all"]:
        presets = preset_names()
    for p in presets:
        if p not in preset_names():
            raise UsageError(f"unknown preset {p!r}\n{_catalog_text()}")
    out = args.out or "."
    if args.config is not None:
        probs = [parse_config(args.config).with_overrides(**overrides)]
    else:
        # validate every preset before any compute
        probs = [load_preset(p).with_overrides(**overrides) for p in presets]
    if len(probs) == 1:
        dirs = [out]
    else:
        dirs = [os.path.join(out, p.name) for p in probs]
    for d in dirs:
        os.makedirs(d, exist_ok=True)
    if len(probs) > 1 and args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as ex:
            futs = [ex.submit(_run_named, p, overrides, d) for p, d in zip(presets, dirs)]
            results = [f.result() for f in futs]
    else:
        results = [run_problem(p, d) for p, d in zip(probs, dirs)]
    code = EXIT_OK
    for c, msg in results:
        print(msg, file=sys.stdout if c == EXIT_OK else sys.stderr)
        code = max(code, c)
    return code


# ---------------------------------------------------------------- audit

def _eos_from_args(args) -> EosParams:
    if args.preset is not None:
        prob = load_problem(args.preset, None)
        mats = {r.material.name: r.material for r in prob.regions}
        if args.material is None:
            if len({m.eos for m in mats.values()}) != 1:
                raise UsageError(f"preset {args.preset!r} has materials {sorted(mats)}; "
                                 f"choose one with --material")
            return next(iter(mats.values())).eos
        if args.material not in mats:
            raise UsageError(f"preset {args.preset!r} has no material {args.material!r}; "
                             f"choose from {sorted(mats)}")
        return mats[args.material].eos
    if args.eos is None:
        raise UsageError("give --eos KIND with KEY=VALUE parameters, or --preset NAME")
    values = {}
    for tok in args.params:
        key, sep, val = tok.partition("=")
        if not sep:
            raise UsageError(f"EOS parameter must be KEY=VALUE, got {tok!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise UsageError(f"EOS parameter {key!r}: not a number: {val!r}") from None
    return EosParams.from_mapping(args.eos, values)


def cmd_audit(args):
    eos = _eos_from_args(args)
    lo, hi = args.rho
    report = validate_convexity(eos, lo, hi, args.samples)
    print(report.format())
    return EXIT_OK if report.ok else EXIT_RUNTIME


# ---------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(
        prog="mgriemann",
        description="Multi-medium Riemann solver for hydro-elastoplastic solids and a 1D "
                    "sharp-interface simulator.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list the bundled problem presets")

    def common(p, multi=False):
        if multi:
            p.add_argument("--preset", action="append", metavar="NAME",
                           help="bundled problem (repeatable; 'all' for the catalog)")
        else:
            p.add_argument("--preset", metavar="NAME", help="bundled problem")
        p.add_argument("--config", metavar="PATH", help="problem configuration file")
        p.add_argument("--tol", type=float, metavar="E", help="solver tolerance eps0")
        p.add_argument("--out", metavar="DIR", help="output directory")

    r = sub.add_parser("riemann", help="solve the initial interface Riemann problem")
    common(r)
    r.add_argument("--interface", type=int, default=0, metavar="K",
                   help="which interface of the problem (default 0)")
    r.add_argument("--fan", metavar="'t=T n=K'", help="write K fan samples at time T to fan.csv")

    s = sub.add_parser("sim", help="run a 1D simulation")
    common(s, multi=True)
    s.add_argument("--cells", type=int, metavar="N")
    s.add_argument("--cfl", type=float, metavar="X")
    s.add_argument("--tend", type=float, metavar="T")
    s.add_argument("--geometry", choices=("planar", "spherical"))
    s.add_argument("--snapshots", metavar="t1,t2,...")
    s.add_argument("--jobs", type=int, default=1, metavar="K",
                   help="run independent presets concurrently")

    a = sub.add_parser("audit", help="EOS convexity audit over a density range")
    a.add_argument("--eos", choices=sorted(VARIANT_NAMES), help="EOS kind")
    a.add_argument("params", nargs="*", metavar="KEY=VALUE",
                   help="EOS parameters, e.g. gamma=1.4 "
                        + "; ".join(f"{k}: {','.join(v)}" for k, v in FIELDS.items()))
    a.add_argument("--preset", metavar="NAME", help="take the EOS from a preset")
    a.add_argument("--material", metavar="NAME", help="material of the preset")
    a.add_argument("--rho", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    a.add_argument("--samples", type=int, default=400)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "presets":
            print("\n".join(preset_names()))
            return EXIT_OK
        return {"riemann": cmd_riemann, "sim": cmd_sim, "audit": cmd_audit}[args.command](args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (ConfigError, DomainError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except MgRiemannError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
