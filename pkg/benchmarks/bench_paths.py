#!/usr/bin/env python3
"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter (the switch ``MGRIEMANN_NUMBA`` is
read at import).  Kernels are compiled once before timing; the compile time
is reported separately.

    python3 benchmarks/bench_paths.py [--repeat 3] [--cells 400]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from mgriemann import _jit
from mgriemann.config import load_preset
from mgriemann.riemann import RiemannInput, RiemannSide, solve
from mgriemann.sim1d import run

repeat, cells = int(sys.argv[1]), int(sys.argv[2])

def inp(name):
    cfg = load_preset(name)
    a, b = cfg.regions
    return RiemannInput(RiemannSide(a.state, a.material.eos, a.material.model),
                        RiemannSide(b.state, b.material.eos, b.material.model))

def best(fn):
    out = []
    for _ in range(repeat):
        t = time.perf_counter(); fn(); out.append(time.perf_counter() - t)
    return min(out)

t0 = time.perf_counter()
solve(inp("hydro-elastoplastic"))
run(load_preset("gas-gas").with_overrides(cells=20, t_end=1e-4).sim)
warm = time.perf_counter() - t0

res = {"backend": _jit.backend(), "warmup_s": warm}
for name in ("gas-gas", "jwl-elastic", "hydro-elastoplastic"):
    x = inp(name)
    res[f"solve {name} x100"] = best(lambda: [solve(x) for _ in range(100)])
for name in ("gas-gas", "hydro-elastoplastic", "spherical-jwl-polynomial"):
    sim = load_preset(name).with_overrides(cells=cells).sim
    res[f"sim {name} N={cells}"] = best(lambda: run(sim))
print(json.dumps(res))
"""


def measure(flag, repeat, cells):
    env = dict(os.environ, MGRIEMANN_NUMBA=flag)
    r = subprocess.run([sys.executable, "-c", WORKER, str(repeat), str(cells)], env=env,
                       capture_output=True, text=True, check=True)
    return json.loads(r.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cells", type=int, default=400)
    args = ap.parse_args()
    fast = measure("1", args.repeat, args.cells)
    slow = measure("0", args.repeat, args.cells)
    keys = [k for k in fast if k not in ("backend", "warmup_s")]
    w = max(map(len, keys))
    print(f"{'case':<{w}}  {'numba [s]':>10}  {'numpy [s]':>10}  {'speed-up':>8}")
    for k in keys:
        print(f"{k:<{w}}  {fast[k]:>10.4f}  {slow[k]:>10.4f}  {slow[k] / fast[k]:>7.1f}x")
    print(f"{'warm-up (JIT compile / cache load)':<{w}}  {fast['warmup_s']:>10.3f}  "
          f"{slow['warmup_s']:>10.3f}")


if __name__ == "__main__":
    main()
