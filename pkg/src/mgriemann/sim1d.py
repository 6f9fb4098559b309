"""Sharp-interface finite-volume simulator in 1D planar / spherical geometry.

Each medium carries its own conserved state on the cells it (partly)
occupies; tracked interfaces are exact positions advanced with the
interface velocity u* returned by the multi-medium Riemann solver, whose
normal stress q* supplies the momentum / energy exchange between the two
media.  Faces shared by two cells of one medium use the local
Lax-Friedrichs flux with the elastic-augmented signal speed.

Time stepping is forward Euler.  Small or empty cut cells next to an
interface are merged into a conservative pool with their neighbours (see
``theta``) before the update is divided by the new occupied volumes.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import _eoskern as _ek
from . import _riemannkern as _rk
from . import _simkern as _sk
from . import _wavekern as _wk
from ._jit import backend
from .eos import EosParams
from .errors import (DomainError, NonHyperbolicError, SimulationError, TopologyError,
                     raise_for_status)
from .plasticity import DeviatoricModel, Phase, SideState

GEOMETRIES = {"planar": _sk.PLANAR, "spherical": _sk.SPHERICAL}
BOUNDARIES = {"outflow": _sk.BC_OUTFLOW, "wall": _sk.BC_WALL}
CSV_HEADER = "x,rho,u,p,S,q,material,phase"


# ---------------------------------------------------------------- geometry

@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``cells`` cells on [x0, x1]."""

    x0: float
    x1: float
    cells: int
    geometry: str = "planar"

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise DomainError(f"geometry must be one of {sorted(GEOMETRIES)}, got {self.geometry!r}")
        if not (isinstance(self.cells, (int, np.integer)) and self.cells >= 1):
            raise DomainError(f"cell count must be a positive integer, got {self.cells!r}")
        if not (math.isfinite(self.x0) and math.isfinite(self.x1) and self.x1 > self.x0):
            raise DomainError(f"need x0 < x1, got [{self.x0}, {self.x1}]")
        if self.geometry == "spherical" and self.x0 < 0.0:
            raise DomainError("spherical geometry requires x0 >= 0")

    @property
    def dx(self):
        return (self.x1 - self.x0) / self.cells

    @property
    def faces(self):
        f = self.x0 + self.dx * np.arange(self.cells + 1)
        f[-1] = self.x1
        return f

    @property
    def centers(self):
        f = self.faces
        return 0.5 * (f[:-1] + f[1:])

    @property
    def geom_code(self):
        return GEOMETRIES[self.geometry]

    def volume(self, a, b):
        """Measure of [a, b]: length (planar) or r^2-weighted volume / 4 pi."""
        return _sk.seg_volume(self.geom_code, np.asarray(a, float), np.asarray(b, float))

    @property
    def cell_volumes(self):
        f = self.faces
        return self.volume(f[:-1], f[1:])


@dataclass(frozen=True)
class Material:
    name: str
    eos: EosParams
    model: DeviatoricModel = field(default_factory=DeviatoricModel.fluid)


@dataclass(frozen=True)
class Region:
    """Initial data on [x_lo, x_hi]: one material in one uniform state."""

    x_lo: float
    x_hi: float
    material: Material
    state: SideState


class Medium:
    """Conserved state of one material between two tracked positions."""

    def __init__(self, material: Material, U: np.ndarray):
        self.material = material
        self.U = U
        self.kind = material.eos.kind
        self.prm = material.eos.vector
        self.model = material.model.vector

    def copy(self):
        m = Medium(self.material, self.U.copy())
        return m


@dataclass
class SimState:
    """Grid, media (left to right) and the interface positions between them."""

    grid: Grid1D
    media: List[Medium]
    X: np.ndarray
    t: float = 0.0
    steps: int = 0
    bc: tuple = ("outflow", "outflow")

    def copy(self):
        return SimState(self.grid, [m.copy() for m in self.media], self.X.copy(), self.t,
                        self.steps, self.bc)

    def bounds(self, j):
        """Occupied interval [lo, hi] of medium j."""
        lo = self.grid.x0 if j == 0 else self.X[j - 1]
        hi = self.grid.x1 if j == len(self.media) - 1 else self.X[j]
        return float(lo), float(hi)

    def occupancy(self, j):
        lo, hi = self.bounds(j)
        vol, _, _ = _sk.occupancy(self.grid.geom_code, self.grid.faces, lo, hi)
        return vol


@dataclass
class InterfaceSolution:
    q: float
    u: float
    iterations: int
    residual: float


@dataclass
class StepInfo:
    """``boundary_inflow``: net (mass, momentum, energy) entering through the
    domain ends during the step, plus the geometric momentum source."""

    dt: float
    interfaces: List[InterfaceSolution]
    boundary_inflow: np.ndarray


# ---------------------------------------------------------------- set-up

def initial_state(grid: Grid1D, regions: Sequence[Region], boundary=("outflow", "outflow")):
    """Build the state from regions tiling [x0, x1] in order."""
    regions = list(regions)
    if not regions:
        raise DomainError("at least one region is required")
    tol = 1e-12 * (grid.x1 - grid.x0)
    if abs(regions[0].x_lo - grid.x0) > tol or abs(regions[-1].x_hi - grid.x1) > tol:
        raise DomainError("regions must cover the domain exactly")
    for a, b in zip(regions[:-1], regions[1:]):
        if abs(a.x_hi - b.x_lo) > tol:
            raise DomainError(f"regions must tile the domain: gap/overlap at {a.x_hi} vs {b.x_lo}")
    for r in regions:
        if not r.x_hi > r.x_lo:
            raise DomainError(f"empty region [{r.x_lo}, {r.x_hi}]")
    for b in boundary:
        if b not in BOUNDARIES:
            raise DomainError(f"boundary must be one of {sorted(BOUNDARIES)}, got {b!r}")
    media = []
    N = grid.cells
    for r in regions:
        st, eos = r.state, r.material.eos
        c2 = float(_ek.sound_speed_sq(eos.kind, eos.vector, st.rho, st.p))
        if not c2 > 0.0:
            raise NonHyperbolicError(f"region [{r.x_lo}, {r.x_hi}]: c^2 = {c2} <= 0",
                                     rho=st.rho, p=st.p)
        E = float(_sk.energy_of(eos.kind, eos.vector, st.rho, st.u, st.p))
        U = np.empty((_sk.NVAR, N))
        U[0] = st.rho
        U[1] = st.rho * st.u
        U[2] = E
        U[3] = st.rho * st.S
        U[4] = 0.0
        media.append(Medium(r.material, U))
    X = np.array([r.x_hi for r in regions[:-1]], dtype=float)
    return SimState(grid, media, X, 0.0, 0, tuple(boundary))


# ---------------------------------------------------------------- operators

def primitives(medium: Medium, idx=None):
    U = medium.U if idx is None else medium.U[:, idx]
    rho, u, p, S, c2 = _sk.primitives(medium.kind, medium.prm, np.ascontiguousarray(U))
    return rho, u, p, S, c2


def edge_flux(material: Material, U_l, U_r):
    """Local Lax-Friedrichs flux on (rho, rho u, E); S and W are carried by
    the mass flux from the donor cell.

    States are conserved 5-vectors (rho, rho u, E, rho S, rho W) or arrays of
    shape (5, n)."""
    eos = material.eos
    mv = material.model.vector
    Ul = np.asarray(U_l, float).reshape(_sk.NVAR, -1)
    Ur = np.asarray(U_r, float).reshape(_sk.NVAR, -1)
    out = []
    lam = []
    for U in (Ul, Ur):
        rho, u, p, S, c2 = _sk.primitives(eos.kind, eos.vector, U)
        if not np.all(c2 > 0.0):
            raise NonHyperbolicError("edge flux of a non-hyperbolic state")
        out.append((_sk.phys_flux(rho, u, p, S, U[2]), u))
        lam.append(_sk.signal_speed(mv, rho, u, c2))
    lmax = np.maximum(lam[0], lam[1])
    (fl, ul), (fr, ur) = out
    F = np.empty_like(Ul)
    for k in range(3):
        F[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * lmax * (Ur[k] - Ul[k])
    up = F[0] > 0.0
    F[3] = F[0] * np.where(up, Ul[3] / Ul[0], Ur[3] / Ur[0])
    F[4] = F[0] * np.where(up, Ul[4] / Ul[0], Ur[4] / Ur[0])
    return F[:, 0] if F.shape[1] == 1 else F


def _edge_cells(state: SimState, j):
    """(last cell of medium j, first cell of medium j + 1) at interface j."""
    va = state.occupancy(j)
    vb = state.occupancy(j + 1)
    return int(np.nonzero(va > 0.0)[0][-1]), int(np.nonzero(vb > 0.0)[0][0])


def interface_flux(state: SimState, j, eps0=1e-10, max_iter=50) -> InterfaceSolution:
    """Riemann solve between the two cells adjacent to interface j."""
    ml, mr = state.media[j], state.media[j + 1]
    il, ir = _edge_cells(state, j)
    rl, ul, pl, Sl, _ = (float(v[0]) for v in primitives(ml, [il]))
    rr, ur, pr, Sr, _ = (float(v[0]) for v in primitives(mr, [ir]))
    res = _rk.interface_solve(ml.kind, ml.prm, ml.model, rl, ul, pl, Sl,
                              mr.kind, mr.prm, mr.model, rr, ur, pr, Sr, eps0, max_iter)
    st = int(res[_rk.R_STATUS])
    if st != _wk.OK:
        try:
            raise_for_status(st, f"interface {j} at x={state.X[j]:.17g} "
                                 f"(cells {il}|{ir}, t={state.t:.6g})")
        except SimulationError:
            raise
        except Exception as exc:
            raise SimulationError(str(exc), where=("interface", j)) from exc
    return InterfaceSolution(float(res[_rk.R_Q]), float(res[_rk.R_U]),
                             int(res[_rk.R_ITERS]), float(res[_rk.R_RESID]))


def cfl_dt(state: SimState, cfl, interfaces: Optional[Sequence[InterfaceSolution]] = None):
    """cfl * dx / max signal speed over occupied cells (and interface speeds)."""
    if not 0.0 < cfl <= 1.0:
        raise DomainError(f"cfl must lie in (0, 1], got {cfl}")
    smax = 0.0
    for j, m in enumerate(state.media):
        s, bad = _sk.max_signal(m.kind, m.prm, m.model, m.U, state.occupancy(j))
        if bad >= 0:
            raise SimulationError(f"non-hyperbolic state in medium {j} cell {bad}",
                                  where=("cell", int(bad)))
        smax = max(smax, float(s))
    for sol in interfaces or ():
        smax = max(smax, abs(sol.u))
    if not smax > 0.0:
        return math.inf
    return cfl * state.grid.dx / smax


def advance_interface(X, u_star, dt, grid: Grid1D):
    """Exact advection x_I <- x_I + u* dt with ordering / domain checks.

    Returns the new positions and the indices of interfaces that left the
    domain (to be retired by the caller)."""
    X1 = np.asarray(X, float) + np.asarray(u_star, float) * dt
    if X1.size > 1 and np.any(np.diff(X1) <= 0.0):
        k = int(np.nonzero(np.diff(X1) <= 0.0)[0][0])
        raise TopologyError(f"interfaces {k} and {k + 1} collide", where=("interface", k))
    gone = [k for k in range(X1.size) if not (grid.x0 < X1[k] < grid.x1)]
    return X1, gone


def deviatoric_update(S, dS, model: DeviatoricModel):
    """Elastic increment dS applied from S with the piecewise yield map."""
    mv = model.vector
    S = np.asarray(S, float)
    dS = np.asarray(dS, float)
    return _sk.return_map(S, dS + 0.0 * S, 2.0 * mv[2] / 3.0, 2.0 * mv[3] / 3.0,
                          _sk.hardening_ratio(mv))


def spherical_source(grid: Grid1D, p, dt):
    """Momentum increment dt * p (r_{i+1/2}^2 - r_{i-1/2}^2) per cell."""
    f = grid.faces
    return dt * np.asarray(p, float) * (f[1:] ** 2 - f[:-1] ** 2)


def _retire(state: SimState, gone):
    for k in sorted(gone, reverse=True):
        x = state.X[k]
        # the medium on the far side of the boundary has left the domain
        drop = k if x <= state.grid.x0 else k + 1
        del state.media[drop]
        state.X = np.delete(state.X, k)


def step(state: SimState, cfl=0.4, dt_max=math.inf, eps0=1e-10, max_iter=50,
         theta=0.5) -> StepInfo:
    """One forward-Euler step in place; returns the step record."""
    grid = state.grid
    sols = [interface_flux(state, j, eps0, max_iter) for j in range(state.X.size)]
    dt = min(cfl_dt(state, cfl, sols), dt_max)
    if not (dt > 0.0 and math.isfinite(dt)):
        raise SimulationError(f"invalid time step {dt}")
    ustar = np.array([s.u for s in sols])
    X1, gone = advance_interface(state.X, ustar, dt, grid)
    # an interface leaving the domain is kept at the boundary for this step
    Xc = np.clip(X1, grid.x0, grid.x1)
    M = len(state.media)
    bc = (BOUNDARIES[state.bc[0]], BOUNDARIES[state.bc[1]])
    inflow = np.zeros(3)
    new_U = []
    info = np.zeros(10)
    xf = grid.faces
    for j, m in enumerate(state.media):
        Xl = grid.x0 if j == 0 else state.X[j - 1]
        Xr = grid.x1 if j == M - 1 else state.X[j]
        Xl1 = grid.x0 if j == 0 else Xc[j - 1]
        Xr1 = grid.x1 if j == M - 1 else Xc[j]
        qL = sols[j - 1].q if j > 0 else 0.0
        uL = sols[j - 1].u if j > 0 else 0.0
        qR = sols[j].q if j < M - 1 else 0.0
        uR = sols[j].u if j < M - 1 else 0.0
        out = np.empty_like(m.U)
        if Xr1 <= Xl1:
            # medium squeezed out through a boundary during this step
            new_U.append(None)
            continue
        _sk.update_medium(m.kind, m.prm, m.model, grid.geom_code, xf, m.U,
                          float(Xl), float(Xr), float(Xl1), float(Xr1), j > 0, j < M - 1,
                          qL, uL, qR, uR, dt, theta, bc[0], bc[1], out, info)
        status = int(info[3])
        if status != _sk.SIM_OK:
            what = {_sk.SIM_NEG_DENSITY: "non-positive density",
                    _sk.SIM_NONHYP: "non-hyperbolic state (c^2 <= 0)",
                    _sk.SIM_EMPTY: "empty medium"}.get(status, f"status {status}")
            cell = int(info[4])
            raise SimulationError(f"{what} in medium {j} ({m.material.name}) cell {cell} "
                                  f"at t={state.t:.6g}", where=("cell", cell))
        inflow += info[0:3]
        inflow[1] += info[9]
        new_U.append(out)
    for m, U in zip(state.media, new_U):
        if U is not None:
            m.U = U
    state.X = X1
    if gone:
        _retire(state, gone)
    state.t += dt
    state.steps += 1
    return StepInfo(dt, sols, inflow)


# ---------------------------------------------------------------- diagnostics

def totals(state: SimState, absolute=False):
    """Total (mass, momentum, energy) in the domain (per 4 pi for spherical).

    ``absolute=True`` sums |content| instead (the scale of the audit)."""
    tot = np.zeros(3)
    for j, m in enumerate(state.media):
        vol = state.occupancy(j)
        U = np.abs(m.U[:3]) if absolute else m.U[:3]
        tot += (U * vol).sum(axis=1)
    return tot


def _phase_letters(model: DeviatoricModel, S):
    seff = 1.5 * np.abs(S)
    if model.is_fluid:
        return np.full(S.shape, "F")
    out = np.where(seff < model.y_e * (1.0 - 1e-9), "E", "P")
    if math.isfinite(model.y_p):
        out = np.where(seff >= model.y_p * (1.0 - _wk.FLUID_TOL), "F", out)
    return out


def profile(state: SimState):
    """Cell-wise primitive fields of the medium occupying most of each cell."""
    N = state.grid.cells
    occ = np.array([state.occupancy(j) for j in range(len(state.media))])
    dom = np.argmax(occ, axis=0)
    out = {k: np.empty(N) for k in ("rho", "u", "p", "S")}
    out["x"] = state.grid.centers
    out["material"] = np.empty(N, dtype=object)
    out["phase"] = np.empty(N, dtype=object)
    for j, m in enumerate(state.media):
        idx = np.nonzero(dom == j)[0]
        if idx.size == 0:
            continue
        rho, u, p, S, _ = primitives(m, idx)
        out["rho"][idx] = rho
        out["u"][idx] = u
        out["p"][idx] = p
        out["S"][idx] = S
        out["material"][idx] = m.material.name
        out["phase"][idx] = _phase_letters(m.material.model, S)
    out["q"] = out["p"] - out["S"]
    out["medium"] = dom
    return out


def write_csv(path, prof):
    cols = ("x", "rho", "u", "p", "S", "q")
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(len(prof["x"])):
            nums = ",".join(f"{float(prof[c][i]):.17g}" for c in cols)
            fh.write(f"{nums},{prof['material'][i]},{prof['phase'][i]}\n")


# ---------------------------------------------------------------- driver

@dataclass
class SimConfig:
    grid: Grid1D
    regions: List[Region]
    t_end: float
    cfl: float = 0.4
    snapshot_times: Optional[List[float]] = None
    eps0: float = 1e-10
    max_iter: int = 50
    theta: float = 0.5
    boundary: tuple = ("outflow", "outflow")
    name: str = "run"

    def __post_init__(self):
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise DomainError(f"t_end must be positive, got {self.t_end}")
        if not 0.0 < self.cfl <= 1.0:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.eps0 > 0.0:
            raise DomainError(f"tolerance must be positive, got {self.eps0}")
        if self.snapshot_times is None:
            self.snapshot_times = [self.t_end]
        times = sorted(float(t) for t in self.snapshot_times)
        if any(not (0.0 <= t <= self.t_end) for t in times):
            raise DomainError(f"snapshot times must lie in [0, t_end], got {times}")
        self.snapshot_times = times

    def describe(self):
        """Canonical, JSON-serializable description (hashed into manifests)."""
        return {
            "name": self.name,
            "geometry": self.grid.geometry, "x0": self.grid.x0, "x1": self.grid.x1,
            "cells": self.grid.cells, "cfl": self.cfl, "t_end": self.t_end,
            "snapshots": self.snapshot_times, "tol": self.eps0, "max_iter": self.max_iter,
            "theta": self.theta, "boundary": list(self.boundary),
            "regions": [{
                "x_lo": r.x_lo, "x_hi": r.x_hi, "material": r.material.name,
                "eos": r.material.eos.name, "eos_params": r.material.eos.as_dict(),
                "model": {k: getattr(r.material.model, k)
                          for k in ("mu_e", "mu_p", "y_e", "y_p", "beta_e", "beta_p")},
                "state": [r.state.rho, r.state.u, r.state.p, r.state.S],
            } for r in self.regions],
        }

    def config_hash(self):
        blob = json.dumps(self.describe(), sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class Snapshot:
    t: float
    profile: dict


@dataclass
class SimResult:
    config: SimConfig
    state: SimState
    snapshots: List[Snapshot]
    dt_history: List[float]
    iterations: List[List[int]]
    boundary_inflow: np.ndarray
    totals0: np.ndarray
    max_step_drift: np.ndarray
    wall_time: float
    failure: Optional[str] = None

    @property
    def ok(self):
        return self.failure is None

    def manifest(self):
        its = [i for row in self.iterations for i in row]
        return {
            "config": self.config.describe(),
            "config_hash": self.config.config_hash(),
            "backend": backend(),
            "status": "ok" if self.ok else "failed",
            "failure": self.failure,
            "t_final": self.state.t,
            "steps": self.state.steps,
            "dt_history": self.dt_history,
            "iterations": self.iterations,
            "max_iterations": max(its) if its else 0,
            "snapshots": [s.t for s in self.snapshots],
            "conservation": {
                "initial_totals": list(self.totals0),
                "final_totals": list(totals(self.state)),
                "boundary_inflow": list(self.boundary_inflow),
                "max_step_drift": list(self.max_step_drift),
            },
        }


def run(config: SimConfig, audit=False, callback=None, raise_on_failure=True) -> SimResult:
    """Integrate to ``config.t_end``, collecting snapshots at the requested times.

    ``audit=True`` records the per-step relative conservation drift
    |Delta total - boundary inflow| / sum |content| for each component
    (the scale also includes |inflow| so that zero totals stay meaningful).
    On failure the partial result is returned (``raise_on_failure=False``) or
    the error is raised with the partial result attached as ``exc.result``.
    """
    state = initial_state(config.grid, config.regions, config.boundary)
    snaps, dts, iters = [], [], []
    inflow = np.zeros(3)
    drift = np.zeros(3)
    tot0 = totals(state)
    pending = list(config.snapshot_times)
    while pending and pending[0] <= 0.0:
        snaps.append(Snapshot(0.0, profile(state)))
        pending.pop(0)
    t0 = time.perf_counter()
    failure = None
    try:
        while pending:
            target = pending[0]
            if audit:
                before = totals(state)
                scale = totals(state, absolute=True)
            info = step(state, config.cfl, target - state.t, config.eps0, config.max_iter,
                        config.theta)
            dts.append(info.dt)
            iters.append([s.iterations for s in info.interfaces])
            inflow += info.boundary_inflow
            if audit:
                after = totals(state)
                scale = np.maximum(np.maximum(scale, totals(state, absolute=True)),
                                   np.maximum(np.abs(info.boundary_inflow), 1e-300))
                d = np.abs(after - before - info.boundary_inflow) / scale
                drift = np.maximum(drift, d)
            if callback is not None:
                callback(state, info)
            if state.t >= target * (1.0 - 1e-14):
                state.t = target
                snaps.append(Snapshot(target, profile(state)))
                pending.pop(0)
    except SimulationError as exc:
        failure = str(exc)
        res = SimResult(config, state, snaps, dts, iters, inflow, tot0, drift,
                        time.perf_counter() - t0, failure)
        if raise_on_failure:
            exc.result = res
            raise
        return res
    return SimResult(config, state, snaps, dts, iters, inflow, tot0, drift,
                     time.perf_counter() - t0, failure)


def write_outputs(result: SimResult, out_dir):
    """Snapshot CSVs plus ``manifest.json`` (timestamp in its own field)."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    files = []
    for k, s in enumerate(result.snapshots):
        name = f"snapshot_{k:03d}.csv"
        write_csv(os.path.join(out_dir, name), s.profile)
        files.append(name)
    man = result.manifest()
    man["files"] = files
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(man, fh, indent=1, sort_keys=True, default=repr)
        fh.write("\n")
    with open(os.path.join(out_dir, "timestamp.json"), "w") as fh:
        json.dump({"created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                   "wall_time_s": result.wall_time}, fh)
        fh.write("\n")
    return files
