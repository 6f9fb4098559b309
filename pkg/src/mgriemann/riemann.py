"""Approximate multi-medium Riemann solver for hydro-elastoplastic solids.

The interface normal stress q* is the unique zero of the stress function

    f(q) = f_l(q) + f_r(q) + u_r - u_l,

increasing and concave in q.  It is found with a safeguarded inexact
Newton iteration whose branch evaluations (Hugoniot roots, RKF45
rarefaction integrals) carry controlled errors; the interface velocity is
u* = (u_l + u_r + f_r(q*) - f_l(q*)) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _eoskern as _ek
from . import _riemannkern as _rk
from . import _wavekern as _wk
from .eos import EosParams
from .errors import (NonConvergenceError, SimulationError, VacuumError,
                     raise_for_status)
from .plasticity import DeviatoricModel, Phase, SideState
from .wavecurves import (RTOL0, Side, _kind_from_phases, rarefaction_branch)


@dataclass(frozen=True)
class RiemannSide:
    """A side of the Riemann problem: primitive state plus material."""

    state: SideState
    eos: EosParams
    model: DeviatoricModel = field(default_factory=DeviatoricModel.fluid)


@dataclass(frozen=True)
class RiemannInput:
    left: RiemannSide
    right: RiemannSide
    eps0: float = 1e-10
    max_iter: int = 50

    def mirrored(self):
        """Swap sides and negate velocities (and the interface normal)."""
        def flip(s):
            st = s.state
            return RiemannSide(SideState(st.rho, -st.u, st.p, st.S), s.eos, s.model)
        return RiemannInput(flip(self.right), flip(self.left), self.eps0, self.max_iter)

    def shifted(self, v):
        """Galilean shift of both velocities by ``v``."""
        def sh(s):
            st = s.state
            return RiemannSide(SideState(st.rho, st.u + v, st.p, st.S), s.eos, s.model)
        return RiemannInput(sh(self.left), sh(self.right), self.eps0, self.max_iter)


class Wave(NamedTuple):
    """One nonlinear wave of the fan.

    ``head`` is the speed of the edge facing the undisturbed state, ``tail``
    the edge facing the contact; both coincide for shocks.
    """

    side: str
    type: str
    phase: Phase
    head: float
    tail: float
    pre: SideState
    post: SideState
    segment: int

    @property
    def speed(self):
        return self.head


@dataclass
class StarSide:
    rho: float
    p: float
    S: float
    u: float
    waves: list
    branch_kind: str
    shock: bool

    @property
    def q(self):
        return self.p - self.S


@dataclass
class StarState:
    q: float
    u: float
    left: StarSide
    right: StarSide
    iterations: int
    residual: float
    trace: list
    q_min: float
    margin: float
    rtol: float
    input: RiemannInput
    sides: tuple = field(repr=False, default=None)

    @property
    def waves(self):
        """All waves ordered left to right."""
        return list(self.left.waves) + list(reversed(self.right.waves))


class VacuumCheck(NamedTuple):
    admissible: bool
    margin: float
    q_min: float


class FanSample(NamedTuple):
    xi: float
    rho: float
    u: float
    p: float
    S: float
    material: int


def _sides(inp: RiemannInput, fluid_path=False):
    L = Side(inp.left.state, inp.left.eos, inp.left.model, RTOL0, fluid_path)
    R = Side(inp.right.state, inp.right.eos, inp.right.model, RTOL0, fluid_path)
    return L, R


def vacuum_check(inp: RiemannInput, sides=None) -> VacuumCheck:
    """f(q_min) < 0 decides admissibility; the margin is -f(q_min)."""
    L, R = sides if sides is not None else _sides(inp)
    du = inp.right.state.u - inp.left.state.u
    margin, q_min, st = _rk.vacuum(L.kind, L.prm, L.comp, L.ncomp, L.tens, L.ntens,
                                   R.kind, R.prm, R.comp, R.ncomp, R.tens, R.ntens, du, RTOL0)
    if st != _wk.OK:
        # failing near the cut-off is reported as inadmissible
        return VacuumCheck(False, float("nan"), float(q_min))
    return VacuumCheck(bool(margin > 0.0), float(margin), float(q_min))


def initial_guess(inp: RiemannInput, sides=None) -> float:
    """Acoustic estimate, clamped above the cut-off stress."""
    l, r = inp.left, inp.right
    sl, sr = l.state, r.state
    q0 = float(_rk.initial_guess(l.eos.kind, l.eos.vector, sl.rho, sl.u, sl.p, sl.q,
                                 r.eos.kind, r.eos.vector, sr.rho, sr.u, sr.p, sr.q))
    if q0 < min(sl.q, sr.q):
        L, R = sides if sides is not None else _sides(inp)
        q_min = max(L.q_min(), R.q_min())
        if not q0 > q_min:
            q0 = q_min + 0.05 * (min(sl.q, sr.q) - q_min)
    return q0


def _signal(eos, rho, p, beta):
    c2 = float(_ek.sound_speed_sq(eos.kind, eos.vector, rho, p))
    return math.sqrt(c2 + (4.0 / 3.0) * beta / (rho * rho))


def _side_waves(side: Side, q_star, rho_star, S_star, u_star, seg, sign, name):
    """Waves of one side, ordered from the undisturbed state to the contact.

    ``seg`` is the index of the chain segment holding the star state and
    ``sign`` is -1 for the left side, +1 for the right side.
    """
    st = side.state
    waves = []
    if q_star == side.q_k:
        return waves
    shock = q_star > side.q_k
    segs = side.compression if shock else side.tension
    pre = st
    F = 0.0
    for i, s in enumerate(segs[: seg + 1]):
        if i == seg:
            rho, S, q, u = rho_star, S_star, q_star, u_star
        else:
            rho, S, q = s.rho_end, s.S_end, s.q_end
            if shock:
                F += math.sqrt(max((q - s.q_b) * (rho - s.rho_b) / (rho * s.rho_b), 0.0))
            else:
                F = rarefaction_branch(side, q).F
            u = st.u + sign * F
        p = q + S
        if side.eos.is_barotropic:
            p = float(_ek.coeffs(side.kind, side.prm, rho)[3])
        post = SideState(rho, u, p, S)
        if q != pre.q:
            if shock:
                m = math.sqrt((q - pre.q) / (1.0 / pre.rho - 1.0 / rho))
                speed = pre.u + sign * m / pre.rho
                waves.append(Wave(name, "shock", s.phase, speed, speed, pre, post, i))
            else:
                head = pre.u + sign * _signal(side.eos, pre.rho, pre.p, s.beta)
                tail = post.u + sign * _signal(side.eos, post.rho, post.p, s.beta)
                waves.append(Wave(name, "rarefaction", s.phase, head, tail, pre, post, i))
        pre = post
    return waves


def _assemble(inp, sides, res, trace_rows):
    L, R = sides
    q, u = float(res[_rk.R_Q]), float(res[_rk.R_U])
    out = []
    for side, sign, name, rho_i, S_i, seg_i, dfi in (
            (L, -1.0, "L", _rk.R_RHOL, _rk.R_SL, _rk.R_SEGL, _rk.R_DFL),
            (R, 1.0, "R", _rk.R_RHOR, _rk.R_SR, _rk.R_SEGR, _rk.R_DFR)):
        rho, S = float(res[rho_i]), float(res[S_i])
        p = q + S
        if side.eos.is_barotropic:
            p = float(_ek.coeffs(side.kind, side.prm, rho)[3])
        shock = q > side.q_k
        segs = side.compression if shock else side.tension
        seg = int(res[seg_i])
        kind = _kind_from_phases([s.phase for s in segs[: seg + 1]])
        waves = _side_waves(side, q, rho, S, u, seg, sign, name)
        out.append(StarSide(rho, p, S, u, waves, kind, shock))
    return StarState(q, u, out[0], out[1], int(res[_rk.R_ITERS]), float(res[_rk.R_RESID]),
                     trace_rows, float(res[_rk.R_QMIN]), float(res[_rk.R_MARGIN]),
                     float(res[_rk.R_RTOL]), inp, sides)


def _solve(inp: RiemannInput, fluid_path, full_check):
    sides = _sides(inp, fluid_path)
    L, R = sides
    trace = np.zeros((inp.max_iter, 2))
    res = _rk.solve(L.kind, L.prm, L.comp, L.ncomp, L.tens, L.ntens, inp.left.state.u,
                    R.kind, R.prm, R.comp, R.ncomp, R.tens, R.ntens, inp.right.state.u,
                    inp.eps0, inp.max_iter, trace, full_check)
    st = int(res[_rk.R_STATUS])
    n = int(res[_rk.R_ITERS]) if math.isfinite(res[_rk.R_ITERS]) else 0
    rows = [(float(a), float(b)) for a, b in trace[:n]]
    if st == _wk.ERR_VACUUM:
        raise VacuumError(f"vacuum: f(q_min) = {-res[_rk.R_MARGIN]:.6g} >= 0",
                          margin=float(res[_rk.R_MARGIN]), q_min=float(res[_rk.R_QMIN]))
    if st == _wk.ERR_ITER:
        raise NonConvergenceError(f"no convergence in {inp.max_iter} iterations", trace=rows)
    raise_for_status(st, "Riemann solve")
    return _assemble(inp, sides, res, rows)


def solve(inp: RiemannInput, full_check=True) -> StarState:
    """Solve the Riemann problem; raises VacuumError if inadmissible."""
    return _solve(inp, False, full_check)


def solve_fluid(inp: RiemannInput, full_check=True) -> StarState:
    """Pure Mie-Grueneisen solve (beta = 0 on both sides, models ignored)."""
    return _solve(inp, True, full_check)


def f_eval(inp: RiemannInput, q, sides=None, rtol=None):
    """f(q) and f'(q) from direct branch evaluations."""
    from .wavecurves import classify_and_eval
    L, R = sides if sides is not None else _sides(inp)
    a = classify_and_eval(L, q, rtol)
    b = classify_and_eval(R, q, rtol)
    return a.F + b.F + inp.right.state.u - inp.left.state.u, a.dF + b.dF


# ---------------------------------------------------------------- sampling

def _state_at(side: Side, q, u_k, sign):
    ev = rarefaction_branch(side, q)
    rho, S = ev.rho, ev.S
    p = q + S
    if side.eos.is_barotropic:
        p = float(_ek.coeffs(side.kind, side.prm, rho)[3])
    return rho, u_k + sign * ev.F, p, S


def _inside_fan(star: StarState, side: Side, wave: Wave, xi, sign, material):
    beta = side.tension[wave.segment].beta
    q_hi, q_lo = wave.pre.q, wave.post.q
    u_k = side.state.u

    def lam(q):
        rho, u, p, S = _state_at(side, q, u_k, sign)
        return u + sign * _signal(side.eos, rho, p, beta), (rho, u, p, S)

    # lambda is monotone in q along a rarefaction segment: bisection
    a, b = q_lo, q_hi
    la, _ = lam(a)
    for _ in range(100):
        m = 0.5 * (a + b)
        lm, _ = lam(m)
        if (lm - xi) * (la - xi) > 0.0:
            a, la = m, lm
        else:
            b = m
        if abs(b - a) <= 1e-13 * max(abs(a), abs(b), 1.0):
            break
    _, (rho, u, p, S) = lam(0.5 * (a + b))
    return FanSample(xi, rho, u, p, S, material)


def sample_fan(star: StarState, xi) -> FanSample:
    """Self-similar solution at xi = x / t (interface at the origin)."""
    L, R = star.sides
    inp = star.input
    for w in star.left.waves:
        if xi < w.head:
            st = w.pre
            return FanSample(xi, st.rho, st.u, st.p, st.S, 0)
        if w.type == "rarefaction" and xi < w.tail:
            return _inside_fan(star, L, w, xi, -1.0, 0)
    if xi < star.u:
        s = star.left
        return FanSample(xi, s.rho, s.u, s.p, s.S, 0)
    for w in reversed(star.right.waves):
        if xi < w.tail:
            st = w.post
            return FanSample(xi, st.rho, st.u, st.p, st.S, 1)
        if w.type == "rarefaction" and xi < w.head:
            return _inside_fan(star, R, w, xi, 1.0, 1)
    st = inp.right.state
    return FanSample(xi, st.rho, st.u, st.p, st.S, 1)


def sample_profile(star: StarState, x, t, x0=0.0):
    """Arrays (rho, u, p, S, material) at positions ``x`` and time ``t``."""
    if not t > 0.0:
        raise SimulationError("sampling time must be positive")
    out = np.empty((5, len(x)))
    for i, xx in enumerate(x):
        s = sample_fan(star, (xx - x0) / t)
        out[:, i] = (s.rho, s.u, s.p, s.S, s.material)
    return out
