"""Shock and rarefaction branches of the per-side stress function f_k(q).

A :class:`Side` bundles a state, its EOS and deviatoric model, and caches
the two yield chains (compression and tension).  Each chain is a list of
segments on which beta is constant; segments meet at the elastic / plastic
limit states.  Shock curves through several segments are the composite
Hugoniot kinds EP, PF and EPF; rarefaction curves switch beta on the fly.

All heavy lifting happens in the ``_wavekern`` kernels; this module adds
validation, naming and exceptions.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from . import _riemannkern as _rk
from . import _wavekern as _wk
from .eos import EosParams
from .errors import (ClassificationError, DomainError, VacuumError, raise_for_status)
from .plasticity import DeviatoricModel, LimitKind, LimitState, Phase, SideState

RTOL0 = _rk.RTOL0


class HugoniotKind(enum.Enum):
    E = "E"
    P = "P"
    F = "F"
    EP = "EP"
    PF = "PF"
    EPF = "EPF"

    @property
    def waypoints(self):
        """Number of frozen limit states crossed before the active segment."""
        return len(self.value) - 1


def _kind_from_phases(phases):
    name = "".join(Phase(p).letter for p in phases)
    if name == "EF":
        # zero hardening modulus: the plastic stretch has zero length
        name = "EPF"
    return name


class Segment(NamedTuple):
    """One constant-beta stretch of a wave curve."""

    rho_b: float
    p_b: float
    S_b: float
    q_b: float
    beta: float
    phase: Phase
    q_end: float
    rho_end: float
    p_end: float
    S_end: float
    offset: float


def _segments(rows, n):
    out = []
    for i in range(n):
        r = rows[i]
        out.append(Segment(float(r[_wk.F_RB]), float(r[_wk.F_PB]), float(r[_wk.F_SB]),
                           float(r[_wk.F_QB]), float(r[_wk.F_BETA]),
                           Phase(int(r[_wk.F_PHASE])), float(r[_wk.F_QEND]),
                           float(r[_wk.F_REND]), float(r[_wk.F_PEND]),
                           float(r[_wk.F_SEND]), float(r[_wk.F_WAY])))
    return out


class Side:
    """One side of a Riemann problem with its cached yield chains.

    ``fluid_path=True`` bypasses the deviatoric model and builds the pure
    Mie-Grueneisen (beta = 0) curves directly.
    """

    def __init__(self, state: SideState, eos: EosParams, model: DeviatoricModel = None,
                 rtol=RTOL0, fluid_path=False):
        self.state = state
        self.eos = eos
        self.model = model if model is not None else DeviatoricModel.fluid()
        self.rtol = rtol
        self.fluid_path = bool(fluid_path)
        if not fluid_path and self.model.is_fluid and state.S != 0.0:
            raise DomainError("a fluid carries no deviatoric stress")
        self._prm = eos.vector
        comp, nc, tens, nt, st = _rk.prepare_side(
            eos.kind, self._prm, self.model.vector, state.rho, state.p, state.S,
            rtol, self.fluid_path)
        raise_for_status(st, "building yield chains")
        self.comp, self.ncomp, self.tens, self.ntens = comp, int(nc), tens, int(nt)
        self._qmin = None

    # ------------------------------------------------------------ chains
    @property
    def kind(self):
        return self.eos.kind

    @property
    def prm(self):
        return self._prm

    @property
    def q_k(self):
        return self.state.q

    @property
    def compression(self):
        return _segments(self.comp, self.ncomp)

    @property
    def tension(self):
        return _segments(self.tens, self.ntens)

    @property
    def hugoniot_kinds(self):
        phases = [s.phase for s in self.compression]
        return [HugoniotKind(_kind_from_phases(phases[: i + 1])) for i in range(len(phases))]

    def limit_states(self, compressive=True):
        """Waypoint limit states of a chain, in wave order."""
        segs = self.compression if compressive else self.tension
        out = []
        for s in segs:
            if math.isinf(s.q_end):
                break
            if s.phase == Phase.ELASTIC:
                kind = LimitKind.C if compressive else LimitKind.T
            else:
                kind = LimitKind.PC if compressive else LimitKind.PT
            out.append(LimitState(s.rho_end, s.p_end, s.S_end, s.q_end, kind))
        return out

    def q_limits(self, compressive=True):
        return [ls.q for ls in self.limit_states(compressive)]

    def q_min(self):
        """Cut-off stress of the rarefaction branch (cached)."""
        if self._qmin is None:
            q, f, st = _wk.cutoff(self.kind, self._prm, self.tens, self.ntens, self.rtol)
            raise_for_status(st, "cut-off integration")
            self._qmin = (float(q), float(f))
        return self._qmin[0]

    def f_min(self):
        self.q_min()
        return self._qmin[1]

    def _segment_index(self, kind):
        kind = HugoniotKind(kind)
        kinds = self.hugoniot_kinds
        if kind not in kinds:
            raise ClassificationError(
                f"Hugoniot kind {kind.value} does not occur on this side "
                f"(available: {[k.value for k in kinds]})")
        return kinds.index(kind)


class BranchEval(NamedTuple):
    F: float
    dF: float
    rho: float
    S: float
    err: float
    shock: bool
    segment: int
    kind: str
    phase: Phase

    @property
    def hugoniot_kind(self):
        return HugoniotKind(self.kind) if self.shock else None


class HugoniotRoot(NamedTuple):
    rho: float
    iterations: int
    residual: float


# ---------------------------------------------------------------- Hugoniot

def _active(side, kind):
    i = side._segment_index(kind)
    rows = side.comp
    offset = float(np.sum(rows[:i, _wk.F_WAY]))
    return rows[i], offset


def phi(kind, side: Side, q, rho):
    """Composite Hugoniot residual of ``kind`` at (q, rho)."""
    row, offset = _active(side, kind)
    return offset + float(_wk.phi(side.kind, side.prm, row[_wk.F_RB], row[_wk.F_PB],
                                  row[_wk.F_SB], row[_wk.F_BETA], q, rho))


def phi_drho(kind, side: Side, q, rho):
    row, _ = _active(side, kind)
    return float(_wk.phi_drho(side.kind, side.prm, row[_wk.F_RB], row[_wk.F_PB],
                              row[_wk.F_SB], row[_wk.F_BETA], q, rho))


def chi(kind, side: Side, q, rho):
    """Slope dq/drho of the Hugoniot locus of ``kind`` at (q, rho)."""
    from .errors import LocusDegeneracyError
    row, _ = _active(side, kind)
    x = float(_wk.chi(side.kind, side.prm, row[_wk.F_RB], row[_wk.F_PB],
                      row[_wk.F_SB], row[_wk.F_BETA], q, rho))
    if not x > 0.0:
        raise LocusDegeneracyError(f"Hugoniot slope {x} is not positive at q={q}, rho={rho}")
    return x


def rho_bracket(kind, side: Side):
    """(rho_base, rho_max) of the active segment of ``kind``."""
    row, _ = _active(side, kind)
    return float(row[_wk.F_RB]), float(_wk.rho_max(side.kind, side.prm, row[_wk.F_RB]))


def hugoniot_density(kind, side: Side, q, guess=None) -> HugoniotRoot:
    """Post-shock density on the locus of ``kind`` for normal stress q."""
    row, offset = _active(side, kind)
    rb = float(row[_wk.F_RB])
    if guess is None:
        guess = rb * 1.0001
    rho, its, st = _wk.hugoniot_density(side.kind, side.prm, rb, row[_wk.F_PB],
                                        row[_wk.F_SB], row[_wk.F_BETA], q, offset, guess)
    raise_for_status(st, f"Hugoniot density ({HugoniotKind(kind).value}) at q={q}")
    return HugoniotRoot(float(rho), int(its), phi(kind, side, q, rho))


# ---------------------------------------------------------------- branches

def _label(side, segs, seg):
    return _kind_from_phases([s.phase for s in segs[: seg + 1]])


def shock_branch(side: Side, q) -> BranchEval:
    """Shock branch (q >= q_k), composed through the compression waypoints."""
    if not math.isfinite(q):
        raise DomainError(f"stress must be finite, got {q}")
    if q < side.q_k:
        raise DomainError(f"shock branch needs q >= q_k={side.q_k}, got {q}")
    F, dF, rho, S, seg, _, st = _wk.shock_eval(side.kind, side.prm, side.comp, side.ncomp, q)
    raise_for_status(st, f"shock branch at q={q}")
    segs = side.compression
    s = segs[seg]
    # the density root is converged to ~1e-14 relative; map that to F
    err = 0.0
    if F > 0.0:
        err = abs((q - s.q_b) / (2.0 * F * rho * rho)) * 4e-14 * rho
    return BranchEval(float(F), float(dF), float(rho), float(S), err, True, int(seg),
                      _label(side, segs, seg), s.phase)


def rarefaction_branch(side: Side, q, rtol=None) -> BranchEval:
    """Rarefaction branch (q <= q_k) by adaptive RKF45 integration."""
    if not math.isfinite(q):
        raise DomainError(f"stress must be finite, got {q}")
    if q > side.q_k:
        raise DomainError(f"rarefaction branch needs q <= q_k={side.q_k}, got {q}")
    rtol = side.rtol if rtol is None else rtol
    F, dF, rho, S, err, seg, st = _wk.rare_eval(side.kind, side.prm, side.tens, side.ntens,
                                                q, rtol)
    if st == _wk.ERR_BELOW_QMIN:
        raise VacuumError(f"q={q} lies below the cut-off stress of this side")
    raise_for_status(st, f"rarefaction branch at q={q}")
    segs = side.tension
    return BranchEval(float(F), float(dF), float(rho), float(S), float(err), False, int(seg),
                      _label(side, segs, seg), segs[seg].phase)


def classify_and_eval(side: Side, q, rtol=None) -> BranchEval:
    """Shock branch for q > q_k, rarefaction branch otherwise."""
    if q > side.q_k:
        return shock_branch(side, q)
    return rarefaction_branch(side, q, rtol)
