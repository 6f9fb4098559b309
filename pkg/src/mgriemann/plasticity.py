"""Deviatoric constitutive model in uniaxial strain.

The deviator is carried as its normal component S = S_nn; under uniaxial
strain the full tensor is diag(S, -S/2, -S/2), so S:S = 3/2 S^2 and the
von Mises effective stress is S_eff = 3/2 |S|.  Yielding at Y therefore
happens at |S| = 2Y/3.

Across an acoustic wave with constant coefficient beta the deviator obeys
S = S_k + (4 beta / 3) (1/rho - 1/rho_k); beta = rho_k mu is frozen at the
state ahead of the wave unless overridden explicitly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _wavekern as _wk
from .eos import EosParams
from .errors import ConstitutiveViolationError, DomainError, LimitUndefinedError, ParameterError

FLUID_TOL = _wk.FLUID_TOL


class Phase(enum.IntEnum):
    ELASTIC = _wk.PH_E
    PLASTIC = _wk.PH_P
    FLUID = _wk.PH_F

    @property
    def letter(self):
        return "EPF"[int(self)]


class LimitKind(enum.Enum):
    C = "elastic-compression"
    T = "elastic-tension"
    PC = "plastic-compression"
    PT = "plastic-tension"

    @property
    def compressive(self):
        return self in (LimitKind.C, LimitKind.PC)

    @property
    def plastic(self):
        return self in (LimitKind.PC, LimitKind.PT)


@dataclass(frozen=True)
class DeviatoricModel:
    """Shear moduli and yield limits of the elastic / plastic / fluid map.

    ``beta_e`` / ``beta_p`` override rho_k * mu when given.
    """

    mu_e: float = 0.0
    mu_p: float = 0.0
    y_e: float = 0.0
    y_p: float = 0.0
    beta_e: Optional[float] = None
    beta_p: Optional[float] = None

    def __post_init__(self):
        for name in ("mu_e", "mu_p", "y_e", "y_p"):
            v = float(getattr(self, name))
            if math.isnan(v):
                raise ParameterError(f"{name} must not be nan")
            object.__setattr__(self, name, v)
        for name in ("beta_e", "beta_p"):
            v = getattr(self, name)
            if v is not None:
                v = float(v)
                if not (math.isfinite(v) and v >= 0.0):
                    raise ParameterError(f"{name} must be finite and >= 0, got {v}")
                object.__setattr__(self, name, v)
        if not (0.0 <= self.mu_p <= self.mu_e) or math.isinf(self.mu_e):
            raise ParameterError(f"requires 0 <= mu_p <= mu_e < inf, got {self.mu_e}, {self.mu_p}")
        if not (0.0 <= self.y_e <= self.y_p):
            raise ParameterError(f"requires 0 <= y_e <= y_p, got {self.y_e}, {self.y_p}")

    # ------------------------------------------------------------ builders
    @classmethod
    def fluid(cls):
        return cls(0.0, 0.0, 0.0, 0.0)

    @classmethod
    def elastic(cls, mu, beta=None):
        """Pure elastic solid (never yields)."""
        return cls(mu, mu, math.inf, math.inf, beta, beta)

    @classmethod
    def perfect(cls, mu_e, y_e):
        """Perfect elastoplasticity: no hardening beyond Y^E."""
        return cls(mu_e, 0.0, y_e, math.inf)

    @classmethod
    def hardening(cls, mu_e, mu_p, y_e, y_p=math.inf):
        """Linear hardening; a finite ``y_p`` adds the hydrodynamic (fluid) phase."""
        return cls(mu_e, mu_p, y_e, y_p)

    # ------------------------------------------------------------ accessors
    @property
    def is_fluid(self):
        return (self.mu_e == 0.0 and self.beta_e in (None, 0.0)
                and self.mu_p == 0.0 and self.beta_p in (None, 0.0))

    @property
    def vector(self):
        return np.array([self.mu_e, self.mu_p, self.y_e, self.y_p,
                         np.nan if self.beta_e is None else self.beta_e,
                         np.nan if self.beta_p is None else self.beta_p])


@dataclass(frozen=True)
class SideState:
    """Primitive state on one side: density, normal velocity, pressure, deviator."""

    rho: float
    u: float = 0.0
    p: float = 0.0
    S: float = 0.0

    def __post_init__(self):
        for name in ("rho", "u", "p", "S"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if not self.rho > 0.0:
            raise DomainError(f"density must be positive, got {self.rho}")

    @property
    def q(self):
        return self.p - self.S

    @property
    def s_eff(self):
        return effective_stress(self.S)


class LimitState(NamedTuple):
    rho: float
    p: float
    S: float
    q: float
    kind: LimitKind


class PlasticLimits(NamedTuple):
    rho_pc: Optional[float]
    rho_pt: Optional[float]
    degenerate: bool


def effective_stress(S):
    """von Mises effective stress under the uniaxial closure."""
    return 1.5 * abs(S)


def beta(model: DeviatoricModel, rho_k, phase) -> float:
    """Balance-law coefficient of a phase, frozen at density ``rho_k``."""
    if not rho_k > 0.0:
        raise DomainError("rho_k must be positive")
    phase = Phase(phase)
    if phase == Phase.FLUID:
        return 0.0
    if phase == Phase.ELASTIC:
        return model.beta_e if model.beta_e is not None else rho_k * model.mu_e
    return model.beta_p if model.beta_p is not None else rho_k * model.mu_p


def classify_phase(s_eff, model: DeviatoricModel) -> Phase:
    """von Mises phase of an effective stress."""
    if s_eff < 0.0:
        raise DomainError("effective stress must be non-negative")
    if s_eff > model.y_p * (1.0 + FLUID_TOL):
        raise ConstitutiveViolationError(
            f"effective stress {s_eff} exceeds the plastic yield limit {model.y_p}")
    if math.isfinite(model.y_p) and s_eff >= model.y_p * (1.0 - FLUID_TOL):
        return Phase.FLUID
    if s_eff <= model.y_e:
        return Phase.ELASTIC
    return Phase.PLASTIC


def deviator_after_wave(S_k, beta_, rho_k, rho):
    """S = S_k + (4 beta / 3)(1/rho - 1/rho_k)."""
    return _wk.deviator(S_k, beta_, rho_k, rho)


def _limit_pair(rho_k, S_k, beta_, Y):
    """(rho_compression, rho_tension) where S_eff reaches Y from (rho_k, S_k)."""
    if math.isinf(Y):
        return None, None
    if beta_ == 0.0:
        if effective_stress(S_k) >= Y * (1.0 - FLUID_TOL):
            return rho_k, rho_k
        raise LimitUndefinedError("beta = 0 below yield: the limit is never reached")
    out = []
    for sign in (-1.0, 1.0):
        r = _wk.limit_rho(rho_k, S_k, beta_, Y, sign)
        if math.isnan(r):
            raise LimitUndefinedError(
                f"{'compression' if sign < 0 else 'tension'} limit undefined for "
                f"rho_k={rho_k}, S_k={S_k}, beta={beta_}, Y={Y}")
        out.append(r)
    return out[0], out[1]


def elastic_limit_densities(state: SideState, model: DeviatoricModel):
    """(rho_C, rho_T); ``(None, None)`` if Y^E is infinite."""
    return _limit_pair(state.rho, state.S, beta(model, state.rho, Phase.ELASTIC), model.y_e)


def plastic_limit_densities(state: SideState, model: DeviatoricModel) -> PlasticLimits:
    """Densities of the plastic limits, chained from the elastic limit states.

    With mu^P = 0 and finite Y^P the plastic stretch has zero length: the
    limits coincide with the elastic ones and the result is flagged degenerate.
    """
    if math.isinf(model.y_p):
        return PlasticLimits(None, None, False)
    bE = beta(model, state.rho, Phase.ELASTIC)
    bP = beta(model, state.rho, Phase.PLASTIC)
    rc, rt = elastic_limit_densities(state, model)
    out = []
    for sign, r_lim in ((-1.0, rc), (1.0, rt)):
        S_lim = _wk.deviator(state.S, bE, state.rho, r_lim) if bE > 0.0 else state.S
        if bP == 0.0:
            out.append(r_lim)
            continue
        r = _wk.limit_rho(r_lim, S_lim, bP, model.y_p, sign)
        if math.isnan(r):
            raise LimitUndefinedError("plastic limit undefined")
        out.append(r)
    return PlasticLimits(out[0], out[1], bP == 0.0)


def limit_state(state: SideState, eos: EosParams, model: DeviatoricModel,
                kind: LimitKind, rtol=1e-10) -> LimitState:
    """Full limit state: pressure from the Hugoniot (compression) or the
    isentrope (tension), deviator from the jump relation."""
    kind = LimitKind(kind)
    comp = kind.compressive
    bE = beta(model, state.rho, Phase.ELASTIC)
    rc, rt = elastic_limit_densities(state, model)
    r_e = rc if comp else rt
    if r_e is None:
        raise LimitUndefinedError("elastic yield limit is infinite")
    p_e = _pressure_along(eos, state.rho, state.p, r_e, comp, rtol)
    S_e = deviator_after_wave(state.S, bE, state.rho, r_e)
    if not kind.plastic:
        return LimitState(r_e, p_e, S_e, p_e - S_e, kind)
    pl = plastic_limit_densities(state, model)
    r_p = pl.rho_pc if comp else pl.rho_pt
    if r_p is None:
        raise LimitUndefinedError("plastic yield limit is infinite")
    bP = beta(model, state.rho, Phase.PLASTIC)
    p_p = _pressure_along(eos, r_e, p_e, r_p, comp, rtol)
    S_p = deviator_after_wave(S_e, bP, r_e, r_p)
    return LimitState(r_p, p_p, S_p, p_p - S_p, kind)


def _pressure_along(eos, rb, pb, rho, compressive, rtol):
    if rho == rb:
        return pb
    if compressive:
        return float(_wk.hugoniot_pressure(eos.kind, eos.vector, rb, pb, rho))
    p, st = _wk.isentrope_pressure(eos.kind, eos.vector, rb, pb, rho, rtol)
    if st != _wk.OK:
        from .errors import IntegrationError
        raise IntegrationError(f"isentrope integration from rho={rb} to {rho} failed")
    return float(p)
