"""Mie-Grueneisen equations of state p = Gamma(rho) rho e + h(rho).

Five variants are supported: ideal gas, stiffened gas, Murnaghan (treated as
a barotrope with Gamma = 0), polynomial (with the sound-speed-continuous
tension branch) and JWL.  :class:`EosParams` is an immutable tagged
parameter set; the functions below evaluate coefficients, pressure, internal
energy and sound speed, and audit the convexity conditions

    C1: Gamma' <= 0, (rho Gamma)' >= 0, (rho Gamma)'' >= 0
    C2: Gamma -> Gamma_inf > 0 as rho -> inf and Gamma <= Gamma_inf + 2
    C3: h' >= 0, h'' >= 0

that the wave-curve analysis relies on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _eoskern as _k
from .errors import DomainError, NonHyperbolicError, ParameterError, UnsupportedOperationError


class Variant(enum.IntEnum):
    IDEAL_GAS = _k.IDEAL
    STIFFENED_GAS = _k.STIFFENED
    MURNAGHAN = _k.MURNAGHAN
    POLYNOMIAL = _k.POLYNOMIAL
    JWL = _k.JWL


FIELDS = {
    Variant.IDEAL_GAS: ("gamma",),
    Variant.STIFFENED_GAS: ("gamma", "p_inf"),
    Variant.MURNAGHAN: ("K", "gamma", "rho0", "p0"),
    Variant.POLYNOMIAL: ("A1", "A2", "A3", "T1", "T2", "B0", "B1", "rho0"),
    Variant.JWL: ("A1", "A2", "omega", "R1", "R2", "rho0"),
}

VARIANT_NAMES = {
    "ideal": Variant.IDEAL_GAS,
    "stiffened": Variant.STIFFENED_GAS,
    "murnaghan": Variant.MURNAGHAN,
    "polynomial": Variant.POLYNOMIAL,
    "jwl": Variant.JWL,
}


@dataclass(frozen=True)
class EosParams:
    """Tagged, validated parameter set of one EOS variant.

    ``values`` follows the per-variant order in :data:`FIELDS`.
    """

    variant: Variant
    values: tuple
    label: str = field(default="", compare=False)

    def __post_init__(self):
        variant = Variant(self.variant)
        names = FIELDS[variant]
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(names):
            raise ParameterError(
                f"{variant.name} expects {len(names)} parameters {names}, got {len(vals)}")
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "values", vals)
        for n, v in zip(names, vals):
            if not math.isfinite(v):
                raise ParameterError(f"{variant.name}.{n} must be finite, got {v}")
        _check_invariants(variant, dict(zip(names, vals)))

    # ------------------------------------------------------------ builders
    @classmethod
    def ideal_gas(cls, gamma, label=""):
        return cls(Variant.IDEAL_GAS, (gamma,), label)

    @classmethod
    def stiffened_gas(cls, gamma, p_inf, label=""):
        return cls(Variant.STIFFENED_GAS, (gamma, p_inf), label)

    @classmethod
    def murnaghan(cls, K, gamma, rho0, p0, label=""):
        return cls(Variant.MURNAGHAN, (K, gamma, rho0, p0), label)

    @classmethod
    def polynomial(cls, A1, A2, A3, T1, T2, B0, B1, rho0, label=""):
        return cls(Variant.POLYNOMIAL, (A1, A2, A3, T1, T2, B0, B1, rho0), label)

    @classmethod
    def jwl(cls, A1, A2, omega, R1, R2, rho0, label=""):
        return cls(Variant.JWL, (A1, A2, omega, R1, R2, rho0), label)

    @classmethod
    def from_mapping(cls, variant_name, mapping, label=""):
        """Build from a variant name and a ``{field: value}`` mapping."""
        try:
            variant = VARIANT_NAMES[variant_name]
        except KeyError:
            raise ParameterError(
                f"unknown EOS variant {variant_name!r}; expected one of "
                f"{sorted(VARIANT_NAMES)}") from None
        names = FIELDS[variant]
        missing = [n for n in names if n not in mapping]
        if missing:
            raise ParameterError(f"{variant_name} EOS is missing parameter(s) {missing}")
        extra = sorted(set(mapping) - set(names))
        if extra:
            raise ParameterError(f"{variant_name} EOS has unknown parameter(s) {extra}")
        return cls(variant, tuple(mapping[n] for n in names), label)

    # ------------------------------------------------------------ accessors
    @property
    def name(self):
        return {v: k for k, v in VARIANT_NAMES.items()}[self.variant]

    def as_dict(self):
        return dict(zip(FIELDS[self.variant], self.values))

    def __getitem__(self, key):
        return self.as_dict()[key]

    @property
    def kind(self):
        """Integer code used by the kernels."""
        return int(self.variant)

    @property
    def vector(self):
        """Fixed-length float64 parameter vector used by the kernels."""
        v = np.zeros(_k.NPARAM)
        v[: len(self.values)] = self.values
        return v

    @property
    def is_barotropic(self):
        return self.variant == Variant.MURNAGHAN


def _check_invariants(variant, d):
    def need(cond, what):
        if not cond:
            raise ParameterError(f"{variant.name}: requires {what} (got {d})")

    if variant in (Variant.IDEAL_GAS, Variant.STIFFENED_GAS):
        need(d["gamma"] > 1.0, "gamma > 1")
        if variant == Variant.STIFFENED_GAS:
            need(d["p_inf"] >= 0.0, "p_inf >= 0")
    elif variant == Variant.MURNAGHAN:
        need(d["K"] > 0 and d["gamma"] > 0 and d["rho0"] > 0, "K, gamma, rho0 > 0")
    elif variant == Variant.POLYNOMIAL:
        need(all(d[k] > 0 for k in ("A1", "A2", "A3", "T1", "rho0")), "A1, A2, A3, T1, rho0 > 0")
        need(d["T2"] >= 0, "T2 >= 0")
        need(d["B1"] <= d["B0"] <= d["B1"] + 2.0, "B1 <= B0 <= B1 + 2")
        need(d["T1"] >= 2.0 * d["T2"], "T1 >= 2 T2")
    else:
        need(all(v > 0 for v in d.values()), "all parameters > 0")
        need(d["R1"] > d["R2"], "R1 > R2")


class EosCoefficients(NamedTuple):
    G: object
    dG: object
    d2G: object
    h: object
    dh: object
    d2h: object


def _rho(rho):
    r = np.asarray(rho, dtype=float)
    if not np.all(r > 0.0):
        raise DomainError(f"density must be positive, got {rho}")
    return float(r) if r.ndim == 0 else r


def coefficients(eos: EosParams, rho) -> EosCoefficients:
    """Gamma, h and their first two derivatives at density ``rho``."""
    r = _rho(rho)
    return EosCoefficients(*_k.coeffs(eos.kind, eos.vector, r))


def pressure(eos: EosParams, rho, e):
    """p = Gamma rho e + h; the barotropic Murnaghan law ignores ``e``."""
    r = _rho(rho)
    e = np.asarray(e, dtype=float)
    e = float(e) if e.ndim == 0 else e
    return _k.pressure(eos.kind, eos.vector, r, e)


def internal_energy(eos: EosParams, rho, p):
    """e = (p - h) / (Gamma rho)."""
    if eos.is_barotropic:
        raise UnsupportedOperationError(
            "internal energy is not determined by pressure for a barotropic EOS")
    r = _rho(rho)
    p = np.asarray(p, dtype=float)
    p = float(p) if p.ndim == 0 else p
    return _k.energy(eos.kind, eos.vector, r, p)


def sound_speed_squared(eos: EosParams, rho, p):
    """c^2 = dp/drho|_e + (p / rho^2) dp/de; raises when not positive."""
    r = _rho(rho)
    p = np.asarray(p, dtype=float)
    p = float(p) if p.ndim == 0 else p
    c2 = _k.sound_speed_sq(eos.kind, eos.vector, r, p)
    bad = ~(np.asarray(c2) > 0.0)
    if np.any(bad):
        if np.ndim(c2) == 0:
            raise NonHyperbolicError(f"c^2 = {c2} <= 0 at rho={r}, p={p}", rho=r, p=p)
        i = int(np.flatnonzero(bad)[0])
        ri = np.broadcast_to(r, np.shape(c2))[i]
        pi = np.broadcast_to(p, np.shape(c2))[i]
        raise NonHyperbolicError(f"c^2 <= 0 at index {i} (rho={ri}, p={pi})", rho=ri, p=pi)
    return c2


# ---------------------------------------------------------------- convexity

@dataclass
class ConditionResult:
    """Sampled outcome of one inequality."""

    name: str
    description: str
    holds: bool
    pass_ranges: list
    fail_ranges: list


@dataclass
class ConvexityReport:
    eos: EosParams
    rho_lo: float
    rho_hi: float
    n_samples: int
    conditions: dict
    gamma_inf: float
    jwl_alpha: float | None = None
    jwl_rho_bound: float | None = None
    poly_rho_bound: float | None = None

    @property
    def ok(self):
        return all(c.holds for c in self.conditions.values())

    def group(self, prefix):
        """True when every sub-condition of C1, C2 or C3 holds."""
        return all(c.holds for k, c in self.conditions.items() if k.startswith(prefix))

    def format(self):
        lines = [f"EOS {self.eos.name} {self.eos.as_dict()}",
                 f"density range [{self.rho_lo:.6g}, {self.rho_hi:.6g}], "
                 f"{self.n_samples} samples"]
        for key, c in self.conditions.items():
            status = "PASS" if c.holds else "FAIL"
            lines.append(f"  {key:<4} {status}  {c.description}")
            if not c.holds:
                for lo, hi in c.fail_ranges:
                    lines.append(f"         fails on [{lo:.6g}, {hi:.6g}]")
                for lo, hi in c.pass_ranges:
                    lines.append(f"         holds on [{lo:.6g}, {hi:.6g}]")
        lines.append(f"  Gamma_inf = {self.gamma_inf:.6g}")
        if self.jwl_alpha is not None:
            lines.append(f"  JWL alpha = {self.jwl_alpha:.6g}; C3 guaranteed for "
                         f"rho <= {self.jwl_rho_bound:.6g}")
        if self.poly_rho_bound is not None:
            lines.append(f"  polynomial: C2 guaranteed for rho >= {self.poly_rho_bound:.6g}")
        lines.append("overall: " + ("all conditions hold" if self.ok else "violations found"))
        return "\n".join(lines)


def _ranges(rho, mask):
    """Contiguous sample runs where ``mask`` is True, as (lo, hi) pairs."""
    out = []
    start = None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        if not m and start is not None:
            out.append((float(rho[start]), float(rho[i - 1])))
            start = None
    if start is not None:
        out.append((float(rho[start]), float(rho[-1])))
    return out


def gamma_infinity(eos: EosParams):
    """lim Gamma(rho) as rho -> infinity."""
    v, d = eos.variant, eos.as_dict()
    if v in (Variant.IDEAL_GAS, Variant.STIFFENED_GAS):
        return d["gamma"] - 1.0
    if v == Variant.MURNAGHAN:
        return 0.0
    if v == Variant.POLYNOMIAL:
        return d["B1"]
    return d["omega"]


def jwl_alpha(eos: EosParams):
    """Maximum of the auxiliary function bounding h'' >= 0 for JWL, and the
    resulting sufficient density bound rho <= R1 rho0 / (2 + omega + alpha)."""
    d = eos.as_dict()
    A1, A2, om, R1, R2, r0 = d["A1"], d["A2"], d["omega"], d["R1"], d["R2"], d["rho0"]
    alpha = (A2 * R2 * R2 / (A1 * R1 * (R1 - R2))
             * math.exp(((2.0 + om) * (R1 - R2) - R2) / R2))
    return alpha, R1 * r0 / (2.0 + om + alpha)


def validate_convexity(eos: EosParams, rho_lo, rho_hi, n_samples=400) -> ConvexityReport:
    """Sample C1-C3 on a geometric density grid; failures are report content."""
    if not (0.0 < rho_lo < rho_hi):
        raise DomainError(f"need 0 < rho_lo < rho_hi, got {rho_lo}, {rho_hi}")
    if n_samples < 2:
        raise DomainError("n_samples must be >= 2")
    rho = np.geomspace(rho_lo, rho_hi, int(n_samples))
    G, dG, d2G, h, dh, d2h = coefficients(eos, rho)
    G = np.broadcast_to(G, rho.shape)
    dG = np.broadcast_to(dG, rho.shape)
    d2G = np.broadcast_to(d2G, rho.shape)
    rG1 = G + rho * dG
    rG2 = 2.0 * dG + rho * d2G
    ginf = gamma_infinity(eos)
    # relative slack so that exact zeros (constant Gamma, h = 0) pass
    tiny = 1e-12

    def ge0(x, scale):
        return x >= -tiny * scale

    gscale = np.abs(G) + np.abs(rho * dG) + np.abs(rho * rho * d2G) + 1e-300
    hscale = np.abs(h) / rho + np.abs(dh) + np.abs(rho * d2h) + 1e-300
    checks = {
        "C1a": ("Gamma' <= 0", ge0(-dG * rho, gscale)),
        "C1b": ("(rho Gamma)' >= 0", ge0(rG1, gscale)),
        "C1c": ("(rho Gamma)'' >= 0", ge0(rG2 * rho, gscale)),
        "C2a": ("Gamma_inf > 0", np.full(rho.shape, ginf > 0.0)),
        "C2b": ("Gamma <= Gamma_inf + 2", G <= ginf + 2.0 + tiny * gscale),
        "C3a": ("h' >= 0", ge0(dh, hscale)),
        "C3b": ("h'' >= 0", ge0(d2h * rho, hscale)),
    }
    conds = {}
    for key, (desc, mask) in checks.items():
        mask = np.asarray(mask, dtype=bool)
        conds[key] = ConditionResult(key, desc, bool(mask.all()),
                                     _ranges(rho, mask), _ranges(rho, ~mask))
    rep = ConvexityReport(eos, float(rho_lo), float(rho_hi), int(n_samples), conds, ginf)
    if eos.variant == Variant.JWL:
        rep.jwl_alpha, rep.jwl_rho_bound = jwl_alpha(eos)
    elif eos.variant == Variant.POLYNOMIAL:
        d = eos.as_dict()
        rep.poly_rho_bound = d["B0"] * d["rho0"] / (d["B1"] + 2.0)
    return rep
