"""Mie-Grueneisen coefficient kernels.

Every function here accepts either a float or a float64 array for the
density argument and returns the same shape.  Branches are selected by the
integer ``kind`` only, never by value, so the same code compiles under numba
for both scalar and array specialisations.

Parameter vector layout (length ``NPARAM``):

    IDEAL       gamma
    STIFFENED   gamma, p_inf
    MURNAGHAN   K, gamma, rho0, p0
    POLYNOMIAL  A1, A2, A3, T1, T2, B0, B1, rho0
    JWL         A1, A2, omega, R1, R2, rho0
"""

import numpy as np

from ._jit import njit

IDEAL = 0
STIFFENED = 1
MURNAGHAN = 2
POLYNOMIAL = 3
JWL = 4

NPARAM = 8


@njit
def coeffs(kind, prm, rho):
    """Return ``(G, dG, d2G, h, dh, d2h)`` at density ``rho``."""
    zero = 0.0 * rho
    if kind == IDEAL:
        return prm[0] - 1.0 + zero, zero, zero, zero, zero, zero
    if kind == STIFFENED:
        gam = prm[0]
        return gam - 1.0 + zero, zero, zero, -gam * prm[1] + zero, zero, zero
    if kind == MURNAGHAN:
        K, gam, r0, p0 = prm[0], prm[1], prm[2], prm[3]
        x = rho / r0
        h = K / gam * (x**gam - 1.0) + p0
        dh = K / r0 * x ** (gam - 1.0)
        d2h = K * (gam - 1.0) / (r0 * r0) * x ** (gam - 2.0)
        return zero, zero, zero, h, dh, d2h
    if kind == POLYNOMIAL:
        A1, A2, A3, T1, T2, B0, B1, r0 = (
            prm[0], prm[1], prm[2], prm[3], prm[4], prm[5], prm[6], prm[7])
        mu = rho / r0 - 1.0
        # compression branch is taken at mu == 0 as well
        w = 1.0 * (mu >= 0.0)
        g = B1 + (B0 - B1) * r0 / rho
        dg = -(B0 - B1) * r0 / (rho * rho)
        d2g = 2.0 * (B0 - B1) * r0 / (rho * rho * rho)
        hc = mu * (A1 + mu * (A2 + mu * A3))
        ht = mu * (T1 + mu * T2)
        dhc = (A1 + mu * (2.0 * A2 + 3.0 * A3 * mu)) / r0
        dht = (T1 + 2.0 * T2 * mu) / r0
        d2hc = (2.0 * A2 + 6.0 * A3 * mu) / (r0 * r0)
        d2ht = 2.0 * T2 / (r0 * r0) + zero
        h = w * hc + (1.0 - w) * ht
        dh = w * dhc + (1.0 - w) * dht
        d2h = w * d2hc + (1.0 - w) * d2ht
        return g, dg, d2g, h, dh, d2h
    # JWL
    A1, A2, om, R1, R2, r0 = prm[0], prm[1], prm[2], prm[3], prm[4], prm[5]
    e1 = np.exp(-R1 * r0 / rho)
    e2 = np.exp(-R2 * r0 / rho)
    h = A1 * (1.0 - om * rho / (R1 * r0)) * e1 + A2 * (1.0 - om * rho / (R2 * r0)) * e2
    dh = (A1 * e1 * (R1 * r0 / (rho * rho) - om / rho - om / (R1 * r0))
          + A2 * e2 * (R2 * r0 / (rho * rho) - om / rho - om / (R2 * r0)))
    rho3 = rho * rho * rho
    d2h = (A1 * e1 * R1 * r0 / rho3 * (R1 * r0 / rho - 2.0 - om)
           + A2 * e2 * R2 * r0 / rho3 * (R2 * r0 / rho - 2.0 - om))
    return om + zero, zero, zero, h, dh, d2h


@njit
def gamma_h(kind, prm, rho):
    g, _, _, h, _, _ = coeffs(kind, prm, rho)
    return g, h


@njit
def pressure(kind, prm, rho, e):
    g, _, _, h, _, _ = coeffs(kind, prm, rho)
    return g * rho * e + h


@njit
def energy(kind, prm, rho, p):
    """Specific internal energy; zero for the barotropic Murnaghan law."""
    g, _, _, h, _, _ = coeffs(kind, prm, rho)
    if kind == MURNAGHAN:
        return 0.0 * rho
    return (p - h) / (g * rho)


@njit
def sound_speed_sq(kind, prm, rho, p):
    g, dg, _, h, dh, _ = coeffs(kind, prm, rho)
    if kind == MURNAGHAN:
        return dh
    e = (p - h) / (g * rho)
    return (dg * rho + g) * e + dh + g * p / rho
