"""Finite-volume kernels for the sharp-interface simulator.

Every medium owns full-length conserved arrays U[5, N] = (rho, rho u, E,
rho S, rho W) that are meaningful only where the medium occupies part of a
cell.  W is the deviatoric work per unit mass (dW = S dtau along a particle
path), stored separately from the hydrostatic internal energy so that
E = rho (e + W) + rho u^2 / 2 is conserved while e follows the hydrostatic
jump conditions used by the Riemann solver.
The update of one medium over one step is

    |K_{n+1}| U_{n+1} = |K_n| U_n + dt (sum of face fluxes + interface flux
                                        + geometric source),

with local Lax-Friedrichs fluxes on faces shared by two cells of the same
medium, the exact Riemann stress on the tracked interfaces, and donor-cell
transport of S and W with the mass flux.  Cells near an interface whose occupied volume is small
(or zero) at either time level are pooled into one conservative cell.

Array expressions only, so the same code runs under numba and plain numpy.
"""

import math

import numpy as np

from ._eoskern import MURNAGHAN, coeffs, pressure, sound_speed_sq
from ._jit import njit

PLANAR = 0
SPHERICAL = 1

BC_OUTFLOW = 0
BC_WALL = 1

NVAR = 5

SIM_OK = 0
SIM_NEG_DENSITY = 1
SIM_NONHYP = 2
SIM_EMPTY = 3


@njit
def seg_volume(geom, a, b):
    if geom == PLANAR:
        return b - a
    return (b * b * b - a * a * a) / 3.0


@njit
def face_area(geom, x):
    if geom == PLANAR:
        return 1.0 + 0.0 * x
    return x * x


@njit
def path_area(geom, xa, xb):
    """Mean area swept by an interface moving from xa to xb."""
    if geom == PLANAR:
        return 1.0
    return (xa * xa + xa * xb + xb * xb) / 3.0


@njit
def occupancy(geom, xf, lo, hi):
    """Occupied volume of [lo, hi] in each cell plus the clipped edges."""
    a = np.maximum(xf[:-1], lo)
    b = np.minimum(xf[1:], hi)
    b = np.maximum(a, b)
    return seg_volume(geom, a, b), a, b


@njit
def mu_eff(model, rho):
    """Elastic shear modulus per unit density scale: beta_E / rho."""
    if math.isnan(model[4]):
        return model[0] + 0.0 * rho
    return model[4] / rho


@njit
def hardening_ratio(model):
    """beta_P / beta_E (0 for a fluid)."""
    if math.isnan(model[4]):
        if model[0] == 0.0:
            return 0.0
        return model[1] / model[0]
    if model[4] == 0.0:
        return 0.0
    bp = model[5] if not math.isnan(model[5]) else model[4] * model[1] / max(model[0], 1e-300)
    return bp / model[4]


@njit
def primitives(kind, prm, U):
    rho = U[0]
    u = U[1] / rho
    S = U[3] / rho
    e = (U[2] - U[4]) / rho - 0.5 * u * u
    p = pressure(kind, prm, rho, e)
    c2 = sound_speed_sq(kind, prm, rho, p)
    return rho, u, p, S, c2


@njit
def signal_speed(model, rho, u, c2):
    return np.abs(u) + np.sqrt(np.maximum(c2, 0.0) + (4.0 / 3.0) * mu_eff(model, rho) / rho)


@njit
def phys_flux(rho, u, p, S, E):
    q = p - S
    return rho * u, rho * u * u + q, (E + q) * u


@njit
def energy_of(kind, prm, rho, u, p):
    g, _, _, h, _, _ = coeffs(kind, prm, rho)
    if kind == MURNAGHAN:
        e = 0.0 * rho
    else:
        e = (p - h) / (g * rho)
    return rho * e + 0.5 * rho * u * u


@njit
def max_signal(kind, prm, model, U, occ):
    idx = np.nonzero(occ > 0.0)[0]
    if idx.size == 0:
        return 0.0, -1
    sub = U[:, idx]
    rho, u, p, S, c2 = primitives(kind, prm, sub)
    bad = np.nonzero(~(c2 > 0.0) | ~(rho > 0.0))[0]
    if bad.size > 0:
        return np.nan, idx[bad[0]]
    lam = signal_speed(model, rho, u, c2)
    return lam.max(), -1


@njit
def return_map(S0, dS, sE, sP, ratio):
    """Piecewise-linear deviator update.

    The elastic increment ``dS`` is applied from ``S0``; any part that loads
    beyond the current yield surface max(sE, |S0|) is scaled by the
    hardening ratio, and the result is clamped to the plastic limit sP.
    """
    trial = S0 + dS
    at = np.abs(trial)
    same = (trial * S0) > 0.0
    m = np.where(same, np.maximum(sE, np.abs(S0)), sE + 0.0 * S0)
    m = np.minimum(m, 1e300)
    over = at > m
    S = np.where(over, np.sign(trial) * (m + (np.minimum(at, 1e300) - m) * ratio), trial)
    sPc = min(sP, 1e300)
    if ratio == 0.0:
        # zero hardening: the yield surface never grows beyond 2 Y_E / 3
        sPc = min(sPc, sE)
    return np.minimum(np.maximum(S, -sPc), sPc)


@njit
def _pool_ok(vol0, vol1, vcell, lo, hi, theta):
    return (vol0[lo:hi + 1].sum() >= theta * vcell[hi]
            and vol1[lo:hi + 1].sum() >= theta * vcell[hi])


@njit
def _pool_ok_r(vol0, vol1, vcell, lo, hi, theta):
    return (vol0[lo:hi + 1].sum() >= theta * vcell[lo]
            and vol1[lo:hi + 1].sum() >= theta * vcell[lo])


@njit
def update_medium(kind, prm, model, geom, xf, U, Xl, Xr, Xl1, Xr1, iface_l, iface_r,
                  qL, uL, qR, uR, dt, theta, bc_l, bc_r, out, info):
    """Advance one medium by dt; writes the new conserved state into ``out``.

    ``info`` receives: [0:3] net boundary inflow of (mass, momentum, energy),
    [3] status, [4] failing cell index, [5:7] left pool range,
    [7:9] right pool range, [9] momentum added by the geometric source.
    """
    N = U.shape[1]
    for k in range(out.shape[0]):
        out[k, :] = U[k, :]
    info[:] = 0.0
    info[4] = -1.0
    info[5:9] = -1.0
    info[9] = 0.0
    vol0, ea, eb = occupancy(geom, xf, Xl, Xr)
    vol1, _, _ = occupancy(geom, xf, Xl1, Xr1)
    vcell = seg_volume(geom, xf[:-1], xf[1:])
    occ0 = np.nonzero(vol0 > 0.0)[0]
    occ1 = np.nonzero(vol1 > 0.0)[0]
    if occ0.size == 0 or occ1.size == 0:
        info[3] = SIM_EMPTY
        return
    a0, b0 = occ0[0], occ0[-1]
    a1, b1 = occ1[0], occ1[-1]
    lo_all = min(a0, a1)
    hi_all = max(b0, b1)

    # ---- pools
    pl_lo = -1
    pl_hi = -1
    pr_lo = -1
    pr_hi = -1
    if iface_l:
        pl_lo = min(a0, a1)
        pl_hi = max(a0, a1)
        while pl_hi < hi_all and not _pool_ok(vol0, vol1, vcell, pl_lo, pl_hi, theta):
            pl_hi += 1
    if iface_r:
        pr_lo = min(b0, b1)
        pr_hi = max(b0, b1)
        while pr_lo > lo_all and not _pool_ok_r(vol0, vol1, vcell, pr_lo, pr_hi, theta):
            pr_lo -= 1
    if iface_l and iface_r and pl_hi >= pr_lo:
        pl_lo = min(pl_lo, pr_lo)
        pl_hi = max(pl_hi, pr_hi)
        pr_lo = -1
        pr_hi = -1
    info[5] = pl_lo
    info[6] = pl_hi
    info[7] = pr_lo
    info[8] = pr_hi

    # ---- primitives on the cells occupied at time n
    sub = U[:, a0:b0 + 1]
    rho, u, p, S, c2 = primitives(kind, prm, sub)
    E = sub[2]
    lam = signal_speed(model, rho, u, c2)
    f0, f1, f2 = phys_flux(rho, u, p, S, E)

    C = np.zeros((NVAR, N))
    for k in range(NVAR):
        C[k, :] = vol0 * U[k, :]

    # face velocities (used by the deviator source): faces a0 .. b0+1
    uface = np.zeros(b0 - a0 + 2)
    # ---- interior faces a0+1 .. b0
    n_in = b0 - a0
    if n_in > 0:
        Af = face_area(geom, xf[a0 + 1:b0 + 1])
        lmax = np.maximum(lam[:-1], lam[1:])
        g0 = 0.5 * (f0[:-1] + f0[1:]) - 0.5 * lmax * (sub[0, 1:] - sub[0, :-1])
        g1 = 0.5 * (f1[:-1] + f1[1:]) - 0.5 * lmax * (sub[1, 1:] - sub[1, :-1])
        g2 = 0.5 * (f2[:-1] + f2[1:]) - 0.5 * lmax * (sub[2, 1:] - sub[2, :-1])
        # strain-rate face velocity: the mass flux over the mean density, so
        # the deviator sees the same (dissipative) compression as rho does
        uf = g0 / (0.5 * (rho[:-1] + rho[1:]))
        # specific deviator and work ride on the mass flux (donor cell), so
        # that uniform S or W fields stay uniform under density variations
        g3 = np.where(g0 > 0.0, g0 * S[:-1], g0 * S[1:])
        Wm = sub[4] / rho
        g4 = np.where(g0 > 0.0, g0 * Wm[:-1], g0 * Wm[1:])
        uface[1:-1] = uf
        for k, g in ((0, g0), (1, g1), (2, g2), (3, g3), (4, g4)):
            w = dt * Af * g
            C[k, a0:b0] -= w
            C[k, a0 + 1:b0 + 1] += w

    # ---- left end
    if iface_l:
        Al = path_area(geom, Xl, Xl1)
        C[1, a0] += dt * Al * qL
        C[2, a0] += dt * Al * qL * uL
        uface[0] = uL
    else:
        Al = face_area(geom, xf[0])
        if bc_l == BC_WALL:
            wall = f1[0] - lam[0] * sub[1, 0]
            inflow = (0.0, dt * Al * wall, 0.0)
            uface[0] = 0.0
        else:
            inflow = (dt * Al * f0[0], dt * Al * f1[0], dt * Al * f2[0])
            C[3, 0] += dt * Al * u[0] * sub[3, 0]
            C[4, 0] += dt * Al * u[0] * sub[4, 0]
            uface[0] = u[0] if Al > 0.0 else 0.0
        C[0, 0] += inflow[0]
        C[1, 0] += inflow[1]
        C[2, 0] += inflow[2]
        info[0] += inflow[0]
        info[1] += inflow[1]
        info[2] += inflow[2]
    # ---- right end
    if iface_r:
        Ar = path_area(geom, Xr, Xr1)
        C[1, b0] -= dt * Ar * qR
        C[2, b0] -= dt * Ar * qR * uR
        uface[-1] = uR
    else:
        Ar = face_area(geom, xf[N])
        if bc_r == BC_WALL:
            wall = f1[-1] + lam[-1] * sub[1, -1]
            outflow = (0.0, dt * Ar * wall, 0.0)
            uface[-1] = 0.0
        else:
            outflow = (dt * Ar * f0[-1], dt * Ar * f1[-1], dt * Ar * f2[-1])
            C[3, N - 1] -= dt * Ar * u[-1] * sub[3, -1]
            C[4, N - 1] -= dt * Ar * u[-1] * sub[4, -1]
            uface[-1] = u[-1]
        C[0, N - 1] -= outflow[0]
        C[1, N - 1] -= outflow[1]
        C[2, N - 1] -= outflow[2]
        info[0] -= outflow[0]
        info[1] -= outflow[1]
        info[2] -= outflow[2]

    # ---- geometric source p (A_right - A_left) on the occupied portions
    if geom == SPHERICAL:
        A_lo = face_area(geom, ea[a0:b0 + 1])
        A_hi = face_area(geom, eb[a0:b0 + 1])
        if iface_l:
            A_lo[0] = Al
        if iface_r:
            A_hi[-1] = Ar
        src = dt * p * (A_hi - A_lo)
        C[1, a0:b0 + 1] += src
        info[9] = src.sum()

    # ---- uniaxial strain rate du/dx per cell (time-n portions)
    length = eb[a0:b0 + 1] - ea[a0:b0 + 1]
    D = (uface[1:] - uface[:-1]) / np.maximum(length, 1e-300)
    Dfull = np.zeros(N)
    Dfull[a0:b0 + 1] = D

    # ---- assemble new state
    newU = np.zeros((NVAR, N))
    mask = vol1 > 0.0
    for k in range(NVAR):
        newU[k, :] = np.where(mask, C[k, :] / np.where(mask, vol1, 1.0), U[k, :])
    for (lo, hi, is_left) in ((pl_lo, pl_hi, True), (pr_lo, pr_hi, False)):
        if lo < 0:
            continue
        vtot = vol1[lo:hi + 1].sum()
        for k in range(NVAR):
            val = C[k, lo:hi + 1].sum() / vtot
            for i in range(lo, hi + 1):
                if vol1[i] > 0.0:
                    newU[k, i] = val
        # pool-wide divergence from the pool's outer edges at time n
        x_lo = max(xf[lo], Xl)
        x_hi = min(xf[hi + 1], Xr)
        i_lo = max(lo, a0) - a0
        i_hi = min(hi, b0) - a0
        if i_hi >= i_lo and x_hi > x_lo:
            Dp = (uface[i_hi + 1] - uface[i_lo]) / (x_hi - x_lo)
            for i in range(lo, hi + 1):
                Dfull[i] = Dp

    # ---- deviator: elastic increment plus piecewise return mapping
    rho1 = newU[0]
    good = mask & (rho1 > 0.0)
    rho_safe = np.where(good, rho1, 1.0)
    S_adv = newU[3] / rho_safe
    dS = dt * (4.0 / 3.0) * mu_eff(model, rho_safe) * Dfull
    sE = 2.0 * model[2] / 3.0
    sP = 2.0 * model[3] / 3.0
    S_new = return_map(S_adv, dS, sE, sP, hardening_ratio(model))
    newU[3] = np.where(good, rho_safe * S_new, newU[3])

    # ---- deviatoric work: source S D with the step-averaged deviator
    S_old = np.zeros(N)
    S_old[a0:b0 + 1] = S
    S_end = np.where(good, S_new, S_old)
    wsrc = dt * vol0 * 0.5 * (S_old + S_end) * Dfull
    inpool = np.zeros(N, dtype=np.bool_)
    for (lo, hi) in ((pl_lo, pl_hi), (pr_lo, pr_hi)):
        if lo < 0:
            continue
        vtot = vol1[lo:hi + 1].sum()
        add = wsrc[lo:hi + 1].sum() / vtot
        for i in range(lo, hi + 1):
            inpool[i] = True
            if vol1[i] > 0.0:
                newU[4, i] += add
    plain = mask & ~inpool
    newU[4] = np.where(plain, newU[4] + wsrc / np.where(mask, vol1, 1.0), newU[4])

    # ---- admissibility of the new state
    idx = np.nonzero(mask)[0]
    r = newU[0, idx]
    badr = np.nonzero(~(r > 0.0))[0]
    if badr.size > 0:
        info[3] = SIM_NEG_DENSITY
        info[4] = idx[badr[0]]
        return
    _, _, _, _, c2n = primitives(kind, prm, newU[:, idx])
    badc = np.nonzero(~(c2n > 0.0))[0]
    if badc.size > 0:
        info[3] = SIM_NONHYP
        info[4] = idx[badc[0]]
        return
    for k in range(NVAR):
        out[k, :] = newU[k, :]
    info[3] = SIM_OK


@njit
def llf_single_step(kind, prm, model, geom, xf, U, dt, out, info):
    """Single-medium step over the whole grid (no interfaces)."""
    update_medium(kind, prm, model, geom, xf, U, xf[0], xf[-1], xf[0], xf[-1],
                  False, False, 0.0, 0.0, 0.0, 0.0, dt, 0.5, BC_OUTFLOW, BC_OUTFLOW, out, info)
