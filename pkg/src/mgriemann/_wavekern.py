"""Wave-curve kernels: yield chains, Hugoniot roots and rarefaction integrals.

A side of the Riemann problem is described by two *chains* of segments, one
for compression (shock branch) and one for tension (rarefaction branch).  A
segment is the stretch of a wave curve on which the deviatoric coefficient
beta is constant; consecutive segments meet at yield-limit states.

Chain rows hold the fields indexed by the ``F_*`` constants below.  Status
codes are returned instead of raising so that everything compiles in numba's
nopython mode; the public modules translate them into exceptions.
"""

import math

import numpy as np

from ._eoskern import MURNAGHAN, POLYNOMIAL, coeffs, sound_speed_sq
from ._jit import njit

# chain row layout
F_RB = 0      # base density
F_PB = 1      # base pressure
F_SB = 2      # base deviator
F_QB = 3      # base normal stress
F_BETA = 4    # deviatoric coefficient on the segment
F_PHASE = 5   # 0 elastic, 1 plastic, 2 fluid
F_QEND = 6    # stress at which the segment ends (+-inf if it never does)
F_REND = 7
F_PEND = 8
F_SEND = 9
F_WAY = 10    # Hugoniot residual of this segment at its end point
NF = 11
NSEG = 4

PH_E = 0
PH_P = 1
PH_F = 2

OK = 0
ERR_BRACKET = 1
ERR_NEWTON = 2
ERR_NONHYP = 3
ERR_STEP = 4
ERR_VACUUM = 5
ERR_LIMIT = 6
ERR_LOCUS = 7
ERR_BELOW_QMIN = 8
ERR_ITER = 9

TIE = 1e-12
FLUID_TOL = 1e-9
HUG_MAXIT = 50
RKF_ATOL = 1e-12
EPS = 2.220446049250313e-16

MODE_RARE = 0
MODE_VAC = 1
MODE_ISEN = 2

# Fehlberg 4(5) tableau
C2_, C3_, C4_, C5_, C6_ = 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5
A21 = 0.25
A31, A32 = 3.0 / 32.0, 9.0 / 32.0
A41, A42, A43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
A51, A52, A53, A54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
A61, A62, A63, A64, A65 = (-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0,
                           -11.0 / 40.0)
B1_, B3_, B4_, B5_, B6_ = (16.0 / 135.0, 6656.0 / 12825.0, 28561.0 / 56430.0,
                           -9.0 / 50.0, 2.0 / 55.0)
E1_, E3_, E4_, E5_, E6_ = (1.0 / 360.0, -128.0 / 4275.0, -2197.0 / 75240.0,
                           1.0 / 50.0, 2.0 / 55.0)


# ---------------------------------------------------------------- deviator

@njit
def deviator(Sb, beta, rb, rho):
    return Sb + (4.0 / 3.0) * beta * (1.0 / rho - 1.0 / rb)


@njit
def limit_rho(rb, Sb, beta, Y, sign):
    """Density where the effective stress reaches ``Y``; sign -1 compresses.

    Returns nan when the limit is undefined.
    """
    ss = 1.5 * Sb * Sb
    disc = Sb * Sb + (4.0 / 9.0) * Y * Y - (2.0 / 3.0) * ss
    if disc < 0.0:
        return np.nan
    inv = 1.0 / rb - 0.75 * Sb / beta + sign * 0.75 / beta * math.sqrt(disc)
    if inv <= 0.0:
        return np.nan
    return 1.0 / inv


# ---------------------------------------------------------------- Hugoniot

@njit
def phi(kind, prm, rb, pb, Sb, beta, q, rho):
    G, _, _, h, _, _ = coeffs(kind, prm, rho)
    S = deviator(Sb, beta, rb, rho)
    if kind == MURNAGHAN:
        return q + S - h
    Gb, _, _, hb, _, _ = coeffs(kind, prm, rb)
    return (Gb * rb * (q + S - h) - G * rho * (pb - hb)
            - 0.5 * Gb * (q + S + pb) * G * (rho - rb))


@njit
def phi_noise(kind, prm, rb, pb, Sb, beta, q, rho):
    """Rounding level of ``phi``: a few ulps of its largest term."""
    G, _, _, h, _, _ = coeffs(kind, prm, rho)
    S = deviator(Sb, beta, rb, rho)
    if kind == MURNAGHAN:
        return 8.0 * EPS * (abs(q) + abs(S) + abs(h))
    Gb, _, _, hb, _, _ = coeffs(kind, prm, rb)
    mag = (abs(Gb * rb) * (abs(q) + abs(S) + abs(h)) + abs(G * rho) * (abs(pb) + abs(hb))
           + 0.5 * abs(Gb * G) * (abs(q) + abs(S) + abs(pb)) * abs(rho - rb))
    return 8.0 * EPS * mag


@njit
def phi_drho(kind, prm, rb, pb, Sb, beta, q, rho):
    G, dG, _, h, dh, _ = coeffs(kind, prm, rho)
    S = deviator(Sb, beta, rb, rho)
    dS = -(4.0 / 3.0) * beta / (rho * rho)
    if kind == MURNAGHAN:
        return dS - dh
    Gb, _, _, hb, _, _ = coeffs(kind, prm, rb)
    return (Gb * rb * (dS - dh) - (dG * rho + G) * (pb - hb)
            - 0.5 * Gb * (dS * G * (rho - rb) + (q + S + pb) * (dG * (rho - rb) + G)))


@njit
def chi(kind, prm, rb, pb, Sb, beta, q, rho):
    """Slope dq/drho of the Hugoniot locus; nan if the locus degenerates."""
    d = phi_drho(kind, prm, rb, pb, Sb, beta, q, rho)
    if kind == MURNAGHAN:
        return -d
    Gb, _, _, _, _, _ = coeffs(kind, prm, rb)
    G, _, _, _, _, _ = coeffs(kind, prm, rho)
    den = Gb * (2.0 * rb - G * (rho - rb))
    if den <= 0.0:
        return np.nan
    return -2.0 * d / den


@njit
def rho_max(kind, prm, rb):
    """Upper end of the density bracket for Hugoniot roots."""
    if kind == MURNAGHAN:
        return 100.0 * rb
    Gb, _, _, _, _, _ = coeffs(kind, prm, rb)
    if kind == POLYNOMIAL and prm[5] != prm[6]:
        B0, B1, r0 = prm[5], prm[6], prm[7]
        if B1 <= 0.0:
            return 100.0 * rb
        c = (B0 - B1) * r0
        b = 2.0 * rb + B1 * rb - c
        root = (b + math.sqrt(b * b + 4.0 * B1 * c * rb)) / (2.0 * B1)
        return root - 1e-9 * rb
    return rb * (Gb + 2.0) / Gb - 1e-9 * rb


@njit
def hugoniot_pressure(kind, prm, rb, pb, rho):
    """Closed-form pressure on the Hugoniot through (rb, pb) at density rho."""
    G, _, _, h, _, _ = coeffs(kind, prm, rho)
    if kind == MURNAGHAN:
        return h
    Gb, _, _, hb, _, _ = coeffs(kind, prm, rb)
    num = 2.0 * Gb * rb * h + 2.0 * G * rho * (pb - hb) + Gb * G * pb * (rho - rb)
    return num / (Gb * ((2.0 + G) * rb - G * rho))


@njit
def hugoniot_density(kind, prm, rb, pb, Sb, beta, q, offset, guess):
    """Root of ``offset + phi(q, rho)`` in (rb, rho_max).

    Safeguarded Newton: steps that leave the bracket are replaced by
    bisection.  Returns ``(rho, iterations, status)``.
    """
    qb = pb - Sb
    if q <= qb and offset == 0.0:
        return rb, 0, OK
    lo = rb
    hi = rho_max(kind, prm, rb)
    fhi = offset + phi(kind, prm, rb, pb, Sb, beta, q, hi)
    if not fhi < 0.0:
        return hi, 0, ERR_BRACKET
    flo = offset + phi(kind, prm, rb, pb, Sb, beta, q, lo)
    if flo <= 0.0:
        # q sits (to rounding) on the base state
        return rb, 0, OK
    rho = guess
    if not (lo < rho < hi):
        rho = 0.5 * (lo + hi)
    prev_abs = np.inf
    for it in range(HUG_MAXIT):
        f = offset + phi(kind, prm, rb, pb, Sb, beta, q, rho)
        if abs(f) <= phi_noise(kind, prm, rb, pb, Sb, beta, q, rho) + 8.0 * EPS * abs(offset):
            return rho, it + 1, OK
        if f > 0.0:
            lo = rho
        else:
            hi = rho
        d = phi_drho(kind, prm, rb, pb, Sb, beta, q, rho)
        af = abs(f)
        if d < 0.0 and af <= prev_abs:
            new = rho - f / d
        else:
            new = 0.5 * (lo + hi)
        if not (lo < new < hi):
            new = 0.5 * (lo + hi)
        prev_abs = af
        if abs(new - rho) <= 1e-14 * rho or hi - lo <= 4e-16 * hi:
            return new, it + 1, OK
        rho = new
    return rho, HUG_MAXIT, ERR_NEWTON


# ---------------------------------------------------------------- RKF45

@njit
def _rhs(mode, kind, prm, rb, Sb, beta, x, y0, y1):
    """Right-hand sides of the three ODE systems used on rarefaction curves.

    MODE_RARE: x = q,        y = (f, rho)
    MODE_VAC:  x = ln(rho),  y = (p, f)
    MODE_ISEN: x = rho,      y = (p, unused)
    """
    if mode == MODE_RARE:
        rho = y1
        if not rho > 0.0:
            return 0.0, 0.0, False
        p = x + deviator(Sb, beta, rb, rho)
        c2 = sound_speed_sq(kind, prm, rho, p)
        if not c2 > 0.0:
            return 0.0, 0.0, False
        C2 = c2 + (4.0 / 3.0) * beta / (rho * rho)
        return 1.0 / (rho * math.sqrt(C2)), 1.0 / C2, True
    if mode == MODE_VAC:
        rho = math.exp(x)
        c2 = sound_speed_sq(kind, prm, rho, y0)
        if not c2 > 0.0:
            return 0.0, 0.0, False
        C2 = c2 + (4.0 / 3.0) * beta / (rho * rho)
        return rho * c2, math.sqrt(C2), True
    rho = x
    if not rho > 0.0:
        return 0.0, 0.0, False
    c2 = sound_speed_sq(kind, prm, rho, y0)
    if not c2 > 0.0:
        return 0.0, 0.0, False
    return c2, 0.0, True


@njit
def rkf_step(mode, kind, prm, rb, Sb, beta, x, y0, y1, h):
    """One Fehlberg step; returns the 5th-order update and the error vector."""
    k10, k11, ok = _rhs(mode, kind, prm, rb, Sb, beta, x, y0, y1)
    if not ok:
        return y0, y1, 0.0, 0.0, False
    k20, k21, ok = _rhs(mode, kind, prm, rb, Sb, beta, x + C2_ * h,
                        y0 + h * A21 * k10, y1 + h * A21 * k11)
    if not ok:
        return y0, y1, 0.0, 0.0, False
    k30, k31, ok = _rhs(mode, kind, prm, rb, Sb, beta, x + C3_ * h,
                        y0 + h * (A31 * k10 + A32 * k20),
                        y1 + h * (A31 * k11 + A32 * k21))
    if not ok:
        return y0, y1, 0.0, 0.0, False
    k40, k41, ok = _rhs(mode, kind, prm, rb, Sb, beta, x + C4_ * h,
                        y0 + h * (A41 * k10 + A42 * k20 + A43 * k30),
                        y1 + h * (A41 * k11 + A42 * k21 + A43 * k31))
    if not ok:
        return y0, y1, 0.0, 0.0, False
    k50, k51, ok = _rhs(mode, kind, prm, rb, Sb, beta, x + C5_ * h,
                        y0 + h * (A51 * k10 + A52 * k20 + A53 * k30 + A54 * k40),
                        y1 + h * (A51 * k11 + A52 * k21 + A53 * k31 + A54 * k41))
    if not ok:
        return y0, y1, 0.0, 0.0, False
    k60, k61, ok = _rhs(mode, kind, prm, rb, Sb, beta, x + C6_ * h,
                        y0 + h * (A61 * k10 + A62 * k20 + A63 * k30 + A64 * k40
                                  + A65 * k50),
                        y1 + h * (A61 * k11 + A62 * k21 + A63 * k31 + A64 * k41
                                  + A65 * k51))
    if not ok:
        return y0, y1, 0.0, 0.0, False
    n0 = y0 + h * (B1_ * k10 + B3_ * k30 + B4_ * k40 + B5_ * k50 + B6_ * k60)
    n1 = y1 + h * (B1_ * k11 + B3_ * k31 + B4_ * k41 + B5_ * k51 + B6_ * k61)
    e0 = h * (E1_ * k10 + E3_ * k30 + E4_ * k40 + E5_ * k50 + E6_ * k60)
    e1 = h * (E1_ * k11 + E3_ * k31 + E4_ * k41 + E5_ * k51 + E6_ * k61)
    return n0, n1, e0, e1, True


@njit
def rkf_integrate(mode, kind, prm, rb, Sb, beta, x0, x1, y0, y1,
                  rtol, atol0, atol1, hmin):
    """Integrate from x0 to x1 (either direction) with step control.

    Returns ``(y0, y1, err0, status)`` where ``err0`` is ten times the sum of
    accepted embedded error estimates of the first component.
    """
    if x1 == x0:
        return y0, y1, 0.0, OK
    direction = 1.0 if x1 > x0 else -1.0
    h = (x1 - x0) / 64.0
    x = x0
    err = 0.0
    for _ in range(200000):
        remaining = x1 - x
        if direction * remaining <= 0.0:
            return y0, y1, 10.0 * err, OK
        last = False
        if direction * (h - remaining) >= 0.0:
            h = remaining
            last = True
        n0, n1, e0, e1, ok = rkf_step(mode, kind, prm, rb, Sb, beta, x, y0, y1, h)
        if not ok:
            h *= 0.25
            if abs(h) < hmin:
                return y0, y1, 10.0 * err, ERR_STEP
            continue
        s0 = atol0 + rtol * max(abs(y0), abs(n0))
        s1 = atol1 + rtol * max(abs(y1), abs(n1))
        en = max(abs(e0) / s0, abs(e1) / s1)
        if en <= 1.0:
            x = x1 if last else x + h
            y0 = n0
            y1 = n1
            err += abs(e0)
        if en == 0.0:
            fac = 5.0
        else:
            fac = min(5.0, max(0.2, 0.9 * en ** -0.2))
        if en > 1.0 or not last:
            h *= fac
        if abs(h) < hmin and direction * (x1 - x) > hmin:
            return y0, y1, 10.0 * err, ERR_STEP
    return y0, y1, 10.0 * err, ERR_STEP


@njit
def isentrope_pressure(kind, prm, rb, pb, rho, rtol):
    """Pressure at ``rho`` on the isentrope through (rb, pb)."""
    if kind == MURNAGHAN:
        _, _, _, h, _, _ = coeffs(kind, prm, rho)
        return h, OK
    _, _, _, hb, _, _ = coeffs(kind, prm, rb)
    atol = RKF_ATOL * (abs(pb) + abs(hb) + 1e-300)
    p, _, _, st = rkf_integrate(MODE_ISEN, kind, prm, rb, 0.0, 0.0, rb, rho, pb, 0.0,
                                rtol, atol, 1.0, 1e-14 * rb)
    return p, st


# ---------------------------------------------------------------- chains

@njit
def model_betas(model, rho):
    bE = model[4]
    if math.isnan(bE):
        bE = rho * model[0]
    bP = model[5]
    if math.isnan(bP):
        bP = rho * model[1]
    return bE, bP


@njit
def start_phase(load, se, sp):
    """Phase of the first segment; ``load`` is the deviator measured toward yield."""
    if not math.isinf(sp) and load >= sp * (1.0 - FLUID_TOL):
        return PH_F
    if not math.isinf(se) and load >= se * (1.0 - TIE):
        return PH_P
    return PH_E


@njit
def build_chain(kind, prm, model, rho, p, S, sign, rtol, out):
    """Fill ``out`` with the compression (sign=-1) or tension (sign=+1) chain.

    Returns ``(nseg, status, degenerate)``.
    """
    bE, bP = model_betas(model, rho)
    YE = model[2]
    YP = model[3]
    se = 2.0 * YE / 3.0
    sp = 2.0 * YP / 3.0
    phase = start_phase(sign * S, se, sp)
    rb, pb, Sb = rho, p, S
    n = 0
    degenerate = False
    for _ in range(NSEG):
        if phase == PH_E:
            beta, Y = bE, YE
        elif phase == PH_P:
            beta, Y = bP, YP
        else:
            beta, Y = 0.0, np.inf
        row = out[n]
        row[F_RB] = rb
        row[F_PB] = pb
        row[F_SB] = Sb
        row[F_QB] = pb - Sb
        row[F_BETA] = beta
        row[F_PHASE] = phase
        row[F_QEND] = -sign * np.inf
        row[F_REND] = np.nan
        row[F_PEND] = np.nan
        row[F_SEND] = np.nan
        row[F_WAY] = 0.0
        if math.isinf(Y) or (beta == 0.0 and phase == PH_E):
            return n + 1, OK, degenerate
        if beta == 0.0:
            # zero hardening modulus: the plastic stretch has zero length
            degenerate = True
            phase = PH_F
            continue
        r_lim = limit_rho(rb, Sb, beta, Y, sign)
        if math.isnan(r_lim):
            return n + 1, ERR_LIMIT, degenerate
        if sign < 0.0:
            p_lim = hugoniot_pressure(kind, prm, rb, pb, r_lim)
            st = OK
        else:
            p_lim, st = isentrope_pressure(kind, prm, rb, pb, r_lim, rtol)
        if st != OK or not math.isfinite(p_lim):
            # the cut-off is met before the yield limit: the segment never ends
            return n + 1, OK, degenerate
        S_lim = deviator(Sb, beta, rb, r_lim)
        q_lim = p_lim - S_lim
        row[F_QEND] = q_lim
        row[F_REND] = r_lim
        row[F_PEND] = p_lim
        row[F_SEND] = S_lim
        if sign < 0.0:
            row[F_WAY] = phi(kind, prm, rb, pb, Sb, beta, q_lim, r_lim)
        n += 1
        rb, pb, Sb = r_lim, p_lim, S_lim
        if phase == PH_E and sp > se:
            phase = PH_P
        else:
            phase = PH_F
    return n, OK, degenerate


@njit
def fluid_chain(rho, p, S, sign, out):
    """Single fluid segment (beta = 0); the pure Mie-Grueneisen wave curve."""
    row = out[0]
    row[F_RB] = rho
    row[F_PB] = p
    row[F_SB] = S
    row[F_QB] = p - S
    row[F_BETA] = 0.0
    row[F_PHASE] = PH_F
    row[F_QEND] = -sign * np.inf
    row[F_REND] = np.nan
    row[F_PEND] = np.nan
    row[F_SEND] = np.nan
    row[F_WAY] = 0.0
    return 1


# ---------------------------------------------------------------- branches

@njit
def _active(q, qend, sign):
    """True when q lies on the current segment (tie goes to the lower phase)."""
    if math.isinf(qend):
        return True
    if sign < 0.0:
        return q <= qend + TIE * abs(qend)
    return q >= qend - TIE * abs(qend)


@njit
def shock_eval(kind, prm, comp, ncomp, q):
    """Shock branch at q > q_k.

    Returns ``(F, dF, rho, S, seg, iters, status)``.
    """
    F = 0.0
    offset = 0.0
    for i in range(ncomp):
        row = comp[i]
        rb, pb, Sb, qb, beta = row[F_RB], row[F_PB], row[F_SB], row[F_QB], row[F_BETA]
        if i < ncomp - 1 and not _active(q, row[F_QEND], -1.0):
            F += math.sqrt((row[F_QEND] - qb) * (row[F_REND] - rb) / (row[F_REND] * rb))
            offset += row[F_WAY]
            continue
        x = chi(kind, prm, rb, pb, Sb, beta, qb, rb)
        guess = rb + (q - qb) / x if x > 0.0 else rb * 1.0001
        rho, its, st = hugoniot_density(kind, prm, rb, pb, Sb, beta, q, offset, guess)
        if st != OK:
            return F, np.nan, rho, np.nan, i, its, st
        dv = (rho - rb) / (rho * rb)
        Fi = math.sqrt(max(q - qb, 0.0) * dv)
        S = deviator(Sb, beta, rb, rho)
        xr = chi(kind, prm, rb, pb, Sb, beta, q, rho)
        if not xr > 0.0:
            return F + Fi, np.nan, rho, S, i, its, ERR_LOCUS
        if Fi > 0.0:
            dF = (dv + (q - qb) / (rho * rho * xr)) / (2.0 * Fi)
        else:
            dF = 1.0 / (rho * math.sqrt(xr))
        return F + Fi, dF, rho, S, i, its, OK
    return F, np.nan, np.nan, np.nan, ncomp - 1, 0, ERR_LIMIT


@njit
def _rare_slope(kind, prm, rb, Sb, beta, q, rho):
    p = q + deviator(Sb, beta, rb, rho)
    c2 = sound_speed_sq(kind, prm, rho, p)
    C2 = c2 + (4.0 / 3.0) * beta / (rho * rho)
    if not (c2 > 0.0 and C2 > 0.0):
        return np.nan
    return 1.0 / (rho * math.sqrt(C2))


@njit
def _rare_eval_log(kind, prm, tens, ntens, q, rtol):
    qq, f, rho, seg, err, st = vac_integrate(kind, prm, tens, ntens, rtol, q)
    row = tens[seg]
    rb, Sb, beta = row[F_RB], row[F_SB], row[F_BETA]
    S = deviator(Sb, beta, rb, rho)
    if st != OK:
        return f, np.nan, rho, S, err, seg, st
    return f, _rare_slope(kind, prm, rb, Sb, beta, q, rho), rho, S, err, seg, OK


@njit
def rare_eval(kind, prm, tens, ntens, q, rtol):
    """Rarefaction branch at q <= q_k by RKF45 integration in q.

    Returns ``(F, dF, rho, S, err, seg, status)``.
    """
    row = tens[0]
    rho_k = row[F_RB]
    q_k = row[F_QB]
    slope_k = _rare_slope(kind, prm, row[F_RB], row[F_SB], row[F_BETA], q_k, rho_k)
    if q >= q_k:
        return 0.0, slope_k, rho_k, row[F_SB], 0.0, 0, OK
    if math.isnan(slope_k):
        return 0.0, np.nan, rho_k, row[F_SB], 0.0, 0, ERR_NONHYP
    atol_f = RKF_ATOL * max((q_k - q) * slope_k, 1e-300)
    atol_r = RKF_ATOL * rho_k
    hmin = 1e-14 * abs(q_k) + 1e-30
    f = 0.0
    rho = rho_k
    err = 0.0
    qcur = q_k
    for i in range(ntens):
        row = tens[i]
        rb, Sb, beta, qend = row[F_RB], row[F_SB], row[F_BETA], row[F_QEND]
        final = i == ntens - 1 or _active(q, qend, 1.0)
        target = q if final else qend
        f, rho, e, st = rkf_integrate(MODE_RARE, kind, prm, rb, Sb, beta, qcur, target,
                                      f, rho, rtol, atol_f, atol_r, hmin)
        err += e
        if st == ERR_STEP:
            # close to the cut-off the integrand in q is singular; follow the
            # curve in ln(rho) instead
            return _rare_eval_log(kind, prm, tens, ntens, q, rtol)
        if st != OK:
            return f, np.nan, rho, deviator(Sb, beta, rb, rho), err, i, st
        if final:
            dF = _rare_slope(kind, prm, rb, Sb, beta, q, rho)
            return f, dF, rho, deviator(Sb, beta, rb, rho), err, i, OK
        qcur = qend
        rho = row[F_REND]
    return f, np.nan, rho, np.nan, err, ntens - 1, ERR_LIMIT


@njit
def branch_eval(kind, prm, comp, ncomp, tens, ntens, q, rtol):
    """Dispatch to the shock (q > q_k) or rarefaction branch.

    Returns ``(F, dF, rho, S, err, seg, shock, status)``.
    """
    q_k = comp[0, F_QB]
    if q > q_k:
        F, dF, rho, S, seg, _, st = shock_eval(kind, prm, comp, ncomp, q)
        return F, dF, rho, S, 0.0, seg, True, st
    F, dF, rho, S, err, seg, st = rare_eval(kind, prm, tens, ntens, q, rtol)
    return F, dF, rho, S, err, seg, False, st


# ---------------------------------------------------------------- cut-off

@njit
def _vac_scale(kind, prm, rho, p):
    if kind == MURNAGHAN:
        _, _, _, h, dh, _ = coeffs(kind, prm, rho)
        return abs(p) + abs(dh) * rho + 1e-300
    _, _, _, h, _, _ = coeffs(kind, prm, rho)
    return abs(p - h) + 1e-300


@njit
def _c2_terms(kind, prm, rho, p):
    """Magnitude of the terms that cancel in c^2."""
    g, dg, _, h, dh, _ = coeffs(kind, prm, rho)
    if kind == MURNAGHAN:
        return abs(dh)
    e = (p - h) / (g * rho)
    return abs((dg * rho + g) * e) + abs(dh) + abs(g * p / rho)


@njit
def _locate(kind, prm, rb, Sb, beta, s, p, f, h, q_stop):
    """Shrink a step from s until q(s + h') = q_stop; returns (s, p, f)."""
    a = 0.0
    b = h
    sa, pa, fa = s, p, f
    for _ in range(200):
        m = 0.5 * (a + b)
        n0, n1, _, _, ok = rkf_step(MODE_VAC, kind, prm, rb, Sb, beta, s, p, f, m)
        if not ok:
            b = m
            continue
        qm = n0 - deviator(Sb, beta, rb, math.exp(s + m))
        if qm > q_stop:
            a = m
            sa, pa, fa = s + m, n0, n1
        else:
            b = m
        if abs(b - a) <= 1e-15 * max(1.0, abs(s)):
            break
    return sa, pa, fa


@njit
def vac_integrate(kind, prm, tens, ntens, rtol, q_stop):
    """Follow the rarefaction curve in s = ln(rho).

    With ``q_stop = -inf`` the curve is followed to vanishing density (or to
    the point where c^2 stops being positive) and the cut-off stress q_min is
    returned together with f(q_min); an elastic tail makes both unbounded and
    returns ``-inf``.  With a finite ``q_stop`` integration stops where q
    crosses it.  Returns ``(q, f, rho, seg, err, status)``.
    """
    row = tens[0]
    rho_k = row[F_RB]
    s = math.log(rho_k)
    s_floor = s - 700.0
    p = row[F_PB]
    f = 0.0
    err = 0.0
    c2k = sound_speed_sq(kind, prm, rho_k, p)
    if not c2k > 0.0:
        return np.nan, np.nan, rho_k, 0, 0.0, ERR_NONHYP
    fscale = RKF_ATOL * math.sqrt(c2k + (4.0 / 3.0) * row[F_BETA] / (rho_k * rho_k))
    seeking = not math.isinf(q_stop)
    i = 0
    rb, Sb, beta = row[F_RB], row[F_SB], row[F_BETA]
    s_end = math.log(row[F_REND]) if ntens > 1 else -np.inf
    if not seeking and ntens == 1 and beta > 0.0:
        return -np.inf, -np.inf, 0.0, 0, 0.0, OK
    h = -0.05
    c_prev = np.nan
    g_prev = np.nan
    for _ in range(200000):
        at_end = False
        if s + h <= s_end:
            h = s_end - s
            at_end = True
        n0, n1, e0, e1, ok = rkf_step(MODE_VAC, kind, prm, rb, Sb, beta, s, p, f, h)
        if not ok:
            h *= 0.25
            if abs(h) < 1e-13:
                # c^2 reaches zero at positive density: this is the cut-off
                rho = math.exp(s)
                q = p - deviator(Sb, beta, rb, rho)
                if seeking:
                    return q, f, rho, i, 10.0 * err, ERR_BELOW_QMIN
                return q, f, rho, i, 10.0 * err, OK
            continue
        sp_ = rtol * max(_vac_scale(kind, prm, math.exp(s), p),
                         _vac_scale(kind, prm, math.exp(s + h), n0))
        sf_ = fscale + rtol * max(abs(f), abs(n1))
        en = max(abs(e0) / sp_, abs(e1) / sf_)
        if en <= 1.0:
            s_new = s_end if at_end else s + h
            rho = math.exp(s_new)
            q_new = n0 - deviator(Sb, beta, rb, rho)
            if seeking and q_new <= q_stop:
                s, p, f = _locate(kind, prm, rb, Sb, beta, s, p, f, h, q_stop)
                err += abs(e1)
                rho = math.exp(s)
                return p - deviator(Sb, beta, rb, rho), f, rho, i, 10.0 * err, OK
            s = s_new
            p = n0
            f = n1
            err += abs(e1)
            if at_end:
                i += 1
                row = tens[i]
                rb, Sb, beta = row[F_RB], row[F_SB], row[F_BETA]
                p = row[F_PB]
                s = math.log(rb)
                s_end = math.log(row[F_REND]) if i < ntens - 1 else -np.inf
                c_prev = np.nan
                if not seeking and i == ntens - 1 and beta > 0.0:
                    return -np.inf, -np.inf, 0.0, i, 10.0 * err, OK
                h = -0.05
                continue
            c2 = sound_speed_sq(kind, prm, rho, p)
            if not c2 > 0.0:
                q = p - deviator(Sb, beta, rb, rho)
                if seeking:
                    return q, f, rho, i, 10.0 * err, ERR_BELOW_QMIN
                return q, f, rho, i, 10.0 * err, OK
            c = math.sqrt(c2 + (4.0 / 3.0) * beta / (rho * rho))
            g = rho * c2
            if i == ntens - 1 and not math.isnan(c_prev):
                k = (math.log(c_prev) - math.log(c)) / (-h)
                kq = (math.log(g_prev) - math.log(g)) / (-h)
                tail = c / k if k > 0.0 else np.inf
                # once c^2 is dominated by rounding of its cancelling terms
                # the curve can no longer be followed: extrapolate the tail
                noisy = c2 <= 1e-7 * _c2_terms(kind, prm, rho, p)
                if noisy and not k > 1e-3:
                    if seeking:
                        return q_new, f, rho, i, 10.0 * err, ERR_BELOW_QMIN
                    return -np.inf, -np.inf, rho, i, 10.0 * err, OK
                if not seeking and k > 1e-3 and (tail <= 1e-13 * abs(f) or s <= s_floor
                                                 or noisy):
                    qtail = g / kq if kq > 0.0 else 0.0
                    return (p - qtail - deviator(Sb, beta, rb, rho), f - tail, rho, i,
                            10.0 * err, OK)
                if s <= s_floor:
                    if seeking:
                        return q_new, f, rho, i, 10.0 * err, ERR_BELOW_QMIN
                    return -np.inf, -np.inf, rho, i, 10.0 * err, OK
            c_prev = c
            g_prev = g
        if en == 0.0:
            fac = 5.0
        else:
            fac = min(5.0, max(0.2, 0.9 * en ** -0.2))
        h = max(h * fac, -2.0)
    return np.nan, np.nan, math.exp(s), i, 10.0 * err, ERR_STEP


@njit
def cutoff(kind, prm, tens, ntens, rtol):
    """Cut-off stress q_min and f(q_min); ``(q_min, f_min, status)``."""
    q, f, _, _, _, st = vac_integrate(kind, prm, tens, ntens, rtol, -np.inf)
    return q, f, st
