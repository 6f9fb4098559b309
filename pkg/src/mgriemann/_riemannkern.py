"""Inexact Newton iteration on the stress function f(q) = f_l + f_r + u_r - u_l."""

import math

import numpy as np

from ._eoskern import sound_speed_sq
from ._jit import njit
from ._wavekern import (
    ERR_ITER, ERR_VACUUM, F_QB, NF, NSEG, OK, branch_eval, build_chain, cutoff,
    fluid_chain,
)

RTOL0 = 1e-10
RTOL_FLOOR = 1e-12

# layout of the result vector returned by ``solve``
R_Q = 0
R_U = 1
R_FL = 2
R_FR = 3
R_RHOL = 4
R_SL = 5
R_RHOR = 6
R_SR = 7
R_ITERS = 8
R_RESID = 9
R_STATUS = 10
R_MARGIN = 11
R_QMIN = 12
R_DFL = 13
R_DFR = 14
R_SEGL = 15
R_SEGR = 16
R_RTOL = 17
NRES = 18


@njit
def prepare_side(kind, prm, model, rho, p, S, rtol, fluid):
    comp = np.zeros((NSEG, NF))
    tens = np.zeros((NSEG, NF))
    if fluid:
        nc = fluid_chain(rho, p, S, -1.0, comp)
        nt = fluid_chain(rho, p, S, 1.0, tens)
        return comp, nc, tens, nt, OK
    nc, st, _ = build_chain(kind, prm, model, rho, p, S, -1.0, rtol, comp)
    if st != OK:
        return comp, nc, tens, 0, st
    nt, st, _ = build_chain(kind, prm, model, rho, p, S, 1.0, rtol, tens)
    return comp, nc, tens, nt, st


@njit
def vacuum(kl, pl, cl, ncl, tl, ntl, kr, pr, cr, ncr, tr, ntr, du, rtol):
    """Returns ``(margin, q_min, status)``; admissible iff margin > 0."""
    qml, fml, st = cutoff(kl, pl, tl, ntl, rtol)
    if st != OK:
        return np.nan, np.nan, st
    qmr, fmr, st = cutoff(kr, pr, tr, ntr, rtol)
    if st != OK:
        return np.nan, np.nan, st
    if math.isinf(qml) and math.isinf(qmr):
        return np.inf, -np.inf, OK
    if qml >= qmr:
        q_min = qml
        if math.isinf(fml):
            return np.inf, q_min, OK
        F2, _, _, _, _, _, _, st = branch_eval(kr, pr, cr, ncr, tr, ntr, q_min, rtol)
        if st != OK:
            return np.nan, q_min, st
        return -(fml + F2 + du), q_min, OK
    q_min = qmr
    if math.isinf(fmr):
        return np.inf, q_min, OK
    F1, _, _, _, _, _, _, st = branch_eval(kl, pl, cl, ncl, tl, ntl, q_min, rtol)
    if st != OK:
        return np.nan, q_min, st
    return -(F1 + fmr + du), q_min, OK


@njit
def initial_guess(kl, pl, rho_l, u_l, p_l, q_l, kr, pr, rho_r, u_r, p_r, q_r):
    zl = rho_l * math.sqrt(sound_speed_sq(kl, pl, rho_l, p_l))
    zr = rho_r * math.sqrt(sound_speed_sq(kr, pr, rho_r, p_r))
    return (zl * q_r + zr * q_l + zl * zr * (u_l - u_r)) / (zl + zr)


@njit
def solve(kl, pl, cl, ncl, tl, ntl, u_l, kr, pr, cr, ncr, tr, ntr, u_r,
          eps0, max_iter, trace, full_check):
    """Safeguarded inexact Newton iteration.

    ``trace`` (max_iter x 2) receives (q_n, f(q_n)).  Returns a result vector
    indexed by the ``R_*`` constants.

    With ``full_check`` the cut-off stresses are always integrated and the
    vacuum margin is reported.  Otherwise f is first evaluated at
    min(q_l, q_r); when it is already negative the problem is admissible and
    that stress is a valid lower bracket, so the (comparatively expensive)
    cut-off integration is skipped and the margin is left as nan.
    """
    res = np.full(NRES, np.nan)
    rho_l, p_l, q_l = cl[0, 0], cl[0, 1], cl[0, F_QB]
    rho_r, p_r, q_r = cr[0, 0], cr[0, 1], cr[0, F_QB]
    du = u_r - u_l
    rtol = RTOL0
    lo = np.nan
    q_min = np.nan
    if not full_check:
        q_lo = min(q_l, q_r)
        F1, _, _, _, _, _, _, st = branch_eval(kl, pl, cl, ncl, tl, ntl, q_lo, rtol)
        if st == OK:
            F2, _, _, _, _, _, _, st = branch_eval(kr, pr, cr, ncr, tr, ntr, q_lo, rtol)
            if st == OK and F1 + F2 + du < 0.0:
                lo = q_lo
    if math.isnan(lo):
        margin, q_min, st = vacuum(kl, pl, cl, ncl, tl, ntl, kr, pr, cr, ncr, tr, ntr,
                                   du, rtol)
        res[R_MARGIN] = margin
        res[R_QMIN] = q_min
        if st != OK:
            res[R_STATUS] = st
            return res
        if not margin > 0.0:
            res[R_STATUS] = ERR_VACUUM
            return res
        lo = q_min
    p_scale = max(abs(q_l), abs(q_r), 1.0)
    q = initial_guess(kl, pl, rho_l, u_l, p_l, q_l, kr, pr, rho_r, u_r, p_r, q_r)
    if not q > lo:
        if math.isnan(q_min):
            q = lo
        else:
            q = q_min + 0.05 * (min(q_l, q_r) - q_min)
    hi = np.inf
    Fl = dFl = rl = Sl = 0.0
    Fr = dFr = rr = Sr = 0.0
    sgl = sgr = 0
    converged = False
    n = 0
    for n in range(max_iter):
        for _ in range(4):
            Fl, dFl, rl, Sl, el, sgl, _, st = branch_eval(kl, pl, cl, ncl, tl, ntl, q, rtol)
            if st != OK:
                break
            Fr, dFr, rr, Sr, er, sgr, _, st = branch_eval(kr, pr, cr, ncr, tr, ntr, q, rtol)
            if st != OK:
                break
            fq = Fl + Fr + du
            budget = max(0.01 * abs(fq), 1e-13 * (abs(Fl) + abs(Fr)))
            if el + er <= budget or rtol <= RTOL_FLOOR:
                break
            rtol = max(rtol * 0.1, RTOL_FLOOR)
        if st != OK:
            res[R_STATUS] = st
            res[R_Q] = q
            res[R_ITERS] = n
            return res
        fq = Fl + Fr + du
        trace[n, 0] = q
        trace[n, 1] = fq
        if fq > 0.0:
            hi = q
        elif fq < 0.0:
            lo = q
        if fq == 0.0:
            converged = True
            break
        d = dFl + dFr
        qn = q - fq / d if d > 0.0 else np.nan
        tol = eps0 * (abs(qn) + p_scale)
        if abs(qn - q) <= tol and qn >= lo - tol and qn <= hi + tol:
            # converged Newton step (it may touch the bracket end it came from)
            q = qn
            converged = True
            break
        if not (qn > lo and qn < hi):
            if not (math.isinf(hi) or math.isinf(lo)):
                qn = 0.5 * (lo + hi)
            elif not math.isfinite(qn):
                res[R_STATUS] = ERR_ITER
                res[R_Q] = q
                res[R_ITERS] = n + 1
                return res
        if abs(qn - q) <= eps0 * (abs(qn) + p_scale):
            q = qn
            converged = True
            break
        q = qn
    iters = n + 1
    if not converged:
        res[R_STATUS] = ERR_ITER
        res[R_Q] = q
        res[R_ITERS] = iters
        return res
    # re-evaluate at the converged stress
    Fl, dFl, rl, Sl, _, sgl, _, st = branch_eval(kl, pl, cl, ncl, tl, ntl, q, rtol)
    if st == OK:
        Fr, dFr, rr, Sr, _, sgr, _, st = branch_eval(kr, pr, cr, ncr, tr, ntr, q, rtol)
    res[R_Q] = q
    res[R_U] = 0.5 * (u_l + u_r + Fr - Fl)
    res[R_FL] = Fl
    res[R_FR] = Fr
    res[R_RHOL] = rl
    res[R_SL] = Sl
    res[R_RHOR] = rr
    res[R_SR] = Sr
    res[R_ITERS] = iters
    res[R_RESID] = Fl + Fr + du
    res[R_STATUS] = st
    res[R_DFL] = dFl
    res[R_DFR] = dFr
    res[R_SEGL] = sgl
    res[R_SEGR] = sgr
    res[R_RTOL] = rtol
    return res


@njit
def interface_solve(kl, pl, ml, rho_l, u_l, p_l, S_l, kr, pr, mr, rho_r, u_r, p_r, S_r,
                    eps0, max_iter):
    """Chain construction plus solve in one call (used by the simulator)."""
    cl, ncl, tl, ntl, st = prepare_side(kl, pl, ml, rho_l, p_l, S_l, RTOL0, False)
    res = np.full(NRES, np.nan)
    if st != OK:
        res[R_STATUS] = st
        return res
    cr, ncr, tr, ntr, st = prepare_side(kr, pr, mr, rho_r, p_r, S_r, RTOL0, False)
    if st != OK:
        res[R_STATUS] = st
        return res
    trace = np.zeros((max_iter, 2))
    return solve(kl, pl, cl, ncl, tl, ntl, u_l, kr, pr, cr, ncr, tr, ntr, u_r,
                 eps0, max_iter, trace, False)
