"""Independent reference solutions used by the test-suite.

Nothing here imports the package under test.

* ``ExactIdealGas``: classic exact Riemann solver for two ideal gases with
  the same gamma (pressure-function Newton iteration, then self-similar
  sampling of the fan).
  Passing ``p_inf`` handles stiffened gases through the shift
  p -> p + p_inf.
* ``bisect``: plain bisection used to check Newton-based roots.
"""

import math

import numpy as np


class ExactIdealGas:
    def __init__(self, rho_l, u_l, p_l, rho_r, u_r, p_r, gamma=1.4, p_inf=0.0,
                 tol=1e-15, max_iter=200):
        self.g = gamma
        self.pinf = p_inf
        self.L = (rho_l, u_l, p_l + p_inf)
        self.R = (rho_r, u_r, p_r + p_inf)
        self.cl = math.sqrt(gamma * self.L[2] / rho_l)
        self.cr = math.sqrt(gamma * self.R[2] / rho_r)
        self._solve(tol, max_iter)

    # pressure function of one side and its derivative
    def _f(self, p, side):
        g = self.g
        rho, _, pk = side
        c = math.sqrt(g * pk / rho)
        if p > pk:
            A = 2.0 / ((g + 1.0) * rho)
            B = (g - 1.0) / (g + 1.0) * pk
            s = math.sqrt(A / (p + B))
            return (p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (B + p))
        r = p / pk
        f = 2.0 * c / (g - 1.0) * (r ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = 1.0 / (rho * c) * r ** (-(g + 1.0) / (2.0 * g))
        return f, df

    def _solve(self, tol, max_iter):
        du = self.R[1] - self.L[1]
        g = self.g
        if 2.0 * (self.cl + self.cr) / (g - 1.0) <= du:
            raise ValueError("vacuum")
        # two-rarefaction start
        z = (g - 1.0) / (2.0 * g)
        p = ((self.cl + self.cr - 0.5 * (g - 1.0) * du)
             / (self.cl / self.L[2] ** z + self.cr / self.R[2] ** z)) ** (1.0 / z)
        p = max(p, 1e-300)
        self.iterations = 0
        for it in range(max_iter):
            fl, dl = self._f(p, self.L)
            fr, dr = self._f(p, self.R)
            pn = p - (fl + fr + du) / (dl + dr)
            if pn <= 0.0:
                pn = 0.5 * p
            self.iterations = it + 1
            if abs(pn - p) <= tol * 0.5 * (pn + p):
                p = pn
                break
            p = pn
        fl, _ = self._f(p, self.L)
        fr, _ = self._f(p, self.R)
        self.p_star_shifted = p
        self.p_star = p - self.pinf
        self.u_star = 0.5 * (self.L[1] + self.R[1]) + 0.5 * (fr - fl)

    def _side_star(self, side, sign):
        g = self.g
        rho, u, pk = side
        p = self.p_star_shifted
        c = math.sqrt(g * pk / rho)
        if p > pk:
            r = p / pk
            gm = (g - 1.0) / (g + 1.0)
            rho_s = rho * (r + gm) / (gm * r + 1.0)
            S = u + sign * c * math.sqrt((g + 1.0) / (2.0 * g) * r + (g - 1.0) / (2.0 * g))
            return rho_s, ("shock", S)
        rho_s = rho * (p / pk) ** (1.0 / g)
        cs = c * (p / pk) ** ((g - 1.0) / (2.0 * g))
        return rho_s, ("rarefaction", u + sign * c, self.u_star + sign * cs)

    @property
    def rho_star(self):
        return self._side_star(self.L, -1.0)[0], self._side_star(self.R, 1.0)[0]

    def sample(self, xi):
        """(rho, u, p) at similarity coordinate xi = (x - x0) / t."""
        xi = np.atleast_1d(np.asarray(xi, float))
        out = np.empty((3, xi.size))
        g = self.g
        for k, s in enumerate(xi):
            if s <= self.u_star:
                side, sign = self.L, -1.0
            else:
                side, sign = self.R, 1.0
            rho, u, pk = side
            c = math.sqrt(g * pk / rho)
            rho_s, wave = self._side_star(side, sign)
            if wave[0] == "shock":
                beyond = (s < wave[1]) if sign < 0 else (s > wave[1])
                val = (rho, u, pk) if beyond else (rho_s, self.u_star, self.p_star_shifted)
            else:
                head, tail = wave[1], wave[2]
                if (s <= head) if sign < 0 else (s >= head):
                    val = (rho, u, pk)
                elif (s >= tail) if sign < 0 else (s <= tail):
                    val = (rho_s, self.u_star, self.p_star_shifted)
                else:
                    if sign < 0:
                        cc = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * (u - s))
                        uu = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * u + s)
                    else:
                        cc = 2.0 / (g + 1.0) * (c - 0.5 * (g - 1.0) * (u - s))
                        uu = 2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * u + s)
                    rr = rho * (cc / c) ** (2.0 / (g - 1.0))
                    val = (rr, uu, pk * (cc / c) ** (2.0 * g / (g - 1.0)))
            out[:, k] = val
        out[2] -= self.pinf
        return out


def bisect(f, lo, hi, rtol=1e-14, max_iter=400):
    """Root of f on [lo, hi] by bisection only (f(lo) < 0 < f(hi))."""
    flo = f(lo)
    fhi = f(hi)
    if not (flo < 0.0 < fhi):
        raise ValueError(f"no sign change: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def cell_average_exact(exact, faces, t, x0, nsub=16):
    """Cell averages of the exact density (midpoint rule on sub-cells)."""
    a, b = faces[:-1], faces[1:]
    h = (b - a) / nsub
    acc = np.zeros(a.size)
    for k in range(nsub):
        x = a + (k + 0.5) * h
        acc += exact.sample((x - x0) / t)[0]
    return acc / nsub
