"""Vectorized numpy implementation of the scalar geodesy kernels.

Functional twin of the compiled module `_ccgeo`; selected at import time when
the extension is unavailable (or forced via HEISGEO_BACKEND=numpy). All
functions take and return contiguous float64 1-d arrays.

Numerical notes, shared verbatim with the compiled backend:
  * 1 - cos(tau) is evaluated as 2 sin^2(tau/2), which is accurate for every
    tau including near 2 pi where the naive form cancels.
  * tau - sin(tau) and tau sin(tau) - 2(1 - cos(tau)) lose all significant
    digits near 0; below |tau| = 0.1 both switch to Taylor series whose
    truncation error sits under 1e-15 relative.
  * the ratio equation f(tau) = (1 - cos tau)/(tau - sin tau) behaves like
    3/tau for small tau, so ratios >= 1e7 short-circuit to tau = 3/ratio
    (relative error tau^2/30 <= 3e-15 there).
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi
SERIES_CUT = 0.1
RATIO_ASYMPTOTIC = 1.0e7
_BISECT_LO = 1.0e-8


def omc(tau: np.ndarray) -> np.ndarray:
    """1 - cos(tau), cancellation-free."""
    s = np.sin(0.5 * tau)
    return 2.0 * s * s


def w_sin(tau: np.ndarray) -> np.ndarray:
    """tau - sin(tau) with a series branch below |tau| = 0.1."""
    tau = np.asarray(tau, dtype=np.float64)
    out = np.empty_like(tau)
    small = np.abs(tau) < SERIES_CUT
    ts = tau[small]
    t2 = ts * ts
    out[small] = (ts * t2 / 6.0) * (
        1.0
        - t2 / 20.0
        + t2 * t2 / 840.0
        - t2 * t2 * t2 / 60480.0
        + t2 * t2 * t2 * t2 / 6652800.0
    )
    tl = tau[~small]
    out[~small] = tl - np.sin(tl)
    return out


def d_jac(tau: np.ndarray) -> np.ndarray:
    """D(tau) = tau sin(tau) - 2 (1 - cos(tau)), series below |tau| = 0.1.

    D < 0 on (0, 2 pi) and D ~ -tau^4/12 near 0.
    """
    tau = np.asarray(tau, dtype=np.float64)
    out = np.empty_like(tau)
    small = np.abs(tau) < SERIES_CUT
    ts = tau[small]
    t2 = ts * ts
    out[small] = (-t2 * t2 / 12.0) * _d_bracket(t2)
    tl = tau[~small]
    out[~small] = tl * np.sin(tl) - 2.0 * omc(tl)
    return out


def _d_bracket(t2: np.ndarray) -> np.ndarray:
    # (tau sin tau - 2(1-cos tau)) / (-tau^4/12) = 1 - tau^2/15 + ...
    return (
        1.0
        - t2 / 15.0
        + t2 * t2 / 560.0
        - t2 * t2 * t2 / 37800.0
        + t2 * t2 * t2 * t2 / 3991680.0
    )


def f_tau(tau: np.ndarray) -> np.ndarray:
    """f(tau) = (1 - cos tau)/(tau - sin tau); f(0) = +inf by its limit."""
    tau = np.asarray(tau, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = omc(tau) / w_sin(tau)
    return np.where(tau == 0.0, np.inf, out)


def solve_tau(ratio: np.ndarray) -> np.ndarray:
    """Solve f(tau) = ratio for tau in [0, 2 pi], elementwise.

    ratio = +inf maps to 0, ratio = 0 maps to 2 pi. Bisection on the strictly
    decreasing f cannot leave the bracket; iteration stops when the midpoint
    stops moving (adjacent doubles).
    """
    r = np.asarray(ratio, dtype=np.float64)
    out = np.empty_like(r)
    inf_mask = np.isinf(r)
    out[inf_mask] = 0.0
    zero_mask = r <= 0.0
    out[zero_mask] = TWO_PI
    big = (r >= RATIO_ASYMPTOTIC) & ~inf_mask
    out[big] = 3.0 / r[big]

    todo = ~(inf_mask | zero_mask | big)
    rv = r[todo]
    n = rv.size
    if n:
        a = np.full(n, _BISECT_LO)
        b = np.full(n, TWO_PI)
        live = np.ones(n, dtype=bool)
        for _ in range(120):
            mid = 0.5 * (a + b)
            live &= (mid > a) & (mid < b)
            if not live.any():
                break
            go_right = live & (f_tau(mid) > rv)
            a = np.where(go_right, mid, a)
            b = np.where(live & ~go_right, mid, b)
        out[todo] = 0.5 * (a + b)
    return out


def cc_norm(z2: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Carnot-Caratheodory distance from the origin of the point with
    squared horizontal radius z2 and vertical coordinate t (any H^m)."""
    z2 = np.asarray(z2, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    at = np.abs(t)
    out = np.sqrt(z2)
    vertical = at > 0.0
    if np.any(vertical):
        z2v = z2[vertical]
        atv = at[vertical]
        tau = solve_tau(z2v / atv)
        out[vertical] = tau * np.sqrt(atv / (2.0 * w_sin(tau)))
    return out


def contract_jacobian(tau: np.ndarray, sbar: float) -> np.ndarray:
    """det of the contraction Jacobian: sbar * D(sbar tau)/D(tau).

    Even in tau; for |tau| < 0.1 the tau^4 factor is cancelled analytically,
    which makes the tau -> 0 limit sbar^5 exact.
    """
    tau = np.abs(np.asarray(tau, dtype=np.float64))
    sbar = float(sbar)
    out = np.empty_like(tau)
    small = tau < SERIES_CUT
    t2 = tau[small] ** 2
    s2 = (sbar * sbar) * t2
    out[small] = sbar**5 * _d_bracket(s2) / _d_bracket(t2)
    tl = tau[~small]
    out[~small] = sbar * d_jac(sbar * tl) / d_jac(tl)
    return out


def chart_jacobian(phi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """det of the spherical-chart Jacobian: -4 D(phi rho)/phi^4.

    Independent of theta; positive for 0 < |phi rho| < 2 pi; continuous
    limit rho^4/3 as phi -> 0. (Differentiating the chart gives -4D, not
    +4D: D < 0 on (0, 2 pi) while the chart preserves orientation.)
    """
    phi = np.asarray(phi, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    tau = phi * rho
    out = np.empty_like(tau)
    small = np.abs(tau) < SERIES_CUT
    t2 = tau[small] ** 2
    out[small] = (rho[small] ** 4 / 3.0) * _d_bracket(t2)
    tl = tau[~small]
    out[~small] = -4.0 * d_jac(tl) / phi[~small] ** 4
    return out
