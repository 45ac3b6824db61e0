"""Extended-precision internals for the geodesic chart pipeline.

Chart inversion followed by evaluation at s = 1 must reproduce the endpoint
to within 1e-9 in the gauge distance. Because the gauge takes a fourth root
of the squared vertical component, double rounding noise of order
ulp(|t|) ~ 1e-15 alone already costs ~1e-7 of gauge distance, so the chart
parameters are computed and evaluated here in 170-bit MPFR and rounded to
doubles only on output; roundtrips then reproduce endpoint bits exactly.

Only construction and pointwise evaluation live here. Distance kernels,
Jacobians and scans stay in the float64 backends.
"""

from __future__ import annotations

import gmpy2 as g
from gmpy2 import mpfr

PRECISION = 170

_W_SERIES_CUT = 1e-5


def context():
    """Fresh computation context; use as `with context():`."""
    return g.context(precision=PRECISION)


def _omc(t):
    # 1 - cos(t); no cancellation in this form at full precision
    s = g.sin(t / 2)
    return 2 * s * s


def _w_sin(t):
    # t - sin(t); series below 1e-5 where direct subtraction would lose
    # ~10 of the 51 digits
    if abs(t) < _W_SERIES_CUT:
        t2 = t * t
        return (t * t2 / 6) * (1 - t2 / 20 + t2 * t2 / 840 - t2 * t2 * t2 / 60480)
    return t - g.sin(t)


def solve_tau(ratio, seed: float):
    """Root of (1 - cos tau) - ratio (tau - sin tau) = 0 in (0, 2 pi].

    `seed` is a float64 solution (relative error ~1e-15); four Newton steps
    take it to ~1e-50. A zero seed means the float64 path over/underflowed
    (gigantic ratio); tau = 3/ratio is then already in Newton's basin.
    """
    if ratio == 0:
        return 2 * g.const_pi()
    tau = mpfr(seed) if seed > 0 else 3 / ratio
    two_pi = 2 * g.const_pi()
    for _ in range(4):
        h = _omc(tau) - ratio * _w_sin(tau)
        hp = g.sin(tau) - ratio * _omc(tau)
        if hp == 0:
            break
        step = tau - h / hp
        if 0 < step < two_pi:
            tau = step
    return tau


def chart_from_origin(x, y, t):
    """MPFR chart (A, B, rho, tau) of the geodesic from the origin to
    (x, y, t). Inputs are floats or mpfr values (lists for x, y)."""
    from . import _kernels  # float64 seed for the Newton polish

    X = [mpfr(v) for v in x]
    Y = [mpfr(v) for v in y]
    T = mpfr(t)
    z2 = sum(v * v for v in X) + sum(v * v for v in Y)
    if T == 0:
        rho = g.sqrt(z2)
        A = [-v / rho for v in Y]
        B = [v / rho for v in X]
        return A, B, rho, mpfr(0)
    if z2 == 0:
        tau = 2 * g.const_pi() if T > 0 else -2 * g.const_pi()
        rho = g.sqrt(g.const_pi() * abs(T))
        m = len(X)
        A = [mpfr(1)] + [mpfr(0)] * (m - 1)
        B = [mpfr(0)] * m
        return A, B, rho, tau
    ratio = z2 / abs(T)
    seed = float(_kernels.solve_tau(float(ratio)))
    tau = solve_tau(ratio, seed)
    if T < 0:
        tau = -tau
    at = abs(tau)
    rho = at * g.sqrt(abs(T) / (2 * _w_sin(at)))
    # per-index 2x2 system: (x_i, y_i) = [[c, s], [-s, c]] (A_i, B_i)
    # with c = (cos tau - 1)/phi, s = sin(tau)/phi, phi = tau/rho
    c = -_omc(tau) * rho / tau
    s = g.sin(tau) * rho / tau
    den = c * c + s * s  # equals |z0|^2; normalizes A, B to unit speed
    A = [(c * xi - s * yi) / den for xi, yi in zip(X, Y)]
    B = [(s * xi + c * yi) / den for xi, yi in zip(X, Y)]
    return A, B, rho, tau


def eval_chart(A, B, rho, tau, s):
    """Evaluate the chart at parameter s; returns float64 coordinate lists."""
    s = mpfr(s)
    if tau == 0:
        sr = s * rho
        x = [float(b * sr) for b in B]
        y = [float(-a * sr) for a in A]
        return x, y, 0.0
    st = s * tau
    c1 = -_omc(st) * rho / tau  # (cos(s tau) - 1)/phi
    s1 = g.sin(st) * rho / tau  # sin(s tau)/phi
    x = [float(a * c1 + b * s1) for a, b in zip(A, B)]
    y = [float(b * c1 - a * s1) for a, b in zip(A, B)]
    t = float(2 * rho * rho * _w_sin(st) / (tau * tau))
    return x, y, t


def translate_eval(px, py, pt, A, B, rho, tau, s):
    """Left-translate the chart evaluation by p = (px, py, pt), in MPFR."""
    s = mpfr(s)
    PX = [mpfr(v) for v in px]
    PY = [mpfr(v) for v in py]
    PT = mpfr(pt)
    if tau == 0:
        sr = s * rho
        wx = [b * sr for b in B]
        wy = [-a * sr for a in A]
        wt = mpfr(0)
    else:
        st = s * tau
        c1 = -_omc(st) * rho / tau
        s1 = g.sin(st) * rho / tau
        wx = [a * c1 + b * s1 for a, b in zip(A, B)]
        wy = [b * c1 - a * s1 for a, b in zip(A, B)]
        wt = 2 * rho * rho * _w_sin(st) / (tau * tau)
    tw = sum(yi * xj - xi * yj for xi, yi, xj, yj in zip(PX, PY, wx, wy))
    x = [float(a + b) for a, b in zip(PX, wx)]
    y = [float(a + b) for a, b in zip(PY, wy)]
    t = float(PT + wt + 2 * tw)
    return x, y, t


def group_diff(px, py, pt, qx, qy, qt):
    """p^{-1} q in MPFR from float64 coordinates; exact products."""
    PX = [mpfr(v) for v in px]
    PY = [mpfr(v) for v in py]
    QX = [mpfr(v) for v in qx]
    QY = [mpfr(v) for v in qy]
    wx = [b - a for a, b in zip(PX, QX)]
    wy = [b - a for a, b in zip(PY, QY)]
    tw = sum(yi * xj - xi * yj for xi, yi, xj, yj in zip(PX, PY, QX, QY))
    wt = mpfr(qt) - mpfr(pt) - 2 * tw
    return wx, wy, wt
