"""Closed-form Carnot-Caratheodory geodesics of H^m.

The unit-speed geodesic from the origin with chart (A, B, phi, rho) is

    x_i(s) = [A_i (cos(s phi rho) - 1) + B_i sin(s phi rho)] / phi
    y_i(s) = [B_i (cos(s phi rho) - 1) - A_i sin(s phi rho)] / phi
    t(s)   = 2 (s phi rho - sin(s phi rho)) / phi^2

for s in [0, 1], with sum_i (A_i^2 + B_i^2) = 1 and |phi rho| <= 2 pi; the
phi -> 0 limit is the straight horizontal line. For an endpoint g0 = (z0, t0)
the angle tau = phi rho solves

    (1 - cos tau)/(tau - sin tau) = |z0|^2 / t0,

with tau = 0 when t0 = 0, |tau| = 2 pi when z0 = 0, sign(tau) = sign(t0),
and rho = sqrt(tau^2 t0 / (2 (tau - sin tau))) (rho = |z0| when t0 = 0).
Geodesics between arbitrary points left-translate this chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, _mp
from .errors import DimensionMismatchError, PreconditionError
from .group import HPoint, group_inv, group_mul

TWO_PI = 2.0 * math.pi


def solve_tau(ratio: float, sign: int = 1) -> float:
    """Solve (1 - cos tau)/(tau - sin tau) = ratio for tau in [-2 pi, 2 pi].

    ratio must be >= 0 (math.inf allowed: returns 0); the result carries
    `sign`, the sign of the vertical coordinate of the endpoint.
    """
    ratio = float(ratio)
    if math.isnan(ratio) or ratio < 0.0:
        raise PreconditionError(f"ratio must be >= 0, got {ratio}")
    if sign not in (-1, 1):
        raise PreconditionError(f"sign must be +1 or -1, got {sign}")
    return sign * float(_kernels.solve_tau(ratio))


@dataclass(frozen=True)
class GeodesicChart:
    """Chart (A, B, phi, rho) of a unit-speed geodesic from the origin.

    tau = phi rho is stored explicitly; phi = 0 encodes the straight-line
    chart. Instances built by `geodesic_from_origin` carry extended-precision
    shadow parameters used by `eval_geodesic` (evaluations then reproduce the
    endpoint to the last bit); hand-built charts evaluate in float64.
    """

    A: np.ndarray
    B: np.ndarray
    phi: float
    rho: float
    tau: float
    _mp_state: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        A = np.atleast_1d(np.asarray(self.A, dtype=float)).copy()
        B = np.atleast_1d(np.asarray(self.B, dtype=float)).copy()
        if A.shape != B.shape or A.ndim != 1:
            raise DimensionMismatchError("A and B must be 1-d arrays of equal length")
        speed = float(A @ A + B @ B)
        if not math.isfinite(speed) or abs(speed - 1.0) > 1e-9:
            raise PreconditionError(f"chart is not unit speed: sum A^2+B^2 = {speed}")
        rho = float(self.rho)
        phi = float(self.phi)
        tau = float(self.tau)
        if not (rho > 0.0) or not math.isfinite(rho):
            raise PreconditionError(f"rho must be positive, got {rho}")
        if abs(tau) > TWO_PI * (1 + 1e-12):
            raise PreconditionError(f"|tau| must be <= 2 pi, got {tau}")
        if abs(phi * rho - tau) > 1e-9 * max(1.0, abs(tau)):
            raise PreconditionError("tau must equal phi * rho")
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "tau", tau)

    @property
    def m(self) -> int:
        return self.A.size


def geodesic_from_origin(g0: HPoint) -> GeodesicChart:
    """Chart of the geodesic from the identity to g0 (g0 != identity).

    When g0 sits on the t-axis the geodesic is not unique; the canonical
    representative A = (1, 0, ..., 0), B = 0 is returned.
    """
    if g0.z2 == 0.0 and g0.t == 0.0:
        raise PreconditionError("no chart at the identity: endpoint equals origin")
    with _mp.context():
        A, B, rho, tau = _mp.chart_from_origin(g0.x.tolist(), g0.y.tolist(), g0.t)
        A64 = np.array([float(a) for a in A])
        B64 = np.array([float(b) for b in B])
        rho64 = float(rho)
        tau64 = float(tau)
    phi64 = tau64 / rho64  # 0 / rho = 0 for the straight chart
    return GeodesicChart(
        A64, B64, phi64, rho64, tau64, _mp_state=(A, B, rho, tau)
    )


def eval_geodesic(chart: GeodesicChart, s: float) -> HPoint:
    """Point gamma(s) of the chart's geodesic; s in [0, 1] covers it."""
    s = float(s)
    if chart._mp_state is not None:
        with _mp.context():
            x, y, t = _mp.eval_chart(*chart._mp_state, s)
        return HPoint(np.asarray(x), np.asarray(y), t)
    return _eval_f64(chart.A, chart.B, chart.rho, chart.tau, s)


def _eval_f64(A, B, rho, tau, s) -> HPoint:
    if tau == 0.0:
        sr = s * rho
        return HPoint(B * sr, -A * sr, 0.0)
    st = s * tau
    c1 = -rho * float(_kernels.omc(st)) / tau  # (cos(s tau) - 1)/phi
    s1 = rho * math.sin(st) / tau
    x = A * c1 + B * s1
    y = B * c1 - A * s1
    t = 2.0 * rho * rho * float(_kernels.w_sin(st)) / (tau * tau)
    return HPoint(x, y, t)


def geodesic_velocity(chart: GeodesicChart, s: float) -> np.ndarray:
    """Analytic velocity gamma'(s) as [x'_1..x'_m, y'_1..y'_m, t'].

    Satisfies the horizontality identity t' = 2 (y . x' - x . y') exactly.
    """
    s = float(s)
    A, B, rho, tau = chart.A, chart.B, chart.rho, chart.tau
    st = s * tau
    c = math.cos(st)
    sn = math.sin(st)
    xp = rho * (B * c - A * sn)
    yp = -rho * (B * sn + A * c)
    tp = 0.0 if tau == 0.0 else 2.0 * rho * rho * float(_kernels.omc(st)) / tau
    return np.concatenate([xp, yp, [tp]])


def cc_distance(p: HPoint, q: HPoint) -> float:
    """Carnot-Caratheodory distance d_c(p, q) = rho of the chart of p^{-1}q."""
    if p.m != q.m:
        raise DimensionMismatchError(f"points live in H^{p.m} and H^{q.m}")
    if p == q:
        return 0.0
    w = group_mul(group_inv(p), q)
    return float(_kernels.cc_norm(w.z2, w.t))


def geodesic_between(p: HPoint, q: HPoint, s: float) -> HPoint:
    """Point at parameter s of the geodesic from p to q: p * gamma_{p^{-1}q}(s).

    Degenerate case p = q returns p. Computed in extended precision end to
    end, so s = 0 and s = 1 reproduce p and q bit for bit.
    """
    if p.m != q.m:
        raise DimensionMismatchError(f"points live in H^{p.m} and H^{q.m}")
    s = float(s)
    if p == q or s == 0.0:
        return p
    if s == 1.0:
        return q
    with _mp.context():
        wx, wy, wt = _mp.group_diff(
            p.x.tolist(), p.y.tolist(), p.t, q.x.tolist(), q.y.tolist(), q.t
        )
        if wt == 0 and all(v == 0 for v in wx) and all(v == 0 for v in wy):
            return p  # p and q coincide as group elements
        A, B, rho, tau = _mp.chart_from_origin(wx, wy, wt)
        x, y, t = _mp.translate_eval(
            p.x.tolist(), p.y.tolist(), p.t, A, B, rho, tau, s
        )
    return HPoint(np.asarray(x), np.asarray(y), t)
