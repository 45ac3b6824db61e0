"""Geodesic spherical chart of H^1, contraction maps, and their Jacobians.

The chart A(theta, phi, rho) parametrizes H^1 by the time-1 endpoint of the
geodesic with A = cos(theta), B = sin(theta):

    x = [cos(theta)(cos(phi rho) - 1) + sin(theta) sin(phi rho)] / phi
    y = [sin(theta)(cos(phi rho) - 1) - cos(theta) sin(phi rho)] / phi
    t = 2 (phi rho - sin(phi rho)) / phi^2

Its Jacobian determinant 4 [2(1 - cos(phi rho)) - phi rho sin(phi rho)]/phi^4
does not depend on theta. The geodesic contraction toward p0 with factor
sbar maps p to gamma_{p0,p}(sbar); its Jacobian determinant at angle
tau = phi rho is sbar D(sbar tau)/D(tau) with D(tau) = tau sin tau -
2(1 - cos tau), which tends to sbar^5 as tau -> 0. Scanning the infimum of
det/sbar^4 over shrinking neighborhoods of the plane tau = 0 therefore
produces values converging to sbar < 1: no constant C > 0 can satisfy a
measure-contraction inequality det >= C sbar^4 there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import PreconditionError
from .geodesics import geodesic_between
from .group import HPoint, group_inv, group_mul

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SphericalCoords:
    """Chart coordinates (theta, phi, rho) with rho > 0 and |phi rho| <= 2 pi."""

    theta: float
    phi: float
    rho: float

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        rho = float(self.rho)
        if not all(map(math.isfinite, (theta, phi, rho))):
            raise PreconditionError("coordinates must be finite")
        if not rho > 0.0:
            raise PreconditionError(f"rho must be positive, got {rho}")
        if abs(phi * rho) > TWO_PI * (1 + 1e-12):
            raise PreconditionError(f"|phi rho| must be <= 2 pi, got {phi * rho}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "rho", rho)


def chart_A(coords: SphericalCoords) -> HPoint:
    """Evaluate the spherical chart; phi = 0 gives the straight-line limit."""
    theta, phi, rho = coords.theta, coords.phi, coords.rho
    tau = phi * rho
    if tau == 0.0:
        c1 = 0.0
        s1 = rho
        t = 0.0
    else:
        c1 = -rho * float(_kernels.omc(tau)) / tau  # (cos(tau) - 1)/phi
        s1 = rho * math.sin(tau) / tau  # sin(tau)/phi
        t = 2.0 * rho * rho * float(_kernels.w_sin(tau)) / (tau * tau)
    ct, st = math.cos(theta), math.sin(theta)
    x = ct * c1 + st * s1
    y = st * c1 - ct * s1
    return HPoint([x], [y], t)


def jacobian_A(coords: SphericalCoords) -> float:
    """det of the chart Jacobian, -4 D(phi rho)/phi^4; theta-independent.

    Continuously extended to rho^4/3 at phi = 0. Positive throughout
    0 < |phi rho| < 2 pi and vanishing only at |phi rho| = 2 pi."""
    return float(_kernels.chart_jacobian(coords.phi, coords.rho))


def _require_h1(p: HPoint, what: str) -> None:
    if p.m != 1:
        raise PreconditionError(
            f"{what} is implemented for H^1 only (closed-form determinants); got m={p.m}"
        )


def contract(p0: HPoint, sbar: float, p: HPoint) -> HPoint:
    """Geodesic contraction of p toward p0: gamma_{p0,p}(sbar), sbar in [0, 1]."""
    sbar = float(sbar)
    if not 0.0 <= sbar <= 1.0:
        raise PreconditionError(f"sbar must lie in [0, 1], got {sbar}")
    return geodesic_between(p0, p, sbar)


def jacobian_contract(p0: HPoint, sbar: float, p: HPoint) -> float:
    """det of the contraction Jacobian at p: sbar D(sbar tau)/D(tau).

    tau is the chart angle of p0^{-1} p; points on the vertical axis through
    p0 (degenerate chart) are rejected. The tau -> 0 limit sbar^5 is returned
    for points on the horizontal plane through p0.
    """
    _require_h1(p0, "jacobian_contract")
    _require_h1(p, "jacobian_contract")
    sbar = float(sbar)
    if not 0.0 < sbar <= 1.0:
        raise PreconditionError(f"sbar must lie in (0, 1], got {sbar}")
    w = group_mul(group_inv(p0), p)
    z2 = w.z2
    if z2 == 0.0:
        raise PreconditionError(
            "p lies on the vertical axis through p0: chart degenerate there"
        )
    if w.t == 0.0:
        tau = 0.0
    else:
        tau = float(_kernels.solve_tau(z2 / abs(w.t)))
    return float(_kernels.contract_jacobian(tau, sbar))


def mcp_scan(
    sbar: float,
    p0: HPoint | None = None,
    thresholds=None,
    n_samples: int = 100_000,
    seed: int = 0,
    z_radius: float = 1.0,
):
    """Infimum of det J_contract / sbar^4 near the horizontal plane at p0.

    For each threshold eps the scan draws n_samples points p whose chart
    angle residual |t - t0 + 2(x0 y - y0 x)| is at most eps (that residual is
    exactly the vertical part of p0^{-1} p) and records
    inf det / sbar^4. Horizontal offsets are drawn once, uniformly on a disk
    of radius z_radius, and the vertical residuals are scaled per threshold
    (common random numbers), which makes the sequence of infima monotone
    non-increasing by construction.

    Returns a list of rows (threshold, n_samples, inf_ratio). The infima
    converge to sbar as eps -> 0, falsifying any bound det >= C sbar^4.
    """
    sbar = float(sbar)
    if not 0.0 < sbar <= 1.0:
        raise PreconditionError(f"sbar must lie in (0, 1], got {sbar}")
    if p0 is None:
        p0 = HPoint.identity(1)
    _require_h1(p0, "mcp_scan")
    if n_samples < 1:
        raise PreconditionError("n_samples must be >= 1")
    if thresholds is None:
        thresholds = np.geomspace(1e-1, 1e-6, 6)
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(thresholds <= 0):
        raise PreconditionError("thresholds must be positive")

    rng = np.random.default_rng(seed)
    # uniform on the disk, bounded away from the degenerate axis
    radii = z_radius * np.sqrt(rng.uniform(size=n_samples))
    radii = np.maximum(radii, 1e-9 * z_radius)
    z2 = radii * radii
    v_unit = rng.uniform(-1.0, 1.0, size=n_samples)

    s4 = sbar**4
    rows = []
    for eps in thresholds:
        v = v_unit * eps
        with np.errstate(divide="ignore"):
            ratio = np.where(v == 0.0, np.inf, z2 / np.abs(v))
        tau = _kernels.solve_tau(ratio)
        det = _kernels.contract_jacobian(tau, sbar)
        rows.append((float(eps), int(n_samples), float(det.min() / s4)))
    return rows
