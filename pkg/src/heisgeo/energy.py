"""Discrete energies of grid maps into H^m.

Three functionals over a SampledMap u = (z, t):

  * ks_density / ks_energy: the averaged finite-difference density
    e(p) = avg_{|w| <= eps} (d(u(p), u(p + w))/eps)^alpha over the Euclidean
    eps-ball of the planar domain (the domain group is abelian, so metric
    balls are Euclidean), with d either the gauge metric or the
    Carnot-Caratheodory metric on the target; ks_energy integrates a
    per-node weight times the density.
  * pansu_energy: avg_{|w| <= 1} |grad z(p) . w|^alpha, the blow-up form the
    averaged density converges to for weakly contact maps; it refuses maps
    whose Legendrian residual exceeds a tolerance, since the representation
    only holds for contact maps.
  * horizontal_energy: integral of |grad z|^alpha (Frobenius norm); the
    vertical component never enters.

Ball averages use a fixed-seed scrambled Sobol point set mapped to the unit
disk, so every energy value is reproducible across runs and platforms.
Reports carry the per-node integrand; the value is exactly its trapezoid
quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import _kernels
from .errors import InputError, PreconditionError
from .grid import SampledMap, trapezoid_weights

QMC_SEED = 7
_disk_cache: dict[int, np.ndarray] = {}


def disk_points(n_samples: int) -> np.ndarray:
    """Low-discrepancy points of the closed unit disk, shape (n, 2).

    n_samples is rounded up to a power of two (balanced Sobol block); the
    point set is deterministic and cached per size.
    """
    if n_samples < 1:
        raise InputError("n_samples must be >= 1")
    m = max(1, math.ceil(math.log2(n_samples)))
    pts = _disk_cache.get(m)
    if pts is None:
        u = qmc.Sobol(d=2, scramble=True, seed=QMC_SEED).random_base2(m=m)
        r = np.sqrt(u[:, 0])
        th = (2.0 * np.pi) * u[:, 1]
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        _disk_cache[m] = pts
    return pts


@dataclass(frozen=True)
class EnergyReport:
    value: float
    density: np.ndarray = field(repr=False)
    alpha: float
    epsilon: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        density = np.ascontiguousarray(np.asarray(self.density, dtype=float))
        density.setflags(write=False)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.epsilon is not None:
            object.__setattr__(self, "epsilon", float(self.epsilon))

    def to_json_dict(self) -> dict:
        out = {"value": self.value, "alpha": self.alpha}
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        out["density"] = self.density.tolist()
        out["diagnostics"] = {k: float(v) for k, v in self.diagnostics.items()}
        return out


def _quadrature(u: SampledMap, density: np.ndarray) -> float:
    w = trapezoid_weights(u.nx, u.ny)
    return float(np.dot(w, density) * (u.hx * u.hy))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha >= 1.0:
        raise PreconditionError(f"alpha must be >= 1, got {alpha}")
    return alpha


def _target_metric(metric: str):
    if metric not in ("gauge", "cc"):
        raise InputError(f"metric must be 'gauge' or 'cc', got {metric!r}")
    return metric


def _group_increment(zp, tp, zq, tq, m):
    """Vertical and horizontal parts of u(p)^{-1} u(q), broadcast-safe."""
    dz = zq - zp
    dx = dz[..., :m]
    dy = dz[..., m:]
    xp = zp[..., :m]
    yp = zp[..., m:]
    v = (tq - tp) - 2.0 * (np.sum(yp * dx, axis=-1) - np.sum(xp * dy, axis=-1))
    z2 = np.sum(dz * dz, axis=-1)
    return z2, v


def _increment_dist(z2, v, metric):
    if metric == "gauge":
        return np.sqrt(np.hypot(z2, np.abs(v)))
    return _kernels.cc_norm(z2, v)


def ks_density(u: SampledMap, node: int, epsilon: float, alpha: float = 2.0,
               metric: str = "gauge", n_samples: int = 4096) -> float:
    """Averaged difference-quotient density at one node.

    Requires the eps-ball around the node to stay inside the grid rectangle.
    Maps without a stored vertical component are treated as t = 0.
    """
    alpha = _check_alpha(alpha)
    metric = _target_metric(metric)
    epsilon = float(epsilon)
    if not epsilon > 0.0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    node = int(node)
    if not 0 <= node < u.n_nodes:
        raise InputError(f"node {node} outside grid with {u.n_nodes} nodes")
    if u.boundary_margin(node) <= epsilon:
        raise PreconditionError(
            f"node {node} is within epsilon={epsilon} of the grid boundary"
        )
    w = disk_points(n_samples)
    p = u.nodes()[node]
    zq, tq = u.interpolate(p[None, :] + epsilon * w)
    zp = u.z[node]
    tp = 0.0 if u.t is None else u.t[node]
    if tq is None:
        tq = np.zeros(len(w))
    z2, v = _group_increment(zp, tp, zq, tq, u.m)
    d = _increment_dist(z2, v, metric)
    return float(np.mean((d / epsilon) ** alpha))


def ks_energy(u: SampledMap, weight: np.ndarray, epsilon: float,
              alpha: float = 2.0, metric: str = "gauge",
              n_samples: int = 4096) -> EnergyReport:
    """Weighted integral of the averaged density.

    The weight must vanish on every node whose eps-ball leaves the rectangle
    (the density is undefined there). Report density is weight times the
    per-node density, so value equals its plain trapezoid quadrature.
    """
    alpha = _check_alpha(alpha)
    metric = _target_metric(metric)
    epsilon = float(epsilon)
    if not epsilon > 0.0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    weight = np.asarray(weight, dtype=float)
    if weight.shape != (u.n_nodes,):
        raise InputError(f"weight must have shape ({u.n_nodes},), got {weight.shape}")
    if np.any(weight < 0.0) or np.any(weight > 1.0):
        raise InputError("weight values must lie in [0, 1]")

    support = np.flatnonzero(weight > 0.0)
    nodes = u.nodes()
    x1 = u.x0 + u.hx * (u.nx - 1)
    y1 = u.y0 + u.hy * (u.ny - 1)
    margins = np.minimum(
        np.minimum(nodes[:, 0] - u.x0, x1 - nodes[:, 0]),
        np.minimum(nodes[:, 1] - u.y0, y1 - nodes[:, 1]),
    )
    if support.size and margins[support].min() <= epsilon:
        raise PreconditionError(
            "weight support is within epsilon of the grid boundary"
        )

    w = disk_points(n_samples)
    density = np.zeros(u.n_nodes)
    tN = np.zeros(u.n_nodes) if u.t is None else u.t
    chunk = max(1, 2_000_000 // max(1, len(w)))
    for lo in range(0, support.size, chunk):
        idx = support[lo : lo + chunk]
        pts = nodes[idx][:, None, :] + epsilon * w[None, :, :]
        zq, tq = u.interpolate(pts.reshape(-1, 2))
        zq = zq.reshape(idx.size, len(w), 2 * u.m)
        tq = np.zeros((idx.size, len(w))) if tq is None else tq.reshape(idx.size, len(w))
        z2, v = _group_increment(u.z[idx][:, None, :], tN[idx][:, None], zq, tq, u.m)
        d = _increment_dist(z2, v, metric)
        density[idx] = np.mean((d / epsilon) ** alpha, axis=1)

    density *= weight
    value = _quadrature(u, density)
    diag = {
        "support_nodes": float(support.size),
        "support_margin_min": float(margins[support].min()) if support.size else math.inf,
    }
    return EnergyReport(value=value, density=density, alpha=alpha,
                        epsilon=epsilon, diagnostics=diag)


def _node_gradients(u: SampledMap):
    """d/dp1 and d/dp2 of z at nodes (central interior, one-sided edges)."""
    zf = u.z_field()
    dz2, dz1 = np.gradient(zf, u.hy, u.hx, axis=(0, 1))
    return dz1, dz2


def _node_legendrian_inf(u: SampledMap) -> float:
    """Max node residual |d_i t - 2(y . d_i x - x . d_i y)|, same stencils
    as the node gradients used by pansu_energy."""
    zf = u.z_field()
    tf = u.t_field()
    m = u.m
    dz2, dz1 = np.gradient(zf, u.hy, u.hx, axis=(0, 1))
    dt2, dt1 = np.gradient(tf, u.hy, u.hx)
    x = zf[..., :m]
    y = zf[..., m:]
    r1 = dt1 - 2.0 * (np.sum(y * dz1[..., :m], axis=-1)
                      - np.sum(x * dz1[..., m:], axis=-1))
    r2 = dt2 - 2.0 * (np.sum(y * dz2[..., :m], axis=-1)
                      - np.sum(x * dz2[..., m:], axis=-1))
    return float(max(np.abs(r1).max(), np.abs(r2).max()))


def pansu_energy(u: SampledMap, alpha: float = 2.0, n_samples: int = 65536,
                 contact_tol: float = 1e-6) -> EnergyReport:
    """Ball average of the differential: avg_{|w|<=1} |grad z(p) . w|^alpha.

    Valid only for weakly contact maps, so the vertical component must be
    present and its node Legendrian residual below contact_tol (for discrete
    lifts of curved maps the residual scales like the grid spacing; pass a
    tolerance commensurate with it).
    """
    alpha = _check_alpha(alpha)
    if u.t is None:
        raise PreconditionError(
            "the contact condition cannot be checked without t; lift the map first"
        )
    res = _node_legendrian_inf(u)
    if res > float(contact_tol):
        raise PreconditionError(
            f"Legendrian residual {res:.3e} exceeds contact_tol={contact_tol:.3e}: "
            "the ball-average representation holds for weakly contact maps only"
        )
    dz1, dz2 = _node_gradients(u)
    e11 = np.sum(dz1 * dz1, axis=-1).ravel()
    e12 = np.sum(dz1 * dz2, axis=-1).ravel()
    e22 = np.sum(dz2 * dz2, axis=-1).ravel()

    w = disk_points(n_samples)
    w11 = w[:, 0] * w[:, 0]
    w12 = 2.0 * w[:, 0] * w[:, 1]
    w22 = w[:, 1] * w[:, 1]
    density = np.empty(u.n_nodes)
    chunk = max(1, 2_000_000 // len(w))
    half = 0.5 * alpha
    for lo in range(0, u.n_nodes, chunk):
        hi = min(lo + chunk, u.n_nodes)
        q = (e11[lo:hi, None] * w11[None, :]
             + e12[lo:hi, None] * w12[None, :]
             + e22[lo:hi, None] * w22[None, :])
        density[lo:hi] = np.mean(np.maximum(q, 0.0) ** half, axis=1)

    value = _quadrature(u, density)
    return EnergyReport(value=value, density=density, alpha=alpha,
                        diagnostics={"legendrian_inf": res})


def horizontal_energy(u: SampledMap, alpha: float = 2.0) -> EnergyReport:
    """Integral of |grad z|^alpha (Frobenius norm over all 2m components)."""
    alpha = _check_alpha(alpha)
    if u.nx < 3 or u.ny < 3:
        raise PreconditionError(
            f"central differences need at least a 3x3 grid, got {u.nx}x{u.ny}"
        )
    dz1, dz2 = _node_gradients(u)
    g2 = (np.sum(dz1 * dz1, axis=-1) + np.sum(dz2 * dz2, axis=-1)).ravel()
    density = g2 ** (0.5 * alpha)
    value = _quadrature(u, density)
    return EnergyReport(value=value, density=density, alpha=alpha,
                        diagnostics={"grad_sq_max": float(g2.max(initial=0.0))})
