"""Isotropy-constrained Dirichlet minimization and Legendrian lifting.

For maps of a planar rectangle into H^m the horizontal-energy Dirichlet
problem reduces to minimizing the z-part energy

    E(z) = integral of |grad z|^alpha,   alpha >= 2,

over maps with prescribed boundary z subject to the weak isotropy constraint
z*(symplectic form) = 0, which for a planar domain is the single scalar
equation

    r = d1 x . d2 y - d2 x . d1 y = 0     (dot over the m target components).

Any z satisfying it admits a vertical component t with
d_i t = 2(y . d_i x - x . d_i y) (the Legendrian condition), recovered here
by a least-squares integration of that gradient field; the pair (z, t) is
then a weakly contact map whose horizontal energy is E(z).

Discretization: z lives at grid nodes; the constraint and the energy cells
use bilinear (four-corner) differences at cell centers, which avoids the
checkerboard null modes of collocated central differences. The minimizer is
a quadratic-penalty method with geometric growth plus a final
augmented-Lagrangian refinement; inner solves are gradient descent with
Armijo backtracking. The solver logs (stage, iter, energy, grad_norm,
constraint_inf) every iteration and never claims global optimality: the
constraint set is not convex.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .energy import EnergyReport, horizontal_energy
from .errors import InputError, PreconditionError
from .grid import SampledMap

ALPHA_REG = 1e-8


def _cell_d1(f: np.ndarray, hx: float) -> np.ndarray:
    return (f[:-1, 1:] - f[:-1, :-1] + f[1:, 1:] - f[1:, :-1]) / (2.0 * hx)


def _cell_d2(f: np.ndarray, hy: float) -> np.ndarray:
    return (f[1:, :-1] - f[:-1, :-1] + f[1:, 1:] - f[:-1, 1:]) / (2.0 * hy)


def _cell_avg(f: np.ndarray) -> np.ndarray:
    return 0.25 * (f[:-1, :-1] + f[:-1, 1:] + f[1:, :-1] + f[1:, 1:])


def _scatter_d1(w: np.ndarray, hx: float, out: np.ndarray) -> None:
    """Adjoint of _cell_d1: accumulate dM/df given w = dM/d(d1 f)."""
    s = w / (2.0 * hx)
    out[:-1, 1:] += s
    out[1:, 1:] += s
    out[:-1, :-1] -= s
    out[1:, :-1] -= s


def _scatter_d2(w: np.ndarray, hy: float, out: np.ndarray) -> None:
    s = w / (2.0 * hy)
    out[1:, :-1] += s
    out[1:, 1:] += s
    out[:-1, :-1] -= s
    out[:-1, 1:] -= s


def isotropy_residual(u: SampledMap) -> np.ndarray:
    """Per-cell residual of the weak isotropy condition, shape (ny-1, nx-1).

    Vanishes identically iff the discrete pullback of the symplectic form is
    zero cell by cell."""
    zf = u.z_field()
    m = u.m
    d1 = _cell_d1(zf, u.hx)
    d2 = _cell_d2(zf, u.hy)
    return (np.sum(d1[..., :m] * d2[..., m:], axis=-1)
            - np.sum(d2[..., :m] * d1[..., m:], axis=-1))


def legendrian_residual(u: SampledMap) -> np.ndarray:
    """Per-cell residuals r_i = d_i t - 2(y . d_i x - x . d_i y), shape
    (ny-1, nx-1, 2)."""
    if u.t is None:
        raise PreconditionError("legendrian_residual requires the t component")
    zf = u.z_field()
    tf = u.t_field()
    m = u.m
    xbar = _cell_avg(zf[..., :m])
    ybar = _cell_avg(zf[..., m:])
    out = np.empty((u.ny - 1, u.nx - 1, 2))
    for axis, (dop, h) in enumerate(((_cell_d1, u.hx), (_cell_d2, u.hy))):
        dz = dop(zf, h)
        dt = dop(tf, h)
        out[..., axis] = dt - 2.0 * (np.sum(ybar * dz[..., :m], axis=-1)
                                     - np.sum(xbar * dz[..., m:], axis=-1))
    return out


@dataclass(frozen=True)
class LiftResult:
    map: SampledMap
    diagnostics: dict = field(default_factory=dict)


def lift(u: SampledMap, anchor_t: float = 0.0, tol: float = 1e-6) -> LiftResult:
    """Fill in t so that (z, t) is (discretely) weakly contact.

    Requires the isotropy residual below tol; otherwise the target gradient
    field has curl and no t integrates it. t is the least-squares solution of
    the per-edge increments of d_i t = 2(y . d_i x - x . d_i y), pinned to
    t = anchor_t at the origin-corner node. Diagnostics report the residual
    infinity norms (isotropy, discrete curl of the target field, Legendrian
    residual of the lifted map).
    """
    iso = isotropy_residual(u)
    iso_inf = float(np.abs(iso).max())
    if iso_inf > tol:
        raise PreconditionError(
            f"isotropy residual {iso_inf:.3e} exceeds tol={tol:.3e}: "
            "the Legendrian gradient field is not closed, map not liftable"
        )
    zf = u.z_field()
    m = u.m
    xbar = _cell_avg(zf[..., :m])
    ybar = _cell_avg(zf[..., m:])
    d1 = _cell_d1(zf, u.hx)
    d2 = _cell_d2(zf, u.hy)
    g1 = 2.0 * (np.sum(ybar * d1[..., :m], axis=-1)
                - np.sum(xbar * d1[..., m:], axis=-1))
    g2 = 2.0 * (np.sum(ybar * d2[..., :m], axis=-1)
                - np.sum(xbar * d2[..., m:], axis=-1))

    curl = _cell_d1(g2[..., None], u.hx) - _cell_d2(g1[..., None], u.hy) \
        if min(g1.shape) >= 2 else np.zeros((0, 0, 1))
    curl_inf = float(np.abs(curl).max()) if curl.size else 0.0

    nx, ny = u.nx, u.ny
    # per-edge increments: average the adjacent cell values of the gradient
    eh = np.empty((ny, nx - 1))
    eh[0] = g1[0]
    eh[-1] = g1[-1]
    if ny > 2:
        eh[1:-1] = 0.5 * (g1[:-1] + g1[1:])
    ev = np.empty((ny - 1, nx))
    ev[:, 0] = g2[:, 0]
    ev[:, -1] = g2[:, -1]
    if nx > 2:
        ev[:, 1:-1] = 0.5 * (g2[:, :-1] + g2[:, 1:])

    jj, ii = np.meshgrid(np.arange(ny), np.arange(nx - 1), indexing="ij")
    tail_h = (jj * nx + ii).ravel()
    head_h = tail_h + 1
    jj, ii = np.meshgrid(np.arange(ny - 1), np.arange(nx), indexing="ij")
    tail_v = (jj * nx + ii).ravel()
    head_v = tail_v + nx
    tails = np.concatenate([tail_h, tail_v])
    heads = np.concatenate([head_h, head_v])
    delta = np.concatenate([u.hx * eh.ravel(), u.hy * ev.ravel()])

    n = nx * ny
    ones = np.ones(len(tails))
    inc = sp.coo_matrix(
        (np.concatenate([ones, -ones]),
         (np.concatenate([np.arange(len(tails))] * 2),
          np.concatenate([heads, tails]))),
        shape=(len(tails), n),
    ).tocsr()
    lap = (inc.T @ inc).tocsc()
    b = inc.T @ delta
    t = np.empty(n)
    t[0] = float(anchor_t)
    rest = np.arange(1, n)
    t[rest] = spsolve(lap[rest][:, rest], b[rest] - lap[rest, 0].toarray().ravel() * t[0])

    lifted = u.with_t(t)
    leg = legendrian_residual(lifted)
    diag = {
        "isotropy_inf": iso_inf,
        "curl_inf": curl_inf,
        "edge_residual_inf": float(np.abs(inc @ t - delta).max()),
        "legendrian_inf": float(np.abs(leg).max()),
    }
    return LiftResult(map=lifted, diagnostics=diag)


def boundary_nodes(nx: int, ny: int) -> np.ndarray:
    """Flat node indices of the boundary ring, counterclockwise from the
    origin corner (bottom row, right column, top row reversed, left column
    reversed); length 2(nx + ny) - 4."""
    if nx < 2 or ny < 2:
        raise InputError("grid must be at least 2x2")
    bottom = np.arange(nx)
    right = nx - 1 + nx * np.arange(1, ny)
    top = (ny - 1) * nx + np.arange(nx - 2, -1, -1)
    left = nx * np.arange(ny - 2, 0, -1)
    return np.concatenate([bottom, right, top, left])


@dataclass(frozen=True)
class BoundaryData:
    """Boundary trace of the z component plus one vertical anchor value.

    z rows follow the counterclockwise ring of boundary_nodes. The vertical
    boundary trace is determined by z up to a constant whenever the lift
    exists, so only its value at the origin corner is prescribed.
    """

    m: int
    z: np.ndarray = field(repr=False)
    anchor_t: float = 0.0

    def __post_init__(self):
        m = int(self.m)
        if m < 1:
            raise InputError(f"m must be >= 1, got {m}")
        z = np.ascontiguousarray(np.asarray(self.z, dtype=float))
        if z.ndim != 2 or z.shape[1] != 2 * m:
            raise InputError(f"boundary z must have shape (nb, {2 * m}), got {z.shape}")
        if not np.all(np.isfinite(z)):
            raise InputError("boundary z contains non-finite values")
        z.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "anchor_t", float(self.anchor_t))

    @property
    def n_boundary(self) -> int:
        return len(self.z)

    def to_json_dict(self) -> dict:
        return {"m": self.m, "z": self.z.tolist(), "anchor_t": self.anchor_t}

    @staticmethod
    def from_json_dict(data: dict) -> "BoundaryData":
        if not isinstance(data, dict):
            raise InputError("boundary JSON must be an object")
        missing = [k for k in ("m", "z") if k not in data]
        if missing:
            raise InputError(f"boundary JSON missing keys: {missing}")
        try:
            return BoundaryData(m=int(data["m"]),
                                z=np.asarray(data["z"], dtype=float),
                                anchor_t=float(data.get("anchor_t", 0.0)))
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed boundary JSON: {exc}") from None

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @staticmethod
    def load(path) -> "BoundaryData":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read boundary data from {path}: {exc}") from None
        return BoundaryData.from_json_dict(data)

    @staticmethod
    def from_map(u: SampledMap, anchor_t: float | None = None) -> "BoundaryData":
        ring = boundary_nodes(u.nx, u.ny)
        if anchor_t is None:
            anchor_t = 0.0 if u.t is None else float(u.t[0])
        return BoundaryData(u.m, u.z[ring], anchor_t)


@dataclass(frozen=True)
class MinimizeConfig:
    alpha: float = 2.0
    penalty_mu0: float = 10.0
    penalty_growth: float = 10.0
    penalty_stages: int = 5
    inner_tol: float = 1e-8
    constraint_tol: float = 1e-8
    max_inner_iters: int = 20000
    seed: int = 0

    def __post_init__(self):
        if not self.alpha >= 2.0:
            raise InputError(f"alpha must be >= 2 for the reduction, got {self.alpha}")
        if not self.penalty_mu0 > 0:
            raise InputError("penalty_mu0 must be positive")
        if not self.penalty_growth > 1:
            raise InputError("penalty_growth must exceed 1")
        if self.penalty_stages < 1:
            raise InputError("penalty_stages must be >= 1")
        if not (self.inner_tol > 0 and self.constraint_tol > 0):
            raise InputError("tolerances must be positive")
        if self.max_inner_iters < 1:
            raise InputError("max_inner_iters must be >= 1")


@dataclass(frozen=True)
class MinimizeResult:
    map: SampledMap
    report: EnergyReport
    log: list
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def _coons_init(zb: np.ndarray, nx: int, ny: int, m: int) -> np.ndarray:
    """Transfinite interpolation of the boundary ring; exact for affine data."""
    ring = boundary_nodes(nx, ny)
    zf = np.zeros((ny * nx, 2 * m))
    zf[ring] = zb
    zf = zf.reshape(ny, nx, 2 * m)
    s = np.linspace(0.0, 1.0, nx)[None, :, None]
    r = np.linspace(0.0, 1.0, ny)[:, None, None]
    bottom = zf[0][None, :, :]
    top = zf[-1][None, :, :]
    left = zf[:, 0][:, None, :]
    right = zf[:, -1][:, None, :]
    interp = ((1 - r) * bottom + r * top + (1 - s) * left + s * right
              - ((1 - s) * (1 - r) * zf[0, 0] + s * (1 - r) * zf[0, -1]
                 + (1 - s) * r * zf[-1, 0] + s * r * zf[-1, -1]))
    return interp


class _Objective:
    """Merit function M(z) = E(z) + sum_cells (lam r + mu r^2) hx hy over the
    interior unknowns, with fixed boundary; gradients by hand-adjoint of the
    cell operators."""

    def __init__(self, zfix: np.ndarray, interior: np.ndarray, m: int,
                 hx: float, hy: float, alpha: float):
        self.zfix = zfix  # (ny, nx, 2m) with boundary values set
        self.interior = interior  # boolean (ny, nx)
        self.m = m
        self.hx = hx
        self.hy = hy
        self.alpha = alpha
        self.delta2 = ALPHA_REG**2 if alpha > 2.0 else 0.0
        self.cell_area = hx * hy

    def full_field(self, v: np.ndarray) -> np.ndarray:
        zf = self.zfix.copy()
        zf[self.interior] = v.reshape(-1, 2 * self.m)
        return zf

    def pieces(self, zf: np.ndarray):
        m = self.m
        d1 = _cell_d1(zf, self.hx)
        d2 = _cell_d2(zf, self.hy)
        g = np.sum(d1 * d1, axis=-1) + np.sum(d2 * d2, axis=-1)
        r = (np.sum(d1[..., :m] * d2[..., m:], axis=-1)
             - np.sum(d2[..., :m] * d1[..., m:], axis=-1))
        if self.alpha == 2.0:
            e_cells = g
        else:
            e_cells = (g + self.delta2) ** (0.5 * self.alpha)
        return d1, d2, g, r, e_cells

    def energy(self, v: np.ndarray) -> float:
        _, _, _, _, e_cells = self.pieces(self.full_field(v))
        return float(e_cells.sum() * self.cell_area)

    def merit(self, v: np.ndarray, lam: np.ndarray, mu: float) -> float:
        _, _, _, r, e_cells = self.pieces(self.full_field(v))
        return float((e_cells + lam * r + mu * r * r).sum() * self.cell_area)

    def merit_grad(self, v: np.ndarray, lam: np.ndarray, mu: float):
        """Returns (merit, grad over interior unknowns, energy, |r|_inf)."""
        m = self.m
        zf = self.full_field(v)
        d1, d2, g, r, e_cells = self.pieces(zf)
        energy = float(e_cells.sum() * self.cell_area)
        merit = float((e_cells + lam * r + mu * r * r).sum() * self.cell_area)

        if self.alpha == 2.0:
            ew = 2.0
        else:
            ew = self.alpha * (g + self.delta2) ** (0.5 * self.alpha - 1.0)
        cw = lam + 2.0 * mu * r
        if np.ndim(ew):
            ew = ew[..., None]
        w1 = ew * d1
        w2 = ew * d2
        w1[..., :m] += cw[..., None] * d2[..., m:]
        w1[..., m:] -= cw[..., None] * d2[..., :m]
        w2[..., :m] -= cw[..., None] * d1[..., m:]
        w2[..., m:] += cw[..., None] * d1[..., :m]

        grad_f = np.zeros_like(zf)
        _scatter_d1(w1 * self.cell_area, self.hx, grad_f)
        _scatter_d2(w2 * self.cell_area, self.hy, grad_f)
        grad = grad_f[self.interior].ravel()
        return merit, grad, energy, float(np.abs(r).max())


def _inner_descent(obj: _Objective, v: np.ndarray, lam: np.ndarray, mu: float,
                   stage: int, tol: float, max_iters: int, log: list):
    """Armijo-backtracking gradient descent; returns (v, grad_inf, r_inf)."""
    step = 1.0
    grad_inf = math.inf
    r_inf = math.inf
    for it in range(max_iters):
        merit, grad, energy, r_inf = obj.merit_grad(v, lam, mu)
        grad_inf = float(np.abs(grad).max()) if grad.size else 0.0
        log.append((stage, it, energy, grad_inf, r_inf))
        if grad_inf <= tol:
            break
        g2 = float(grad @ grad)
        accepted = False
        while step > 1e-20:
            trial = v - step * grad
            if obj.merit(trial, lam, mu) <= merit - 1e-4 * step * g2:
                v = trial
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        step *= 2.0
    return v, grad_inf, r_inf


def minimize(boundary: BoundaryData, nx: int, ny: int,
             config: MinimizeConfig | None = None,
             x0: float = 0.0, y0: float = 0.0,
             hx: float | None = None, hy: float | None = None) -> MinimizeResult:
    """Minimize the cell-discretized |grad z|^alpha energy over interior
    nodes subject to cell-wise isotropy, then lift the vertical component.

    Quadratic-penalty stages with geometrically growing mu are followed by
    two augmented-Lagrangian passes at the final mu (multiplier update
    lam += 2 mu r). Initial guess is the transfinite (Coons) extension of
    the boundary; a nonzero config.seed adds a small seeded jitter to it,
    which is how multi-start is expressed. Deterministic for a fixed seed.

    Returns the lifted solution map, its node-difference horizontal-energy
    report, the per-iteration log, a convergence flag (gradient and
    constraint tolerances both met), and diagnostics including the cell
    objective actually optimized.
    """
    config = config or MinimizeConfig()
    nx, ny = int(nx), int(ny)
    nb = 2 * (nx + ny) - 4
    if boundary.n_boundary != nb:
        raise InputError(
            f"boundary ring has {boundary.n_boundary} nodes, {nx}x{ny} grid needs {nb}"
        )
    hx = 1.0 / (nx - 1) if hx is None else float(hx)
    hy = 1.0 / (ny - 1) if hy is None else float(hy)
    m = boundary.m

    zf = _coons_init(boundary.z, nx, ny, m)
    interior = np.zeros((ny, nx), dtype=bool)
    interior[1:-1, 1:-1] = True
    if config.seed:
        rng = np.random.default_rng(config.seed)
        scale = float(np.abs(boundary.z).max()) or 1.0
        zf[interior] += 0.01 * scale * rng.standard_normal(zf[interior].shape)

    obj = _Objective(zf, interior, m, hx, hy, config.alpha)
    v = zf[interior].ravel().copy()
    lam = np.zeros((ny - 1, nx - 1))
    log: list = []

    grad_inf = 0.0
    r_inf = 0.0
    mu = config.penalty_mu0
    stage = 0
    if v.size:
        for k in range(config.penalty_stages):
            stage = k + 1
            mu = config.penalty_mu0 * config.penalty_growth**k
            v, grad_inf, r_inf = _inner_descent(
                obj, v, lam, mu, stage, config.inner_tol,
                config.max_inner_iters, log)
            if r_inf <= config.constraint_tol and grad_inf <= config.inner_tol:
                break
        for _ in range(2):
            _, _, _, r, _ = obj.pieces(obj.full_field(v))
            lam = lam + 2.0 * mu * r
            stage += 1
            v, grad_inf, r_inf = _inner_descent(
                obj, v, lam, mu, stage, config.inner_tol,
                config.max_inner_iters, log)
            if r_inf <= config.constraint_tol and grad_inf <= config.inner_tol:
                break

    zfull = obj.full_field(v)
    u = SampledMap(m, nx, ny, x0, y0, hx, hy, zfull.reshape(-1, 2 * m))
    iso_inf = float(np.abs(isotropy_residual(u)).max())
    converged = bool(iso_inf <= config.constraint_tol
                     and grad_inf <= config.inner_tol)

    diagnostics = {
        "objective": obj.energy(v),
        "constraint_inf": iso_inf,
        "grad_inf": grad_inf,
        "stages_run": float(stage),
        "iterations": float(len(log)),
        "mu_final": float(mu),
    }
    lift_tol = max(10.0 * config.constraint_tol, 1e-2)
    if iso_inf <= lift_tol:
        lifted = lift(u, anchor_t=boundary.anchor_t,
                      tol=max(iso_inf, config.constraint_tol) * (1 + 1e-12))
        u = lifted.map
        for key, val in lifted.diagnostics.items():
            diagnostics[f"lift_{key}"] = val
    report = horizontal_energy(u, config.alpha) if min(nx, ny) >= 3 else \
        EnergyReport(value=obj.energy(v), density=np.zeros(nx * ny),
                     alpha=config.alpha)
    return MinimizeResult(map=u, report=report, log=log,
                          converged=converged, diagnostics=diagnostics)
