"""Rectangular grids of Heisenberg-target samples.

A SampledMap stores per-node values of a map u = (z, t) from a planar
rectangle into H^m on an nx-by-ny grid with row-major node order
k = j*nx + i (i along p1, j along p2). The first m columns of z are the
x components, the last m the y components; t is optional (maps are often
handled through their horizontal part alone and lifted afterwards).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

_GRID_KEYS = ("m", "nx", "ny", "x0", "y0", "hx", "hy")


@dataclass(frozen=True)
class SampledMap:
    m: int
    nx: int
    ny: int
    x0: float
    y0: float
    hx: float
    hy: float
    z: np.ndarray = field(repr=False)
    t: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        m, nx, ny = int(self.m), int(self.nx), int(self.ny)
        if m < 1:
            raise InputError(f"m must be >= 1, got {m}")
        if nx < 2 or ny < 2:
            raise InputError(f"grid must be at least 2x2, got {nx}x{ny}")
        hx, hy = float(self.hx), float(self.hy)
        if not (hx > 0 and hy > 0):
            raise InputError(f"grid spacing must be positive, got ({hx}, {hy})")
        z = np.ascontiguousarray(np.asarray(self.z, dtype=float))
        if z.shape != (nx * ny, 2 * m):
            raise InputError(
                f"z must have shape ({nx * ny}, {2 * m}), got {z.shape}"
            )
        if not np.all(np.isfinite(z)):
            raise InputError("z contains non-finite values")
        t = self.t
        if t is not None:
            t = np.ascontiguousarray(np.asarray(t, dtype=float))
            if t.shape != (nx * ny,):
                raise InputError(f"t must have shape ({nx * ny},), got {t.shape}")
            if not np.all(np.isfinite(t)):
                raise InputError("t contains non-finite values")
            t.setflags(write=False)
        z.setflags(write=False)
        for name, val in (("m", m), ("nx", nx), ("ny", ny), ("x0", float(self.x0)),
                          ("y0", float(self.y0)), ("hx", hx), ("hy", hy),
                          ("z", z), ("t", t)):
            object.__setattr__(self, name, val)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def zx(self) -> np.ndarray:
        """x components, shape (n_nodes, m)."""
        return self.z[:, : self.m]

    @property
    def zy(self) -> np.ndarray:
        """y components, shape (n_nodes, m)."""
        return self.z[:, self.m :]

    def p1(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx)

    def p2(self) -> np.ndarray:
        return self.y0 + self.hy * np.arange(self.ny)

    def nodes(self) -> np.ndarray:
        """Domain coordinates of every node, shape (n_nodes, 2), row-major."""
        P1, P2 = np.meshgrid(self.p1(), self.p2(), indexing="xy")
        return np.column_stack([P1.ravel(), P2.ravel()])

    def node_index(self, i: int, j: int) -> int:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise InputError(f"node ({i}, {j}) outside {self.nx}x{self.ny} grid")
        return j * self.nx + i

    def z_field(self) -> np.ndarray:
        """z reshaped to (ny, nx, 2m)."""
        return self.z.reshape(self.ny, self.nx, 2 * self.m)

    def t_field(self) -> np.ndarray | None:
        return None if self.t is None else self.t.reshape(self.ny, self.nx)

    def boundary_margin(self, k: int) -> float:
        """Euclidean distance from node k to the boundary of the rectangle."""
        p = self.nodes()[k]
        x1 = self.x0 + self.hx * (self.nx - 1)
        y1 = self.y0 + self.hy * (self.ny - 1)
        return float(min(p[0] - self.x0, x1 - p[0], p[1] - self.y0, y1 - p[1]))

    def with_t(self, t: np.ndarray) -> "SampledMap":
        return SampledMap(self.m, self.nx, self.ny, self.x0, self.y0,
                          self.hx, self.hy, self.z, t)

    def interpolate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """Bilinear interpolation of (z, t) at domain points, shape (K, 2).

        Points are clamped to the rectangle (callers keep sample sets inside)."""
        pts = np.asarray(points, dtype=float)
        gx = np.clip((pts[:, 0] - self.x0) / self.hx, 0.0, self.nx - 1.0)
        gy = np.clip((pts[:, 1] - self.y0) / self.hy, 0.0, self.ny - 1.0)
        i0 = np.minimum(gx.astype(np.int64), self.nx - 2)
        j0 = np.minimum(gy.astype(np.int64), self.ny - 2)
        fx = gx - i0
        fy = gy - j0
        k00 = j0 * self.nx + i0
        k10 = k00 + 1
        k01 = k00 + self.nx
        k11 = k01 + 1
        w00 = (1.0 - fx) * (1.0 - fy)
        w10 = fx * (1.0 - fy)
        w01 = (1.0 - fx) * fy
        w11 = fx * fy
        z = (w00[:, None] * self.z[k00] + w10[:, None] * self.z[k10]
             + w01[:, None] * self.z[k01] + w11[:, None] * self.z[k11])
        t = None
        if self.t is not None:
            t = (w00 * self.t[k00] + w10 * self.t[k10]
                 + w01 * self.t[k01] + w11 * self.t[k11])
        return z, t

    @staticmethod
    def from_function(zfn, m, nx, ny, x0=0.0, y0=0.0, hx=None, hy=None, tfn=None):
        """Sample z = zfn(p1, p2) (vectorized over flat coordinate arrays,
        returning (n, 2m)) and optionally t = tfn(p1, p2) on the grid.

        Default spacing makes the domain the unit square."""
        hx = 1.0 / (nx - 1) if hx is None else hx
        hy = 1.0 / (ny - 1) if hy is None else hy
        jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
        p1 = (x0 + hx * ii).ravel()
        p2 = (y0 + hy * jj).ravel()
        z = np.asarray(zfn(p1, p2), dtype=float)
        t = None if tfn is None else np.asarray(tfn(p1, p2), dtype=float)
        return SampledMap(m, nx, ny, x0, y0, hx, hy, z, t)

    def to_json_dict(self) -> dict:
        out = {
            "m": self.m, "nx": self.nx, "ny": self.ny,
            "x0": self.x0, "y0": self.y0, "hx": self.hx, "hy": self.hy,
            "z": self.z.tolist(),
        }
        if self.t is not None:
            out["t"] = self.t.tolist()
        return out

    @staticmethod
    def from_json_dict(data: dict) -> "SampledMap":
        if not isinstance(data, dict):
            raise InputError("sampled-map JSON must be an object")
        missing = [k for k in (*_GRID_KEYS, "z") if k not in data]
        if missing:
            raise InputError(f"sampled-map JSON missing keys: {missing}")
        try:
            return SampledMap(
                m=int(data["m"]), nx=int(data["nx"]), ny=int(data["ny"]),
                x0=float(data["x0"]), y0=float(data["y0"]),
                hx=float(data["hx"]), hy=float(data["hy"]),
                z=np.asarray(data["z"], dtype=float),
                t=None if data.get("t") is None else np.asarray(data["t"], dtype=float),
            )
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed sampled-map JSON: {exc}") from None

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @staticmethod
    def load(path) -> "SampledMap":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read sampled map from {path}: {exc}") from None
        return SampledMap.from_json_dict(data)


def trapezoid_weights(nx: int, ny: int) -> np.ndarray:
    """Flat per-node trapezoid quadrature weights (multiply by hx*hy)."""
    wx = np.ones(nx)
    wx[0] = wx[-1] = 0.5
    wy = np.ones(ny)
    wy[0] = wy[-1] = 0.5
    return np.outer(wy, wx).ravel()
