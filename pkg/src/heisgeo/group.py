"""Group and metric primitives of the Heisenberg group H^m.

A point is (z, t) with z = (x, y) in R^m x R^m and t in R. The group law is

    (z, t) * (z', t') = (z + z', t + t' + 2 omega(z, z')),

with the fixed symplectic pairing omega(z, z') = sum_i (y_i x'_i - x_i y'_i).
Anisotropic dilations delta_lam(z, t) = (lam z, lam^2 t) are group
automorphisms; the homogeneous dimension is Q = 2m + 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InputError


def _as_vector(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1:
        raise InputError(f"{name} must be a scalar or 1-d sequence, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point of H^m in exponential coordinates (x, y, t).

    x, y are length-m arrays; serialization order is [x_1..x_m, y_1..y_m, t].
    Instances are immutable; arithmetic lives in the module-level functions.
    """

    x: np.ndarray
    y: np.ndarray
    t: float
    m: int = field(init=False)

    def __post_init__(self):
        x = _as_vector(self.x, "x")
        y = _as_vector(self.y, "y")
        if x.shape != y.shape:
            raise DimensionMismatchError(f"x has length {x.size}, y has length {y.size}")
        if x.size < 1:
            raise InputError("H^m needs m >= 1")
        t = float(self.t)
        if not np.isfinite(t):
            raise InputError("t is not finite")
        x = x.copy()
        y = y.copy()
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "m", x.size)

    # -- constructors -----------------------------------------------------
    @staticmethod
    def identity(m: int) -> "HPoint":
        return HPoint(np.zeros(m), np.zeros(m), 0.0)

    @staticmethod
    def from_array(vec) -> "HPoint":
        """Build from [x_1..x_m, y_1..y_m, t]; length must be 2m + 1."""
        a = _as_vector(vec, "point")
        if a.size < 3 or a.size % 2 == 0:
            raise InputError(f"point vector must have odd length 2m+1 >= 3, got {a.size}")
        m = (a.size - 1) // 2
        return HPoint(a[:m], a[m : 2 * m], a[2 * m])

    # -- views -------------------------------------------------------------
    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, [self.t]])

    @property
    def z2(self) -> float:
        """Squared horizontal radius |z|^2."""
        return float(self.x @ self.x + self.y @ self.y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HPoint):
            return NotImplemented
        return (
            self.m == other.m
            and self.t == other.t
            and bool(np.array_equal(self.x, other.x))
            and bool(np.array_equal(self.y, other.y))
        )

    def __repr__(self) -> str:
        return f"HPoint(x={self.x.tolist()}, y={self.y.tolist()}, t={self.t!r})"


def _check_same_group(p: HPoint, q: HPoint) -> None:
    if p.m != q.m:
        raise DimensionMismatchError(f"points live in H^{p.m} and H^{q.m}")


def omega(x1, y1, x2, y2) -> float:
    """Symplectic pairing omega(z, z') = sum_i (y_i x'_i - x_i y'_i)."""
    x1 = np.asarray(x1, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    return float(y1 @ x2 - x1 @ y2)


def group_mul(p: HPoint, q: HPoint) -> HPoint:
    """Group product p * q."""
    _check_same_group(p, q)
    tw = omega(p.x, p.y, q.x, q.y)
    return HPoint(p.x + q.x, p.y + q.y, p.t + q.t + 2.0 * tw)


def group_inv(p: HPoint) -> HPoint:
    """Group inverse p^{-1} = (-z, -t)."""
    return HPoint(-p.x, -p.y, -p.t)


def dilate(p: HPoint, lam: float) -> HPoint:
    """Anisotropic dilation delta_lam(z, t) = (lam z, lam^2 t)."""
    lam = float(lam)
    return HPoint(lam * p.x, lam * p.y, lam * lam * p.t)


def gauge_norm(p: HPoint) -> float:
    """Homogeneous gauge norm (|z|^4 + t^2)^(1/4)."""
    return float(np.hypot(p.z2, p.t) ** 0.5)


def gauge_dist(p: HPoint, q: HPoint) -> float:
    """Left-invariant gauge distance ||p^{-1} q||."""
    return gauge_norm(group_mul(group_inv(p), q))


def horizontal_frame(p: HPoint) -> np.ndarray:
    """Left-invariant horizontal frame at p, as a (2m, 2m+1) matrix.

    Rows are X_i = d/dx_i + 2 y_i d/dt followed by Y_i = d/dy_i - 2 x_i d/dt,
    expressed in the coordinate basis (x_1..x_m, y_1..y_m, t). These are the
    pushforwards of the coordinate frame at the identity under left
    translation by p; a curve is horizontal iff its velocity stays in their
    span, i.e. t' = 2 (y . x' - x . y').
    """
    m = p.m
    frame = np.zeros((2 * m, 2 * m + 1))
    frame[:m, :m] = np.eye(m)
    frame[:m, 2 * m] = 2.0 * p.y
    frame[m:, m : 2 * m] = np.eye(m)
    frame[m:, 2 * m] = -2.0 * p.x
    return frame


def homogeneous_dimension(m: int) -> int:
    """Q = 2m + 2, the exponent governing volume scaling of dilations."""
    if int(m) < 1:
        raise InputError("m must be a positive integer")
    return 2 * int(m) + 2
