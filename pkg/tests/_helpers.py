"""Shared generators and finite-difference oracles for the test suite."""

import numpy as np

from heisgeo.group import HPoint


def rand_hpoint(rng, m: int = 1, scale: float = 10.0) -> HPoint:
    v = rng.uniform(-scale, scale, size=2 * m + 1)
    return HPoint(v[:m], v[m : 2 * m], v[2 * m])


def rand_admissible_coords(rng, n: int):
    """Chart coordinates bounded away from both degeneracies (tau = 0 is
    fine analytically but kept off so finite differences stay honest)."""
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    tau = rng.uniform(0.3, 5.8, n) * rng.choice([-1.0, 1.0], n)
    rho = rng.uniform(0.3, 2.0, n)
    phi = tau / rho
    return theta, phi, rho


def fd_det3(f, v0: np.ndarray, h: float = 1e-5) -> float:
    """Central-difference determinant of the Jacobian of f: R^3 -> R^3."""
    J = np.empty((3, 3))
    for j in range(3):
        vp = v0.copy()
        vm = v0.copy()
        vp[j] += h
        vm[j] -= h
        J[:, j] = (f(vp) - f(vm)) / (2.0 * h)
    return float(np.linalg.det(J))
