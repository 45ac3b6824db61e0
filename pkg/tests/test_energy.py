import math

import numpy as np
import pytest

from heisgeo.energy import (EnergyReport, disk_points, horizontal_energy,
                            ks_density, ks_energy, pansu_energy)
from heisgeo.errors import InputError, PreconditionError
from heisgeo.grid import SampledMap, trapezoid_weights


def _map(zfn, nx=17, ny=17, tfn=None):
    return SampledMap.from_function(zfn, m=1, nx=nx, ny=ny, tfn=tfn)


def _linear_isotropic(nx=17, ny=17, with_t=True):
    # z = (p1, p1): the image line is Lagrangian, so t = const lifts it
    tfn = (lambda p1, p2: 0.0 * p1) if with_t else None
    return _map(lambda p1, p2: np.column_stack([p1, p1]), nx, ny, tfn)


def _interior_weight(u, epsilon):
    nodes = u.nodes()
    x1 = u.x0 + u.hx * (u.nx - 1)
    y1 = u.y0 + u.hy * (u.ny - 1)
    margins = np.minimum(
        np.minimum(nodes[:, 0] - u.x0, x1 - nodes[:, 0]),
        np.minimum(nodes[:, 1] - u.y0, y1 - nodes[:, 1]))
    return (margins > epsilon + 1e-12).astype(float)


def _center(u):
    return u.node_index(u.nx // 2, u.ny // 2)


def test_disk_points_basics():
    w = disk_points(1000)
    assert w.shape == (1024, 2)
    assert np.hypot(w[:, 0], w[:, 1]).max() <= 1.0 + 1e-12
    assert disk_points(1024) is w  # cached, deterministic
    # uniform-disk moments: E[w1] = 0, E[w1^2] = 1/4
    assert abs(w[:, 0].mean()) <= 1e-3
    assert w[:, 0].mean() ** 2 + w[:, 1].mean() ** 2 <= 1e-6
    big = disk_points(65536)
    assert (big[:, 0] ** 2).mean() == pytest.approx(0.25, rel=5e-3)
    with pytest.raises(InputError):
        disk_points(0)


def test_constant_map_energies():
    u = _map(lambda p1, p2: np.column_stack([0.0 * p1 + 0.3, 0.0 * p1 - 1.0]),
             tfn=lambda p1, p2: 0.0 * p1 + 2.0)
    assert horizontal_energy(u).value == 0.0
    assert pansu_energy(u).value == 0.0
    w = _interior_weight(u, 0.1)
    rep = ks_energy(u, w, epsilon=0.1)
    # interpolation rounding leaves a square-rooted crumb, nothing more
    assert abs(rep.value) <= 1e-12
    assert ks_density(u, _center(u), 0.1) <= 1e-12


def test_linear_isotropic_density_is_half():
    u = _linear_isotropic()
    k = _center(u)
    for eps in (0.05, 0.1, 0.2):
        d_gauge = ks_density(u, k, eps, metric="gauge")
        d_cc = ks_density(u, k, eps, metric="cc")
        assert d_gauge == pytest.approx(0.5, abs=1e-5)
        # the increments are horizontal, where the two metrics coincide
        assert d_cc == pytest.approx(d_gauge, rel=1e-12)
    # epsilon drops out entirely for a linear map
    assert ks_density(u, k, 0.01) == pytest.approx(ks_density(u, k, 0.2),
                                                   rel=1e-9)
    # missing t is treated as t = 0, which is the correct lift here
    bare = _linear_isotropic(with_t=False)
    assert ks_density(bare, k, 0.1) == pytest.approx(
        ks_density(u, k, 0.1), rel=1e-14)


def test_ks_energy_value_and_report_identity():
    u = _linear_isotropic()
    w = _interior_weight(u, 0.1)
    rep = ks_energy(u, w, epsilon=0.1)
    mass = float(np.dot(trapezoid_weights(u.nx, u.ny), w)) * u.hx * u.hy
    assert rep.value == pytest.approx(0.5 * mass, rel=1e-5)
    # the reported value is exactly the trapezoid quadrature of the density
    quad = float(np.dot(trapezoid_weights(u.nx, u.ny), rep.density)) * u.hx * u.hy
    assert rep.value == pytest.approx(quad, rel=1e-14)
    assert rep.epsilon == 0.1
    assert rep.diagnostics["support_nodes"] == w.sum()


def test_ks_energy_linear_in_weight():
    u = _linear_isotropic()
    w = _interior_weight(u, 0.1)
    full = ks_energy(u, w, epsilon=0.1).value
    half = ks_energy(u, 0.5 * w, epsilon=0.1).value
    assert half == pytest.approx(0.5 * full, rel=1e-12)


def test_left_translation_invariance():
    u = _linear_isotropic()
    gx, gy, gt = 0.7, -1.3, 2.1
    z = u.z.copy()
    z[:, 0] += gx
    z[:, 1] += gy
    t = gt + u.t + 2.0 * (gy * u.z[:, 0] - gx * u.z[:, 1])
    v = SampledMap(u.m, u.nx, u.ny, u.x0, u.y0, u.hx, u.hy, z, t)
    k = _center(u)
    for metric in ("gauge", "cc"):
        assert ks_density(v, k, 0.1, metric=metric) == pytest.approx(
            ks_density(u, k, 0.1, metric=metric), rel=1e-10)
    assert horizontal_energy(v).value == pytest.approx(
        horizontal_energy(u).value, rel=1e-12)
    assert pansu_energy(v, contact_tol=1e-8).value == pytest.approx(
        pansu_energy(u).value, rel=1e-10)


def test_vertical_map_density_scaling():
    # constant z, linear t: each increment is purely vertical, so the
    # squared quotient is |Delta t|/eps^2 and the density scales like 1/eps
    u = _map(lambda p1, p2: np.column_stack([0.0 * p1, 0.0 * p1]),
             tfn=lambda p1, p2: p1)
    k = _center(u)
    d1 = ks_density(u, k, 0.1)
    d2 = ks_density(u, k, 0.025)
    assert d2 == pytest.approx(4.0 * d1, rel=1e-12)
    # vertical segments are pi times longer in the path metric
    assert ks_density(u, k, 0.1, metric="cc") == pytest.approx(
        math.pi * d1, rel=1e-10)


def test_horizontal_energy_closed_forms():
    u = _map(lambda p1, p2: np.column_stack([p1, 0.0 * p1]))
    assert horizontal_energy(u, alpha=2).value == pytest.approx(1.0, abs=1e-10)

    a, b = 0.3, -1.2
    v = _map(lambda p1, p2: np.column_stack([a * p1 + b * p2, 0.0 * p1]))
    assert horizontal_energy(v, alpha=2).value == pytest.approx(
        a * a + b * b, abs=1e-10)
    assert horizontal_energy(v, alpha=4).value == pytest.approx(
        (a * a + b * b) ** 2, abs=1e-10)
    assert v.t is None  # the vertical part never enters


def test_horizontal_energy_scaling():
    u = _map(lambda p1, p2: np.column_stack([np.sin(p1 + p2), p1 * p2]))
    base = horizontal_energy(u, alpha=3).value
    scaled = SampledMap(u.m, u.nx, u.ny, u.x0, u.y0, u.hx, u.hy, 2.0 * u.z)
    assert horizontal_energy(scaled, alpha=3).value == pytest.approx(
        8.0 * base, rel=1e-12)


def test_pansu_linear_isotropic_half():
    u = _linear_isotropic(nx=9, ny=9)
    rep = pansu_energy(u, alpha=2, n_samples=65536)
    assert rep.value == pytest.approx(0.5, rel=1e-6)
    assert np.allclose(rep.density, 0.5, rtol=1e-6)
    assert rep.diagnostics["legendrian_inf"] <= 1e-14
    assert rep.epsilon is None


def test_pansu_quarter_of_horizontal():
    # isotropic linear map with correlated components: for alpha = 2 the
    # ball average of |grad z . w|^2 is |grad z|^2 E[w1^2] = |grad z|^2 / 4
    a, b, kappa = 0.7, -0.4, 1.3

    def zfn(p1, p2):
        s = a * p1 + b * p2
        return np.column_stack([s, kappa * s])

    u = _map(zfn, tfn=lambda p1, p2: 0.0 * p1)
    pe = pansu_energy(u, alpha=2).value
    he = horizontal_energy(u, alpha=2).value
    assert pe == pytest.approx(he / 4.0, rel=1e-6)
    k = _center(u)
    assert ks_density(u, k, 0.05) == pytest.approx(
        pansu_energy(u).density[k], rel=5e-3)


def test_pansu_requires_contact():
    bare = _linear_isotropic(with_t=False)
    with pytest.raises(PreconditionError):
        pansu_energy(bare)
    # constant z with sloped t is as non-contact as it gets
    u = _map(lambda p1, p2: np.column_stack([0.0 * p1, 0.0 * p1]),
             tfn=lambda p1, p2: p1)
    with pytest.raises(PreconditionError):
        pansu_energy(u, contact_tol=1e-6)
    rep = pansu_energy(u, contact_tol=2.0)  # explicit loosening is allowed
    assert rep.value == 0.0  # grad z = 0 regardless of t
    assert rep.diagnostics["legendrian_inf"] == pytest.approx(1.0, rel=1e-12)


def test_ks_validation():
    u = _linear_isotropic()
    k_edge = u.node_index(0, 8)
    with pytest.raises(PreconditionError):
        ks_density(u, k_edge, 0.1)
    with pytest.raises(PreconditionError):
        ks_density(u, _center(u), 0.6)  # ball pokes out of the square
    with pytest.raises(PreconditionError):
        ks_density(u, _center(u), -0.1)
    with pytest.raises(PreconditionError):
        ks_density(u, _center(u), 0.1, alpha=0.5)
    with pytest.raises(InputError):
        ks_density(u, u.n_nodes, 0.1)
    with pytest.raises(InputError):
        ks_density(u, _center(u), 0.1, metric="euclidean")

    w = _interior_weight(u, 0.1)
    with pytest.raises(InputError):
        ks_energy(u, w[:-1], 0.1)
    with pytest.raises(InputError):
        ks_energy(u, 2.0 * w, 0.1)
    bad = np.ones(u.n_nodes)  # support touches the boundary
    with pytest.raises(PreconditionError):
        ks_energy(u, bad, 0.1)


def test_horizontal_needs_three_nodes():
    u = SampledMap(1, 2, 2, 0.0, 0.0, 1.0, 1.0, np.zeros((4, 2)))
    with pytest.raises(PreconditionError):
        horizontal_energy(u)


def test_report_json():
    u = _linear_isotropic(nx=9, ny=9)
    rep = horizontal_energy(u, alpha=2)
    data = rep.to_json_dict()
    assert set(data) == {"value", "alpha", "density", "diagnostics"}
    assert data["value"] == rep.value
    assert len(data["density"]) == u.n_nodes
    rep2 = ks_energy(u, _interior_weight(u, 0.1), epsilon=0.1)
    assert rep2.to_json_dict()["epsilon"] == 0.1
    frozen = EnergyReport(value=1.0, density=np.ones(3), alpha=2.0)
    with pytest.raises(ValueError):
        frozen.density[0] = 2.0
