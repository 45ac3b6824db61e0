"""Backend selection for the geodesy kernels.

The compiled Cython module is preferred; a vectorized numpy twin is the
fallback. Selection happens once at import. Override with the environment
variable HEISGEO_BACKEND in {auto, compiled, numpy}; "compiled" raises if the
extension is missing instead of silently degrading.

Exposed functions (shape-preserving, float64):
    solve_tau, f_tau, omc, w_sin, d_jac, cc_norm, contract_jacobian,
    chart_jacobian
"""

from __future__ import annotations

import os

import numpy as np

from . import _ccgeo_py

_choice = os.environ.get("HEISGEO_BACKEND", "auto").strip().lower() or "auto"
if _choice not in {"auto", "compiled", "numpy"}:
    raise ValueError(
        f"HEISGEO_BACKEND must be one of auto|compiled|numpy, got {_choice!r}"
    )

if _choice == "numpy":
    _impl = _ccgeo_py
    backend_name = "numpy"
else:
    try:
        from . import _ccgeo as _impl  # type: ignore[attr-defined]

        backend_name = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _ccgeo_py
        backend_name = "numpy"


def available_backends() -> list[str]:
    names = []
    try:
        from . import _ccgeo  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    names.append("numpy")
    return names


def get_backend(name: str):
    """Return the raw backend module (flat 1-d array contract); for tests
    and benchmarks."""
    if name == "numpy":
        return _ccgeo_py
    if name == "compiled":
        from . import _ccgeo

        return _ccgeo
    raise ValueError(f"unknown backend {name!r}")


def _flat(x) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())


def _wrap1(name):
    fn = getattr(_impl, name)

    def call(x):
        a = np.asarray(x, dtype=np.float64)
        return fn(_flat(a)).reshape(a.shape)

    call.__name__ = name
    call.__qualname__ = name
    call.__doc__ = getattr(_ccgeo_py, name).__doc__
    return call


def _wrap2(name):
    fn = getattr(_impl, name)

    def call(x, y):
        a, b = np.broadcast_arrays(
            np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
        )
        return fn(_flat(a), _flat(b)).reshape(a.shape)

    call.__name__ = name
    call.__qualname__ = name
    call.__doc__ = getattr(_ccgeo_py, name).__doc__
    return call


omc = _wrap1("omc")
w_sin = _wrap1("w_sin")
d_jac = _wrap1("d_jac")
f_tau = _wrap1("f_tau")
solve_tau = _wrap1("solve_tau")
cc_norm = _wrap2("cc_norm")
chart_jacobian = _wrap2("chart_jacobian")

_contract_fn = _impl.contract_jacobian


def contract_jacobian(tau, sbar: float):
    a = np.asarray(tau, dtype=np.float64)
    return _contract_fn(_flat(a), float(sbar)).reshape(a.shape)


contract_jacobian.__doc__ = _ccgeo_py.contract_jacobian.__doc__
