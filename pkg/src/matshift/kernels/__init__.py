"""Pixel-kernel backend selection.

The compiled core (``matshift.kernels._core``, built from Cython) is
preferred when importable; otherwise the NumPy fallback is used. Both
implement the same contract and produce bit-identical float64 results.
Set ``MATSHIFT_KERNELS=python`` or ``=cython`` to force one.
"""

import os

from matshift.errors import ConfigError

from matshift.kernels import _numpy_impl

_FORCE = os.environ.get("MATSHIFT_KERNELS", "auto").lower()
if _FORCE not in ("auto", "cython", "python"):
    raise ConfigError(
        f"MATSHIFT_KERNELS must be auto, cython or python, got {_FORCE!r}"
    )

_cython_impl = None
_cython_error = None
if _FORCE != "python":
    try:
        from matshift.kernels import _core as _cython_impl
    except ImportError as exc:  # extension not built
        _cython_error = exc
        if _FORCE == "cython":
            raise ConfigError(
                "MATSHIFT_KERNELS=cython but the compiled core is not "
                f"available: {exc}"
            ) from exc

_active = _cython_impl if _cython_impl is not None else _numpy_impl

backend_name = _active.BACKEND_NAME

normals_from_depth = _active.normals_from_depth
bilinear_wrap = _active.bilinear_wrap
shade_composite = _active.shade_composite
background_fill = _active.background_fill


def available_backends():
    """Names of importable backends ('python' is always present)."""
    names = ["python"]
    if _cython_impl is not None:
        names.append("cython")
    return names


def get_backend(name: str):
    """Return the backend module by name, for parity tests and benchmarks."""
    if name == "python":
        return _numpy_impl
    if name == "cython":
        if _cython_impl is None:
            raise ConfigError(f"cython kernel core not built: {_cython_error}")
        return _cython_impl
    raise ConfigError(f"unknown kernel backend {name!r}")
