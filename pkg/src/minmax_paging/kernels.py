"""Backend selection for the solver's inner loop.

The compiled extension is used when importable; setting
``MINMAX_PAGING_PURE=1`` forces the pure-Python implementation.
"""

import os

from . import _kernels_py

OK = _kernels_py.OK
BAD_GRADIENT = _kernels_py.BAD_GRADIENT
STEP_LIMIT = _kernels_py.STEP_LIMIT

_compiled = None
if os.environ.get("MINMAX_PAGING_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _advance_python(x, c, sat, sat_at, m, q, inv_k, need, max_step, eps_feas, step_limit):
    xl, cl = x[:m].tolist(), c[:m].tolist()
    sl, al = sat[:m].tolist(), sat_at[:m].tolist()
    out = _kernels_py.advance_round(
        xl, cl, sl, al, m, q, inv_k, need, max_step, eps_feas, step_limit
    )
    x[:m] = xl
    sat[:m] = sl
    sat_at[:m] = al
    return out


def get_advance_round(backend: str | None = None):
    """Return the ``advance_round`` implementation for ``backend``.

    ``None`` picks the active default.  All arguments are numpy buffers of
    dtype float64 (``sat`` is uint8) and are updated in place.
    """
    backend = backend or BACKEND
    if backend == "python":
        return _advance_python
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run pip install -e .")
        return _compiled.advance_round
    raise ValueError(f"unknown backend {backend!r}")


def get_active_set(backend: str | None = None):
    """Return the ``ActiveSet`` class for ``backend`` (``None`` picks the default)."""
    backend = backend or BACKEND
    if backend == "python":
        return _kernels_py.ActiveSet
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run pip install -e .")
        return _compiled.ActiveSet
    raise ValueError(f"unknown backend {backend!r}")


advance_round = get_advance_round()
ActiveSet = get_active_set()

__all__ = ["BACKEND", "ActiveSet", "advance_round", "get_active_set", "get_advance_round", "OK", "BAD_GRADIENT", "STEP_LIMIT"]
