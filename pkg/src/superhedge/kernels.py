"""Kernel backend selection.

The compiled extension ``superhedge._ckernels`` is used when it has been
built; otherwise the numpy implementations in ``superhedge._pykernels`` are
used. Setting ``SUPERHEDGE_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load_compiled() -> ModuleType | None:
    if os.environ.get("SUPERHEDGE_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()
_impl: ModuleType = _compiled if _compiled is not None else _pykernels

BACKEND = "cython" if _compiled is not None else "python"


def compiled_available() -> bool:
    return _compiled is not None


def get_backend(name: str | None = None) -> ModuleType:
    """Return a kernel module by name (``"cython"``/``"python"``), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def simplex_iterate(T, basis, n_enter, tol, max_iter):
    return _impl.simplex_iterate(T, basis, n_enter, tol, max_iter)


def rollback_recombining(terminal, lam, oml):
    return _impl.rollback_recombining(terminal, lam, oml)


def eval_point(x, t, kd, ku, lam, oml, kind, M, slopes, intercepts):
    return _impl.eval_point(x, t, kd, ku, lam, oml, kind, M, slopes, intercepts)
