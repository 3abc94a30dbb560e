"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``RCC5_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernel

IMPLEMENTATION = "python"
_impl = _pykernel

if not os.environ.get("RCC5_PURE_PYTHON"):
    try:
        from . import _ckernel
    except ImportError:  # extension not built
        pass
    else:
        _impl = _ckernel
        IMPLEMENTATION = "cython"


def get(name: str | None = None):
    """Kernel module by name (``"python"`` / ``"cython"``), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernel
    if name == "cython":
        from . import _ckernel

        return _ckernel
    raise ValueError(f"unknown kernel {name!r}")


def propagate(problem, domains=None, queue=None, impl: str | None = None):
    """Propagate ``problem``; returns the refined domains or ``None``."""
    dom = bytearray(problem.domains if domains is None else domains)
    ok = get(impl).propagate(problem.frozen(), dom, queue)
    return dom if ok else None


def search(problem, max_nodes: int = 0, impl: str | None = None):
    return get(impl).search(problem.frozen(), bytearray(problem.domains), max_nodes)
