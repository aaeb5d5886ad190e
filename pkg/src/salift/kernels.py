"""Backend selection for the simplex kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback.  ``use_backend`` switches explicitly (the benchmark uses it).
"""
from __future__ import annotations

import importlib
import os

from . import _kernels_py

_compiled = None
try:
    _compiled = importlib.import_module("salift._kernels")
except ImportError:  # extension not built
    _compiled = None

_active = _kernels_py
if _compiled is not None and os.environ.get("SALIFT_KERNELS", "").lower() != "python":
    _active = _compiled


def available() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def use_backend(name: str):
    global _active
    if name == "python":
        _active = _kernels_py
    elif name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def backend() -> str:
    return _active.BACKEND


def price(*a):
    return _active.price(*a)


def price_dantzig(*a):
    return _active.price_dantzig(*a)


def pivot_i64(*a):
    return _active.pivot_i64(*a)


def pivot_obj(*a):
    return _active.pivot_obj(*a)
