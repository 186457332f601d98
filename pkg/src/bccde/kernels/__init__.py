"""Decoder kernel backends.

The compiled Cython extension is preferred; a NumPy implementation with
identical semantics is selected when the extension is missing.  Set
BCCDE_KERNEL_BACKEND=python (or =compiled) to force a choice, or call
use_backend() at runtime (the tests exercise both).
"""

import os

from . import _core_py

_IMPLS = {"numpy": _core_py}
try:
    from . import _core

    _IMPLS["cython"] = _core
except ImportError:
    _core = None

COMPILED = _core is not None


def _initial_backend():
    forced = os.environ.get("BCCDE_KERNEL_BACKEND", "").lower()
    if forced in ("python", "numpy"):
        return "numpy"
    if forced in ("compiled", "cython"):
        if not COMPILED:
            raise ImportError(
                "BCCDE_KERNEL_BACKEND requests the compiled backend "
                "but bccde.kernels._core is not built"
            )
        return "cython"
    return "cython" if COMPILED else "numpy"


_active_name = _initial_backend()


def available_backends():
    return tuple(sorted(_IMPLS))


def backend_name():
    return _active_name


def use_backend(name):
    """Switch the active kernel backend; returns the previous name."""
    global _active_name
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    previous = _active_name
    _active_name = name
    return previous


def active():
    return _IMPLS[_active_name]
