"""Learner compute kernels with a compiled fast path.

Two interchangeable backends implement the forward/backward/Adam contract:
a Cython extension (preferred when built) and a pure-numpy reference. The
STT_BACKEND environment variable forces one explicitly ("cython" or
"numpy"); by default the compiled kernel is used when available.
"""

from __future__ import annotations

import os

from . import numpy_backend

_BACKENDS = {"numpy": numpy_backend}
try:
    from . import _fused

    _BACKENDS["cython"] = _fused
except ImportError:
    _fused = None

_requested = os.environ.get("STT_BACKEND", "").strip().lower()
if _requested and _requested not in ("numpy", "cython"):
    raise ValueError(f"unknown STT_BACKEND value {_requested!r}; use 'numpy' or 'cython'")
if _requested == "cython" and "cython" not in _BACKENDS:
    raise ImportError("STT_BACKEND=cython but the compiled kernel is not built")

_active = _BACKENDS[_requested or ("cython" if "cython" in _BACKENDS else "numpy")]


def backend_name() -> str:
    """Name of the backend in use ('cython' or 'numpy')."""
    for name, mod in _BACKENDS.items():
        if mod is _active:
            return name
    raise RuntimeError("no active backend")


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def use(name: str):
    """Switch the active backend (mainly for tests and benchmarks)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    _active = _BACKENDS[name]


def forward_mlp(*args):
    return _active.forward_mlp(*args)


def adam_step(*args, **kwargs):
    return _active.adam_step(*args, **kwargs)
