"""Hot-loop kernels with two interchangeable backends.

The compiled backend (emobench._ckernels, built from Cython) and the pure
Python twin (emobench.kernels.pykernels) expose the same nine functions with
identical semantics. The compiled one is picked when importable; set
EMOBENCH_BACKEND=python or =c to force a choice, or call set_backend() at
runtime (tests and the backend benchmark do).

Tree kernels are written so both backends produce bit-identical splits; the
per-sample update kernels (linear, neural) may differ across backends by
float rounding only, never within one backend.
"""

from __future__ import annotations

import os

from emobench.kernels import pykernels as _py

KERNEL_NAMES = (
    "gini_best_split",
    "mse_best_split",
    "partition_node",
    "tree_predict",
    "delta_epoch",
    "softmax_delta_epoch",
    "linear_sgd_epoch",
    "bpn_epoch",
    "csr_matmat",
)

try:
    from emobench import _ckernels as _c
except ImportError:
    _c = None

_BACKENDS = {"python": _py}
if _c is not None:
    _BACKENDS["c"] = _c


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> None:
    global _active, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _active = _BACKENDS[name]
    _active_name = name


def active_backend() -> str:
    return _active_name


def get_backend(name: str):
    """Return a backend module directly (used by the backend benchmark)."""
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    return _BACKENDS[name]


_env = os.environ.get("EMOBENCH_BACKEND")
if _env:
    if _env not in _BACKENDS:
        raise ImportError(f"EMOBENCH_BACKEND={_env!r} but available backends are {available_backends()}")
    _active, _active_name = _BACKENDS[_env], _env
elif _c is not None:
    _active, _active_name = _c, "c"
else:
    _active, _active_name = _py, "python"


def __getattr__(name: str):
    if name in KERNEL_NAMES:
        return getattr(_active, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
