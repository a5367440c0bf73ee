"""Kernel backend selection.

Two interchangeable implementations of the hot numeric loops exist:

* ``compiled`` -- the Cython extension ``_ck`` (built by setup.py)
* ``python``   -- the pure-Python reference ``_pk``

The compiled backend is preferred when importable; set
``MEBNKIT_KERNELS=python`` or ``MEBNKIT_KERNELS=compiled`` to force one.
Both produce bit-identical results; the compiled one is just fast (see
benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os

from . import _pk

try:
    from . import _ck
except ImportError:  # extension not built; fall back
    _ck = None  # type: ignore[assignment]

_BACKENDS = {"python": _pk, "compiled": _ck}


def get(name: str):
    """Backend module by name ('python' or 'compiled'); raises if unavailable."""
    try:
        backend = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}") from None
    if backend is None:
        raise ImportError("compiled kernel backend is not built")
    return backend


def available() -> tuple[str, ...]:
    return tuple(name for name, mod in _BACKENDS.items() if mod is not None)


_forced = os.environ.get("MEBNKIT_KERNELS", "").strip().lower()
if _forced:
    _active = get(_forced)
else:
    _active = _ck if _ck is not None else _pk

BACKEND = "compiled" if _active is _ck and _ck is not None else "python"

product = _active.product
sum_axis = _active.sum_axis
slice_axis = _active.slice_axis
joint_marginal = _active.joint_marginal
rule_rows = _active.rule_rows
