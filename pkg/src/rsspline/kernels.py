"""Kernel backend selection.

The compiled ``_speedups`` extension is used when it imports; otherwise the
pure-Python kernels take over.  ``RSSPLINE_BACKEND=python`` forces the
fallback, ``RSSPLINE_BACKEND=cython`` makes a missing extension an error.
"""

from __future__ import annotations

import os
from types import ModuleType

from rsspline import _purekernels

try:
    from rsspline import _speedups
except ImportError:  # extension not built
    _speedups = None

_BACKENDS = {"python": _purekernels}
if _speedups is not None:
    _BACKENDS["cython"] = _speedups


def available() -> list[str]:
    return sorted(_BACKENDS)


def get(name: str | None = None) -> ModuleType:
    if name is None or name == "auto":
        return DEFAULT
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {available()}") from None


def _default() -> ModuleType:
    forced = os.environ.get("RSSPLINE_BACKEND", "auto")
    if forced != "auto":
        return get(forced)
    return _speedups if _speedups is not None else _purekernels


DEFAULT = _default()
