"""Kernel backend selection: compiled extension with numpy fallback.

The compiled `_native` module is used when importable; otherwise the
pure-numpy `reference` module takes over. Set QUANTABURST_BACKEND=numpy
(or =native) to force a choice, or call `set_backend` at runtime — the
benchmark suite uses this to compare both.
"""

from __future__ import annotations

import os

from . import reference

try:
    from . import _native
except ImportError:
    _native = None

_BACKENDS = {"numpy": reference}
if _native is not None:
    _BACKENDS["native"] = _native


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def _default_backend() -> str:
    forced = os.environ.get("QUANTABURST_BACKEND", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(
                f"QUANTABURST_BACKEND={forced!r} requested but only "
                f"{available_backends()} are available"
            )
        return forced
    return "native" if "native" in _BACKENDS else "numpy"


_active_name = _default_backend()
_active = _BACKENDS[_active_name]


def active_backend() -> str:
    return _active_name


def set_backend(name: str) -> None:
    """Switch kernel backend globally ('native' or 'numpy')."""
    global _active, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: "
                         f"{available_backends()}")
    _active_name = name
    _active = _BACKENDS[name]


def sad_search(*args, **kwargs):
    return _active.sad_search(*args, **kwargs)


def warp_bilinear(*args, **kwargs):
    return _active.warp_bilinear(*args, **kwargs)
