"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python backend
is a drop-in replacement producing bit-identical results. Set
``HSIKIT_KERNEL=python`` (or ``c``) to force a backend; ``c`` raises if the
extension is missing instead of silently slowing down.
"""

from __future__ import annotations

import os


def load_backend(name: str = "auto"):
    if name not in ("auto", "c", "python"):
        raise ValueError(f"unknown kernel backend {name!r} (use auto, c, or python)")
    if name != "python":
        try:
            from . import _kernels
            return _kernels
        except ImportError:
            if name == "c":
                raise
    from . import _kernels_py
    return _kernels_py


_impl = load_backend(os.environ.get("HSIKIT_KERNEL", "auto"))

BACKEND = _impl.BACKEND_NAME
slic_iterate = _impl.slic_iterate
watershed_grow = _impl.watershed_grow
label_components = _impl.label_components
