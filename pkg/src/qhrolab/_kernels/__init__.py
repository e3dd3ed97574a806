"""Kernel backend selection.

Prefers the compiled Cython kernel; falls back to the numpy implementation
when the extension is unavailable or QHRO_FORCE_PY=1 is set.
"""

import os

if os.environ.get("QHRO_FORCE_PY") == "1":
    from ._fallback import BACKEND, apply_gate
else:
    try:
        from ._core import BACKEND, apply_gate  # type: ignore[attr-defined]
    except ImportError:
        from ._fallback import BACKEND, apply_gate

__all__ = ["BACKEND", "apply_gate"]
