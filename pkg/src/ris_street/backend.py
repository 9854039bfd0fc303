"""Kernel backend selection: compiled extension if available, else pure Python.

Set RIS_STREET_BACKEND=python to force the fallback (used by the benchmark).
Both backends are bit-identical on the same inputs.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None

if os.environ.get("RIS_STREET_BACKEND", "").lower() == "python" or _compiled is None:
    kernels: ModuleType = _kernels_py
    BACKEND_NAME = "python"
else:
    kernels = _compiled
    BACKEND_NAME = "cython"


def available_backends() -> dict[str, ModuleType]:
    out: dict[str, ModuleType] = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
