"""Kernel dispatch: the compiled core when available, numpy otherwise.

Set ``NECKLACE_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names the
implementation in use; ``get_backend(name)`` returns a specific one, which
the parity tests and the benchmark rely on.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

__all__ = ["BACKEND", "get_backend", "refine_point", "refine_pairs", "rasterize",
           "label_components", "union_find", "compiled_available"]


def compiled_available() -> bool:
    return _compiled is not None


def get_backend(name: str | None = None) -> ModuleType:
    if name is None:
        force_py = os.environ.get("NECKLACE_PURE_PYTHON", "").strip() not in ("", "0")
        name = "python" if force_py or _compiled is None else "compiled"
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown backend {name!r}")


_impl = get_backend()
BACKEND = "compiled" if _impl is _compiled else "python"

refine_point = _impl.refine_point
refine_pairs = _impl.refine_pairs
rasterize = _impl.rasterize
label_components = _impl.label_components
union_find = _impl.union_find
