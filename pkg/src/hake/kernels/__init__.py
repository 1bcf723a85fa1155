"""Kernel backend selection.

Two interchangeable implementations of the hot loops: a pure-numpy
backend (always present) and an optional compiled extension. Selection
order: the HAKE_BACKEND environment variable (py | cy | auto, default
auto), overridable at runtime with set_backend(). "auto" prefers the
compiled backend when it imported cleanly.

Resolution is lazy: a bad HAKE_BACKEND value surfaces as a UsageError on
first kernel use, not at import time.
"""

import os

from ..errors import UsageError
from . import numpy_backend

_backends = {"py": numpy_backend}
try:
    from . import _cy

    _backends["cy"] = _cy
except ImportError:
    _cy = None

_requested = os.environ.get("HAKE_BACKEND", "auto")
_active = None


def available_backends() -> list:
    return sorted(_backends)


def _resolve():
    global _active
    if _active is None:
        set_backend(_requested)
    return _active


def set_backend(name: str) -> None:
    """Select the kernel backend: 'py', 'cy', or 'auto'."""
    global _active
    if name == "auto":
        _active = _backends.get("cy", numpy_backend)
    elif name in _backends:
        _active = _backends[name]
    else:
        raise UsageError(
            f"kernel backend {name!r} not available; built backends: "
            f"{', '.join(available_backends())} (or 'auto')")


def get_backend() -> str:
    mod = _resolve()
    return "cy" if mod is _cy and _cy is not None else "py"


def triple_distances(*args):
    return _resolve().triple_distances(*args)


def candidate_scores(*args):
    return _resolve().candidate_scores(*args)


def triple_grad_rows(*args):
    return _resolve().triple_grad_rows(*args)


def scatter_add_rows(*args):
    return _resolve().scatter_add_rows(*args)
