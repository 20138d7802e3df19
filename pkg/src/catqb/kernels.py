"""Backend selection for the RK4 stepping kernel.

The compiled extension is preferred when importable; the numpy fallback is
behaviorally identical. Set CATQB_PURE_PYTHON=1 to force the fallback (used
by the benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

if os.environ.get("CATQB_PURE_PYTHON", "") == "1":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

Generator = _impl.Generator


def backend() -> str:
    return BACKEND


def make_generator(parts):
    """Build a stepping kernel from lindblad.GeneratorParts."""
    return Generator(parts.drift, list(parts.jumps))
