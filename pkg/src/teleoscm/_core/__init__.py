"""Evaluation kernels.

The compiled Cython interpreter is used when the extension is importable;
otherwise the numpy interpreter is used. Set ``TELEOSCM_PURE_PYTHON=1`` to
force the fallback.
"""

from __future__ import annotations

import os

from . import vm_numpy
from .program import Program, compile_expression

try:
    if os.environ.get("TELEOSCM_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernels disabled by TELEOSCM_PURE_PYTHON")
    from . import _vm as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"
run_program = _compiled.run_program if _compiled is not None else vm_numpy.run_program

__all__ = ["BACKEND", "Program", "compile_expression", "run_program", "vm_numpy"]
