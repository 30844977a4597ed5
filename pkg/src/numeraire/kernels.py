"""Backend selection for the hot loops.

The compiled extension is used when it was built and importable; setting
``NUMERAIRE_PURE_PYTHON=1`` forces the numpy fallback.  Both expose the
same functions with the same results up to floating-point rounding.
"""

import os

from . import _kernels_py as python_backend

try:
    if os.environ.get("NUMERAIRE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _kernels as compiled_backend
except ImportError:
    compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

em_steps = _active.em_steps
simplex_grid_search = _active.simplex_grid_search
