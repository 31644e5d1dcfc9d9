"""Backend selection for the RK4 kernels.

The compiled extension is used when it imports; otherwise the pure-Python
implementation is used. Set ``PARAMDRIVE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("PARAMDRIVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
else:
    _compiled = None

if _compiled is not None:
    rk4_scalar = _compiled.rk4_scalar
    rk4_matrix = _compiled.rk4_matrix
    BACKEND = "compiled"
else:
    rk4_scalar = _kernels_py.rk4_scalar
    rk4_matrix = _kernels_py.rk4_matrix


def backends():
    """Return ``{name: (rk4_scalar, rk4_matrix)}`` for every available backend."""
    out = {"python": (_kernels_py.rk4_scalar, _kernels_py.rk4_matrix)}
    if _compiled is not None:
        out["compiled"] = (_compiled.rk4_scalar, _compiled.rk4_matrix)
    return out
