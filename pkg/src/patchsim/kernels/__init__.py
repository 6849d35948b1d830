"""Backend selection for the hot field-update kernels.

Set ``PATCHSIM_BACKEND=numpy`` to force the pure-numpy fallback, or
``PATCHSIM_BACKEND=numba`` to require the compiled path (import error if
numba is unavailable). Default: numba if importable, else numpy.
"""

import os

_requested = os.environ.get("PATCHSIM_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"PATCHSIM_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import numpy_backend as _impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _impl
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_backend as _impl
        BACKEND = "numpy"

update_e = _impl.update_e
update_h = _impl.update_h

__all__ = ["BACKEND", "update_e", "update_h"]
