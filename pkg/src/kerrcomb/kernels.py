"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Setting ``KERRCOMB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("KERRCOMB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # noqa: F811

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _fallback

sncndn = _impl.sncndn
nonlinear_rotate = _impl.nonlinear_rotate
strang_run = _impl.strang_run

__all__ = ["BACKEND", "sncndn", "nonlinear_rotate", "strang_run"]
