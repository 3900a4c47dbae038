"""Simulation kernel lane selection.

Prefers the compiled extension; falls back to the pure-NumPy lane when the
extension is missing (source install without a C toolchain) or when the
environment variable ADKIT_FORCE_PURE=1 requests the fallback explicitly.
Both lanes are bit-identical on one platform, so the choice only affects
speed.  ``BACKEND`` reports which lane is active ("cython" or "python").
"""

import os

if os.environ.get("ADKIT_FORCE_PURE") == "1":
    from . import _ref as _impl

    BACKEND = "python"
else:
    try:
        from . import _fast as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _ref as _impl

        BACKEND = "python"

euler_paths = _impl.euler_paths
exact_cir_paths = _impl.exact_cir_paths

__all__ = ["BACKEND", "euler_paths", "exact_cir_paths"]
