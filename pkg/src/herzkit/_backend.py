"""Backend selection: compiled extension if importable, NumPy fallback otherwise.

Set ``HERZKIT_BACKEND=python`` or ``=compiled`` to force a choice (forcing
``compiled`` raises if the extension was not built).
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("HERZKIT_BACKEND", "").strip().lower()

if _FORCED == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _FORCED == "compiled":
            raise ImportError(
                "HERZKIT_BACKEND=compiled but the extension is not built; "
                "run `pip install -e . --no-build-isolation` or "
                "`python setup.py build_ext --inplace`"
            )
        _impl = _kernels_py


def backend_name() -> str:
    return _impl.__backend_name__


quasi_norm_points = _impl.quasi_norm_points
maximal_scan_1d = _impl.maximal_scan_1d
maximal_scan_2d = _impl.maximal_scan_2d
