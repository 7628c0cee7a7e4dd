"""Backend selector for the hot sampling kernels.

Prefers the compiled extension, falls back to the NumPy reference
implementation, and honors ``FUNCBALL_PURE_PYTHON=1`` for forcing the
fallback (used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

if os.environ.get("FUNCBALL_PURE_PYTHON"):
    from . import _reference as _impl
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _reference as _impl

ball_transform = _impl.ball_transform
pow_sum_rows = _impl.pow_sum_rows
pwl_mean_square = _impl.pwl_mean_square


def backend_name() -> str:
    return _impl.BACKEND


def available_backends():
    """All importable backends, compiled first."""
    backends = []
    try:
        from . import _native

        backends.append(_native)
    except ImportError:
        pass
    from . import _reference

    backends.append(_reference)
    return backends
