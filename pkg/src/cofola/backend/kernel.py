"""Kernel selection: the compiled extension when available, else Python.

Set COFOLA_PURE_KERNEL=1 to force the pure-Python implementation (used
by the differential tests and the benchmark).
"""

import os

if os.environ.get("COFOLA_PURE_KERNEL") == "1":
    from . import _pykernel as _impl
else:
    try:
        from . import _speed as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernel as _impl

count_clauses = _impl.count_clauses
IMPLEMENTATION = _impl.__name__.rsplit(".", 1)[-1].lstrip("_")
