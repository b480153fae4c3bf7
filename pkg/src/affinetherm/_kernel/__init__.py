"""Integrator core selection.

Imports the compiled RK4 core when the extension was built, otherwise the
pure-Python fallback with identical semantics.  The two are kept in
lockstep; tests compare them directly whenever both are importable.
Setting AFFINETHERM_PURE_PYTHON=1 skips the compiled core, which is how
the fallback is exercised end to end on a machine that has the extension.
"""

import os

_force_python = os.environ.get("AFFINETHERM_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    from . import _fallback as _impl

    HAVE_COMPILED = False
else:
    try:
        from . import _core as _impl

        HAVE_COMPILED = True
    except ImportError:
        from . import _fallback as _impl

        HAVE_COMPILED = False

BACKEND = _impl.BACKEND
KIND_SINGLE = 0
KIND_TWO = 1

integrate_canonical = _impl.integrate_canonical

__all__ = ["BACKEND", "HAVE_COMPILED", "KIND_SINGLE", "KIND_TWO", "integrate_canonical"]