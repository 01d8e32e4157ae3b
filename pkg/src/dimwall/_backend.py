"""Select the compiled core when importable, else the numpy fallback."""

import os

if os.environ.get("DIMWALL_PURE_PYTHON"):
    from . import _pycore as core
else:
    try:
        from . import _ccore as core
    except ImportError:
        from . import _pycore as core

BACKEND = "compiled" if core.__name__.endswith("_ccore") else "python"

__all__ = ["core", "BACKEND"]
