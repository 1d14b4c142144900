"""Pick the compiled kernels when available, else the numpy fallback.

Set ``MDSFOUNTAIN_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

kernels = _fallback
NAME = "python"

if os.environ.get("MDSFOUNTAIN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        kernels = _kernels
        NAME = "cython"


def available():
    """Mapping of backend name to module for every importable backend."""
    found = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
