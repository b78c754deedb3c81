"""Backend selection for the hot kernels.

The compiled extension is used when it imports cleanly; setting
``STYLEDIV_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("STYLEDIV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"
