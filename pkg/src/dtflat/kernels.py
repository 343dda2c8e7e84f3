"""Backend selection for the polynomial kernels.

The compiled extension is used when it was built; ``DTFLAT_PURE_PYTHON=1``
forces the fallback.
"""

import os

if os.environ.get("DTFLAT_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import *  # noqa: F401,F403
    from ._pykernels import BACKEND
else:
    try:
        from ._ckernels import *  # noqa: F401,F403
        from ._ckernels import BACKEND
    except ImportError:
        from ._pykernels import *  # noqa: F401,F403
        from ._pykernels import BACKEND

__all__ = [
    "BACKEND",
    "mul_terms",
    "add_terms",
    "diff_terms",
    "eval_terms",
    "embed_terms",
    "rank_mod",
    "nullspace_mod",
    "rref_int",
]
