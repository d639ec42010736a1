"""Hot numeric kernels, compiled when the extension is available.

``BACKEND`` is ``"cython"`` when the compiled module imported, otherwise
``"python"``. Set ``ROADLABEL_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
bellman_ford = _pykernels.bellman_ford
pair_sup = _pykernels.pair_sup
prune_pieces = _pykernels.prune_pieces

if not os.environ.get("ROADLABEL_PURE_PYTHON"):
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        bellman_ford = _ckernels.bellman_ford
        pair_sup = _ckernels.pair_sup
        prune_pieces = _ckernels.prune_pieces

__all__ = ["BACKEND", "bellman_ford", "pair_sup", "prune_pieces"]
