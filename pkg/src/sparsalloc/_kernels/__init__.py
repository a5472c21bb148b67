"""Kernel backend selection.

The hot numeric kernels exist twice: a Cython extension
(:mod:`sparsalloc._kernels._core`) and a pure-Python mirror
(:mod:`sparsalloc._kernels._py`). The compiled one is used when it imports;
otherwise the package silently falls back to the Python version.

Set ``SPARSALLOC_KERNELS=python`` or ``SPARSALLOC_KERNELS=compiled`` to force
a backend (forcing ``compiled`` raises if the extension is unavailable).
"""

import os

_forced = os.environ.get("SPARSALLOC_KERNELS", "").strip().lower()

if _forced in ("python", "py"):
    from sparsalloc._kernels import _py as _impl

    BACKEND = "python"
elif _forced in ("compiled", "c", "cython"):
    from sparsalloc._kernels import _core as _impl  # type: ignore[no-redef]

    BACKEND = "compiled"
elif _forced:
    raise ValueError(f"unknown SPARSALLOC_KERNELS value: {_forced!r}")
else:
    try:
        from sparsalloc._kernels import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from sparsalloc._kernels import _py as _impl

        BACKEND = "python"

matmul = _impl.matmul
frob_norm_sq = _impl.frob_norm_sq
frob_diff_sq = _impl.frob_diff_sq
row_sq_norms = _impl.row_sq_norms
elementwise_mul = _impl.elementwise_mul
abs_values = _impl.abs_values
wanda_scores = _impl.wanda_scores
relu = _impl.relu
sym_eigvals = _impl.sym_eigvals
