"""Dynamic-programming kernels: compiled core with pure-Python fallback.

The compiled extension (built from ``_dp.pyx``) is preferred when present;
otherwise the drop-in pure-Python module ``_dp_py`` is used.  Both produce
bit-identical results.  Selection can be forced with the environment
variable ``ZRS_EVAL_KERNELS``:

* ``auto`` (default) — compiled if importable, else pure Python
* ``c``    — compiled, raise if the extension is missing
* ``py``   — pure Python
"""

import os

_choice = os.environ.get("ZRS_EVAL_KERNELS", "auto")
if _choice not in ("auto", "c", "py"):
    raise ValueError(
        f"ZRS_EVAL_KERNELS must be one of auto/c/py, got {_choice!r}"
    )

BACKEND = "python"
if _choice in ("auto", "c"):
    try:
        from ._dp import dtw_path_average, levenshtein_ints  # noqa: F401
        BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise

if BACKEND == "python":
    from ._dp_py import dtw_path_average, levenshtein_ints  # noqa: F401

__all__ = ["BACKEND", "dtw_path_average", "levenshtein_ints"]
