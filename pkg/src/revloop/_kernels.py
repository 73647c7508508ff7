"""Suffix-LCS table kernels backing the token diff.

Filling the (m+1) x (n+1) longest-common-subsequence table is the one hot
loop in the package (it runs once per sentence pair, across entire corpora),
so it is JIT-compiled with numba by default. A vectorized pure-numpy
fallback computes the identical table.

Selection:
    REVLOOP_KERNEL=numba   force the JIT kernel (error if numba missing)
    REVLOOP_KERNEL=numpy   force the fallback
    unset                  numba when importable, else numpy

``L[i, j]`` is the LCS length of ``a[i:]`` and ``b[j:]``; a suffix table
makes the forward, leftmost-match backtrace in diff.py a plain walk.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    njit = None
    HAS_NUMBA = False


def lcs_table_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-sweep fallback.

    Per row: cand[j] = max(L[i+1, j], L[i+1, j+1] + eq(i, j)), then the
    in-row dependency L[i, j] = max(cand[j], L[i, j+1]) collapses to a
    reversed cumulative maximum.
    """
    m, n = a.shape[0], b.shape[0]
    table = np.zeros((m + 1, n + 1), dtype=np.int32)
    if n == 0 or m == 0:
        return table
    for i in range(m - 1, -1, -1):
        nxt = table[i + 1]
        cand = np.maximum(nxt[:n], nxt[1:] + (b == a[i]))
        table[i, :n] = np.maximum.accumulate(cand[::-1])[::-1]
    return table


if HAS_NUMBA:

    @njit(cache=True)
    def lcs_table_numba(a: np.ndarray, b: np.ndarray) -> np.ndarray:  # pragma: no cover - jitted
        m, n = a.shape[0], b.shape[0]
        table = np.zeros((m + 1, n + 1), dtype=np.int32)
        for i in range(m - 1, -1, -1):
            for j in range(n - 1, -1, -1):
                best = table[i + 1, j]
                if table[i, j + 1] > best:
                    best = table[i, j + 1]
                diag = table[i + 1, j + 1] + (1 if a[i] == b[j] else 0)
                if diag > best:
                    best = diag
                table[i, j] = best
        return table

else:  # pragma: no cover - environment without numba
    lcs_table_numba = None


def _select_kernel():
    choice = os.environ.get("REVLOOP_KERNEL", "").strip().lower()
    if choice == "numpy":
        return lcs_table_numpy, "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("REVLOOP_KERNEL=numba but numba is not installed")
        return lcs_table_numba, "numba"
    if choice:
        raise RuntimeError(f"unknown REVLOOP_KERNEL value: {choice!r}")
    if HAS_NUMBA:
        return lcs_table_numba, "numba"
    return lcs_table_numpy, "numpy"


_KERNEL, _KERNEL_NAME = _select_kernel()


def active_kernel() -> str:
    """Name of the kernel selected at import time ('numba' or 'numpy')."""
    return _KERNEL_NAME


def lcs_table(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Suffix-LCS table for two int32 id sequences."""
    return _KERNEL(a, b)


def encode_pair(a_tokens: list[str], b_tokens: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Map two token lists onto a shared int32 id alphabet."""
    ids: dict[str, int] = {}
    a = np.empty(len(a_tokens), dtype=np.int32)
    for i, tok in enumerate(a_tokens):
        a[i] = ids.setdefault(tok, len(ids))
    b = np.empty(len(b_tokens), dtype=np.int32)
    for i, tok in enumerate(b_tokens):
        b[i] = ids.setdefault(tok, len(ids))
    return a, b
