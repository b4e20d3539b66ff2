"""Numeric kernels for vector similarity scoring.

These are the only hot numeric loops in the package: pairwise cosine
similarity (used by the graph builder's similarity rules) and batch
scoring of a question embedding against every stored record (used by
memory retrieval).

Each kernel has two interchangeable implementations:

* a numba ``@njit`` version, compiled lazily on first call, and
* a pure-numpy version.

Selection is by environment flag: set ``DATAFACTORY_NO_NUMBA=1`` to force
the numpy path (also used automatically when numba cannot be imported).
``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import DimensionMismatch, ZeroVector

_FLAG = "DATAFACTORY_NO_NUMBA"


def numba_enabled() -> bool:
    """True when the jitted kernels are active."""
    if os.environ.get(_FLAG, "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


# --- pure numpy implementations ---------------------------------------------


# Dot products accumulate left to right (cumsum, not BLAS) so both
# implementations produce bit-identical scores: the jitted kernels sum
# sequentially, and blocked BLAS accumulation would reorder additions
# and flip the ranking of mathematically tied candidates.


def _seq_dot(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.cumsum(u * v)[-1]) if len(u) else 0.0


def _cosine_np(u: np.ndarray, v: np.ndarray) -> float:
    nu = math.sqrt(_seq_dot(u, u))
    nv = math.sqrt(_seq_dot(v, v))
    return _seq_dot(u, v) / (nu * nv)


def _batch_cosine_np(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    out = np.zeros(len(matrix), dtype=np.float64)
    if matrix.shape[1] == 0:
        return out
    norms = np.sqrt(np.cumsum(matrix * matrix, axis=1)[:, -1])
    qn = math.sqrt(_seq_dot(query, query))
    scores = np.cumsum(matrix * query, axis=1)[:, -1]
    nonzero = norms > 0.0
    if qn > 0.0:
        out[nonzero] = scores[nonzero] / (norms[nonzero] * qn)
    return out


# --- numba implementations (compiled lazily) ----------------------------------

_jitted: dict[str, object] = {}


def _compile() -> None:
    from numba import njit

    @njit(cache=True)
    def cosine_nb(u, v):  # pragma: no cover - exercised via dispatch
        dot = 0.0
        nu = 0.0
        nv = 0.0
        for i in range(u.shape[0]):
            dot += u[i] * v[i]
            nu += u[i] * u[i]
            nv += v[i] * v[i]
        return dot / (math.sqrt(nu) * math.sqrt(nv))

    @njit(cache=True)
    def batch_cosine_nb(matrix, query):  # pragma: no cover
        n = matrix.shape[0]
        d = matrix.shape[1]
        qn = 0.0
        for j in range(d):
            qn += query[j] * query[j]
        qn = math.sqrt(qn)
        out = np.zeros(n, dtype=np.float64)
        if qn == 0.0:
            return out
        for i in range(n):
            dot = 0.0
            norm = 0.0
            for j in range(d):
                dot += matrix[i, j] * query[j]
                norm += matrix[i, j] * matrix[i, j]
            if norm > 0.0:
                out[i] = dot / (math.sqrt(norm) * qn)
        return out

    _jitted["cosine"] = cosine_nb
    _jitted["batch_cosine"] = batch_cosine_nb


def _kernel(name: str):
    if not numba_enabled():
        return None
    if name not in _jitted:
        _compile()
    return _jitted[name]


# --- public API ------------------------------------------------------------------


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two nonzero vectors of equal dimension.

    Raises :class:`DimensionMismatch` / :class:`ZeroVector` on bad input;
    the result is clamped to [-1, 1] against float rounding.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape:
        raise DimensionMismatch(f"cosine over shapes {u.shape} and {v.shape}")
    # norm check, not element check: squared norms can underflow to zero
    if float(np.dot(u, u)) == 0.0 or float(np.dot(v, v)) == 0.0:
        raise ZeroVector("cosine similarity is undefined for zero-norm vectors")
    fn = _kernel("cosine")
    value = fn(u, v) if fn is not None else _cosine_np(u, v)
    return max(-1.0, min(1.0, float(value)))


def batch_cosine(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine of ``query`` against every row of ``matrix``.

    Zero rows (and a zero query) score 0.0 rather than raising; retrieval
    treats them as "no similarity".
    """
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    query = np.ascontiguousarray(query, dtype=np.float64)
    if matrix.ndim != 2 or query.ndim != 1 or matrix.shape[1] != query.shape[0]:
        raise DimensionMismatch(
            f"batch cosine over shapes {matrix.shape} and {query.shape}"
        )
    fn = _kernel("batch_cosine")
    out = fn(matrix, query) if fn is not None else _batch_cosine_np(matrix, query)
    return np.clip(out, -1.0, 1.0)
