"""Cosine and CSLS similarity primitives shared by aligners and evaluation.

All functions operate on row-vector matrices (one embedding per row) and are
exact: no approximate nearest-neighbor shortcuts. Larger sweeps are processed
in row blocks to bound memory.
"""

from __future__ import annotations

import numpy as np

# Block size for chunked similarity sweeps; bounds peak memory at
# roughly block * m floats.
_BLOCK = 4096


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Return a copy with each nonzero row scaled to unit Euclidean norm."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All-pairs cosine similarity between rows of `a` and rows of `b`."""
    return unit_rows(a) @ unit_rows(b).T


def topk_mean(scores: np.ndarray, k: int, axis: int = 1) -> np.ndarray:
    """Mean of the k largest entries along `axis`; k is clamped to the size."""
    n = scores.shape[axis]
    k = min(k, n)
    if k == n:
        return scores.mean(axis=axis)
    part = np.partition(scores, n - k, axis=axis)
    sl = [slice(None)] * scores.ndim
    sl[axis] = slice(n - k, n)
    return part[tuple(sl)].mean(axis=axis)


def csls_hubness(vectors: np.ndarray, pool: np.ndarray, n_neighbors: int) -> np.ndarray:
    """Per-row mean cosine of each vector to its n nearest neighbors in `pool`.

    This is the local-scaling term r(.) of CSLS. n_neighbors is clamped to
    the pool size.
    """
    va = unit_rows(vectors)
    pb = unit_rows(pool)
    out = np.empty(va.shape[0])
    for start in range(0, va.shape[0], _BLOCK):
        sims = va[start:start + _BLOCK] @ pb.T
        out[start:start + _BLOCK] = topk_mean(sims, n_neighbors, axis=1)
    return out


def csls_scores(query: np.ndarray, candidates: np.ndarray,
                candidate_hubness: np.ndarray, query_hubness: float = 0.0) -> np.ndarray:
    """CSLS scores of one query against all candidate rows.

    score_j = 2 * cos(query, cand_j) - r(cand_j) - r(query), with the
    hubness terms precomputed (see `csls_hubness`). The query-side term is
    a constant shift and does not affect the induced ranking.
    """
    q = query / (np.linalg.norm(query) or 1.0)
    cos = unit_rows(candidates) @ q
    return 2.0 * cos - candidate_hubness - query_hubness


def csls_matrix(src: np.ndarray, tgt: np.ndarray, n_neighbors: int) -> np.ndarray:
    """All-pairs CSLS matrix: 2*cos - r_src[:, None] - r_tgt[None, :].

    r_src is each source row's mean cosine to its n nearest targets; r_tgt
    each target row's mean cosine to its n nearest sources.
    """
    cos = cosine_matrix(src, tgt)
    r_src = topk_mean(cos, n_neighbors, axis=1)
    r_tgt = topk_mean(cos, n_neighbors, axis=0)
    return 2.0 * cos - r_src[:, None] - r_tgt[None, :]


def similarity_matrix(src: np.ndarray, tgt: np.ndarray, metric: str = "cosine",
                      csls_n: int = 10) -> np.ndarray:
    """Dispatch on metric name; metric is one of {cosine, csls}."""
    if metric == "cosine":
        return cosine_matrix(src, tgt)
    if metric == "csls":
        return csls_matrix(src, tgt, csls_n)
    raise ValueError(f"unknown similarity metric: {metric!r}")


def mutual_argmax_pairs(sim: np.ndarray) -> list[tuple[int, int]]:
    """Index pairs (i, j) that are each other's row/column argmax.

    Ties resolve to the lowest index (np.argmax convention), which for
    frequency-ordered vocabularies prefers the more frequent word.
    """
    fwd = np.argmax(sim, axis=1)
    bwd = np.argmax(sim, axis=0)
    return [(i, int(j)) for i, j in enumerate(fwd) if bwd[j] == i]
