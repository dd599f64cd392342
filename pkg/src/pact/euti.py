"""Attention-free token importance scoring and percentile split.

Each token's score is the per-head softmax of its key dotted with a pooled
("global") query, averaged over heads and scaled by the hidden-state norm.
Keys and queries must be taken before rotary embeddings so that scores carry
no positional bias. A fraction ``lam`` of tokens (the lowest-scoring) is
then labeled unimportant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .validation import as_float_matrix, check_same_tokens


def _sum_tokens(values: np.ndarray, axis: int) -> np.ndarray:
    # Summation over the token axis is done in sorted order, so results are
    # bit-identical under any permutation of the tokens.
    return np.sort(values, axis=axis).sum(axis=axis)


@dataclass
class ImportanceSplit:
    """Scores plus the important/unimportant index partition."""

    scores: np.ndarray
    important: np.ndarray
    unimportant: np.ndarray
    lam: float

    @property
    def n_tokens(self) -> int:
        return self.scores.shape[0]


def global_query(queries) -> np.ndarray:
    """Per-head mean of all query vectors: (n, n_h, d_h) -> (n_h, d_h)."""
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim != 3:
        raise ValidationError("shape error: queries must have shape (n, n_h, d_h)")
    if q.shape[0] == 0:
        raise ValidationError("empty token set")
    return _sum_tokens(q, axis=0) / q.shape[0]


def euti_scores(hidden, keys, queries) -> np.ndarray:
    """Importance score per token.

    ``s_i = mean_j softmax_i(k_i^(j) . q_global^(j)) * ||h_i||_2`` where the
    softmax normalizes over tokens within each head. Logits are not scaled
    by ``1/sqrt(d_h)``.
    """
    h = as_float_matrix(hidden, "hidden states", 2)
    k = np.asarray(keys, dtype=np.float64)
    q = np.asarray(queries, dtype=np.float64)
    if k.ndim != 3 or q.ndim != 3:
        raise ValidationError("shape error: keys and queries must have shape (n, n_h, d_h)")
    if k.shape != q.shape:
        raise ValidationError("shape error: keys and queries must have equal shapes")
    check_same_tokens(h.shape[0], k.shape[0], "hidden states", "keys")
    if not (np.isfinite(k).all() and np.isfinite(q).all()):
        raise ValidationError("shape error: keys/queries contain non-finite values")

    q_global = global_query(q)  # (n_h, d_h)
    logits = np.einsum("nhd,hd->hn", k, q_global)  # (n_h, n)
    logits -= logits.max(axis=1, keepdims=True)  # stable softmax
    exp = np.exp(logits)
    softmax = exp / _sum_tokens(exp, axis=1)[:, None]
    norms = np.sqrt(np.einsum("nd,nd->n", h, h))
    return softmax.mean(axis=0) * norms


def split_tokens(scores, lam: float) -> ImportanceSplit:
    """Label the ``floor(lam * n)`` lowest-scoring tokens unimportant.

    Ties are broken by pruning the lower index first, making the partition
    deterministic.
    """
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("invalid pruning percentage")
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise ValidationError("shape error: scores must be a 1-D array")
    n = s.shape[0]
    n_pruned = math.floor(lam * n)
    ascending = np.lexsort((np.arange(n), s))
    return ImportanceSplit(
        scores=s,
        important=np.sort(ascending[n_pruned:]),
        unimportant=np.sort(ascending[:n_pruned]),
        lam=float(lam),
    )
