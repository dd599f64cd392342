"""Proportional attention: log-cluster-size logit bias and its oracle.

Adding ``log w_j`` to the attention logit of key ``j`` makes a merged token
act as ``w_j`` identical tokens: the softmax it induces equals a standard
softmax over a sequence where key ``j`` is physically duplicated ``w_j``
times. The duplication form is exposed as an independent oracle.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError, ValidationError
from .validation import as_float_matrix


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1:
        raise ValidationError("shape error: weights must be a 1-D array")
    if w.size and w.min() <= 0:
        raise ValidationError("invalid cluster size")
    return w


def proportional_attention_bias(weights, text_len: int = 0) -> np.ndarray:
    """Additive per-key logit bias: ``log w_j`` per visual token, 0 per text token.

    The caller adds this along the key axis of the scaled attention logits,
    together with the usual causal mask.
    """
    w = _check_weights(weights)
    if text_len < 0:
        raise ParameterError("text length must be non-negative")
    return np.concatenate([np.log(w), np.zeros(text_len, dtype=np.float64)])


def attention_with_bias(q_row, keys, values, weights) -> np.ndarray:
    """Single-query attention with the log-weight bias applied to the logits."""
    q = np.asarray(q_row, dtype=np.float64)
    k = as_float_matrix(keys, "keys", 2)
    v = as_float_matrix(values, "values", 2)
    if k.shape[0] != v.shape[0] or k.shape[1] != q.shape[0]:
        raise ValidationError("shape error: inconsistent attention operands")
    logits = k @ q / math.sqrt(q.shape[0]) + proportional_attention_bias(weights)
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    return probs @ v


def attention_by_duplication(q_row, keys, values, weights) -> np.ndarray:
    """Standard attention over a sequence with key ``j`` repeated ``w_j`` times."""
    q = np.asarray(q_row, dtype=np.float64)
    k = as_float_matrix(keys, "keys", 2)
    v = as_float_matrix(values, "values", 2)
    w = _check_weights(weights)
    if not np.all(np.equal(np.mod(w, 1), 0)):
        raise ValidationError("invalid cluster size")
    reps = w.astype(np.int64)
    k_dup = np.repeat(k, reps, axis=0)
    v_dup = np.repeat(v, reps, axis=0)
    logits = k_dup @ q / math.sqrt(q.shape[0])
    logits -= logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    return probs @ v_dup


def proportional_attention_oracle(q_row, keys, values, weights, atol: float = 1e-6) -> np.ndarray:
    """Compute both attention forms, check agreement, return the bias form."""
    biased = attention_with_bias(q_row, keys, values, weights)
    duplicated = attention_by_duplication(q_row, keys, values, weights)
    if not np.allclose(biased, duplicated, atol=atol):
        raise AssertionError(
            "proportional attention disagrees with token duplication: "
            f"max abs diff {np.abs(biased - duplicated).max():.3e}"
        )
    return biased
