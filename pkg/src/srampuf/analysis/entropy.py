"""Min-entropy of biased bits and the estimator used on finite samples."""
from __future__ import annotations

import numpy as np
from scipy import stats


def min_entropy(p_max):
    """``-log2(p_max)``; callers pass ``max(p, 1 - p)``."""
    p = np.asarray(p_max, dtype=float)
    if np.any((p <= 0) | (p > 1)):
        raise ValueError("p_max must lie in (0, 1]")
    out = -np.log2(p)
    return float(out) if out.ndim == 0 else out


def empirical_min_entropy(ones, n):
    """Min-entropy from ``ones`` positive events out of ``n`` samples (vectorized over ``ones``)."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 1):
        raise ValueError("need at least one sample")
    i = np.asarray(ones, dtype=float)
    if np.any((i < 0) | (i > n_arr)):
        raise ValueError("count of ones outside [0, n]")
    frac = i / n_arr
    out = -np.log2(np.maximum(frac, 1.0 - frac))
    return float(out) if out.ndim == 0 else out


def per_bit_min_entropy(bits: np.ndarray) -> np.ndarray:
    """Column-wise estimator over a samples x positions 0/1 matrix."""
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.shape[0] < 1:
        raise ValueError("expected a non-empty 2-D sample matrix")
    return empirical_min_entropy(bits.sum(axis=0, dtype=np.int64), bits.shape[0])


def expected_estimator(p: float, n: int) -> float:
    """Expected value of :func:`empirical_min_entropy` for ``n`` Bernoulli(p) samples."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(n + 1)
    weights = np.exp(stats.binom.logpmf(i, n, p))
    return float(np.dot(weights, empirical_min_entropy(i, n)))


def estimator_std_error(n) -> float:
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("n must be positive")
    out = 1.0 / np.sqrt(n)
    return float(out) if out.ndim == 0 else out
