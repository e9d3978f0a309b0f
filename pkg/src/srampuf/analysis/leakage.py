"""Key entropy left after publishing code-offset helper data for a biased i.i.d. source.

Two measures are supported.  ``"shannon"`` is the average-case conditional
Shannon entropy H(reference | helper); ``"min"`` is the average-case
conditional min-entropy -log2 sum_cosets max P.  For a [24,12] Golay block
the helper reveals exactly the syndrome of the reference bits, so both are
computed from the joint syndrome/weight distribution of all 2^24 words.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.optimize import brentq

from .. import ecc

MODES = ("bound", "exact-r1", "decomposed")
MEASURES = ("shannon", "min")


@dataclass(frozen=True)
class BiasSpec:
    p1: float

    def __post_init__(self):
        if not 0 < self.p1 < 1:
            raise ValueError(f"p1 must lie in (0, 1), got {self.p1}")


@lru_cache(maxsize=1)
def syndrome_weight_counts() -> np.ndarray:
    """``counts[s, w]``: number of 24-bit words of Hamming weight ``w`` with syndrome ``s``."""
    counts = np.zeros((4096, 25), dtype=np.int64)
    counts[0, 0] = 1
    contributions = [int(ecc._PARITY[1 << i]) for i in range(12)] + [1 << j for j in range(12)]
    idx = np.arange(4096)
    for c in contributions:
        nxt = counts.copy()
        nxt[idx ^ c, 1:] += counts[:, :-1]
        counts = nxt
    return counts


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def _word_probs(p: float) -> np.ndarray:
    w = np.arange(25)
    return np.exp(w * np.log(p) + (24 - w) * np.log1p(-p)) if 0 < p < 1 else (w == (0 if p == 0 else 24)).astype(float)


def golay_block_entropy(p1: float, measure: str = "shannon") -> float:
    """Remaining entropy of one 24-bit block with i.i.d. ones-probability ``p1``, given its syndrome."""
    p = min(p1, 1.0 - p1)
    counts = syndrome_weight_counts()
    pw = _word_probs(p)
    if measure == "shannon":
        ps = counts @ pw
        ps = ps[ps > 0]
        # clamp rounding residue near full bias
        return max(0.0, 24 * binary_entropy(p) + float(np.sum(ps * np.log2(ps))))
    if measure == "min":
        # p <= 1/2: the lightest word in each coset is the most likely one
        lightest = np.argmax(counts > 0, axis=1)
        return max(0.0, float(-np.log2(pw[lightest].sum())))
    raise ValueError(f"unknown measure {measure!r}")


def repetition_group_entropy(p1: float, r: int, measure: str = "shannon") -> float:
    """Entropy of the repeated bit given the XOR pattern inside its group of ``r`` cells."""
    r = ecc.check_repetitions(r)
    p, q = min(p1, 1 - p1), max(p1, 1 - p1)
    if measure == "shannon":
        total = 0.0
        for m in range(r):
            py, pn = p**m * q ** (r - m), p ** (r - m) * q**m
            total += comb(r - 1, m) * (py + pn) * binary_entropy(py / (py + pn))
        return total
    if measure == "min":
        # each coset {x, not x} shows up twice in the sum over all patterns
        s = sum(comb(r, j) * max(p**j * q ** (r - j), p ** (r - j) * q**j) for j in range(r + 1)) / 2
        return float(-np.log2(s))
    raise ValueError(f"unknown measure {measure!r}")


def effective_bias(group_entropy: float, measure: str = "shannon") -> float:
    """Ones-probability (<= 1/2) of an i.i.d. bit carrying ``group_entropy`` bits."""
    if group_entropy >= 1.0 - 1e-15:
        return 0.5
    if group_entropy <= 0.0:
        return 0.0
    if measure == "min":
        return 1.0 - 2.0 ** (-group_entropy)
    return brentq(lambda x: binary_entropy(x) - group_entropy, 1e-300, 0.5, xtol=1e-15)


def remaining_entropy(config, bias, mode: str = "decomposed", measure: str = "shannon") -> float:
    """Remaining key entropy in bits for a fuzzy-extractor configuration.

    ``bound`` is the conservative per-block estimate
    ``max(0, 24r*Hmin - (24r - 12))``, always a min-entropy figure.
    ``exact-r1`` is exact for a single repetition.  ``decomposed`` first
    conditions each repetition group on its leaked XOR pattern, then treats
    the group as one i.i.d. bit of equal entropy in the Golay stage.
    """
    p1 = bias.p1 if isinstance(bias, BiasSpec) else BiasSpec(float(bias)).p1
    r = config.repetitions
    blocks = config.blocks
    if mode == "bound":
        n = 24 * r
        hmin = -np.log2(max(p1, 1 - p1))
        return float(blocks * max(0.0, n * hmin - (n - 12)))
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    if mode == "exact-r1":
        if r != 1:
            raise ValueError("exact-r1 mode is only defined for a single repetition")
        return blocks * golay_block_entropy(p1, measure)
    if mode == "decomposed":
        p_eff = effective_bias(repetition_group_entropy(p1, r, measure), measure)
        return blocks * golay_block_entropy(p_eff, measure)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
