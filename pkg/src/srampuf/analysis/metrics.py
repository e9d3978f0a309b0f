"""Uniqueness and reliability metrics over sets of SRAM readouts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sram_model import SramReadout
from .entropy import per_bit_min_entropy

DEFAULT_BLOCK_BYTES = 1024


def as_matrix(readouts) -> np.ndarray:
    """Stack readouts (SramReadout objects or bit arrays) into a rows x bits uint8 matrix."""
    if isinstance(readouts, np.ndarray):
        mat = readouts
    else:
        rows = [r.bits if isinstance(r, SramReadout) else np.asarray(r) for r in readouts]
        if len({len(r) for r in rows}) > 1:
            raise ValueError("readouts have mixed lengths")
        mat = np.stack(rows) if rows else np.zeros((0, 0), dtype=np.uint8)
    if mat.ndim != 2:
        raise ValueError("expected one readout per row")
    return mat.astype(np.uint8, copy=False)


def _blocks(n_bits: int, block_bytes: int) -> list[slice]:
    size = block_bytes * 8
    if size <= 0 or n_bits % size:
        raise ValueError(f"block size of {block_bytes} bytes does not divide {n_bits} bits")
    return [slice(s, s + size) for s in range(0, n_bits, size)]


def bit_alias(readouts) -> np.ndarray:
    mat = as_matrix(readouts)
    if mat.shape[0] < 2:
        raise ValueError("bit-alias needs at least two devices")
    return mat.mean(axis=0)


def hamming_weight_blocks(readout, block_bytes: int = DEFAULT_BLOCK_BYTES) -> np.ndarray:
    bits = readout.bits if isinstance(readout, SramReadout) else np.asarray(readout)
    return np.array([bits[s].mean() for s in _blocks(bits.size, block_bytes)])


def frac_hamming_distance(a, b) -> float:
    a = a.bits if isinstance(a, SramReadout) else np.asarray(a)
    b = b.bits if isinstance(b, SramReadout) else np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("distance between readouts of different lengths")
    if a.size == 0:
        raise ValueError("distance of empty readouts")
    return float(np.count_nonzero(a != b)) / a.size


def pairwise_distances(mat: np.ndarray) -> np.ndarray:
    """All fractional distances between rows, as a condensed (upper triangle) vector."""
    x = mat.astype(np.float32)
    ones = x.sum(axis=1, dtype=np.float64)
    inner = (x @ x.T).astype(np.float64)
    dist = (ones[:, None] + ones[None, :] - 2.0 * inner) / mat.shape[1]
    iu = np.triu_indices(mat.shape[0], k=1)
    return dist[iu]


@dataclass(frozen=True)
class CorrelationResult:
    matrix: np.ndarray
    constant_rows: np.ndarray


def correlation_matrix(readouts) -> CorrelationResult:
    """Pearson coefficients between readouts taken as 0/1 vectors.

    Constant readouts have no variance; their coefficients against others
    are set to 0 and they are listed in ``constant_rows``.
    """
    mat = as_matrix(readouts)
    if mat.shape[0] < 2:
        raise ValueError("correlation needs at least two readouts")
    x = mat.astype(np.float64)
    x -= x.mean(axis=1, keepdims=True)
    norms = np.sqrt((x * x).sum(axis=1))
    constant = norms == 0
    norms[constant] = 1.0
    corr = (x @ x.T) / np.outer(norms, norms)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    np.fill_diagonal(corr, 1.0)
    return CorrelationResult(np.clip(corr, -1.0, 1.0), np.flatnonzero(constant))


@dataclass(frozen=True)
class DistanceSummary:
    mean: float
    q1: float
    median: float
    q3: float
    minimum: float
    maximum: float

    @classmethod
    def of(cls, values: np.ndarray) -> "DistanceSummary":
        q1, med, q3 = np.percentile(values, [25, 50, 75])  # linear interpolation
        return cls(float(values.mean()), float(q1), float(med), float(q3), float(values.min()), float(values.max()))


@dataclass(frozen=True)
class BlockStats:
    block_index: int
    distances: DistanceSummary
    min_entropy: float


@dataclass(frozen=True)
class EntropyReport:
    per_block: list[BlockStats]
    block_size_bytes: int
    p1_hat: float
    hmin_hat: float

    @property
    def mean_distance(self) -> float:
        return float(np.mean([b.distances.mean for b in self.per_block]))


def _report(readouts, block_bytes: int) -> EntropyReport:
    mat = as_matrix(readouts)
    if mat.shape[0] < 2:
        raise ValueError("need at least two readouts")
    per_block = []
    for k, sl in enumerate(_blocks(mat.shape[1], block_bytes)):
        sub = mat[:, sl]
        per_block.append(BlockStats(k, DistanceSummary.of(pairwise_distances(sub)),
                                    float(per_bit_min_entropy(sub).mean())))
    return EntropyReport(per_block, block_bytes, float(mat.mean()), float(per_bit_min_entropy(mat).mean()))


def intra_stats(readouts, block_bytes: int = DEFAULT_BLOCK_BYTES) -> EntropyReport:
    """Repeated readouts of one device: noise distances and noise entropy."""
    return _report(readouts, block_bytes)


def inter_stats(readouts, block_bytes: int = DEFAULT_BLOCK_BYTES) -> EntropyReport:
    """One readout per device: uniqueness distances and device-to-device entropy."""
    return _report(readouts, block_bytes)


@dataclass(frozen=True)
class BitErrorReport:
    maximum: float
    per_block: np.ndarray
    per_bit: np.ndarray


def max_bit_error(readouts, reference="first", block_bytes: int | None = None) -> BitErrorReport:
    """Per-bit flip frequency against a reference, and its maximum.

    ``reference`` is ``"first"`` (the first readout, which is then excluded
    from the frequency), ``"majority"`` (per-bit majority over all readouts)
    or an explicit bit array such as a known enrollment pattern.
    """
    mat = as_matrix(readouts)
    if mat.shape[0] < 2:
        raise ValueError("bit error estimation needs at least two readouts")
    if isinstance(reference, str):
        if reference == "first":
            ref, others = mat[0], mat[1:]
        elif reference == "majority":
            ref, others = (2 * mat.sum(axis=0, dtype=np.int64) > mat.shape[0]).astype(np.uint8), mat
        else:
            raise ValueError(f"unknown reference {reference!r}")
    else:
        ref, others = np.asarray(reference, dtype=np.uint8), mat
        if ref.shape != mat.shape[1:]:
            raise ValueError("reference length does not match readouts")
    per_bit = (others != ref).mean(axis=0)
    if block_bytes is None:
        per_block = np.array([per_bit.max()])
    else:
        per_block = np.array([per_bit[s].max() for s in _blocks(per_bit.size, block_bytes)])
    return BitErrorReport(float(per_bit.max()), per_block, per_bit)
