"""Reconstruction failure rates: closed-form models and full-extractor Monte Carlo."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .. import fuzzy_extractor as fe
from ..fuzzy_extractor import FuzzyConfig
from .leakage import remaining_entropy

GOLAY_CORRECTABLE = 3


def _check_pe(p_e: float) -> float:
    if not 0.0 <= p_e <= 0.5:
        raise ValueError(f"bit error probability must lie in [0, 0.5], got {p_e}")
    return float(p_e)


def _total(per_block: np.ndarray) -> float:
    # 1 - prod(1 - b) without cancellation for tiny b
    return float(-np.expm1(np.sum(np.log1p(-np.asarray(per_block, dtype=float)))))


def group_failure(p_e: float, r: int) -> float:
    """Probability that majority voting over ``r`` copies returns the wrong bit."""
    return float(stats.binom.sf(r // 2, r, _check_pe(p_e)))


def analytic_failure_rate(p_e: float, config: FuzzyConfig) -> float:
    """Failure probability for i.i.d. bit errors with probability ``p_e`` in every cell.

    A Golay block fails once four or more of its 24 majority votes are wrong.
    """
    q = group_failure(p_e, config.repetitions)
    per_block = stats.binom.sf(GOLAY_CORRECTABLE, 24, q)
    return _total(np.full(config.blocks, per_block))


def _poisson_binomial(probs: np.ndarray) -> np.ndarray:
    """Row-wise count distribution of independent Bernoulli trials (last axis)."""
    probs = np.asarray(probs, dtype=float)
    dist = np.zeros(probs.shape[:-1] + (probs.shape[-1] + 1,))
    dist[..., 0] = 1.0
    for k in range(probs.shape[-1]):
        p = probs[..., k:k + 1]
        dist[..., 1:] = dist[..., 1:] * (1 - p) + dist[..., :-1] * p
        dist[..., :1] *= 1 - p
    return dist


def heterogeneous_failure_rate(flip_probs: np.ndarray, config: FuzzyConfig) -> float:
    """Exact failure probability when cell ``i`` flips independently with ``flip_probs[i]``.

    Errors are counted against the cell's preferred value, i.e. enrollment
    on the noise-free reference pattern.
    """
    flip_probs = np.asarray(flip_probs, dtype=float)
    if flip_probs.shape != (config.sram_len_bits,):
        raise ValueError(f"need {config.sram_len_bits} flip probabilities, got {flip_probs.shape}")
    r = config.repetitions
    groups = _poisson_binomial(flip_probs.reshape(-1, r))
    q = groups[:, r // 2 + 1:].sum(axis=1).reshape(config.blocks, 24)
    per_block = _poisson_binomial(q)[:, GOLAY_CORRECTABLE + 1:].sum(axis=1)
    return _total(np.clip(per_block, 0.0, 1.0))


@dataclass(frozen=True)
class MonteCarloResult:
    trials: int
    failures: int

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    def standard_error(self, p: float | None = None) -> float:
        p = self.rate if p is None else p
        return float(np.sqrt(p * (1 - p) / self.trials))


def simulate_failures(
    config: FuzzyConfig,
    trials: int,
    rng: np.random.Generator,
    p_e: float | None = None,
    flip_probs: np.ndarray | None = None,
    chunk: int = 20_000,
    fresh_enrollment_every_chunk: bool = True,
) -> MonteCarloResult:
    """Run the full enroll/reconstruct path on noisy copies of a random reference.

    Noise is i.i.d. ``p_e`` or per-cell ``flip_probs``.  A trial fails when
    decoding reports an uncorrectable block or the recovered reference
    differs from the enrolled one.
    """
    if (p_e is None) == (flip_probs is None):
        raise ValueError("give exactly one of p_e and flip_probs")
    n = config.sram_len_bits
    thresh = np.float32(_check_pe(p_e)) if p_e is not None else np.asarray(flip_probs, dtype=np.float32)
    failures = done = 0
    helper = reference = None
    while done < trials:
        m = min(chunk, trials - done)
        if helper is None or fresh_enrollment_every_chunk:
            reference = rng.integers(0, 2, n, dtype=np.uint8)
            helper, _ = fe.enroll(reference, config, fe.FixedOffsets(rng.bytes(config.offset_len_bytes)))
        noise = (rng.random((m, n), dtype=np.float32) < thresh).view(np.uint8)
        recovered, ok = fe.recover_references(noise ^ reference, helper)
        wrong = ~ok | np.any(recovered != reference, axis=1)
        failures += int(np.count_nonzero(wrong))
        done += m
    return MonteCarloResult(trials, failures)


@dataclass(frozen=True)
class ExtractorAssessment:
    offset_len_bytes: int
    repetitions: int
    sram_bits: int
    remaining_entropy_bits: float
    analytic_failure_rate: float
    empirical_failure_rate: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def assess_grid(
    p1: float,
    p_e: float,
    offsets=range(9, 25),
    reps=(1, 3, 5, 7, 9, 11, 13),
    measure: str = "shannon",
) -> list[ExtractorAssessment]:
    rows = []
    for off in offsets:
        if (off * 8) % 12:
            continue
        for r in reps:
            cfg = FuzzyConfig(off, r)
            rows.append(ExtractorAssessment(
                off, r, cfg.sram_len_bits,
                remaining_entropy(cfg, p1, "decomposed", measure),
                analytic_failure_rate(p_e, cfg),
            ))
    return rows
