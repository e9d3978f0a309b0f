"""Statistics over SRAM readouts and fuzzy-extractor security/reliability models."""
from .entropy import (
    empirical_min_entropy,
    estimator_std_error,
    expected_estimator,
    min_entropy,
    per_bit_min_entropy,
)
from .leakage import BiasSpec, remaining_entropy
from .metrics import (
    EntropyReport,
    bit_alias,
    correlation_matrix,
    frac_hamming_distance,
    hamming_weight_blocks,
    inter_stats,
    intra_stats,
    max_bit_error,
)
from .reliability import (
    ExtractorAssessment,
    analytic_failure_rate,
    assess_grid,
    heterogeneous_failure_rate,
    simulate_failures,
)

__all__ = [
    "BiasSpec", "EntropyReport", "ExtractorAssessment", "analytic_failure_rate", "assess_grid", "bit_alias",
    "correlation_matrix", "empirical_min_entropy", "estimator_std_error", "expected_estimator",
    "frac_hamming_distance", "hamming_weight_blocks", "heterogeneous_failure_rate", "inter_stats", "intra_stats",
    "max_bit_error", "min_entropy", "per_bit_min_entropy", "remaining_entropy", "simulate_failures",
]
