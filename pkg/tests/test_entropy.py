import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srampuf.analysis import entropy


@pytest.mark.parametrize("p, h", [(0.5, 1.0), (1.0, 0.0), (0.596, 0.7467)])
def test_min_entropy_values(p, h):
    assert entropy.min_entropy(p) == pytest.approx(h, abs=1e-4)


@pytest.mark.parametrize("p", [0.0, -0.1, 1.1])
def test_min_entropy_range(p):
    with pytest.raises(ValueError):
        entropy.min_entropy(p)


def test_empirical_examples():
    assert entropy.empirical_min_entropy(10, 10) == 0
    assert entropy.empirical_min_entropy(0, 10) == 0
    assert entropy.empirical_min_entropy(5, 10) == 1
    assert entropy.empirical_min_entropy(421, 708) == pytest.approx(-np.log2(421 / 708), abs=1e-12)
    # direct evaluation gives 0.74993
    assert entropy.empirical_min_entropy(421, 708) == pytest.approx(0.7499, abs=1e-4)
    with pytest.raises(ValueError):
        entropy.empirical_min_entropy(0, 0)
    with pytest.raises(ValueError):
        entropy.empirical_min_entropy(11, 10)


@given(st.integers(1, 2000).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_eq1_eq2_consistency(i_n):
    i, n = i_n
    assert entropy.empirical_min_entropy(i, n) == pytest.approx(entropy.min_entropy(max(i / n, 1 - i / n)))


def test_expected_estimator_unbiased_source_approaches_one_from_below():
    vals = [entropy.expected_estimator(0.5, n) for n in (10, 100, 1000, 10000)]
    assert all(v < 1 for v in vals)
    assert all(a < b for a, b in zip(vals, vals[1:]))
    # gap to 1 shrinks on the 1/sqrt(n) scale
    assert 1 - vals[-1] < 2 * entropy.estimator_std_error(10000)


def test_expected_estimator_matches_monte_carlo():
    rng = np.random.default_rng(0)
    n, p = 708, 0.596
    samples = entropy.empirical_min_entropy(rng.binomial(n, p, 20_000), n)
    assert samples.mean() == pytest.approx(entropy.expected_estimator(p, n), abs=0.005)


def test_expected_estimator_huge_n_is_stable():
    assert np.isfinite(entropy.expected_estimator(0.3, 200_000))


@pytest.mark.parametrize("n, se", [(100, 0.1), (144, 1 / 12), (1, 1.0)])
def test_std_error(n, se):
    assert entropy.estimator_std_error(n) == pytest.approx(se)
