"""End-to-end acceptance checks, one group per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
from itertools import combinations

import numpy as np
import pytest

from srampuf import cli, ecc, seeding
from srampuf import fuzzy_extractor as fe
from srampuf import sram_model as sm
from srampuf.analysis import entropy, leakage, metrics, reliability

VALID_OFFSETS = [b for b in range(9, 25) if (b * 8) % 12 == 0]


# ---------------------------------------------------------------- 1

@pytest.mark.criterion(1)
def test_golay_all_codewords_all_correctable_patterns():
    patterns = [sum(1 << p for p in pos) for w in range(4) for pos in combinations(range(24), w)]
    assert len(patterns) == 2325
    weights = np.array([bin(e).count("1") for e in patterns])
    errors = np.array(patterns, dtype=np.uint32)
    data = np.arange(4096, dtype=np.uint32)
    codewords = ecc.golay_encode_array(data)
    for start in range(0, 4096, 512):
        words = codewords[start:start + 512, None] ^ errors[None, :]
        decoded, corrected = ecc.golay_decode_array(words)
        assert np.array_equal(decoded, np.broadcast_to(data[start:start + 512, None], decoded.shape))
        assert np.array_equal(corrected, np.broadcast_to(weights, corrected.shape))


@pytest.mark.criterion(1)
def test_golay_weight4_patterns_uncorrectable():
    rng = np.random.default_rng(1)
    n = 20_000
    pos = np.argsort(rng.random((n, 24)), axis=1)[:, :4]
    errors = (np.uint32(1) << pos.astype(np.uint32)).sum(axis=1, dtype=np.uint32)
    data = rng.integers(0, 4096, n).astype(np.uint32)
    _, corrected = ecc.golay_decode_array(ecc.golay_encode_array(data) ^ errors)
    assert np.all(corrected == -1)


@pytest.mark.criterion(1)
def test_golay_weight_enumerator():
    weights = np.array([bin(int(c)).count("1") for c in ecc.all_codewords()])
    values, counts = np.unique(weights, return_counts=True)
    assert dict(zip(values.tolist(), counts.tolist())) == {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}


# ---------------------------------------------------------------- 2

@pytest.mark.criterion(2)
def test_length_law_over_grid():
    for off in VALID_OFFSETS:
        for r in ecc.REPETITIONS:
            cfg = fe.FuzzyConfig(off, r)
            assert cfg.sram_len_bits == off * 8 * 2 * r == ecc.concat_length(off * 8, r)
            assert len(ecc.concat_encode(np.zeros(off * 8, np.uint8), r)) == cfg.sram_len_bits
    assert fe.FuzzyConfig(9, 1).sram_len_bits == 144
    assert fe.FuzzyConfig(9, 1).sram_len_bytes == 18


# ---------------------------------------------------------------- 3

@pytest.mark.criterion(3)
def test_budgets_exact():
    b = seeding.seed_budget(256, 0.07, 256)
    assert (b.required_bits, b.required_bytes) == (7314, 914)
    b = seeding.seed_budget(32, 0.07, 0)
    assert (b.required_bits, b.required_bytes) == (457, 57)
    assert seeding.naive_key_budget(128, 0.75) == 171


# ---------------------------------------------------------------- 4

@pytest.mark.criterion(4)
def test_unbiased_source_keeps_twelve_bits_per_block():
    for off in VALID_OFFSETS:
        for r in ecc.REPETITIONS:
            cfg = fe.FuzzyConfig(off, r)
            assert leakage.remaining_entropy(cfg, 0.5) == pytest.approx(12 * cfg.blocks, abs=1e-9)


@pytest.mark.criterion(4)
@pytest.mark.parametrize("r, expected", [(1, 182), (5, 144), (13, 82)])
def test_remaining_entropy_reference_values(r, expected):
    got = leakage.remaining_entropy(fe.FuzzyConfig(24, r), 0.596, "decomposed")
    assert abs(got - expected) <= 10, got


@pytest.mark.criterion(4)
def test_remaining_entropy_monotone():
    cfg = lambda r: fe.FuzzyConfig(24, r)  # noqa: E731
    by_r = [leakage.remaining_entropy(cfg(r), 0.596) for r in ecc.REPETITIONS]
    assert all(a > b for a, b in zip(by_r, by_r[1:]))
    for r in (1, 5, 13):
        by_bias = [leakage.remaining_entropy(cfg(r), p) for p in (0.5, 0.52, 0.55, 0.596, 0.65, 0.75, 0.9)]
        assert all(a > b for a, b in zip(by_bias, by_bias[1:]))


# ---------------------------------------------------------------- 5

@pytest.mark.criterion(5)
@pytest.mark.parametrize("p_e", [0.15, 0.2, 0.3])
@pytest.mark.parametrize("r", [3, 5])
def test_analytic_rate_matches_monte_carlo(p_e, r):
    cfg = fe.FuzzyConfig(9, r)
    analytic = reliability.analytic_failure_rate(p_e, cfg)
    rng = np.random.default_rng(1000 * r + int(p_e * 100))
    mc = reliability.simulate_failures(cfg, 1_000_000, rng, p_e=p_e, chunk=25_000)
    se = mc.standard_error(analytic)
    assert abs(mc.rate - analytic) <= 3 * se, (mc.rate, analytic, se)


@pytest.mark.criterion(5)
def test_calibrated_noise_rate_below_one_in_a_million(calib_pop):
    cfg = fe.FuzzyConfig(24, 5)
    # mean per-cell flip probability of the calibrated noise model, i.i.d. model
    p_cell = calib_pop.config.noise.mean
    assert reliability.analytic_failure_rate(p_cell, cfg) < 1e-6
    # exact heterogeneous model over real simulated cells of several devices
    worst = max(reliability.heterogeneous_failure_rate(calib_pop.flip_probs(d)[:cfg.sram_len_bits], cfg)
                for d in range(20))
    assert worst < 1e-6


@pytest.mark.criterion(5)
def test_calibrated_noise_no_failures_in_1e5_reconstructions(calib_pop):
    cfg = fe.FuzzyConfig(24, 5)
    flips = calib_pop.flip_probs(0)[:cfg.sram_len_bits]
    mc = reliability.simulate_failures(cfg, 100_000, np.random.default_rng(5), flip_probs=flips, chunk=10_000)
    assert mc.failures == 0


# ---------------------------------------------------------------- 6

@pytest.mark.criterion(6)
def test_population_shape(calib_pop):
    assert (calib_pop.n_devices, calib_pop.n_bits) == (700, 2048 * 8)


@pytest.mark.criterion(6)
def test_inter_device_distance_and_entropy(calib_firsts):
    rep = metrics.inter_stats(calib_firsts)
    assert rep.mean_distance == pytest.approx(0.48, abs=0.02)
    assert rep.hmin_hat == pytest.approx(0.75, abs=0.03)


@pytest.mark.criterion(6)
def test_intra_device_distance(calib_device0_readouts):
    rep = metrics.intra_stats(calib_device0_readouts)
    assert rep.mean_distance == pytest.approx(0.06, abs=0.01)


@pytest.mark.criterion(6)
def test_max_bit_error(calib_pop, calib_device0_readouts):
    # reference = the device's noise-free pattern, i.e. an ideal enrollment
    err = metrics.max_bit_error(calib_device0_readouts, reference=calib_pop.device_pattern(0))
    assert err.maximum == pytest.approx(0.086, abs=0.01)


@pytest.mark.criterion(6)
def test_bit_alias_bimodal(calib_firsts):
    counts, edges = np.histogram(metrics.bit_alias(calib_firsts), bins=20, range=(0, 1))
    centers = (edges[:-1] + edges[1:]) / 2
    low = np.argmax(np.where(centers < 0.5, counts, -1))
    high = np.argmax(np.where(centers > 0.5, counts, -1))
    assert 0.3 <= centers[low] <= 0.45 and 0.55 <= centers[high] <= 0.7
    valley = counts[low + 1:high].min()
    assert valley < 0.9 * min(counts[low], counts[high])


@pytest.mark.criterion(6)
def test_aged_mean_weight(calib_firsts):
    assert calib_firsts.mean() == pytest.approx(0.508, abs=0.003)


# ---------------------------------------------------------------- 7

@pytest.mark.criterion(7)
def test_expected_estimator_large_n():
    assert entropy.expected_estimator(0.7, 5000) == pytest.approx(-np.log2(0.7), abs=0.01)


@pytest.mark.criterion(7)
@pytest.mark.parametrize("n", [50, 200, 700])
def test_empirical_tracks_expected(n):
    p, positions = 0.596, 16384
    rng = np.random.default_rng(n)
    pop = (rng.random((n, positions)) < p).astype(np.uint8)
    got = entropy.per_bit_min_entropy(pop).mean()
    assert got == pytest.approx(entropy.expected_estimator(p, n), abs=0.005)


@pytest.mark.criterion(7)
@pytest.mark.parametrize("n", [50, 100, 400])
def test_per_bit_dispersion_near_inverse_sqrt_n(n):
    p = 0.596
    rng = np.random.default_rng(7 + n)
    # 40 independent populations, one bit position each
    ones = rng.binomial(n, p, size=40)
    sd = np.std(entropy.empirical_min_entropy(ones, n), ddof=1)
    ref = entropy.estimator_std_error(n)
    assert ref / 2 <= sd <= 2 * ref


# ---------------------------------------------------------------- 8

def _budget_errors(cfg: fe.FuzzyConfig, rng: np.random.Generator) -> np.ndarray:
    """Error pattern the decoder must always absorb."""
    r = cfg.repetitions
    groups = np.zeros((cfg.blocks * 24, r), dtype=np.uint8)
    n_flips = rng.integers(0, r // 2 + 1, size=len(groups))
    for block in range(cfg.blocks):
        wrong = rng.choice(24, size=rng.integers(0, 4), replace=False) + 24 * block
        n_flips[wrong] = rng.integers(r // 2 + 1, r + 1, size=len(wrong))
    for g, k in enumerate(n_flips):
        groups[g, rng.choice(r, size=k, replace=False)] = 1
    return groups.reshape(-1)


@pytest.mark.criterion(8)
def test_round_trip_ten_thousand_triples():
    rng = np.random.default_rng(8)
    for _ in range(10_000):
        cfg = fe.FuzzyConfig(int(rng.choice(VALID_OFFSETS)), int(rng.choice(ecc.REPETITIONS)))
        ref = rng.integers(0, 2, cfg.sram_len_bits, dtype=np.uint8)
        helper, key = fe.enroll(ref, cfg, fe.FixedOffsets(rng.bytes(cfg.offset_len_bytes)))
        assert fe.reconstruct(ref, helper) == key
        assert fe.reconstruct(ref ^ _budget_errors(cfg, rng), helper) == key

        blob = fe.serialize(helper)
        assert fe.deserialize(blob) == helper
        assert fe.serialize(fe.deserialize(blob)) == blob
        bad = bytearray(blob)
        bad[rng.integers(len(bad))] ^= int(rng.integers(1, 256))
        with pytest.raises(fe.HelperDataError):
            fe.deserialize(bytes(bad))


# ---------------------------------------------------------------- 9

def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.criterion(9)
def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--devices", "5", "--bits", "1024", "--readouts", "3", "--aged", "--seed", "99"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = _tree(tmp_path / "a" / "dumps"), _tree(tmp_path / "b" / "dumps")
    assert a and a == b
    assert _tree(tmp_path / "a" / "truth") == _tree(tmp_path / "b" / "truth")


@pytest.mark.criterion(9)
def test_manifest_reproduces_run(tmp_path):
    assert cli.main(["simulate", "--devices", "3", "--bits", "512", "--readouts", "2", "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["rerun", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == 0
    assert _tree(tmp_path / "a" / "dumps") == _tree(tmp_path / "b" / "dumps")
