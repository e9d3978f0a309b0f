import hashlib
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srampuf import ecc
from srampuf import fuzzy_extractor as fe
from srampuf import sram_model as sm

configs = st.builds(fe.FuzzyConfig, st.sampled_from([9, 12, 15, 18, 21, 24]), st.sampled_from(ecc.REPETITIONS))


def _enroll(cfg, ref, offset=None, seed=0):
    offset = offset if offset is not None else np.random.default_rng(seed).bytes(cfg.offset_len_bytes)
    return fe.enroll(ref, cfg, fe.FixedOffsets(offset))


@pytest.mark.parametrize("kwargs", [
    {"offset_len_bytes": 8}, {"offset_len_bytes": 25}, {"offset_len_bytes": 10},
    {"repetitions": 4}, {"repetitions": 15}, {"hash_id": 9}, {"sram_offset_bits": -1},
])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        fe.FuzzyConfig(**kwargs)


def test_region_must_fit_readout():
    cfg = fe.FuzzyConfig(9, 1, sram_offset_bits=100)
    with pytest.raises(ValueError):
        cfg.segment(np.zeros(200, np.uint8))
    assert cfg.segment(np.zeros(244, np.uint8)).size == 144


def test_all_zero_reference_and_offset():
    cfg = fe.FuzzyConfig(9, 3)
    ref = np.zeros(cfg.sram_len_bits, np.uint8)
    helper, key = _enroll(cfg, ref, bytes(9))
    assert not helper.helper_bits.any()
    assert key.key_bytes == hashlib.sha256(bytes(cfg.sram_len_bytes)).digest()
    assert len(key.key_bytes) == 32


@settings(max_examples=60)
@given(configs, st.integers(0, 2**32 - 1))
def test_helper_xor_reference_is_codeword(cfg, seed):
    rng = np.random.default_rng(seed)
    ref = rng.integers(0, 2, cfg.sram_len_bits, dtype=np.uint8)
    helper, key = _enroll(cfg, ref, seed=seed)
    dec = ecc.concat_decode(helper.helper_bits ^ ref, cfg.repetitions)
    assert dec is not None and dec[1] == 0
    assert fe.reconstruct(ref, helper) == key


def test_two_offsets_same_key_different_helper():
    cfg = fe.FuzzyConfig(12, 5)
    ref = np.random.default_rng(4).integers(0, 2, cfg.sram_len_bits, dtype=np.uint8)
    h1, k1 = _enroll(cfg, ref, seed=1)
    h2, k2 = _enroll(cfg, ref, seed=2)
    assert h1 != h2 and k1 == k2


def test_length_mismatch_and_exhaustion():
    cfg = fe.FuzzyConfig(9, 1)
    with pytest.raises(fe.LengthMismatch):
        fe.enroll(np.zeros(100, np.uint8), cfg, fe.FixedOffsets(bytes(9)))
    with pytest.raises(fe.RandomnessExhausted):
        fe.enroll(np.zeros(144, np.uint8), cfg, fe.FixedOffsets(bytes(5)))
    with pytest.raises(fe.RandomnessExhausted):
        fe.Sha256Stream(b"s", limit=8).read(9)


def test_sha256_stream_is_counter_mode():
    s = fe.Sha256Stream(b"seed")
    out = s.read(40) + s.read(30)
    expect = b"".join(hashlib.sha256(b"seed" + i.to_bytes(4, "little")).digest() for i in range(3))
    assert out == expect[:70]


def test_no_silent_corruption_single_block():
    # every pattern of <= 3 wrong majority votes in a 24-bit block reconstructs; 4 fails loudly
    cfg = fe.FuzzyConfig(9, 1)
    ref = np.random.default_rng(9).integers(0, 2, 144, dtype=np.uint8)
    helper, key = _enroll(cfg, ref)
    for w in range(4):
        for pos in combinations(range(24), w):
            noisy = ref.copy()
            noisy[list(pos)] ^= 1
            assert fe.reconstruct(noisy, helper) == key
    noisy = ref.copy()
    noisy[[0, 5, 9, 20]] ^= 1
    with pytest.raises(fe.ReconstructionFailure):
        fe.reconstruct(noisy, helper)


def test_batch_recovery_flags_failures():
    cfg = fe.FuzzyConfig(9, 3)
    ref = np.zeros(cfg.sram_len_bits, np.uint8)
    helper, _ = _enroll(cfg, ref)
    batch = np.tile(ref, (3, 1))
    batch[1, :12] ^= 1  # four groups fully flipped in block 0
    refs, ok = fe.recover_references(batch, helper)
    assert list(ok) == [True, False, True]
    assert np.array_equal(refs[0], ref)


def test_tampered_helper_in_memory():
    cfg = fe.FuzzyConfig(9, 1)
    ref = np.zeros(144, np.uint8)
    helper, _ = _enroll(cfg, ref)
    helper.helper_bits[0] ^= 1
    with pytest.raises(fe.ChecksumMismatch):
        fe.reconstruct(ref, helper)


def _blob(cfg=None):
    cfg = cfg or fe.FuzzyConfig(9, 3, sram_offset_bits=64)
    ref = np.random.default_rng(1).integers(0, 2, cfg.sram_len_bits, dtype=np.uint8)
    return fe.serialize(_enroll(cfg, ref)[0])


def test_serialized_layout():
    blob = _blob()
    assert blob[:4] == b"PUFH" and blob[4:9] == bytes([1, 1, 3, 9, 1])
    assert int.from_bytes(blob[9:13], "little") == 64
    assert int.from_bytes(blob[13:17], "little") == 432
    assert len(blob) == 17 + 54 + 4


def test_validation_errors_are_distinct():
    blob = _blob()
    with pytest.raises(fe.BadMagic):
        fe.deserialize(b"XXXX" + blob[4:])
    with pytest.raises(fe.UnsupportedVersion):
        fe.deserialize(blob[:4] + b"\x02" + blob[5:])
    with pytest.raises(fe.LengthMismatch):
        fe.deserialize(blob[:-10])
    with pytest.raises(fe.LengthMismatch):
        fe.deserialize(blob[:10])
    bad = bytearray(blob)
    bad[30] ^= 0x10
    with pytest.raises(fe.ChecksumMismatch):
        fe.deserialize(bytes(bad))


@settings(max_examples=40)
@given(configs, st.integers(0, 255), st.integers(1, 255), st.data())
def test_any_single_byte_corruption_detected(cfg, _seed, delta, data):
    blob = _blob(cfg)
    i = data.draw(st.integers(0, len(blob) - 1))
    bad = bytearray(blob)
    bad[i] ^= delta
    with pytest.raises(fe.HelperDataError):
        fe.deserialize(bytes(bad))


def test_c_rendering_round_trip():
    blob = _blob()
    text = fe.render_c_array(blob)
    assert "static const unsigned char" in text
    assert fe.parse_c_array(text) == blob


def test_enroll_external_round_trip(tmp_path):
    cfg = fe.FuzzyConfig(9, 5, sram_offset_bits=16)
    pop = sm.new_population(sm.PopulationConfig(n_devices=1, n_bits=1024), 3)
    ro = sm.sample_readout(pop, 0, 0)
    dump = tmp_path / "0000" / "0.bin"
    sm.export_dumps([ro], tmp_path)
    out, text = tmp_path / "h.bin", tmp_path / "h.h"
    helper, key = fe.enroll_external(dump, cfg, out, fe.offset_source_from_seed(1), text_path=text)
    assert fe.read_helper(out) == helper
    assert fe.parse_c_array(text.read_text()) == out.read_bytes()
    assert fe.reconstruct(cfg.segment(ro), fe.read_helper(out)) == key
    with pytest.raises(FileExistsError):
        fe.enroll_external(dump, cfg, out, fe.offset_source_from_seed(2))
    h2, k2 = fe.enroll_external(dump, cfg, out, fe.offset_source_from_seed(2), force=True)
    assert k2 == key and h2 != helper
