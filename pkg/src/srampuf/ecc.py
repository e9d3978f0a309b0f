"""Extended binary Golay [24,12,8] and repetition codes, plus their concatenation.

Bit vectors are ``numpy.uint8`` arrays of 0/1.  A 12-bit Golay message or a
24-bit codeword packed into an ``int`` is LSB-first: vector bit ``j`` is
``(value >> j) & 1``.  Codewords are systematic, message in bits 0..11 and
parity in bits 12..23.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

# Rows of the 12x12 B matrix of the systematic generator G = [I | B]
# (row i, column j is the parity contribution of message bit i to parity bit j).
GOLAY_B = (
    (1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1),
    (1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1),
    (0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1),
    (1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1),
    (1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1),
    (1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1),
    (0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 1),
    (0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1),
    (0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 0, 1),
    (1, 0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1),
    (0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1),
    (1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0),
)

REPETITIONS = (1, 3, 5, 7, 9, 11, 13)

_PARITY_ROWS = tuple(sum(bit << j for j, bit in enumerate(row)) for row in GOLAY_B)


def _build_parity_table() -> np.ndarray:
    table = np.zeros(4096, dtype=np.uint32)
    for data in range(1, 4096):
        low = data & -data
        table[data] = table[data ^ low] ^ _PARITY_ROWS[low.bit_length() - 1]
    return table


_PARITY = _build_parity_table()
_CODEWORDS = np.arange(4096, dtype=np.uint32) | (_PARITY << np.uint32(12))


def _build_syndrome_table() -> tuple[np.ndarray, np.ndarray]:
    """Coset leader and its weight per syndrome; weight -1 marks uncorrectable cosets."""
    leader = np.zeros(4096, dtype=np.uint32)
    weight = np.full(4096, -1, dtype=np.int8)
    for w in range(4):
        for positions in combinations(range(24), w):
            e = sum(1 << p for p in positions)
            s = int(_PARITY[e & 0xFFF]) ^ (e >> 12)
            if weight[s] != -1:
                raise AssertionError("Golay syndrome table collision")
            leader[s] = e
            weight[s] = w
    return leader, weight


_LEADER, _LEADER_WEIGHT = _build_syndrome_table()


@dataclass(frozen=True)
class Decoded:
    data: int
    errors_corrected: int


def golay_encode(data: int) -> int:
    if not 0 <= data < 4096:
        raise ValueError(f"Golay message must be 12 bits, got {data!r}")
    return int(_CODEWORDS[data])


def golay_syndrome(word: int) -> int:
    return int(_PARITY[word & 0xFFF]) ^ (word >> 12)


def golay_decode(word: int) -> Decoded | None:
    """Bounded-distance decode; ``None`` when the word is 4 or more errors from every codeword."""
    if not 0 <= word < (1 << 24):
        raise ValueError(f"Golay word must be 24 bits, got {word!r}")
    s = golay_syndrome(word)
    w = int(_LEADER_WEIGHT[s])
    if w < 0:
        return None
    return Decoded((word ^ int(_LEADER[s])) & 0xFFF, w)


def golay_encode_array(data: np.ndarray) -> np.ndarray:
    data = np.asarray(data)
    if data.size and (data.min() < 0 or data.max() >= 4096):
        raise ValueError("Golay messages must be 12-bit values")
    return _CODEWORDS[data.astype(np.intp)]


def golay_decode_array(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized decode.  Returns ``(data, errors)`` with ``errors == -1`` where uncorrectable."""
    words = np.asarray(words, dtype=np.uint32)
    s = _PARITY[words & np.uint32(0xFFF)] ^ (words >> np.uint32(12))
    errors = _LEADER_WEIGHT[s].astype(np.int64)
    data = (words ^ _LEADER[s]) & np.uint32(0xFFF)
    return data, errors


def all_codewords() -> np.ndarray:
    return _CODEWORDS.copy()


def check_repetitions(r: int) -> int:
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValueError(f"repetition count must be a positive integer, got {r!r}")
    if r % 2 == 0:
        raise ValueError(f"repetition count must be odd, got {r}")
    return int(r)


def rep_encode(bits: np.ndarray, r: int) -> np.ndarray:
    r = check_repetitions(r)
    return np.repeat(np.asarray(bits, dtype=np.uint8), r, axis=-1)


def rep_decode(bits: np.ndarray, r: int) -> np.ndarray:
    """Majority vote over consecutive groups of ``r`` bits (works on the last axis)."""
    r = check_repetitions(r)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] % r:
        raise ValueError(f"length {bits.shape[-1]} is not divisible by r={r}")
    groups = bits.reshape(*bits.shape[:-1], -1, r)
    return (groups.sum(axis=-1, dtype=np.int32) > r // 2).astype(np.uint8)


_WEIGHTS12 = (1 << np.arange(12, dtype=np.uint32)).astype(np.uint32)
_WEIGHTS24 = (1 << np.arange(24, dtype=np.uint32)).astype(np.uint32)


def _pack(bits: np.ndarray, width: int) -> np.ndarray:
    weights = _WEIGHTS12 if width == 12 else _WEIGHTS24
    groups = bits.reshape(*bits.shape[:-1], -1, width).astype(np.uint32)
    return groups @ weights


def _unpack(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width, dtype=np.uint32)
    bits = (values[..., None] >> shifts) & np.uint32(1)
    return bits.reshape(*values.shape[:-1], -1).astype(np.uint8)


def concat_length(offset_bits: int, r: int) -> int:
    return offset_bits * 2 * check_repetitions(r)


def concat_encode(offset_bits: np.ndarray, r: int) -> np.ndarray:
    """Golay-encode each 12-bit block, then repeat every codeword bit ``r`` times."""
    offset_bits = np.asarray(offset_bits, dtype=np.uint8)
    if offset_bits.shape[-1] % 12:
        raise ValueError(f"offset length {offset_bits.shape[-1]} is not a multiple of 12")
    codewords = golay_encode_array(_pack(offset_bits, 12))
    return rep_encode(_unpack(codewords, 24), r)


def concat_decode_array(bits: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Batch decode on the last axis: ``(offset_bits, ok)`` where ``ok`` is False if any block failed."""
    r = check_repetitions(r)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] % (24 * r):
        raise ValueError(f"encoded length {bits.shape[-1]} is not a multiple of 24*r={24 * r}")
    inner = rep_decode(bits, r)
    data, errors = golay_decode_array(_pack(inner, 24))
    ok = np.all(errors >= 0, axis=-1)
    return _unpack(data, 12), ok


def concat_decode(bits: np.ndarray, r: int) -> tuple[np.ndarray, int] | None:
    """Decode one word.  Returns ``(offset_bits, total_corrected)`` or ``None`` if any block is uncorrectable.

    ``total_corrected`` counts input bit positions that differ from the
    re-encoded codeword, i.e. repetition and Golay corrections together.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("concat_decode takes a single bit vector")
    offset, ok = concat_decode_array(bits, r)
    if not ok:
        return None
    corrected = int(np.count_nonzero(concat_encode(offset, r) != bits))
    return offset, corrected
