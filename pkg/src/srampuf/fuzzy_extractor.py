"""Code-offset fuzzy extractor over the concatenated Golay/repetition code.

Enrollment XORs the reference SRAM segment with the encoding of a random
offset; the result is public helper data.  Reconstruction decodes
``readout ^ helper`` back to the offset, re-encodes it and XORs with the
helper to recover the reference segment.  The key is the hash of the
reference segment, so it does not depend on the offset.

Helper-data file layout (all integers little-endian)::

    0   4  magic  b"PUFH"
    4   1  version (1)
    5   1  code id (1 = Golay24 + repetition)
    6   1  repetitions
    7   1  offset length in bytes
    8   1  hash id (1 = SHA-256)
    9   4  SRAM offset in bits
    13  4  SRAM length in bits
    17  n  helper bits, ceil(len / 8) bytes, LSB-first
    ..  4  CRC-32 (IEEE) over everything before it
"""
from __future__ import annotations

import hashlib
import os
import re
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ecc
from .sram_model import SramReadout, bits_to_bytes, bytes_to_bits

MAGIC = b"PUFH"
VERSION = 1
CODE_GOLAY24_REPETITION = 1
HASH_SHA256 = 1

_HASHES = {HASH_SHA256: hashlib.sha256}
_HEADER = struct.Struct("<4sBBBBBII")
_CRC = struct.Struct("<I")

OFFSET_BYTES_RANGE = range(9, 25)


class ReconstructionFailure(Exception):
    """Too many bit errors: at least one code block was uncorrectable."""


class HelperDataError(ValueError):
    pass


class BadMagic(HelperDataError):
    pass


class UnsupportedVersion(HelperDataError):
    pass


class LengthMismatch(HelperDataError):
    pass


class ChecksumMismatch(HelperDataError):
    pass


class RandomnessExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class FuzzyConfig:
    offset_len_bytes: int = 24
    repetitions: int = 5
    hash_id: int = HASH_SHA256
    sram_offset_bits: int = 0

    def __post_init__(self):
        if self.offset_len_bytes not in OFFSET_BYTES_RANGE:
            raise ValueError(f"offset length must be 9..24 bytes, got {self.offset_len_bytes}")
        if (self.offset_len_bytes * 8) % 12:
            raise ValueError(f"offset of {self.offset_len_bytes} bytes is not a whole number of 12-bit blocks")
        ecc.check_repetitions(self.repetitions)
        if self.repetitions > 13:
            raise ValueError(f"repetitions must be at most 13, got {self.repetitions}")
        if self.hash_id not in _HASHES:
            raise ValueError(f"unsupported hash id {self.hash_id}")
        if self.sram_offset_bits < 0:
            raise ValueError("sram_offset_bits must be nonnegative")

    @property
    def offset_bits(self) -> int:
        return self.offset_len_bytes * 8

    @property
    def blocks(self) -> int:
        return self.offset_bits // 12

    @property
    def sram_len_bits(self) -> int:
        return self.offset_bits * 2 * self.repetitions

    @property
    def sram_len_bytes(self) -> int:
        return self.sram_len_bits // 8

    def segment(self, readout: SramReadout | np.ndarray) -> np.ndarray:
        """Cut this config's SRAM region out of a full readout."""
        bits = readout.bits if isinstance(readout, SramReadout) else np.asarray(readout, dtype=np.uint8)
        stop = self.sram_offset_bits + self.sram_len_bits
        if stop > bits.shape[-1]:
            raise ValueError(f"SRAM region [{self.sram_offset_bits}, {stop}) exceeds readout of {bits.shape[-1]} bits")
        return bits[..., self.sram_offset_bits:stop]


@dataclass(frozen=True, eq=False)
class HelperData:
    config: FuzzyConfig
    helper_bits: np.ndarray
    checksum: int = field(default=-1)

    def __post_init__(self):
        bits = np.ascontiguousarray(self.helper_bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size != self.config.sram_len_bits:
            raise LengthMismatch(f"helper has {bits.size} bits, config needs {self.config.sram_len_bits}")
        object.__setattr__(self, "helper_bits", bits)
        if self.checksum == -1:
            object.__setattr__(self, "checksum", zlib.crc32(self._body()))

    def _body(self) -> bytes:
        c = self.config
        header = _HEADER.pack(
            MAGIC, VERSION, CODE_GOLAY24_REPETITION, c.repetitions, c.offset_len_bytes,
            c.hash_id, c.sram_offset_bits, c.sram_len_bits,
        )
        return header + bits_to_bytes(self.helper_bits)

    def verify(self) -> None:
        if zlib.crc32(self._body()) != self.checksum:
            raise ChecksumMismatch("helper data checksum does not match its contents")

    def __eq__(self, other):
        if not isinstance(other, HelperData):
            return NotImplemented
        return (
            self.config == other.config
            and self.checksum == other.checksum
            and np.array_equal(self.helper_bits, other.helper_bits)
        )

    __hash__ = None


@dataclass(frozen=True)
class DerivedKey:
    key_bytes: bytes
    remaining_entropy_bits: float | None = None

    def hex(self) -> str:
        return self.key_bytes.hex()


class Sha256Stream:
    """Expandable hash stream: block ``i`` is ``SHA256(seed || i as 4-byte LE)``.

    ``limit`` caps the number of bytes it will hand out.
    """

    def __init__(self, seed: bytes, limit: int | None = None):
        self._seed = bytes(seed)
        self._counter = 0
        self._buffer = b""
        self._remaining = limit

    def read(self, n: int) -> bytes:
        if self._remaining is not None:
            if n > self._remaining:
                raise RandomnessExhausted(f"randomness provider has {self._remaining} bytes left, {n} requested")
            self._remaining -= n
        while len(self._buffer) < n:
            self._buffer += hashlib.sha256(self._seed + struct.pack("<I", self._counter)).digest()
            self._counter += 1
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out


class FixedOffsets:
    """Hands out a fixed byte string once; for tests and reproducible runs."""

    def __init__(self, data: bytes):
        self._data = bytes(data)

    def read(self, n: int) -> bytes:
        if n > len(self._data):
            raise RandomnessExhausted(f"fixed offset source has {len(self._data)} bytes left, {n} requested")
        out, self._data = self._data[:n], self._data[n:]
        return out


def offset_source_from_seed(seed: int) -> Sha256Stream:
    return Sha256Stream(hashlib.sha256(b"srampuf-offset" + int(seed).to_bytes(8, "little")).digest())


def key_from_segment(segment: np.ndarray, hash_id: int = HASH_SHA256) -> bytes:
    return _HASHES[hash_id](bits_to_bytes(segment)).digest()


def _segment_bits(segment, config: FuzzyConfig) -> np.ndarray:
    bits = segment.bits if isinstance(segment, SramReadout) else np.asarray(segment, dtype=np.uint8)
    if bits.ndim != 1 or bits.size != config.sram_len_bits:
        raise LengthMismatch(f"segment has {bits.size} bits, config needs {config.sram_len_bits}")
    return bits


def enroll(reference, config: FuzzyConfig, offset_source) -> tuple[HelperData, DerivedKey]:
    ref = _segment_bits(reference, config)
    offset = bytes_to_bits(offset_source.read(config.offset_len_bytes))
    helper = ref ^ ecc.concat_encode(offset, config.repetitions)
    return HelperData(config, helper), DerivedKey(key_from_segment(ref, config.hash_id))


def recover_references(segments: np.ndarray, helper: HelperData) -> tuple[np.ndarray, np.ndarray]:
    """Batch reconstruction of reference segments (rows).  Returns ``(references, ok)``."""
    r = helper.config.repetitions
    segments = np.asarray(segments, dtype=np.uint8)
    offsets, ok = ecc.concat_decode_array(segments ^ helper.helper_bits, r)
    return helper.helper_bits ^ ecc.concat_encode(offsets, r), ok


def reconstruct(readout, helper: HelperData) -> DerivedKey:
    helper.verify()
    seg = _segment_bits(readout, helper.config)
    refs, ok = recover_references(seg[None, :], helper)
    if not ok[0]:
        raise ReconstructionFailure("uncorrectable code block: too many bit errors in the SRAM readout")
    return DerivedKey(key_from_segment(refs[0], helper.config.hash_id))


def serialize(helper: HelperData) -> bytes:
    helper.verify()
    return helper._body() + _CRC.pack(helper.checksum)


def deserialize(data: bytes) -> HelperData:
    data = bytes(data)
    if len(data) < _HEADER.size + _CRC.size:
        if len(data) >= 4 and data[:4] != MAGIC:
            raise BadMagic(f"bad magic {data[:4]!r}")
        raise LengthMismatch(f"helper file of {len(data)} bytes is shorter than its header")
    magic, version, code_id, reps, offset_len, hash_id, sram_offset, sram_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"unsupported helper data version {version}")
    if code_id != CODE_GOLAY24_REPETITION:
        raise UnsupportedVersion(f"unsupported code id {code_id}")
    payload_len = (sram_len + 7) // 8
    expected = _HEADER.size + payload_len + _CRC.size
    if len(data) != expected:
        raise LengthMismatch(f"helper file has {len(data)} bytes, header implies {expected}")
    (crc,) = _CRC.unpack_from(data, expected - _CRC.size)
    if zlib.crc32(data[:-_CRC.size]) != crc:
        raise ChecksumMismatch("helper data CRC-32 mismatch")
    try:
        config = FuzzyConfig(offset_len, reps, hash_id, sram_offset)
    except ValueError as exc:
        raise HelperDataError(f"helper header holds an invalid configuration: {exc}") from exc
    if config.sram_len_bits != sram_len:
        raise LengthMismatch(f"header SRAM length {sram_len} does not match configuration ({config.sram_len_bits})")
    bits = bytes_to_bits(data[_HEADER.size:_HEADER.size + payload_len])[:sram_len]
    return HelperData(config, bits, crc)


def render_c_array(data: bytes, name: str = "puf_helper_data") -> str:
    """Source-embeddable rendering of the helper file bytes."""
    lines = [f"/* generated helper data, {len(data)} bytes */", f"static const unsigned char {name}[{len(data)}] = {{"]
    for i in range(0, len(data), 12):
        lines.append("    " + ", ".join(f"0x{b:02x}" for b in data[i:i + 12]) + ",")
    lines.append("};")
    return "\n".join(lines) + "\n"


def parse_c_array(text: str) -> bytes:
    body = text[text.index("{") + 1:text.rindex("}")]
    return bytes(int(tok, 16) for tok in re.findall(r"0x([0-9a-fA-F]{2})", body))


def write_helper(path: str | os.PathLike, helper: HelperData, force: bool = False) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"helper data {path} exists; re-enrollment needs force")
    path.write_bytes(serialize(helper))
    return path


def read_helper(path: str | os.PathLike) -> HelperData:
    return deserialize(Path(path).read_bytes())


def enroll_external(
    dump_path: str | os.PathLike,
    config: FuzzyConfig,
    out_path: str | os.PathLike,
    offset_source,
    text_path: str | os.PathLike | None = None,
    force: bool = False,
) -> tuple[HelperData, DerivedKey]:
    """Enroll from a reference dump file and write the helper artifact (and optional C rendering)."""
    from .sram_model import read_dump

    readout = read_dump(dump_path)
    out_path = Path(out_path)
    if out_path.exists() and not force:
        raise FileExistsError(f"helper data {out_path} exists; re-enrollment needs force")
    helper, key = enroll(config.segment(readout), config, offset_source)
    write_helper(out_path, helper, force=True)
    if text_path is not None:
        Path(text_path).write_text(render_c_array(serialize(helper)))
    return helper, key
