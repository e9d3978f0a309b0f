"""Seed generation from SRAM segments, entropy budgeting, soft-reset handling, region planning."""
from __future__ import annotations

import enum
import hashlib
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fuzzy_extractor import FuzzyConfig
from .sram_model import REFERENCE_MEMORY_BITS, SramReadout, bits_to_bytes

SIMPLE_SEED_MIN_BYTES = 128
SECURE_SEED_MIN_BYTES = 1024
SEED_BYTES = 32
MARKER_VALUE = 0x5EED_CAFE
MARKER_BITS = 32

_MASK32 = 0xFFFF_FFFF


class SegmentTooShort(ValueError):
    pass


class ZeroEntropySeed(RuntimeError):
    """Soft reset without a stored seed: nothing safe to hand out."""


class InsufficientMemory(ValueError):
    pass


def _as_bytes(segment) -> bytes:
    if isinstance(segment, SramReadout):
        return segment.to_bytes()
    if isinstance(segment, (bytes, bytearray, memoryview)):
        return bytes(segment)
    return bits_to_bytes(np.asarray(segment, dtype=np.uint8))


def dek_hash(data: bytes) -> int:
    if len(data) == 0:
        raise ValueError("DEK hash of empty input")
    h = len(data) & _MASK32
    for b in data:
        h = (((h << 5) & _MASK32) ^ (h >> 27)) ^ b
    return h


def simple_seed(segment, min_bytes: int = SIMPLE_SEED_MIN_BYTES) -> int:
    data = _as_bytes(segment)
    if len(data) < min_bytes:
        raise SegmentTooShort(f"simple seed needs at least {min_bytes} bytes, got {len(data)}")
    return dek_hash(data)


def secure_seed(segment, min_bytes: int = SECURE_SEED_MIN_BYTES) -> bytes:
    data = _as_bytes(segment)
    if len(data) < min_bytes:
        raise SegmentTooShort(f"secure seed needs at least {min_bytes} bytes, got {len(data)}")
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class SeedBudget:
    target_entropy_bits: int
    min_entropy_per_bit: float
    epsilon_exponent: int = 0

    def __post_init__(self):
        if not 0 < self.min_entropy_per_bit <= 1:
            raise ValueError(f"min-entropy rate must be in (0, 1], got {self.min_entropy_per_bit}")
        if self.target_entropy_bits < 0 or self.epsilon_exponent < 0:
            raise ValueError("target and epsilon exponent must be nonnegative")

    @property
    def required_bits(self) -> int:
        # exact rational arithmetic so 0.07 means 7/100, not its binary float
        rate = Fraction(str(self.min_entropy_per_bit))
        return math.floor((self.target_entropy_bits + self.epsilon_exponent) / rate)

    @property
    def required_bytes(self) -> int:
        # round half down: 914.25 -> 914, 57.125 -> 57, 0.5 -> 0
        return math.ceil(Fraction(self.required_bits, 8) - Fraction(1, 2))

    def to_dict(self) -> dict:
        return {
            "target_entropy_bits": self.target_entropy_bits,
            "min_entropy_per_bit": self.min_entropy_per_bit,
            "epsilon_exponent": self.epsilon_exponent,
            "required_bits": self.required_bits,
            "required_bytes": self.required_bytes,
        }


def seed_budget(target_entropy_bits: int, min_entropy_per_bit: float, epsilon_exponent: int = 0) -> SeedBudget:
    return SeedBudget(target_entropy_bits, min_entropy_per_bit, epsilon_exponent)


def naive_key_budget(target_bits: int, inter_device_min_entropy: float) -> int:
    if not 0 < inter_device_min_entropy <= 1:
        raise ValueError(f"min-entropy rate must be in (0, 1], got {inter_device_min_entropy}")
    return math.ceil(target_bits / Fraction(str(inter_device_min_entropy)))


class Boot(enum.Enum):
    COLD_BOOT = "ColdBoot"
    SOFT_RESET = "SoftReset"


class SeedStatus(enum.Enum):
    FRESH = "fresh"
    EVOLVED = "evolved"
    ZERO_ENTROPY = "zero-entropy"


@dataclass
class ResetState:
    """Persistent (no-init) memory state consulted at every startup.

    ``pm_indication`` is None when the platform cannot report its wake reason,
    True for a wake from deep sleep (real power loss) and False otherwise.
    """

    marker_cell: int
    marker_value: int = MARKER_VALUE
    counter: int = 0
    stored_seed: bytes | None = None
    pm_indication: bool | None = None
    last_boot: Boot | None = None
    status: SeedStatus | None = None

    @classmethod
    def power_up(cls, rng: np.random.Generator, pm_indication: bool | None = None) -> "ResetState":
        """State after a real power cycle: no-init memory holds random garbage."""
        return cls(
            marker_cell=int(rng.integers(0, 1 << 32)),
            counter=int(rng.integers(0, 1 << 32)),
            stored_seed=rng.bytes(SEED_BYTES),
            pm_indication=pm_indication,
        )


def detect_reset(state: ResetState) -> Boot:
    """Classify the startup and rewrite the marker.

    With a hardware wake indication it decides: a marker can be tampered
    with at runtime, the power-management report cannot.  Without one the
    marker decides.
    """
    if state.pm_indication is not None:
        boot = Boot.COLD_BOOT if state.pm_indication else Boot.SOFT_RESET
    else:
        boot = Boot.COLD_BOOT if state.marker_cell != state.marker_value else Boot.SOFT_RESET
    state.marker_cell = state.marker_value
    state.last_boot = boot
    return boot


def evolve_seed(state: ResetState, fresh_secure_seed: bytes | None = None) -> bytes:
    """Update and return the stored seed after :func:`detect_reset`.

    Cold boot: the fresh secure seed is hashed and stored, counter reset.
    Soft reset: counter is bumped and mixed into the stored seed.
    """
    if state.last_boot is None:
        raise RuntimeError("evolve_seed called before detect_reset")
    if state.last_boot is Boot.COLD_BOOT:
        if fresh_secure_seed is None:
            raise ValueError("cold boot needs a fresh secure seed")
        state.counter = 0
        state.stored_seed = hashlib.sha256(fresh_secure_seed).digest()
        state.status = SeedStatus.FRESH
        return state.stored_seed
    if state.stored_seed is None:
        state.status = SeedStatus.ZERO_ENTROPY
        raise ZeroEntropySeed("soft reset without a stored seed; refusing to emit a zero-entropy seed")
    state.counter = (state.counter + 1) & _MASK32
    state.stored_seed = hashlib.sha256(state.stored_seed + struct.pack("<I", state.counter)).digest()
    state.status = SeedStatus.EVOLVED
    return state.stored_seed


@dataclass(frozen=True)
class Region:
    offset: int
    length: int

    @property
    def stop(self) -> int:
        return self.offset + self.length

    def overlaps(self, other: "Region") -> bool:
        return self.offset < other.stop and other.offset < self.stop


def bootloader_region(total_bits: int = REFERENCE_MEMORY_BITS) -> Region:
    """1 KiB at 4 KiB, scaled with memory size like the aging profile."""
    scale = total_bits / REFERENCE_MEMORY_BITS
    return Region(int(4 * 8192 * scale) // 8 * 8, max(8, int(8192 * scale) // 8 * 8))


@dataclass(frozen=True)
class RegionPlan:
    key_region: Region
    secure_seed_region: Region
    simple_seed_region: Region
    marker_region: Region
    excluded: tuple[Region, ...] = field(default=())
    total_bits: int = REFERENCE_MEMORY_BITS

    def regions(self) -> dict[str, Region]:
        return {
            "key": self.key_region,
            "secure_seed": self.secure_seed_region,
            "simple_seed": self.simple_seed_region,
            "marker": self.marker_region,
        }

    def violations(self) -> list[str]:
        out = []
        items = list(self.regions().items())
        for name, reg in items:
            if reg.offset < 0 or reg.stop > self.total_bits:
                out.append(f"{name} outside memory")
            for ex in self.excluded:
                if reg.overlaps(ex):
                    out.append(f"{name} overlaps excluded [{ex.offset}, {ex.stop})")
        for i, (a, ra) in enumerate(items):
            for b, rb in items[i + 1:]:
                if ra.overlaps(rb):
                    out.append(f"{a} overlaps {b}")
        return out

    def to_dict(self) -> dict:
        d = {name: {"offset_bits": r.offset, "length_bits": r.length} for name, r in self.regions().items()}
        d["excluded"] = [{"offset_bits": r.offset, "length_bits": r.length} for r in self.excluded]
        d["total_bits"] = self.total_bits
        return d


def plan_regions(
    total_bits: int = REFERENCE_MEMORY_BITS,
    secure_seed_bytes: int = SECURE_SEED_MIN_BYTES,
    simple_seed_bytes: int = SIMPLE_SEED_MIN_BYTES,
    fuzzy_config: FuzzyConfig | None = None,
    start_bits: int | None = None,
    excluded: tuple[Region, ...] | None = None,
) -> RegionPlan:
    """Lay out key, secure seed, simple seed and marker one after another.

    Placement starts near the middle of memory and wraps to 0 when the tail
    runs out; regions are never split and skip excluded blocks.  The simple
    seed comes after both secure consumers, so they never reuse its cells.
    """
    fuzzy_config = fuzzy_config or FuzzyConfig()
    if excluded is None:
        excluded = (bootloader_region(total_bits),)
    lengths = [
        ("key", fuzzy_config.sram_len_bits),
        ("secure_seed", secure_seed_bytes * 8),
        ("simple_seed", simple_seed_bytes * 8),
        ("marker", MARKER_BITS),
    ]
    needed = sum(n for _, n in lengths) + sum(r.length for r in excluded)
    if needed > total_bits:
        raise InsufficientMemory(f"regions need {needed} bits, memory has {total_bits}")
    cursor = (total_bits // 2 if start_bits is None else start_bits) // 8 * 8
    wrapped = False
    placed: dict[str, Region] = {}
    for name, length in lengths:
        while True:
            cand = Region(cursor, length)
            blocker = next((ex for ex in excluded if cand.overlaps(ex)), None)
            if blocker is not None:
                cursor = blocker.stop
                continue
            if cand.stop > total_bits:
                if wrapped:
                    raise InsufficientMemory(f"no room for the {name} region")
                wrapped, cursor = True, 0
                continue
            if any(cand.overlaps(p) for p in placed.values()):
                raise InsufficientMemory(f"no room for the {name} region")
            break
        placed[name] = cand
        cursor = cand.stop
    plan = RegionPlan(placed["key"], placed["secure_seed"], placed["simple_seed"], placed["marker"],
                      tuple(excluded), total_bits)
    assert not plan.violations(), plan.violations()
    return plan
