"""Synthetic SRAM device populations and raw dump I/O.

A population is described per bit position by ``theta`` (the probability a
cell at that address powers up as one, across devices) and per cell by a
``flip_prob`` (per-readout noise on one device).  Device reference patterns
are drawn once from the thetas; a readout is the reference pattern with each
bit flipped independently with the cell's ``flip_prob``.

All draws come from :mod:`srampuf.rng`, so ``(config, rng_seed)`` pins the
population and every readout bit-for-bit.

Dump files hold one readout each as raw bytes, LSB-first: bit ``i`` of the
readout is bit ``i % 8`` of byte ``i // 8``.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
from scipy.special import betaincinv

from . import rng

# Memory map of the measured platform (64 KiB), used to scale the testbed aging profile.
REFERENCE_MEMORY_BITS = 64 * 1024 * 8


class ConfigError(ValueError):
    pass


class DumpError(ValueError):
    pass


@dataclass(frozen=True)
class ThetaMixture:
    """Two-component Beta mixture for the per-position one-probability.

    Each component is a Beta distribution with the given mode and
    concentration ``alpha + beta``.
    """

    modes: tuple[float, ...] = (0.4, 0.6)
    weights: tuple[float, ...] = (0.5, 0.5)
    concentration: float = 80.0

    def __post_init__(self):
        if not self.modes or len(self.modes) != len(self.weights):
            raise ConfigError("theta mixture needs matching, non-empty modes and weights")
        if any(not 0.0 <= m <= 1.0 for m in self.modes):
            raise ConfigError(f"theta modes must lie in [0, 1]: {self.modes}")
        if any(w < 0 for w in self.weights) or not np.isclose(sum(self.weights), 1.0):
            raise ConfigError(f"theta weights must be nonnegative and sum to 1: {self.weights}")
        if self.concentration < 2 and not np.isinf(self.concentration):
            raise ConfigError("concentration must be >= 2 (or inf for a point mass)")

    def sample(self, u_component: np.ndarray, u_value: np.ndarray) -> np.ndarray:
        edges = np.cumsum(self.weights)
        comp = np.minimum(np.searchsorted(edges, u_component, side="right"), len(self.modes) - 1)
        modes = np.asarray(self.modes)[comp]
        if np.isinf(self.concentration):
            return modes.astype(np.float64)
        k = self.concentration - 2.0
        a = 1.0 + modes * k
        b = 1.0 + (1.0 - modes) * k
        return betaincinv(a, b, u_value)


@dataclass(frozen=True)
class NoiseModel:
    """Per-cell flip probability: a fraction of near-stable cells, the rest uniform up to ``tail_max``."""

    stable_fraction: float = 0.10
    stable_max: float = 0.01
    tail_max: float = 0.057

    def __post_init__(self):
        if not 0.0 <= self.stable_fraction <= 1.0:
            raise ConfigError(f"stable_fraction must be in [0, 1]: {self.stable_fraction}")
        if not 0.0 <= self.stable_max <= self.tail_max <= 0.5:
            raise ConfigError("need 0 <= stable_max <= tail_max <= 0.5")

    def sample(self, u: np.ndarray) -> np.ndarray:
        s = self.stable_fraction
        stable = u / s * self.stable_max if s > 0 else np.zeros_like(u)
        tail = self.stable_max + (u - s) / (1.0 - s) * (self.tail_max - self.stable_max) if s < 1 else stable
        return np.where(u < s, stable, tail)

    @property
    def mean(self) -> float:
        s = self.stable_fraction
        return s * self.stable_max / 2 + (1 - s) * (self.stable_max + self.tail_max) / 2


@dataclass(frozen=True)
class PopulationConfig:
    n_devices: int = 700
    n_bits: int = 16384
    theta: ThetaMixture = field(default_factory=ThetaMixture)
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self):
        if self.n_devices < 1:
            raise ConfigError(f"n_devices must be >= 1, got {self.n_devices}")
        if self.n_bits < 8 or self.n_bits % 8:
            raise ConfigError(f"n_bits must be a positive multiple of 8, got {self.n_bits}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PopulationConfig":
        data = dict(data)
        unknown = set(data) - {"n_devices", "n_bits", "theta", "noise"}
        if unknown:
            raise ConfigError(f"unknown population config keys: {sorted(unknown)}")
        try:
            theta = data.pop("theta", None)
            noise = data.pop("noise", None)
            kwargs = {k: int(v) for k, v in data.items()}
            if theta is not None:
                theta = dict(theta)
                for key in ("modes", "weights"):
                    if key in theta:
                        theta[key] = tuple(float(x) for x in theta[key])
                kwargs["theta"] = ThetaMixture(**theta)
            if noise is not None:
                kwargs["noise"] = NoiseModel(**{k: float(v) for k, v in noise.items()})
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid population config: {exc}") from exc

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PopulationConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read population config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("population config must be a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class CellModel:
    theta: float
    flip_prob: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta outside [0, 1]: {self.theta}")
        if not 0.0 <= self.flip_prob <= 0.5:
            raise ConfigError(f"flip_prob outside [0, 0.5]: {self.flip_prob}")


@dataclass(frozen=True)
class SkewRegion:
    start: int
    length: int
    skew: float

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class AgingProfile:
    """Address and usage dependent one-probability skew.

    ``global_weight_shift`` sets the population mean hamming weight to
    ``0.5 + global_weight_shift`` after all region and usage skews are applied.
    """

    global_weight_shift: float = 0.0
    wear_region: SkewRegion | None = None
    bootloader_region: SkewRegion | None = None
    utilization_delta: float = 0.0

    @classmethod
    def testbed(cls, n_bits: int = REFERENCE_MEMORY_BITS) -> "AgingProfile":
        """Aged-testbed profile: +0.008 mean weight, bootloader block at 4 KiB,
        wear over the first 26.5 KiB, heavy-use devices +0.0025.

        Region addresses are scaled from the 64 KiB memory map to ``n_bits``.
        """
        scale = n_bits / REFERENCE_MEMORY_BITS

        def bits(n_bytes: float) -> int:
            return int(round(n_bytes * scale)) * 8

        return cls(
            global_weight_shift=0.008,
            wear_region=SkewRegion(0, bits(26.5 * 1024), 0.004),
            bootloader_region=SkewRegion(bits(4 * 1024), max(8, bits(1024)), 0.02),
            utilization_delta=0.0025,
        )

    def regions(self) -> list[SkewRegion]:
        return [r for r in (self.wear_region, self.bootloader_region) if r is not None]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AgingProfile":
        data = dict(data)
        for key in ("wear_region", "bootloader_region"):
            if data.get(key) is not None:
                data[key] = SkewRegion(**data[key])
        return cls(**data)


@dataclass(frozen=True)
class SramReadout:
    device_id: int | str
    readout_index: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size % 8:
            raise ValueError("readout must be a 1-D bit vector whose length is a multiple of 8")
        object.__setattr__(self, "bits", bits)

    @property
    def length_bits(self) -> int:
        return int(self.bits.size)

    def to_bytes(self) -> bytes:
        return bits_to_bytes(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes, device_id: int | str = 0, readout_index: int = 0) -> "SramReadout":
        return cls(device_id, readout_index, bytes_to_bits(data))

    def __eq__(self, other):
        if not isinstance(other, SramReadout):
            return NotImplemented
        return (
            self.device_id == other.device_id
            and self.readout_index == other.readout_index
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")


class DevicePopulation:
    """Ground truth of a simulated population.

    ``thetas`` are per-position one-probabilities after any aging;
    ``device_skew`` adds a per-device offset (heavy vs light use).
    """

    def __init__(
        self,
        config: PopulationConfig,
        rng_seed: int,
        thetas: np.ndarray,
        device_skew: np.ndarray | None = None,
        aging_profile: AgingProfile | None = None,
    ):
        self.config = config
        self.rng_seed = int(rng_seed)
        self.thetas = np.asarray(thetas, dtype=np.float64)
        self.device_skew = (
            np.zeros(config.n_devices) if device_skew is None else np.asarray(device_skew, dtype=np.float64)
        )
        self.aging_profile = aging_profile

    @property
    def n_devices(self) -> int:
        return self.config.n_devices

    @property
    def n_bits(self) -> int:
        return self.config.n_bits

    def device_thetas(self, device_id: int) -> np.ndarray:
        self._check_device(device_id)
        return np.clip(self.thetas + self.device_skew[device_id], 0.0, 1.0)

    @cached_property
    def device_patterns(self) -> np.ndarray:
        patterns = np.empty((self.n_devices, self.n_bits), dtype=np.uint8)
        for d in range(self.n_devices):
            patterns[d] = self._pattern(d)
        return patterns

    def device_pattern(self, device_id: int) -> np.ndarray:
        if "device_patterns" in self.__dict__:
            return self.device_patterns[device_id]
        return self._pattern(device_id)

    def _pattern(self, device_id: int) -> np.ndarray:
        u = rng.uniforms(self.rng_seed, rng.stream_tag(rng.PATTERN, device_id), self.n_bits)
        return (u < self.device_thetas(device_id)).astype(np.uint8)

    def flip_probs(self, device_id: int) -> np.ndarray:
        self._check_device(device_id)
        return _flip_probs(self.rng_seed, self.config.noise, device_id, self.n_bits)

    def cell(self, device_id: int, position: int) -> CellModel:
        return CellModel(float(self.device_thetas(device_id)[position]), float(self.flip_probs(device_id)[position]))

    def heavy_use(self) -> np.ndarray:
        """Devices whose utilization ranks in the upper half."""
        return _heavy_use(self.rng_seed, self.n_devices)

    def _check_device(self, device_id):
        if not isinstance(device_id, (int, np.integer)) or not 0 <= device_id < self.n_devices:
            raise KeyError(f"unknown device id {device_id!r} (population has {self.n_devices})")

    def same_as(self, other: "DevicePopulation") -> bool:
        return (
            self.config == other.config
            and self.rng_seed == other.rng_seed
            and np.array_equal(self.thetas, other.thetas)
            and np.array_equal(self.device_skew, other.device_skew)
            and np.array_equal(self.device_patterns, other.device_patterns)
        )


@lru_cache(maxsize=64)
def _flip_probs_cached(seed: int, noise: NoiseModel, device_id: int, n_bits: int) -> np.ndarray:
    u = rng.uniforms(seed, rng.stream_tag(rng.NOISE, device_id), n_bits)
    f = noise.sample(u)
    f.setflags(write=False)
    return f


def _flip_probs(seed, noise, device_id, n_bits):
    return _flip_probs_cached(seed, noise, int(device_id), n_bits)


def _heavy_use(seed: int, n_devices: int) -> np.ndarray:
    hours = rng.uniforms(seed, rng.stream_tag(rng.UTILIZATION), n_devices)
    order = np.argsort(hours, kind="stable")
    heavy = np.zeros(n_devices, dtype=bool)
    heavy[order[n_devices - n_devices // 2:]] = True
    return heavy


def new_population(config: PopulationConfig, rng_seed: int) -> DevicePopulation:
    if not 0 <= int(rng_seed) < (1 << 64):
        raise ConfigError(f"rng_seed must be a 64-bit unsigned integer, got {rng_seed}")
    n = config.n_bits
    u = rng.uniforms(rng_seed, rng.stream_tag(rng.THETA), 2 * n)
    thetas = np.clip(config.theta.sample(u[:n], u[n:]), 0.0, 1.0)
    return DevicePopulation(config, rng_seed, thetas)


def sample_readout(pop: DevicePopulation, device_id: int, readout_index: int) -> SramReadout:
    bits = sample_region(pop, device_id, [readout_index], 0, pop.n_bits)[0]
    return SramReadout(int(device_id), int(readout_index), bits)


def sample_region(
    pop: DevicePopulation, device_id: int, readout_indices, start: int, length: int
) -> np.ndarray:
    """Bits ``[start, start + length)`` of several readouts of one device, stacked row-wise.

    Identical to slicing full readouts from :func:`sample_readout`.
    """
    pop._check_device(device_id)
    if start < 0 or length < 0 or start + length > pop.n_bits:
        raise ValueError(f"region [{start}, {start + length}) outside device memory of {pop.n_bits} bits")
    pattern = pop.device_pattern(device_id)[start:start + length]
    flips = pop.flip_probs(device_id)[start:start + length]
    indices = list(readout_indices)
    out = np.empty((len(indices), length), dtype=np.uint8)
    for row, idx in enumerate(indices):
        u = rng.uniforms(pop.rng_seed, rng.stream_tag(rng.READOUT, int(device_id), int(idx)), length, start)
        out[row] = pattern ^ (u < flips)
    return out


def apply_aging(pop: DevicePopulation, profile: AgingProfile) -> DevicePopulation:
    n = pop.n_bits
    for region in profile.regions():
        if region.start < 0 or region.length < 0 or region.stop > n:
            raise ConfigError(f"aging region [{region.start}, {region.stop}) outside [0, {n})")
    extra = np.zeros(n)
    for region in profile.regions():
        extra[region.start:region.stop] += region.skew
    device_skew = np.where(pop.heavy_use(), profile.utilization_delta, 0.0)
    target = 0.5 + profile.global_weight_shift
    if profile == AgingProfile():
        base = 0.0
    else:
        base = target - (pop.thetas.mean() + extra.mean() + device_skew.mean())
    thetas = np.clip(pop.thetas + base + extra, 0.0, 1.0)
    return DevicePopulation(pop.config, pop.rng_seed, thetas, pop.device_skew + device_skew, profile)


def export_dumps(readouts, root: str | os.PathLike) -> list[Path]:
    root = Path(root)
    paths = []
    for ro in readouts:
        name = f"{ro.device_id:04d}" if isinstance(ro.device_id, (int, np.integer)) else str(ro.device_id)
        path = root / name / f"{ro.readout_index}.bin"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(ro.to_bytes())
        paths.append(path)
    return paths


def _parse_device_id(name: str) -> int | str:
    return int(name) if name.isdigit() else name


def read_dump(path: str | os.PathLike, device_id: int | str | None = None, readout_index: int = 0) -> SramReadout:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DumpError(f"cannot read dump {path}: {exc}") from exc
    if not data:
        raise DumpError(f"empty dump file {path}")
    if device_id is None:
        device_id = _parse_device_id(path.parent.name)
    return SramReadout.from_bytes(data, device_id, readout_index)


def ingest_dumps(root: str | os.PathLike) -> list[SramReadout]:
    """Load ``<root>/<device-id>/<readout-index>.bin`` files, sorted by device then readout."""
    root = Path(root)
    if not root.is_dir():
        raise DumpError(f"dump root {root} is not a directory")
    files = []
    for device_dir in root.iterdir():
        if not device_dir.is_dir():
            continue
        for f in device_dir.glob("*.bin"):
            try:
                index = int(f.stem)
            except ValueError as exc:
                raise DumpError(f"readout file name is not an index: {f}") from exc
            files.append((_parse_device_id(device_dir.name), index, f))
    if not files:
        raise DumpError(f"no dump files under {root}")
    files.sort(key=lambda t: (str(type(t[0])), t[0], t[1]))
    readouts = [read_dump(f, dev, idx) for dev, idx, f in files]
    lengths = {ro.length_bits for ro in readouts}
    if len(lengths) != 1:
        raise DumpError(f"dumps under {root} have mixed lengths: {sorted(lengths)} bits")
    return readouts


def calibrated_population(rng_seed: int, n_devices: int = 700, n_bits: int = 16384, aged: bool = False) -> DevicePopulation:
    """Calibrated population at desk scale, optionally with the aged-testbed profile."""
    pop = new_population(PopulationConfig(n_devices=n_devices, n_bits=n_bits), rng_seed)
    if aged:
        pop = apply_aging(pop, AgingProfile.testbed(n_bits))
    return pop

