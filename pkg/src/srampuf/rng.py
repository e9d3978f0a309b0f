"""Counter-based random streams for the simulator.

Every random quantity is drawn from Philox4x64-10 keyed by ``(seed, tag)``.
The tag packs what is being drawn into one 64-bit word::

    tag = kind << 56 | device << 24 | readout

Uniform doubles are ``(raw >> 11) * 2**-53`` where ``raw`` is the Philox
output stream in counter order.  Element ``i`` of a stream therefore depends
only on ``(seed, tag, i)``, which lets callers draw any slice of a stream
without generating the prefix.
"""
from __future__ import annotations

import numpy as np

THETA = 1
PATTERN = 2
NOISE = 3
READOUT = 4
UTILIZATION = 5

_MASK64 = (1 << 64) - 1
_DRAWS_PER_BLOCK = 4


def stream_tag(kind: int, device: int = 0, readout: int = 0) -> int:
    if not 0 <= kind < 256:
        raise ValueError(f"stream kind out of range: {kind}")
    if not 0 <= device < (1 << 32):
        raise ValueError(f"device index out of range: {device}")
    if not 0 <= readout < (1 << 24):
        raise ValueError(f"readout index out of range: {readout}")
    return (kind << 56) | (device << 24) | readout


def raw_stream(seed: int, tag: int, n: int, start: int = 0) -> np.ndarray:
    """Raw 64-bit Philox outputs ``start .. start + n`` of stream ``(seed, tag)``."""
    gen = np.random.Philox(key=np.array([seed & _MASK64, tag & _MASK64], dtype=np.uint64))
    block, skip = divmod(start, _DRAWS_PER_BLOCK)
    if block:
        gen.advance(block)
    out = gen.random_raw(n + skip)
    return np.asarray(out[skip:], dtype=np.uint64)


def uniforms(seed: int, tag: int, n: int, start: int = 0) -> np.ndarray:
    """Uniform doubles in [0, 1) drawn from stream ``(seed, tag)``."""
    raw = raw_stream(seed, tag, n, start)
    return (raw >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
