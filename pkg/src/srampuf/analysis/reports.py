"""CSV emitters.  Each file starts with a ``# schema: <id>`` comment line."""
from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .metrics import EntropyReport


def write_csv(path: str | os.PathLike, schema: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: str | os.PathLike) -> tuple[str, list[dict]]:
    with Path(path).open(newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema: "):
            raise ValueError(f"{path} has no schema line")
        return first[len("# schema: "):].strip(), list(csv.DictReader(fh))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def alias_rows(alias: np.ndarray):
    return ((i, a) for i, a in enumerate(alias))


def alias_histogram(alias: np.ndarray, bins: int = 20) -> list[tuple[float, float, int]]:
    counts, edges = np.histogram(alias, bins=bins, range=(0.0, 1.0))
    return [(edges[i], edges[i + 1], int(c)) for i, c in enumerate(counts)]


def entropy_report_rows(kind: str, report: EntropyReport):
    for b in report.per_block:
        d = b.distances
        yield (kind, b.block_index, report.block_size_bytes, d.mean, d.q1, d.median, d.q3, d.minimum, d.maximum,
               b.min_entropy)


ENTROPY_HEADER = ("kind", "block_index", "block_bytes", "dist_mean", "dist_q1", "dist_median", "dist_q3",
                  "dist_min", "dist_max", "min_entropy")
ASSESS_HEADER = ("offset_len_bytes", "repetitions", "sram_bits", "remaining_entropy_bits",
                 "analytic_failure_rate", "empirical_failure_rate")


def assessment_rows(rows):
    for a in rows:
        yield (a.offset_len_bytes, a.repetitions, a.sram_bits, a.remaining_entropy_bits, a.analytic_failure_rate,
               "" if a.empirical_failure_rate is None else a.empirical_failure_rate)
