"""Sampling-cost comparison of dense and sparse estimators under both bounds."""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass

from .estimators import upper_bound
from .sampler import sample

FIBERS_PER_NONWOVEN = 100
SEGMENTS_PER_FIBER = 100_000


@dataclass
class BenchRow:
    scenario: str
    samples: int
    evaluations: int
    cpu_seconds: float
    eval_per_sample: float
    cpu_seconds_per_sample: float
    cpu_hours_per_nonwoven: float
    bound_value: float
    bound_cpu_seconds: float
    bound_violations: int
    terms: int


def nonwoven_hours(cpu_seconds_per_sample: float) -> float:
    """CPU time for 100 fibers of 10^5 segments, one sample per segment."""
    return cpu_seconds_per_sample * FIBERS_PER_NONWOVEN * SEGMENTS_PER_FIBER / 3600.0


def bench_scenario(name: str, estimator, method: str, samples: int, seed, grid_resolution: int = 10000, safety: float = 1.1) -> BenchRow:
    """Build the bound (timed separately) and draw ``samples`` directions."""
    if samples < 1:
        raise ValueError("a benchmark needs at least one sample")
    t0 = time.process_time()
    bound = upper_bound(estimator, method, grid_resolution, safety)
    bound_cpu = time.process_time() - t0
    _, stats = sample(estimator, bound, samples, seed)
    per_sample = stats.cpu_seconds / stats.samples_produced
    return BenchRow(
        name,
        stats.samples_produced,
        stats.density_evaluations,
        stats.cpu_seconds,
        stats.eval_per_sample,
        per_sample,
        nonwoven_hours(per_sample),
        bound.value,
        bound_cpu,
        stats.bound_violations,
        len(estimator),
    )


def write_table(path, rows) -> None:
    names = list(asdict(rows[0]).keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=names)
        writer.writeheader()
        for r in rows:
            writer.writerow(asdict(r))
