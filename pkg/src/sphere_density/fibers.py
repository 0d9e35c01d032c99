"""Fiber polylines whose segment directions are drawn from a density estimate."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import sampler
from .sampler import SamplerStats

STEP_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class FiberPolyline:
    step: float
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("a fiber needs at least its start point")
        if not self.step > 0.0:
            raise ValueError("step width must be positive")
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def segments(self) -> int:
        return len(self.points) - 1

    def directions(self) -> np.ndarray:
        return np.diff(self.points, axis=0) / self.step

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.points, axis=0), axis=1)


def fiber_seed(seed: int, fiber_index: int) -> np.random.SeedSequence:
    """Seed of fiber ``fiber_index``: ``SeedSequence([seed, fiber_index])``.

    Independent of how fibers are scheduled across threads.
    """
    return np.random.SeedSequence([int(seed), int(fiber_index)])


def simulate_fiber(estimator, bound, start, step: float, segments: int, rng_seed):
    """``Z_{j+1} = Z_j + step * Y_{j+1}`` with ``Y_j`` drawn from ``estimator``.

    Returns ``(FiberPolyline, SamplerStats)``.
    """
    if not step > 0.0:
        raise ValueError("step width must be positive")
    if segments < 0:
        raise ValueError("segments must be >= 0")
    start = np.asarray(start, dtype=float).reshape(-1)
    if len(start) != estimator.dimension:
        raise ValueError("start point dimension does not match the estimator")
    dirs, stats = sampler.sample(estimator, bound, segments, rng_seed)
    pts = np.empty((segments + 1, len(start)))
    pts[0] = start
    pts[1:] = start + np.cumsum(step * dirs, axis=0)
    return FiberPolyline(step, pts), stats


def start_points(fiber_count: int, d: int, layout="origin", box: Optional[Sequence] = None, rng_seed=0) -> np.ndarray:
    """Start points for a web.

    ``layout`` is ``"origin"``, ``"box"`` (uniform in the axis-aligned box
    ``box = (lower, upper)``) or an explicit ``(fiber_count, d)`` array.
    """
    if isinstance(layout, str):
        if layout == "origin":
            return np.zeros((fiber_count, d))
        if layout == "box":
            if box is None:
                raise ValueError("box layout needs lower and upper corners")
            lo, hi = (np.asarray(v, dtype=float).reshape(-1) for v in box)
            if lo.shape != (d,) or hi.shape != (d,) or np.any(hi < lo):
                raise ValueError("invalid box corners")
            rng = np.random.default_rng(np.random.SeedSequence([int(rng_seed), 0x5EED]))
            return lo + (hi - lo) * rng.random((fiber_count, d))
        raise ValueError(f"unknown start layout {layout!r}")
    pts = np.asarray(layout, dtype=float)
    if pts.shape != (fiber_count, d):
        raise ValueError(f"explicit layout must have shape ({fiber_count}, {d})")
    return pts


def simulate_web(estimator, bound, fiber_count: int, segments_per_fiber: int, start_layout="origin", step: float = 1.0, rng_seed=0, box=None, threads: int = 1):
    """Simulate ``fiber_count`` independent fibers; returns ``(fibers, stats)``.

    Output is identical for every ``threads`` value.
    """
    if fiber_count < 1:
        raise ValueError("fiber_count must be >= 1")
    starts = start_points(fiber_count, estimator.dimension, start_layout, box, rng_seed)

    def one(i):
        return simulate_fiber(estimator, bound, starts[i], step, segments_per_fiber, fiber_seed(rng_seed, i))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(fiber_count)))
    else:
        results = [one(i) for i in range(fiber_count)]
    total = SamplerStats()
    for _, st in results:
        total = total + st
    return [f for f, _ in results], total


def write_fibers(path, fibers) -> None:
    """CSV with columns ``fiber_id, j, z1..zd``."""
    d = fibers[0].dimension
    header = ",".join(["fiber_id", "j"] + [f"z{i + 1}" for i in range(d)])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for fid, fiber in enumerate(fibers):
            n = len(fiber.points)
            table = np.column_stack([np.full(n, fid), np.arange(n), fiber.points])
            np.savetxt(fh, table, fmt=["%d", "%d"] + ["%.17g"] * d, delimiter=",")


def read_fibers(path) -> list:
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ids = table[:, 0].astype(np.int64)
    return [table[ids == k, 2:] for k in np.unique(ids)]
