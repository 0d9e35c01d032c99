"""Acceptance-rejection sampling from density estimators on the sphere."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np
from scipy.special import eval_chebyt, eval_legendre

from .estimators import DensityBound
from .kernel import KernelParams
from .sphere import UnitVector, as_points, surface_measure, uniform_directions

MAX_BATCH = 1 << 18


@dataclass
class SamplerStats:
    samples_produced: int = 0
    proposals: int = 0
    bound_violations: int = 0
    wall_seconds: float = 0.0
    cpu_seconds: float = 0.0

    @property
    def density_evaluations(self) -> int:
        # one estimator evaluation per proposal
        return self.proposals

    @property
    def eval_per_sample(self) -> float:
        return self.proposals / self.samples_produced if self.samples_produced else math.nan

    @property
    def acceptance_rate(self) -> float:
        return self.samples_produced / self.proposals if self.proposals else math.nan

    def __add__(self, other: "SamplerStats") -> "SamplerStats":
        return SamplerStats(
            self.samples_produced + other.samples_produced,
            self.proposals + other.proposals,
            self.bound_violations + other.bound_violations,
            self.wall_seconds + other.wall_seconds,
            self.cpu_seconds + other.cpu_seconds,
        )

    def to_dict(self) -> dict:
        return {
            "samples": self.samples_produced,
            "proposals": self.proposals,
            "evaluations": self.density_evaluations,
            "eval_per_sample": None if not self.samples_produced else self.eval_per_sample,
            "bound_violations": self.bound_violations,
            "wall_seconds": self.wall_seconds,
            "cpu_seconds": self.cpu_seconds,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def sample(estimator, bound: Union[DensityBound, float], count: int, rng_seed):
    """Draw ``count`` directions from ``estimator`` by acceptance-rejection.

    Proposals are ``(xi, u)`` with ``xi`` uniform on the sphere and ``u``
    uniform on ``[0, C)``; a proposal is accepted when ``u <= f(xi)``.
    Negative estimator values count as zero. Values above ``C`` are
    tallied in ``bound_violations`` and the proposal is judged against
    ``C`` instead; sampling carries on.

    Proposals are generated and evaluated in batches; only those up to the
    ``count``-th acceptance enter the statistics.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    c = bound.value if isinstance(bound, DensityBound) else float(bound)
    if count > 0 and not c > 0.0:
        raise ValueError("the bound must be positive")
    d = estimator.dimension
    rng = np.random.default_rng(rng_seed)
    stats = SamplerStats()
    t_wall, t_cpu = time.perf_counter(), time.process_time()
    out = []
    remaining = count
    # expected proposals per sample if the density has unit mass
    rate = max(c * surface_measure(d), 1.0)
    while remaining > 0:
        batch = int(min(max(math.ceil(remaining * rate * 1.05) + 8, 16), MAX_BATCH))
        xi = uniform_directions(rng, d, batch)
        u = rng.uniform(0.0, c, batch)
        f = np.asarray(estimator.evaluate(xi), dtype=float)
        over = f > c
        hits = np.flatnonzero(u <= np.clip(f, 0.0, c))
        if len(hits) >= remaining:
            hits = hits[:remaining]
            used = int(hits[-1]) + 1
        else:
            used = batch
        stats.proposals += used
        stats.bound_violations += int(np.count_nonzero(over[:used]))
        out.append(xi[hits])
        remaining -= len(hits)
        stats.samples_produced += len(hits)
        if stats.samples_produced:
            rate = stats.proposals / stats.samples_produced
        else:
            rate *= 4.0
    stats.wall_seconds = time.perf_counter() - t_wall
    stats.cpu_seconds = time.process_time() - t_cpu
    points = np.concatenate(out) if out else np.empty((0, d))
    return points, stats


@dataclass
class MomentCheck:
    n: int
    mean: float
    expected: float
    stderr: float
    passed: bool


@dataclass
class GoodnessReport:
    sample_count: int
    sigmas: float
    moments: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.moments)

    def to_dict(self) -> dict:
        return asdict(self) | {"passed": self.passed}


def goodness_check(samples, truth: Union[KernelParams, float], center, max_order: int = 3, sigmas: float = 3.0) -> GoodnessReport:
    """Compare empirical moments with those of ``Q_h`` centered at ``center``.

    On S^2 the moments are ``E[P_n(X . c)]``, on S^1 ``E[cos(n theta)]``;
    both equal ``h^n``. ``truth`` is a :class:`KernelParams` or a bare
    ``h`` in ``[0, 1)`` (``h = 0`` checks uniformity). Each moment passes
    when it lies within ``sigmas`` standard errors of ``h^n``.
    """
    if isinstance(center, UnitVector):
        center = center.coords
    center = np.asarray(center, dtype=float)
    pts = as_points(samples, d=len(center))
    if len(pts) == 0:
        raise ValueError("goodness check needs samples")
    h = truth.h if isinstance(truth, KernelParams) else float(truth)
    if not 0.0 <= h < 1.0:
        raise ValueError("h must lie in [0, 1)")
    t = np.clip(pts @ center, -1.0, 1.0)
    poly = eval_legendre if len(center) == 3 else eval_chebyt
    report = GoodnessReport(len(pts), sigmas)
    for n in range(1, max_order + 1):
        vals = poly(n, t)
        mean = float(np.mean(vals))
        stderr = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        expected = h ** n
        report.moments.append(MomentCheck(n, mean, expected, stderr, abs(mean - expected) <= sigmas * stderr))
    return report
