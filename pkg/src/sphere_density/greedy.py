"""Greedy sparse estimation of a density from samples on the sphere.

The dictionary holds one kernel per data point. Each step picks the kernel
whose empirical expectation ``e_n = (1/N) sum_m d_n(X_m)`` differs most from
its inner product ``g_n = <f_k, d_n>`` with the current approximation, and
adds it with coefficient ``e_n - g_n``. ``e`` is computed once, ``g`` is
updated in O(N) per step through the kernels' exact Gram entries.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernel
from ._compute import kernel_sums, update_and_argmax
from .estimators import SparseDensity, sparse_integral, sparse_l2_inner
from .kernel import KernelParams
from .sphere import as_points, surface_measure

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GreedyConfig:
    params: KernelParams
    iterations: int
    normalized_dictionary: bool = True
    initial: str = "zero"
    tie_break: str = "lowest-index"
    min_abs_alpha: Optional[float] = None
    progress_every: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.initial not in ("zero", "uniform-density"):
            raise ValueError(f"unknown initial approximation {self.initial!r}")
        if self.tie_break != "lowest-index":
            raise ValueError("only lowest-index tie breaking is supported")

    @property
    def norm_factor(self) -> float:
        return kernel.l2_norm(self.params) if self.normalized_dictionary else 1.0


@dataclass
class IterationRecord:
    k: int
    center_index: int
    alpha: float
    rel_l2_error: Optional[float] = None
    cumulative_seconds: float = 0.0

    @property
    def abs_alpha(self) -> float:
        return abs(self.alpha)


@dataclass
class GreedyTrace:
    records: list = field(default_factory=list)
    initial_rel_l2_error: Optional[float] = None
    precompute_seconds: float = 0.0
    iterate_seconds: float = 0.0

    def __len__(self) -> int:
        return len(self.records)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.records])

    @property
    def errors(self) -> np.ndarray:
        return np.array([np.nan if r.rel_l2_error is None else r.rel_l2_error for r in self.records])

    @property
    def center_indices(self) -> np.ndarray:
        return np.array([r.center_index for r in self.records], dtype=np.int64)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "center_index", "alpha", "abs_alpha", "rel_l2_error", "cumulative_seconds"])
            for r in self.records:
                err = "" if r.rel_l2_error is None else repr(r.rel_l2_error)
                writer.writerow([r.k, r.center_index, repr(r.alpha), repr(r.abs_alpha), err, f"{r.cumulative_seconds:.6f}"])


def precompute_expectations(data, config: GreedyConfig) -> np.ndarray:
    """Empirical expectations ``(1/N) sum_m d_n(X_m)`` for every dictionary element."""
    data = as_points(data, d=config.params.d)
    n = len(data)
    if n == 0:
        raise ValueError("need at least one data point")
    w = np.full(n, 1.0 / n)
    e = kernel_sums(data, data, w, config.params.d, config.params.h) / config.norm_factor
    if not np.all(np.isfinite(e)):
        raise ValueError("non-finite empirical expectation")
    return e


def exact_expectations(data, truth: SparseDensity, config: GreedyConfig) -> np.ndarray:
    """``<truth, d_n>`` in closed form: the noise-free stand-in for the empirical expectations."""
    data = as_points(data, d=config.params.d)
    coef = truth.coefficients / truth.norm_factor
    e = kernel_sums(data, truth.centers, coef, config.params.d, config.params.h * truth.params.h)
    if truth.constant:
        e = e + truth.constant / surface_measure(config.params.d)
    return e / config.norm_factor


class GreedyState:
    """Mutable iteration state; :func:`fit` is the usual entry point."""

    def __init__(self, data, config: GreedyConfig, expectations=None, truth: Optional[SparseDensity] = None):
        p = config.params
        self.config = config
        self.data = as_points(data, d=p.d)
        if len(self.data) == 0:
            raise ValueError("need at least one data point")
        self._xt = np.ascontiguousarray(self.data.T)
        self.norm = config.norm_factor
        self.e = precompute_expectations(self.data, config) if expectations is None else np.array(expectations, dtype=float)
        if self.e.shape != (len(self.data),) or not np.all(np.isfinite(self.e)):
            raise ValueError("expectations must be one finite value per data point")
        omega = surface_measure(p.d)
        # <d_c, d_n> = Q_{h^2}(x_c . x_n) / norm^2; the compiled update omits (1 - h^4)/omega
        self._gram_scale = (1.0 - p.h ** 4) / (omega * self.norm ** 2)
        self._self_gram = kernel.l2_inner(p, p.h, 1.0) / self.norm ** 2
        self.constant = 1.0 if config.initial == "uniform-density" else 0.0
        self.g = np.full(len(self.data), self.constant / (omega * self.norm))
        self.k = 0
        self.chosen: list = []
        self.alphas: list = []
        self._next = int(np.argmax(np.abs(self.e - self.g)))

        self.truth = truth
        if truth is not None:
            if truth.params.d != p.d:
                raise ValueError("truth has a different dimension")
            self._tt = sparse_l2_inner(truth, truth)
            if not self._tt > 0.0:
                raise ValueError("truth has zero norm")
            self._tf = self.constant * sparse_integral(truth) / omega
            self._ff = self.constant ** 2 / omega

    def truth_inner(self, index: int) -> float:
        t = self.truth
        val = kernel_sums(self.data[index : index + 1], t.centers, t.coefficients / t.norm_factor, self.config.params.d, self.config.params.h * t.params.h)[0]
        if t.constant:
            val += t.constant / surface_measure(self.config.params.d)
        return val / self.norm

    def rel_error(self) -> Optional[float]:
        if self.truth is None:
            return None
        return math.sqrt(max(self._tt - 2.0 * self._tf + self._ff, 0.0) / self._tt)

    def step(self) -> tuple:
        """Take one greedy step; returns ``(center_index, alpha)``."""
        c = self._next
        g_c = self.g[c]
        alpha = float(self.e[c] - g_c)
        if self.truth is not None:
            self._tf += alpha * self.truth_inner(c)
            self._ff += 2.0 * alpha * g_c + alpha * alpha * self._self_gram
        self._next = update_and_argmax(self._xt, c, alpha * self._gram_scale, self.config.params.d, self.config.params.h ** 2, self.g, self.e)
        self.chosen.append(c)
        self.alphas.append(alpha)
        self.k += 1
        return c, alpha

    def peek_alpha(self) -> float:
        return float(self.e[self._next] - self.g[self._next])

    def model(self, merge: bool = True) -> SparseDensity:
        idx = np.array(self.chosen, dtype=np.int64)
        m = SparseDensity(self.config.params, self.data[idx], np.array(self.alphas), self.config.normalized_dictionary, self.constant)
        return m.merged() if merge else m


def fit(data, config: GreedyConfig, expectations=None, truth: Optional[SparseDensity] = None):
    """Run the greedy iteration; returns ``(model, trace)``.

    ``expectations`` overrides the empirical expectations (e.g. with
    :func:`exact_expectations` for noise-free experiments). With ``truth``
    the trace carries the exact relative L2 error after every step.
    Duplicate selections of a center are merged in the returned model
    only; the trace keeps the raw path.
    """
    t0 = time.perf_counter()
    state = GreedyState(data, config, expectations, truth)
    trace = GreedyTrace(initial_rel_l2_error=state.rel_error())
    trace.precompute_seconds = time.perf_counter() - t0
    t1 = time.perf_counter()
    for k in range(1, config.iterations + 1):
        if config.min_abs_alpha is not None and abs(state.peek_alpha()) < config.min_abs_alpha:
            log.info("stopping at iteration %d: |alpha| below %g", k, config.min_abs_alpha)
            break
        c, alpha = state.step()
        trace.records.append(IterationRecord(k, c, alpha, state.rel_error(), time.perf_counter() - t1))
        if config.progress_every and k % config.progress_every == 0:
            err = state.rel_error()
            log.info("iteration %d/%d |alpha|=%.3e%s", k, config.iterations, abs(alpha), "" if err is None else f" rel_err={err:.4e}")
    trace.iterate_seconds = time.perf_counter() - t1
    return state.model(), trace


def exact_relative_l2_error(model: SparseDensity, truth: SparseDensity) -> float:
    """``||truth - model|| / ||truth||`` from closed-form inner products."""
    tt = sparse_l2_inner(truth, truth)
    if not tt > 0.0:
        raise ValueError("truth has zero norm")
    if len(model) == 0 and model.constant == 0.0:
        return 1.0
    sq = tt - 2.0 * sparse_l2_inner(truth, model) + sparse_l2_inner(model, model)
    return math.sqrt(max(sq, 0.0) / tt)
