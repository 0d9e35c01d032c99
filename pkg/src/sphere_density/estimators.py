"""Dense and sparse kernel density estimators on the sphere.

A :class:`DenseKde` is the classical uniform-weight mixture of one kernel
per data point. A :class:`SparseDensity` is a signed combination of a few
kernels, as produced by :func:`sphere_density.greedy.fit`. Both expose
``evaluate(points)`` and ``dimension`` and can be handed to the sampler.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernel
from ._compute import kernel_sums
from .kernel import KernelParams
from .sphere import UnitVector, as_points, equiangular_grid, surface_measure


def _query(xi, d: int):
    """Return ``(points, scalar)`` for a single direction or a batch."""
    if isinstance(xi, UnitVector):
        xi = xi.coords
    arr = np.asarray(xi, dtype=float)
    single = arr.ndim == 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.shape[1] != d:
        raise ValueError(f"dimension mismatch: estimator has d={d}, query has d={pts.shape[1]}")
    return pts, single


@dataclass(frozen=True, eq=False)
class DenseKde:
    """``f(xi) = (1/N) sum_n Q_h(X_n . xi)``; weights are implicit."""

    params: KernelParams
    centers: np.ndarray

    def __post_init__(self):
        centers = as_points(self.centers, d=self.params.d)
        if len(centers) == 0:
            raise ValueError("a KDE needs at least one data point")
        object.__setattr__(self, "centers", centers)

    @property
    def dimension(self) -> int:
        return self.params.d

    def __len__(self) -> int:
        return len(self.centers)

    def evaluate(self, points) -> np.ndarray:
        w = np.full(len(self.centers), 1.0 / len(self.centers))
        return kernel_sums(points, self.centers, w, self.params.d, self.params.h)

    def triangle_bound(self) -> float:
        # weights 1/N sum to one
        return kernel.peak(self.params)


@dataclass(frozen=True, eq=False)
class SparseDensity:
    """Signed kernel expansion ``constant/omega + sum_k alpha_k d_k``.

    ``d_k`` is ``Q_h(c_k . )`` or, with ``normalized_dictionary``, that
    kernel divided by its L2 norm. ``constant`` weights the uniform
    density and is non-zero only for fits started from it.
    """

    params: KernelParams
    centers: np.ndarray
    coefficients: np.ndarray
    normalized_dictionary: bool = False
    constant: float = 0.0

    def __post_init__(self):
        d = self.params.d
        centers = np.asarray(self.centers, dtype=float)
        centers = centers.reshape(0, d) if centers.size == 0 else as_points(centers, d=d)
        coef = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if len(coef) != len(centers):
            raise ValueError("need exactly one coefficient per center")
        if not np.all(np.isfinite(coef)) or not np.isfinite(self.constant):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def empty(cls, params: KernelParams, normalized_dictionary: bool = False) -> "SparseDensity":
        return cls(params, np.empty((0, params.d)), np.empty(0), normalized_dictionary)

    @classmethod
    def single(cls, params: KernelParams, center, coefficient: float = 1.0, normalized_dictionary: bool = False):
        return cls(params, np.asarray(center, dtype=float).reshape(1, -1), [coefficient], normalized_dictionary)

    @property
    def dimension(self) -> int:
        return self.params.d

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def terms(self) -> list:
        return [(UnitVector.from_array(c), float(a)) for c, a in zip(self.centers, self.coefficients)]

    @property
    def norm_factor(self) -> float:
        """Divisor applied to every kernel (its L2 norm, or 1)."""
        return kernel.l2_norm(self.params) if self.normalized_dictionary else 1.0

    def evaluate(self, points) -> np.ndarray:
        w = self.coefficients / self.norm_factor
        out = kernel_sums(points, self.centers, w, self.params.d, self.params.h)
        if self.constant:
            out = out + self.constant / surface_measure(self.params.d)
        return out

    def triangle_bound(self) -> float:
        return float(np.sum(np.abs(self.coefficients))) * kernel.peak(self.params) / self.norm_factor + abs(
            self.constant
        ) / surface_measure(self.params.d)

    def merged(self) -> "SparseDensity":
        """Combine terms sharing a center; order of first appearance is kept."""
        if len(self) == 0:
            return self
        _, first, inverse = np.unique(self.centers, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        coef = np.zeros(len(first))
        for slot, a in zip(inverse, self.coefficients):
            coef[slot] += a
        order = np.argsort(first, kind="stable")
        return SparseDensity(
            self.params, self.centers[first[order]], coef[order], self.normalized_dictionary, self.constant
        )

    def to_dict(self) -> dict:
        out = {
            "dimension": self.params.d,
            "h": self.params.h,
            "normalized_dictionary": self.normalized_dictionary,
            "terms": [
                {"center": [float(v) for v in c], "coefficient": float(a)}
                for c, a in zip(self.centers, self.coefficients)
            ],
        }
        if self.constant:
            out["constant"] = self.constant
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SparseDensity":
        params = KernelParams(int(obj["dimension"]), float(obj["h"]))
        terms = obj.get("terms", [])
        centers = np.array([t["center"] for t in terms], dtype=float).reshape(len(terms), params.d)
        coef = np.array([t["coefficient"] for t in terms], dtype=float)
        return cls(params, centers, coef, bool(obj.get("normalized_dictionary", False)), float(obj.get("constant", 0.0)))

    def save(self, path) -> None:
        # json writes floats with repr(), i.e. 17 significant digits round-trip
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SparseDensity":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


Estimator = Union[DenseKde, SparseDensity]


def kde_eval(kde: DenseKde, xi):
    pts, single = _query(xi, kde.dimension)
    out = kde.evaluate(pts)
    return float(out[0]) if single else out


def sparse_eval(model: SparseDensity, xi):
    pts, single = _query(xi, model.dimension)
    out = model.evaluate(pts)
    return float(out[0]) if single else out


def sparse_integral(model: SparseDensity) -> float:
    """Total mass; every raw kernel integrates to one."""
    return float(np.sum(model.coefficients)) / model.norm_factor + model.constant


def sparse_l2_inner(a: SparseDensity, b: SparseDensity) -> float:
    """Exact ``<a, b>`` in L2 of the sphere, ``O(len(a) * len(b))``.

    Term pairs use the semigroup identity with concentration ``h_a * h_b``;
    the uniform parts contribute through the kernels' unit mass.
    """
    d = a.params.d
    if b.params.d != d:
        raise ValueError("dimension mismatch between models")
    omega = surface_measure(d)
    total = 0.0
    if len(a) and len(b):
        cross = kernel_sums(a.centers, b.centers, b.coefficients, d, a.params.h * b.params.h)
        total += float(np.dot(a.coefficients, cross)) / (a.norm_factor * b.norm_factor)
    if a.constant:
        total += a.constant * float(np.sum(b.coefficients)) / (b.norm_factor * omega)
    if b.constant:
        total += b.constant * float(np.sum(a.coefficients)) / (a.norm_factor * omega)
    if a.constant and b.constant:
        total += a.constant * b.constant / omega
    return total


@dataclass(frozen=True)
class DensityBound:
    """Upper bound ``C`` on an estimator, as used by the rejection sampler."""

    value: float
    method: str
    grid_resolution: Optional[int] = None
    safety_factor: Optional[float] = None
    grid_max: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        if self.method not in ("triangle", "grid", "exact"):
            raise ValueError(f"unknown bound method {self.method!r}")
        if not (np.isfinite(self.value) and self.value > 0.0):
            raise ValueError(f"bound must be positive and finite, got {self.value!r}")
        if self.grid_max is not None and self.value < self.grid_max:
            raise ValueError("bound lies below the estimator's grid maximum")


def upper_bound(estimator: Estimator, method: str = "grid", grid_resolution: int = 10000, safety: float = 1.1) -> DensityBound:
    """Bound the estimator from above.

    ``triangle`` sums the absolute term weights times the kernel peak;
    ``grid`` multiplies the maximum over an equiangular grid by ``safety``
    to cover maxima that fall between nodes.
    """
    if method == "triangle":
        return DensityBound(estimator.triangle_bound(), "triangle")
    if method != "grid":
        raise ValueError(f"unknown bound method {method!r}")
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be >= 1")
    if not safety > 1.0:
        raise ValueError("safety factor must exceed 1")
    grid = equiangular_grid(estimator.dimension, grid_resolution)
    grid_max = float(np.max(estimator.evaluate(grid.nodes)))
    if grid_max <= 0.0:
        raise ValueError("estimator is non-positive on the whole grid")
    return DensityBound(safety * grid_max, "grid", grid_resolution, safety, grid_max)
