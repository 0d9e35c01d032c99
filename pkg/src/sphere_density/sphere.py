"""Points, grids and quadrature on the circle S^1 and the sphere S^2.

Point sets are plain ``(n, d)`` float arrays throughout the package; the
:class:`UnitVector` type exists for single, validated directions such as
kernel centers or fiber start directions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

UNIT_TOL = 1e-12
DIMENSIONS = (2, 3)


def check_dimension(d: int) -> int:
    if d not in DIMENSIONS:
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    return int(d)


@dataclass(frozen=True)
class UnitVector:
    """A point on S^{d-1}, d in {2, 3}."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        check_dimension(len(coords))
        norm = math.sqrt(sum(c * c for c in coords))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector (norm {norm!r})")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_array(cls, values, normalize: bool = False) -> "UnitVector":
        arr = np.asarray(values, dtype=float).reshape(-1)
        if normalize:
            norm = np.linalg.norm(arr)
            if not np.isfinite(norm) or norm == 0.0:
                raise ValueError("cannot normalize a zero or non-finite vector")
            arr = arr / norm
        return cls(tuple(arr))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def dot(self, other) -> float:
        return float(np.dot(self.coords, np.asarray(other, dtype=float)))


def pole(d: int) -> UnitVector:
    """The last canonical basis vector (epsilon^3 on S^2, (0, 1) on S^1)."""
    check_dimension(d)
    coords = [0.0] * d
    coords[-1] = 1.0
    return UnitVector(tuple(coords))


def as_points(points, d: Optional[int] = None, normalize: bool = False) -> np.ndarray:
    """Validate (or normalize) an array of directions into shape ``(n, d)``.

    Raises ``ValueError`` when the dimension is wrong or, with
    ``normalize=False``, when any row deviates from unit length by more
    than 1e-12.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, d or 3)
    if arr.ndim != 2:
        raise ValueError(f"expected an (n, d) array, got shape {arr.shape}")
    check_dimension(arr.shape[1])
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"dimension mismatch: expected {d}, got {arr.shape[1]}")
    if arr.shape[0] == 0:
        return arr
    norms = np.linalg.norm(arr, axis=1)
    if normalize:
        if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
            raise ValueError("cannot normalize zero or non-finite rows")
        return arr / norms[:, None]
    if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
        raise ValueError("points are not on the unit sphere")
    return arr


def surface_measure(d: int) -> float:
    """Surface area of S^{d-1}: 2 pi^{d/2} / Gamma(d/2)."""
    if d < 2:
        raise ValueError(f"surface measure needs d >= 2, got {d}")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def uniform_directions(rng: np.random.Generator, d: int, count: int) -> np.ndarray:
    # Gaussian-normalize; a zero draw has probability zero in floating point
    x = rng.standard_normal((count, d))
    return x / np.linalg.norm(x, axis=1)[:, None]


def sample_uniform(d: int, count: int, rng_seed: int) -> np.ndarray:
    """Draw ``count`` points uniformly on S^{d-1}; reproducible for a seed."""
    check_dimension(d)
    if count < 0:
        raise ValueError("count must be non-negative")
    return uniform_directions(np.random.default_rng(rng_seed), d, count)


@dataclass(frozen=True)
class SphereGrid:
    """Nodes on S^{d-1}, optionally with quadrature weights."""

    dimension: int
    nodes: np.ndarray
    kind: str
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        check_dimension(self.dimension)
        if self.kind not in ("equiangular", "quadrature"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if len(self.nodes) == 0:
            raise ValueError("grid must have at least one node")
        if (self.kind == "quadrature") != (self.weights is not None):
            raise ValueError("weights are present iff kind == 'quadrature'")

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> float:
        if self.weights is None:
            raise ValueError("equiangular grids carry no quadrature weights")
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


def _circle(angles: np.ndarray) -> np.ndarray:
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _sphere(polar: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
    th, ph = np.meshgrid(polar, azimuth, indexing="ij")
    st = np.sin(th)
    pts = np.column_stack([(st * np.cos(ph)).ravel(), (st * np.sin(ph)).ravel(), np.cos(th).ravel()])
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def equiangular_grid(d: int, resolution: int) -> SphereGrid:
    """Equiangular grid with about ``resolution`` nodes.

    On S^1 the nodes are the angles ``2 pi k / resolution``. On S^2 we take
    ``m = ceil(sqrt(resolution))`` polar rows at ``(i + 1/2) pi / m`` (the
    poles themselves are skipped) times ``n = ceil(resolution / m)``
    equally spaced azimuths, so ``resolution <= m * n``.
    """
    check_dimension(d)
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if d == 2:
        nodes = _circle(2.0 * np.pi * np.arange(resolution) / resolution)
    else:
        m = math.isqrt(resolution - 1) + 1
        n = -(-resolution // m)
        polar = (np.arange(m) + 0.5) * np.pi / m
        azimuth = 2.0 * np.pi * np.arange(n) / n
        nodes = _sphere(polar, azimuth)
    return SphereGrid(d, nodes, "equiangular")


def quadrature_grid(d: int, order: int) -> SphereGrid:
    """Positive-weight rule exact for (spherical / trigonometric) degree ``order``.

    S^1: trapezoidal rule on ``order + 1`` equally spaced angles.
    S^2: Gauss-Legendre in cos(polar) with ``ceil((order + 1) / 2)`` nodes
    times ``order + 1`` equally spaced azimuths.
    """
    check_dimension(d)
    if order < 1:
        raise ValueError("order must be >= 1")
    if d == 2:
        n = order + 1
        nodes = _circle(2.0 * np.pi * np.arange(n) / n)
        weights = np.full(n, 2.0 * np.pi / n)
    else:
        n_polar = (order + 2) // 2
        n_az = order + 1
        z, wz = np.polynomial.legendre.leggauss(n_polar)
        azimuth = 2.0 * np.pi * np.arange(n_az) / n_az
        nodes = _sphere(np.arccos(z), azimuth)
        weights = np.repeat(wz * (2.0 * np.pi / n_az), n_az)
    return SphereGrid(d, nodes, "quadrature", weights)


def read_points(path, header: bool = False, d: Optional[int] = None, normalize: bool = False) -> np.ndarray:
    """Read a point CSV (one row per point, d columns, no header by default)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # empty file
        arr = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=1 if header else 0)
    if arr.size == 0:
        return np.empty((0, d or 3))
    return as_points(arr, d=d, normalize=normalize)


def write_points(path, points, header: bool = False) -> None:
    arr = np.asarray(points, dtype=float)
    names = ",".join(f"x{i + 1}" for i in range(arr.shape[1])) if header else ""
    np.savetxt(path, arr, fmt="%.17g", delimiter=",", header=names, comments="")
