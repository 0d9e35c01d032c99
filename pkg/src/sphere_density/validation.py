"""Compare 3D direction data with planar (2D) direction data on the circle.

The 3D set is projected to its first two coordinates and renormalized, both
sets are made antipodally symmetric, each gets a sparse greedy fit, and the
two fits are compared in L2 and on a plotting grid over [0, 2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import SparseDensity, sparse_l2_inner
from .sphere import as_points, equiangular_grid


@dataclass(frozen=True)
class ProjectionReport:
    input_count: int
    projected_count: int
    dropped_count: int
    symmetrized: bool = False


def project_to_circle(data3d, drop_threshold: float = 1e-8):
    """Map ``(x1, x2, x3)`` to ``(x1, x2) / |(x1, x2)|``.

    Points with ``|(x1, x2)| < drop_threshold`` have no usable azimuth and
    are dropped. Returns ``(data2d, ProjectionReport)``.
    """
    if not 0.0 < drop_threshold < 1.0:
        raise ValueError("drop_threshold must lie in (0, 1)")
    pts = as_points(data3d, d=3)
    planar = pts[:, :2]
    r = np.hypot(planar[:, 0], planar[:, 1])
    keep = r >= drop_threshold
    out = planar[keep] / r[keep, None]
    return out, ProjectionReport(len(pts), int(keep.sum()), int((~keep).sum()))


def symmetrize(data) -> np.ndarray:
    """Antipodal doubling: the input rows followed by their negations."""
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 2)
    return np.concatenate([arr, -arr])


@dataclass
class ComparisonReport:
    discrepancy: float
    argmax_a: float
    argmax_b: float
    argmin_a: float
    argmin_b: float
    theta: np.ndarray
    values_a: np.ndarray
    values_b: np.ndarray

    def summary(self) -> dict:
        return {
            "relative_l2_discrepancy": self.discrepancy,
            "argmax_a": self.argmax_a,
            "argmax_b": self.argmax_b,
            "argmin_a": self.argmin_a,
            "argmin_b": self.argmin_b,
            "max_a": float(np.max(self.values_a)),
            "max_b": float(np.max(self.values_b)),
            "min_a": float(np.min(self.values_a)),
            "min_b": float(np.min(self.values_b)),
            "grid_resolution": len(self.theta),
        }

    def write_table(self, path) -> None:
        table = np.column_stack([self.theta, self.values_a, self.values_b])
        np.savetxt(path, table, fmt="%.17g", delimiter=",", header="theta,value_a,value_b", comments="")


def compare_densities(model_a: SparseDensity, model_b: SparseDensity, grid_resolution: int = 1000) -> ComparisonReport:
    """``||A - B|| / ||A||`` (exact) plus both curves on an angle grid."""
    if model_a.dimension != 2 or model_b.dimension != 2:
        raise ValueError("density comparison works on the circle (d = 2)")
    aa = sparse_l2_inner(model_a, model_a)
    if not aa > 0.0:
        raise ValueError("reference model has zero norm")
    sq = aa - 2.0 * sparse_l2_inner(model_a, model_b) + sparse_l2_inner(model_b, model_b)
    grid = equiangular_grid(2, grid_resolution)
    theta = 2.0 * np.pi * np.arange(grid_resolution) / grid_resolution
    va = model_a.evaluate(grid.nodes)
    vb = model_b.evaluate(grid.nodes)
    return ComparisonReport(
        math.sqrt(max(sq, 0.0) / aa),
        float(theta[np.argmax(va)]),
        float(theta[np.argmax(vb)]),
        float(theta[np.argmin(va)]),
        float(theta[np.argmin(vb)]),
        theta,
        va,
        vb,
    )
