"""Sparse greedy density estimation on the sphere, rejection sampling and fiber simulation."""

from .estimators import (
    DenseKde,
    DensityBound,
    SparseDensity,
    kde_eval,
    sparse_eval,
    sparse_integral,
    sparse_l2_inner,
    upper_bound,
)
from .fibers import FiberPolyline, simulate_fiber, simulate_web
from .greedy import GreedyConfig, GreedyTrace, exact_relative_l2_error, fit, precompute_expectations
from .kernel import KernelParams
from .sampler import SamplerStats, goodness_check, sample
from .sphere import SphereGrid, UnitVector, equiangular_grid, quadrature_grid, sample_uniform, surface_measure

__version__ = "0.1.0"
