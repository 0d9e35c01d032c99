"""The Abel-Poisson kernel on S^1 and S^2 and its closed-form L2 geometry.

    Q_h(t) = (1 / omega) * (1 - h^2) / (1 + h^2 - 2 h t)^(d / 2)

with ``omega`` the surface measure of S^{d-1} and ``t`` the cosine of the
angle to the kernel center. The family is closed under spherical
convolution, ``<Q_a(xi . .), Q_b(eta . .)> = Q_{ab}(xi . eta)``, which is
what makes every inner product in this package exact and cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sphere import check_dimension, surface_measure

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class KernelParams:
    """Dimension ``d`` (2 or 3) and concentration ``0 < h < 1``."""

    d: int
    h: float

    def __post_init__(self):
        check_dimension(self.d)
        h = float(self.h)
        if not (0.0 < h < 1.0):
            raise ValueError(f"concentration h must satisfy 0 < h < 1, got {self.h!r}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "d", int(self.d))

    @classmethod
    def from_lambda(cls, d: int, lam: float) -> "KernelParams":
        """Kernel family indexed by ``lam > 1`` via ``h = 1 - 1/lam``."""
        return cls(d, 1.0 - 1.0 / lam)


def clamp_cosine(t):
    """Clip dot products that overshoot [-1, 1] by round-off; reject the rest."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + CLAMP_TOL) or np.any(np.isnan(t)):
        raise ValueError("cosine argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def abel_poisson(d: int, h: float, t):
    """Unchecked kernel values; ``h`` may be 0 (uniform density)."""
    q = 1.0 + h * h - 2.0 * h * np.asarray(t, dtype=float)
    scale = (1.0 - h * h) / surface_measure(d)
    if d == 3:
        return scale / (q * np.sqrt(q))
    return scale / q


def evaluate(params: KernelParams, t):
    """Kernel value at cosine ``t`` (scalar or array)."""
    out = abel_poisson(params.d, params.h, clamp_cosine(t))
    return float(out) if np.ndim(out) == 0 else out


def peak(params: KernelParams) -> float:
    """``Q_h(1) = (1 + h) / (omega (1 - h)^(d-1))``, the kernel's supremum."""
    h = params.h
    return (1.0 + h) / (surface_measure(params.d) * (1.0 - h) ** (params.d - 1))


def sphere_integral(params: KernelParams) -> float:
    """Integral of the kernel over the sphere, from its closed-form antiderivative.

    S^2: ``2 pi (1 - h^2) / omega * [h^-1 (1 + h^2 - 2ht)^(-1/2)]_{-1}^{1}``.
    S^1: ``(1 - h^2) / omega * 2 pi / sqrt((1 + h^2)^2 - 4 h^2)``.
    Both equal one; they are evaluated rather than hard-coded so that the
    quadrature tests have a formula to agree with.
    """
    h = params.h
    omega = surface_measure(params.d)
    if params.d == 2:
        return (1.0 - h * h) / omega * 2.0 * math.pi / math.sqrt((1.0 + h * h) ** 2 - 4.0 * h * h)
    if h < 1e-8:
        # antiderivative difference (1/(1-h) - 1/(1+h)) / h -> 2 cancels badly
        bracket = 2.0 / (1.0 - h * h)
    else:
        bracket = (1.0 / (1.0 - h) - 1.0 / (1.0 + h)) / h
    return 2.0 * math.pi * (1.0 - h * h) / omega * bracket


def cap_mass(params: KernelParams, c: float) -> float:
    """Probability of the cap ``{xi . center >= c}`` under the kernel density."""
    h = params.h
    if params.d == 3:
        # 2 pi (1-h^2)/omega * [h^-1 (1+h^2-2ht)^(-1/2)]_c^1
        return 0.5 * (1.0 - h * h) / h * (1.0 / (1.0 - h) - 1.0 / math.sqrt(1.0 + h * h - 2.0 * h * c))
    # Poisson kernel CDF on the circle, arc |theta| <= arccos(c)
    theta = math.acos(c)
    return 2.0 / math.pi * math.atan((1.0 + h) / (1.0 - h) * math.tan(theta / 2.0))


def l2_inner(params: KernelParams, h2: float, gamma):
    """``<Q_h(xi . .), Q_h2(eta . .)>_L2`` for ``gamma = xi . eta``.

    ``h2`` may be 0, meaning the uniform density.
    """
    if not (0.0 <= h2 < 1.0):
        raise ValueError(f"second concentration must lie in [0, 1), got {h2!r}")
    out = abel_poisson(params.d, params.h * h2, clamp_cosine(gamma))
    return float(out) if np.ndim(out) == 0 else out


def l2_norm(params: KernelParams) -> float:
    return math.sqrt(l2_inner(params, params.h, 1.0))


def legendre_moment(params: KernelParams, n: int) -> float:
    """E[P_n(X . c)] on S^2, E[cos(n theta)] on S^1, for X ~ Q_h(. c): h^n."""
    if n < 0:
        raise ValueError("moment order must be >= 0")
    return params.h ** n
