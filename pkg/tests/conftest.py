import numpy as np

from sphere_density import sampler
from sphere_density.estimators import DensityBound, SparseDensity
from sphere_density.kernel import KernelParams, peak
from sphere_density.sphere import pole


def kernel_samples(h, count, seed, d=3, center=None):
    """Draw ``count`` points from ``Q_h(center . )`` using the exact peak as bound."""
    params = KernelParams(d, h)
    c = pole(d).coords if center is None else np.asarray(center, dtype=float)
    truth = SparseDensity.single(params, c)
    pts, _ = sampler.sample(truth, DensityBound(peak(params), "exact"), count, seed)
    return pts, truth


def random_model(rng, params, terms, normalized=False, constant=0.0):
    centers = rng.standard_normal((terms, params.d))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    return SparseDensity(params, centers, rng.uniform(-1.0, 1.0, terms), normalized, constant)


ACCEPTANCE_LINES = []


def acceptance_line(number, name, passed, detail):
    line = f"criterion {number} {name}: {'PASS' if passed else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
