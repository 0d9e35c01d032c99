import json
import math

import numpy as np
import pytest

from conftest import kernel_samples, random_model
from sphere_density import sampler
from sphere_density.estimators import DenseKde, DensityBound, SparseDensity, upper_bound
from sphere_density.kernel import KernelParams, peak
from sphere_density.sampler import SamplerStats, goodness_check, sample
from sphere_density.sphere import pole, sample_uniform, surface_measure

E3 = np.array([0.0, 0.0, 1.0])


def uniform_model(d=3):
    return SparseDensity.single(KernelParams(d, 1e-300), pole(d).coords)


def test_zero_count():
    pts, stats = sample(uniform_model(), 1.0, 0, 1)
    assert pts.shape == (0, 3)
    assert stats.proposals == 0 and stats.samples_produced == 0
    assert math.isnan(stats.eval_per_sample)
    assert stats.to_dict()["eval_per_sample"] is None


def test_errors():
    with pytest.raises(ValueError):
        sample(uniform_model(), 0.0, 5, 1)
    with pytest.raises(ValueError):
        sample(uniform_model(), 1.0, -1, 1)


@pytest.mark.parametrize("d", [2, 3])
def test_uniform_with_exact_bound_accepts_everything(d):
    c = 1.0 / surface_measure(d)
    pts, stats = sample(uniform_model(d), DensityBound(c, "exact"), 10_000, 3)
    assert len(pts) == 10_000
    assert stats.acceptance_rate == 1.0
    assert stats.eval_per_sample == 1.0
    assert stats.bound_violations == 0


def test_uniform_half_acceptance():
    c = 2.0 / (4 * math.pi)
    _, stats = sample(uniform_model(), c, 100_000, 4)
    assert abs(stats.acceptance_rate - 0.5) <= 0.01
    assert stats.density_evaluations == stats.proposals >= stats.samples_produced


@pytest.mark.parametrize("factor", [1.5, 3.0, 10.0])
def test_efficiency_identity_uniform(factor):
    _, stats = sample(uniform_model(), factor / (4 * math.pi), 20_000, 5)
    assert abs(stats.eval_per_sample / factor - 1.0) <= 0.05


@pytest.mark.parametrize("d,h", [(3, 0.6), (2, 0.9)])
def test_efficiency_identity_single_kernel(d, h):
    p = KernelParams(d, h)
    m = SparseDensity.single(p, pole(d).coords)
    _, stats = sample(m, peak(p), 20_000, 6)
    expected = peak(p) * surface_measure(d)
    assert abs(stats.eval_per_sample / expected - 1.0) <= 0.05


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("h", [0.3, 0.6, 0.9])
def test_samples_match_kernel_moments(d, h):
    p = KernelParams(d, h)
    center = pole(d).coords
    m = SparseDensity.single(p, center)
    pts, stats = sample(m, upper_bound(m, "grid"), 100_000, 1000 * d + int(10 * h))
    assert stats.bound_violations == 0
    report = goodness_check(pts, p, center)
    assert report.passed, report.to_dict()
    assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) <= 1e-12


def test_goodness_examples():
    pts, _ = kernel_samples(0.6, 100_000, 12)
    report = goodness_check(pts, KernelParams(3, 0.6), pole(3))
    m1 = report.moments[0]
    assert abs(m1.mean - 0.6) <= 3 * m1.stderr
    assert report.passed and len(report.moments) == 3

    degenerate = goodness_check(np.tile(E3, (100, 1)), KernelParams(3, 0.6), E3)
    assert degenerate.moments[0].mean == 1.0
    assert not degenerate.passed

    uniform = goodness_check(sample_uniform(3, 100_000, 2), 0.0, E3)
    assert uniform.passed
    assert all(m.expected == 0.0 for m in uniform.moments)

    with pytest.raises(ValueError):
        goodness_check(np.empty((0, 3)), 0.5, E3)


def test_goodness_circle_uses_cosines():
    pts, _ = kernel_samples(0.5, 50_000, 3, d=2, center=[0.0, 1.0])
    report = goodness_check(pts, 0.5, [0.0, 1.0], max_order=4)
    assert report.passed
    assert [m.expected for m in report.moments] == [0.5, 0.25, 0.125, 0.0625]


def test_no_violations_with_grid_bound_over_a_million_proposals():
    p = KernelParams(3, 0.9)
    data, _ = kernel_samples(0.6, 200, 8)
    rng = np.random.default_rng(0)
    for est in (DenseKde(p, data), random_model(rng, p, 5, True)):
        if isinstance(est, SparseDensity):
            est = SparseDensity(p, est.centers, np.abs(est.coefficients), True)
        bound = upper_bound(est, "grid", 10_000, 1.1)
        total = SamplerStats()
        seed = 0
        while total.proposals < 1_000_000:
            _, st = sample(est, bound, 20_000, seed)
            total = total + st
            seed += 1
        assert total.bound_violations == 0


def test_violations_are_counted_and_sampling_continues():
    p = KernelParams(3, 0.9)
    m = SparseDensity.single(p, E3)
    low = 0.5 * peak(p)
    pts, stats = sample(m, low, 2000, 1)
    assert len(pts) == 2000
    assert stats.bound_violations > 0


def test_negative_values_never_accepted():
    p = KernelParams(3, 0.6)
    m = SparseDensity(p, [E3, -E3], [1.0, -1.0])
    pts, _ = sample(m, peak(p), 5000, 2)
    assert np.all(m.evaluate(pts) > 0)


def test_seed_determinism():
    m = SparseDensity.single(KernelParams(3, 0.6), E3)
    a, sa = sample(m, upper_bound(m), 3000, 77)
    b, sb = sample(m, upper_bound(m), 3000, 77)
    assert a.tobytes() == b.tobytes()
    assert sa.proposals == sb.proposals and sa.bound_violations == sb.bound_violations
    c, _ = sample(m, upper_bound(m), 3000, 78)
    assert not np.array_equal(a, c)


def test_stats_merge_and_json(tmp_path):
    a = SamplerStats(10, 30, 1, 0.5, 0.4)
    b = SamplerStats(5, 10, 0, 0.25, 0.2)
    c = a + b
    assert (c.samples_produced, c.proposals, c.bound_violations) == (15, 40, 1)
    assert c.eval_per_sample == pytest.approx(40 / 15)
    path = tmp_path / "s.json"
    c.save(path)
    obj = json.loads(path.read_text())
    for key in ("samples", "proposals", "evaluations", "eval_per_sample", "bound_violations", "wall_seconds"):
        assert key in obj
    assert obj["evaluations"] == obj["proposals"] == 40


def test_exact_bound_type_accepted():
    m = uniform_model()
    pts, _ = sampler.sample(m, DensityBound(1 / (4 * math.pi), "exact"), 10, 0)
    assert len(pts) == 10
