import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import kernel_samples, random_model
from sphere_density.estimators import SparseDensity
from sphere_density.greedy import GreedyConfig, fit
from sphere_density.kernel import KernelParams
from sphere_density.sphere import equiangular_grid, sample_uniform
from sphere_density.validation import compare_densities, project_to_circle, symmetrize

P2 = KernelParams(2, 0.9)


def test_projection_examples():
    s = math.sqrt(0.5)
    out, rep = project_to_circle([[0.6, 0.8, 0.0], [0.0, 0.0, 1.0], [s, 0.0, s]])
    assert_allclose(out, [[0.6, 0.8], [1.0, 0.0]], atol=1e-15)
    assert (rep.input_count, rep.projected_count, rep.dropped_count) == (3, 2, 1)
    assert not rep.symmetrized


def test_projection_threshold_validation():
    with pytest.raises(ValueError):
        project_to_circle([[1.0, 0.0, 0.0]], drop_threshold=0.0)
    with pytest.raises(ValueError):
        project_to_circle([[1.0, 0.0, 0.0]], drop_threshold=1.0)
    with pytest.raises(ValueError):
        project_to_circle([[1.0, 0.0]])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_projection_preserves_azimuth(seed):
    pts = sample_uniform(3, 200, seed)
    out, rep = project_to_circle(pts)
    assert rep.projected_count + rep.dropped_count == rep.input_count == 200
    # rescaling by the radius may move atan2 by an ulp or two
    assert_allclose(np.arctan2(out[:, 1], out[:, 0]), np.arctan2(pts[:, 1], pts[:, 0]), rtol=0, atol=4 * np.spacing(np.pi))
    assert np.max(np.abs(np.linalg.norm(out, axis=1) - 1.0)) <= 1e-12


def test_symmetrize_examples():
    assert_allclose(symmetrize([[1.0, 0.0]]), [[1.0, 0.0], [-1.0, 0.0]])
    assert symmetrize(np.empty((0, 2))).shape == (0, 2)
    assert symmetrize([]).shape == (0, 2)


def test_symmetrize_odd_moments_vanish():
    pts = symmetrize(sample_uniform(2, 1000, 6) * 1.0)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    for k in range(5):
        assert abs(np.mean(np.cos((2 * k + 1) * theta))) <= 1e-14
    assert_allclose(pts[1000:], -pts[:1000])


def test_symmetrized_fit_is_nearly_even():
    # relative to the curve maximum: the fit is signed and may vanish, so a
    # pointwise ratio is meaningless near its zeros
    pts, _ = kernel_samples(0.8, 2000, 3, d=2, center=[1.0, 0.0])
    model, _ = fit(symmetrize(pts), GreedyConfig(P2, 1000))
    g = equiangular_grid(2, 1000).nodes
    f, fm = model.evaluate(g), model.evaluate(-g)
    assert np.max(np.abs(f - fm)) <= 0.02 * np.max(np.abs(f))


def test_compare_identity_and_zero():
    a = random_model(np.random.default_rng(1), P2, 4)
    a = SparseDensity(P2, a.centers, np.abs(a.coefficients))
    same = compare_densities(a, a, 100)
    assert same.discrepancy <= 1e-7
    zero = compare_densities(a, SparseDensity.empty(P2), 100)
    assert zero.discrepancy == 1.0
    assert np.all(zero.values_b == 0.0)
    with pytest.raises(ValueError):
        compare_densities(SparseDensity.empty(P2), a)
    with pytest.raises(ValueError):
        compare_densities(SparseDensity.single(KernelParams(3, 0.5), [0, 0, 1.0]), a)


def test_compare_extrema_and_table(tmp_path):
    a = SparseDensity.single(P2, [0.0, 1.0])
    b = SparseDensity.single(P2, [-1.0, 0.0])
    rep = compare_densities(a, b, 400)
    assert rep.argmax_a == pytest.approx(math.pi / 2)
    assert rep.argmax_b == pytest.approx(math.pi)
    assert rep.argmin_a == pytest.approx(3 * math.pi / 2)
    assert rep.theta[0] == 0.0 and rep.theta[-1] < 2 * math.pi
    assert rep.summary()["grid_resolution"] == 400
    path = tmp_path / "cmp.csv"
    rep.write_table(path)
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert path.read_text().splitlines()[0] == "theta,value_a,value_b"
    assert np.array_equal(table[:, 1], rep.values_a)


def test_same_distribution_fits_agree():
    pts, _ = kernel_samples(0.8, 20_000, 31, d=2, center=[0.0, 1.0])
    cfg = GreedyConfig(P2, 500)
    a, _ = fit(pts[:10_000], cfg)
    b, _ = fit(pts[10_000:], cfg)
    assert compare_densities(a, b).discrepancy <= 0.1
