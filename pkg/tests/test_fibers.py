import numpy as np
import pytest
from numpy.testing import assert_allclose

from sphere_density import fibers, sampler
from sphere_density.estimators import SparseDensity, upper_bound
from sphere_density.fibers import (
    FiberPolyline,
    fiber_seed,
    read_fibers,
    simulate_fiber,
    simulate_web,
    start_points,
    write_fibers,
)
from sphere_density.kernel import KernelParams
from sphere_density.sampler import SamplerStats, goodness_check

E3 = np.array([0.0, 0.0, 1.0])
P6 = KernelParams(3, 0.6)


@pytest.fixture(scope="module")
def model():
    m = SparseDensity.single(P6, E3)
    return m, upper_bound(m)


def test_zero_segments(model):
    m, b = model
    fiber, stats = simulate_fiber(m, b, [1.0, 2.0, 3.0], 0.5, 0, 1)
    assert fiber.segments == 0
    assert_allclose(fiber.points, [[1.0, 2.0, 3.0]])
    assert stats.proposals == 0


def test_fixed_direction_stub(monkeypatch, model):
    m, b = model
    y = np.array([0.0, 0.6, 0.8])

    def fake_sample(estimator, bound, count, rng_seed):
        return np.tile(y, (count, 1)), SamplerStats(count, count)

    monkeypatch.setattr(sampler, "sample", fake_sample)
    start = np.array([1.0, -1.0, 0.5])
    fiber, _ = simulate_fiber(m, b, start, 0.25, 40, 0)
    expected = start + 0.25 * np.arange(41)[:, None] * y
    assert_allclose(fiber.points, expected, rtol=0, atol=1e-12)


def test_segment_lengths(model):
    m, b = model
    fiber, stats = simulate_fiber(m, b, np.zeros(3), 0.37, 5000, 4)
    assert fiber.segments == 5000 and stats.samples_produced == 5000
    assert np.max(np.abs(fiber.segment_lengths() / 0.37 - 1.0)) <= 1e-9


def test_fiber_errors(model):
    m, b = model
    with pytest.raises(ValueError):
        simulate_fiber(m, b, np.zeros(3), 0.0, 5, 0)
    with pytest.raises(ValueError):
        simulate_fiber(m, b, np.zeros(3), 1.0, -1, 0)
    with pytest.raises(ValueError):
        simulate_fiber(m, b, np.zeros(2), 1.0, 5, 0)
    with pytest.raises(ValueError):
        FiberPolyline(1.0, np.empty((0, 3)))


def test_long_fiber_directions_match_model(model):
    m, b = model
    fiber, _ = simulate_fiber(m, b, np.zeros(3), 1.0, 100_000, 11)
    assert np.max(np.abs(fiber.segment_lengths() - 1.0)) <= 1e-9
    # positions grow to ~1e4, so differenced directions are unit only to ~1e-11
    y = fiber.directions()
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    assert goodness_check(y, P6, E3).passed
    # consecutive directions are independent, so E[Y_j . Y_j+1] = |E Y|^2 = h^2
    dots = np.sum(y[1:] * y[:-1], axis=1)
    se = dots.std(ddof=1) / np.sqrt(len(dots))
    assert abs(dots.mean() - 0.36) <= 4 * se


def test_web_single_fiber_no_segments(model):
    m, b = model
    web, stats = simulate_web(m, b, 1, 0)
    assert len(web) == 1 and web[0].segments == 0
    assert_allclose(web[0].points, [[0.0, 0.0, 0.0]])


def test_web_reproducible_bytes(tmp_path, model):
    m, b = model
    paths = []
    for run in range(2):
        web, _ = simulate_web(m, b, 100, 1000, rng_seed=5)
        paths.append(tmp_path / f"web{run}.csv")
        write_fibers(paths[-1], web)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_web_independent_of_threads(model):
    m, b = model
    one, s1 = simulate_web(m, b, 12, 300, "box", 0.5, 9, box=([0, 0, 0], [10, 10, 1]), threads=1)
    many, s4 = simulate_web(m, b, 12, 300, "box", 0.5, 9, box=([0, 0, 0], [10, 10, 1]), threads=4)
    for f1, f4 in zip(one, many):
        assert f1.points.tobytes() == f4.points.tobytes()
    assert s1.proposals == s4.proposals


def test_fibers_use_distinct_streams(model):
    m, b = model
    web, stats = simulate_web(m, b, 3, 50, rng_seed=1)
    assert not np.array_equal(web[0].points, web[1].points)
    assert stats.samples_produced == 150
    assert fiber_seed(1, 0).entropy == fiber_seed(1, 0).entropy
    a = np.random.default_rng(fiber_seed(1, 0)).random()
    assert a != np.random.default_rng(fiber_seed(1, 1)).random()


def test_start_layouts():
    assert_allclose(start_points(3, 3), np.zeros((3, 3)))
    box = start_points(500, 2, "box", box=([0, -1], [2, 1]), rng_seed=3)
    assert np.all(box[:, 0] >= 0) and np.all(box[:, 0] <= 2)
    assert np.all(box[:, 1] >= -1) and np.all(box[:, 1] <= 1)
    explicit = np.arange(6.0).reshape(2, 3)
    assert_allclose(start_points(2, 3, explicit), explicit)
    with pytest.raises(ValueError):
        start_points(2, 3, "grid")
    with pytest.raises(ValueError):
        start_points(2, 3, "box")
    with pytest.raises(ValueError):
        start_points(3, 3, explicit)


def test_web_rejects_empty(model):
    m, b = model
    with pytest.raises(ValueError):
        simulate_web(m, b, 0, 10)


def test_fiber_csv_roundtrip(tmp_path, model):
    m, b = model
    web, _ = simulate_web(m, b, 3, 20, rng_seed=2)
    path = tmp_path / "f.csv"
    write_fibers(path, web)
    assert path.read_text().splitlines()[0] == "fiber_id,j,z1,z2,z3"
    back = read_fibers(path)
    assert len(back) == 3
    for f, pts in zip(web, back):
        assert np.array_equal(f.points, pts)


def test_module_exports_step_tolerance():
    assert fibers.STEP_RTOL == 1e-9
