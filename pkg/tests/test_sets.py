import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hocones.expr import parse
from hocones.sets import (BENCHMARKS, DistanceConfig, Implicit, OracleFailure, ParametricCurve, PointCloud,
                          Union, contains, cusp, distance, distances, half_plane, parabola, whole_space)


def cusp_reference(x, dps=60):
    """Exact distance to {(s^3, s^2) : 0 <= s <= 2} from the roots of the stationarity polynomial."""
    with mpmath.workdps(dps):
        x1, x2 = mpmath.mpf(float(x[0])), mpmath.mpf(float(x[1]))
        # d/ds [(s^3 - x1)^2 + (s^2 - x2)^2] = 2s (3s^4 + 2s^2 - 3 x1 s - 2 x2)
        cands = [mpmath.mpf(0), mpmath.mpf(2)]
        for r in mpmath.polyroots([3, 0, 2, -3 * x1, -2 * x2], maxsteps=200, extraprec=200):
            if abs(mpmath.im(r)) < mpmath.mpf(10) ** -40 and 0 <= mpmath.re(r) <= 2:
                cands.append(mpmath.re(r))
        return float(min(mpmath.sqrt((s ** 3 - x1) ** 2 + (s ** 2 - x2) ** 2) for s in cands))


def test_point_cloud_tie_goes_to_lower_index():
    Q = PointCloud([(0, 0), (1, 1)])
    r = distance(Q, [1.0, 0.0])
    assert r.value == 1.0
    assert np.array_equal(r.nearest, [0, 0])
    assert r.method == "point-cloud"


def test_curve_point_has_distance_zero():
    r = distance(cusp(), [1.0, 1.0])
    assert r.value <= 1e-15
    assert np.allclose(r.nearest, [1, 1])


def test_implicit_cusp_from_the_left():
    r = distance(cusp("implicit"), [-1.0, 0.0])
    # dense sampling of the parameterisation as the reference
    s = np.linspace(0, 2, 2_000_001)
    ref = np.min(np.hypot(s ** 3 + 1, s ** 2))
    assert abs(r.value - ref) <= 1e-9
    assert abs(r.value - 1.0) <= 1e-9
    assert np.linalg.norm(r.nearest) <= 1e-6


def test_contains():
    assert contains(cusp(), [0.0, 0.0], 1e-9)
    assert not contains(cusp(), [0.0, -1.0], 1e-9)
    assert distance(cusp(), [0.0, -1.0]).value >= 1.0 - 1e-12
    pts = np.random.default_rng(0).normal(size=(5, 3))
    Q = PointCloud(pts)
    assert all(contains(Q, p, 1e-12) for p in pts)
    with pytest.raises(ValueError):
        contains(Q, pts[0], 0.0)


def test_parametric_oracle_matches_exact_reference():
    rng = np.random.default_rng(3)
    Q = cusp()
    X = [rng.normal(size=2) * scale for scale in (1, 1e-2, 1e-4, 1e-8, 1e-12) for _ in range(12)]
    s = rng.uniform(0, 1, 30)
    X += list(np.c_[s ** 3, s ** 2] + rng.normal(size=(30, 2)) * 1e-6)
    X = np.array(X)
    vals, near = distances(Q, X)
    assert np.array_equal(np.linalg.norm(X - near, axis=1), vals)
    for x, v in zip(X, vals):
        ref = cusp_reference(x)
        # x - nearest cancels to about eps * |x| when x sits almost on the curve
        assert abs(v - ref) <= 1e-12 * ref + 4 * np.finfo(float).eps * np.linalg.norm(x)


def test_simple_implicit_sets():
    disk = Implicit(2, [], [parse("x1^2 + x2^2 - 1", 2)])
    r = distance(disk, [3.0, 4.0])
    assert r.value == pytest.approx(4.0, abs=1e-12)
    assert np.allclose(r.nearest, [0.6, 0.8], atol=1e-12)
    assert distance(disk, [0.1, 0.2]).value == 0.0
    line = Implicit(2, [parse("x1 + x2 - 1", 2)], [parse("-x1", 2)])
    assert distance(line, [-1.0, 0.0]).value == pytest.approx(np.sqrt(2), abs=1e-12)
    assert distance(half_plane(), [-2.5, 7.0]).value == pytest.approx(2.5, abs=1e-12)
    assert distance(whole_space(3), [1.0, 2.0, 3.0]).value == 0.0


def test_implicit_defaults_and_validation():
    Q = half_plane()
    assert np.array_equal(Q.box[0], [-10, -10]) and np.array_equal(Q.box[1], [10, 10])
    with pytest.raises(ValueError):
        Implicit(2, [parse("x1", 1)], [])
    with pytest.raises(ValueError):
        Implicit(1, [], [], box=(1.0, 0.0))
    with pytest.raises(ValueError):
        ParametricCurve([parse("s", ["s"])], (1.0, 1.0))
    with pytest.raises(ValueError):
        ParametricCurve([parse("x1 + x2", 2)], (0.0, 1.0))
    with pytest.raises(ValueError):
        Union([cusp(), whole_space(3)])
    with pytest.raises(ValueError):
        distances(cusp(), np.zeros((2, 3)))


def test_infeasible_description_raises():
    Q = Implicit(2, [parse("x1^2 + x2^2 + 1", 2)], [])
    with pytest.raises(OracleFailure):
        distance(Q, [0.0, 0.0])


def test_union_takes_the_closest_member():
    a = PointCloud([(0.0, 0.0)])
    b = PointCloud([(2.0, 0.0)])
    U = Union([a, b])
    assert distance(U, [1.5, 0.0]).value == 0.5
    r = distance(U, [1.0, 0.0])  # tie: first member wins
    assert np.array_equal(r.nearest, [0, 0])


@pytest.mark.slow
def test_implicit_and_parametric_cusp_agree_on_grid():
    g = np.linspace(-1, 1, 21)
    X = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    di, _ = distances(cusp("implicit"), X)
    dp, _ = distances(cusp("parametric"), X)
    assert np.all(np.abs(di - dp) <= 1e-4 * (1 + np.linalg.norm(X, axis=1)))


def test_implicit_and_parametric_parabola_agree():
    g = np.linspace(-1, 1, 9)
    X = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    di, _ = distances(parabola("implicit"), X)
    dp, _ = distances(parabola("parametric"), X)
    assert np.all(np.abs(di - dp) <= 1e-4 * (1 + np.linalg.norm(X, axis=1)))


SETS = {
    "cusp": cusp,
    "parabola": parabola,
    "half-plane": half_plane,
    "cloud": lambda: PointCloud([(0, 0), (1, 0.5), (-0.3, 2)]),
    "disk": lambda: Implicit(2, [], [parse("x1^2 + x2^2 - 1", 2)]),
}
points = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(SETS)), points, points)
def test_lipschitz_and_zero_at_member(name, x, y):
    Q = SETS[name]()
    cfg = DistanceConfig()
    rx, ry = distance(Q, x, cfg), distance(Q, y, cfg)
    assert rx.value >= 0 and ry.value >= 0
    assert abs(rx.value - ry.value) <= np.linalg.norm(np.subtract(x, y)) + 2 * 1e-9
    assert distance(Q, rx.nearest, cfg).value <= cfg.feas_tol


def test_distances_are_deterministic():
    X = np.random.default_rng(8).uniform(-1, 1, size=(20, 2))
    for name in ("cusp", "half-plane", "parabola"):
        a = distances(BENCHMARKS[name](), X)
        b = distances(BENCHMARKS[name](), X)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
