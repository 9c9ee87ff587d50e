import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from widthrelu.evaluation import Domain, l1_distance, uniform_grid
from widthrelu.network import concat, forward
from widthrelu.universal import (
    ApproximationPlan,
    Cube,
    approximate_function,
    block_report,
    build_block,
    build_universal,
    decompose_grid,
    entry_stage,
    grid_from_scattered,
    l1_error_bound,
    select_delta,
    trapezoid_oracle,
)


def block_as_function(cube, delta, N):
    """Chop-node output of a block, as a function of the original coordinates."""
    net = concat(entry_stage(cube.dim, N), build_block(cube, delta, N))
    return lambda x: forward(net, x)[..., cube.dim + 2]


def random_cube(rng, n, N):
    lo = rng.uniform(-N, N - 0.2, n)
    hi = lo + rng.uniform(0.05, 1.0, n) * (N - lo)
    return Cube(lo, np.minimum(hi, N))


# -- decomposition ---------------------------------------------------------


def test_decompose_constant():
    cubes = decompose_grid(lambda x: np.ones(len(x)), 2, [-1.0], [1.0])
    assert [(c.lower, c.upper, c.weight) for c in cubes] == [
        ((-1.0,), (0.0,), 1.0),
        ((0.0,), (1.0,), 1.0),
    ]


def test_decompose_sign():
    cubes = decompose_grid(lambda x: np.sign(x[:, 0]), 2, [-1.0], [1.0])
    assert [c.weight for c in cubes] == [-1.0, 1.0]


def test_decompose_identity_uses_cell_centres():
    cubes = decompose_grid(lambda x: x[:, 0], 4, [0.0], [1.0])
    assert [c.weight for c in cubes] == pytest.approx([0.125, 0.375, 0.625, 0.875])


def test_decompose_accepts_arrays_and_drops_zeros():
    vals = np.array([[0.0, 2.0], [-1.0, 0.0]])
    cubes = decompose_grid(vals, 2, [0.0, 0.0], [2.0, 2.0])
    assert [(c.lower, c.weight) for c in cubes] == [((0.0, 1.0), 2.0), ((1.0, 0.0), -1.0)]


def test_decompose_rejects_nonfinite():
    with pytest.raises(ValueError):
        decompose_grid(np.array([1.0, np.nan]), 2, [0.0], [1.0])


def test_grid_from_scattered_picks_nearest_to_centre():
    pts = np.array([[0.1], [0.26], [0.6], [0.95]])
    vals = np.array([1.0, 2.0, 3.0, 4.0])
    grid = grid_from_scattered(pts, vals, 2, [0.0], [1.0])
    np.testing.assert_array_equal(grid, [2.0, 3.0])


# -- delta and bounds ------------------------------------------------------


def test_select_delta_examples():
    assert select_delta(4.0, 1.0, 1) == pytest.approx(0.125, rel=1e-14)
    assert select_delta(4.0, 1.0, 2) == pytest.approx((1 - math.sqrt(0.75)) / 2, rel=1e-14)
    for n in (1, 2, 3):
        assert select_delta(1.0, 0.0, n) == pytest.approx((1 - (2 / 3) ** (1 / n)) / 2, rel=1e-14)


@given(st.floats(1e-8, 1e3), st.floats(0.0, 1e3), st.integers(1, 8))
def test_select_delta_in_range_and_meets_ratio(eps, C, n):
    d = select_delta(eps, C, n)
    assert 0 < d < 0.5
    unit = Cube((0.0,) * n, (1.0,) * n)
    assert l1_error_bound(unit, d) == pytest.approx(eps / (4 * C + 3 * eps), rel=1e-9)


def test_l1_error_bound_examples():
    assert l1_error_bound(Cube((0.0,), (1.0,)), 0.125) == pytest.approx(0.25)
    assert l1_error_bound(Cube((0.0, 0.0), (1.0, 1.0)), 0.066987298) == pytest.approx(0.25, abs=1e-8)
    assert l1_error_bound(Cube((0.0,), (1.0,)), 1e-12) < 1e-11
    with pytest.raises(ValueError):
        l1_error_bound(Cube((0.0,), (1.0,)), 0.5)


# -- trapezoid oracle --------------------------------------------------------


def test_trapezoid_oracle_examples():
    unit = Cube((0.0,), (1.0,))
    assert trapezoid_oracle(unit, 0.25, [0.5]) == 1.0
    assert trapezoid_oracle(unit, 0.25, [0.125]) == pytest.approx(0.5)
    square = Cube((0.0, 0.0), (1.0, 1.0))
    assert trapezoid_oracle(square, 0.25, [0.5, 0.125]) == pytest.approx(0.5)
    assert trapezoid_oracle(square, 0.25, [1.2, 0.5]) == 0.0


def test_trapezoid_integral_gap_below_bound():
    cube = Cube((0.0, -0.5), (1.0, 0.5))
    delta = 0.1
    dom = Domain((-1.0, -1.0), (2.0, 1.0))
    pts = uniform_grid(dom, 600)
    ind = cube.contains(pts).astype(float)
    gap = l1_distance(ind, trapezoid_oracle(cube, delta, pts), dom, pts)
    assert gap <= l1_error_bound(cube, delta) + 1e-3


# -- blocks ------------------------------------------------------------------


def test_block_1d_examples():
    g = block_as_function(Cube((0.0,), (1.0,)), 0.25, 2.0)
    assert g(np.array([0.5])) == pytest.approx(1.0)
    assert g(np.array([1.1])) == pytest.approx(0.0)
    assert g(np.array([0.125])) == pytest.approx(0.5)


def test_block_passes_accumulators_through():
    n = 2
    block = build_block(Cube((0.0, 0.0), (1.0, 1.0)), 0.2, 2.0)
    x = np.array([2.5, 1.7, 3.5, 1.25, 0.9, 0.4])
    out = forward(block, x)
    np.testing.assert_array_equal(out[n : n + 2], [3.5, 1.25])
    np.testing.assert_array_equal(out[:n], x[:n])
    assert out[n + 3] == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_block_matches_oracle(n):
    rng = np.random.default_rng(n)
    N = 2.0
    cube = random_cube(rng, n, N)
    delta = rng.uniform(0.01, 0.49)
    X = rng.uniform(-N, N, (1000, n))
    np.testing.assert_allclose(block_as_function(cube, delta, N)(X), trapezoid_oracle(cube, delta, X), atol=1e-9)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_block_support_and_range(n, seed):
    rng = np.random.default_rng(seed)
    N = 1.5
    cube = random_cube(rng, n, N)
    g = block_as_function(cube, rng.uniform(0.01, 0.49), N)
    X = rng.uniform(-N - 1, N + 1, (400, n))
    vals = g(X)
    assert np.all(vals >= 0) and np.all(vals <= 1 + 1e-12)
    assert np.all(vals[~cube.contains(X)] <= 1e-12)


def test_block_structure():
    for n in (1, 2, 3):
        cube = Cube((0.0,) * n, (1.0,) * n)
        block = build_block(cube, 0.1, 1.0)
        assert block.width == n + 4
        assert block.input_dim == n + 4
        assert block.depth == 4 * n
        rep = block_report(cube, 0.1, 1.0)
        assert rep.depth == 4 * n + 1
        assert rep.bound == l1_error_bound(cube, 0.1)


def test_block_rejects_cube_outside_box():
    with pytest.raises(ValueError):
        build_block(Cube((0.0,), (3.0,)), 0.1, 2.0)


# -- assembly ----------------------------------------------------------------


def test_universal_single_cube():
    plan = ApproximationPlan(1, 2.0, 1.0, 1.0, 0.25, [Cube((0.0,), (1.0,), 1.0)])
    g = build_universal(plan)
    np.testing.assert_allclose(g(np.array([[0.5], [2.0], [0.125]]))[:, 0], [1.0, 0.0, 0.5], atol=1e-12)


def test_universal_two_signed_cubes():
    plan = ApproximationPlan(
        1, 2.0, 1.0, 2.0, 0.25, [Cube((-1.0,), (0.0,), -1.0), Cube((0.0,), (1.0,), 1.0)]
    )
    g = build_universal(plan)
    np.testing.assert_allclose(g(np.array([[-0.5], [0.5]]))[:, 0], [-1.0, 1.0], atol=1e-12)
    assert g.width == 5 and g.output_dim == 1


def test_universal_sum_matches_weighted_oracles():
    rng = np.random.default_rng(9)
    n, N, delta = 2, 2.0, 0.15
    cubes = [Cube(c.lower, c.upper, rng.uniform(-3, 3)) for c in (random_cube(rng, n, N) for _ in range(6))]
    g = build_universal(ApproximationPlan(n, N, 1.0, 1.0, delta, cubes))
    X = rng.uniform(-N, N, (500, n))
    expected = sum(c.weight * trapezoid_oracle(c, delta, X) for c in cubes)
    np.testing.assert_allclose(g(X)[:, 0], expected, atol=1e-9)
    assert g.width == n + 4


def test_universal_rejects_empty_plan():
    with pytest.raises(ValueError):
        build_universal(ApproximationPlan(1, 1.0, 1.0, 0.0, 0.1, []))


def test_plan_roundtrip(tmp_path):
    plan = ApproximationPlan(2, 1.0, 0.1, 0.5, 0.01, [Cube((0.0, 0.1), (0.5, 0.3), -0.7)])
    path = tmp_path / "plan.json"
    plan.save(path)
    assert ApproximationPlan.load(path) == plan


def test_plan_rejects_cube_outside_box():
    with pytest.raises(ValueError):
        ApproximationPlan(1, 1.0, 0.1, 1.0, 0.1, [Cube((0.0,), (2.0,))])


def indicator_unit(x):
    return np.all((x >= 0) & (x <= 1), axis=1).astype(float)


def test_approximate_indicator_1d():
    N, eps = 2.0, 0.1
    net, plan = approximate_function(indicator_unit, N, eps, 40, n=1)
    dom = Domain((-N,), (N,))
    pts = uniform_grid(dom, 40000)
    err = l1_distance(indicator_unit, lambda x: net(x)[:, 0], dom, pts)
    assert err <= eps
    assert plan.C == pytest.approx(1.0)


def test_approximate_identity_on_unit_interval():
    def f(x):
        return np.where((x[:, 0] >= 0) & (x[:, 0] <= 1), x[:, 0], 0.0)

    N, eps = 1.0, 0.2
    net, plan = approximate_function(f, N, eps, 20, n=1)
    dom = Domain((-N,), (N,))
    pts = uniform_grid(dom, 20000)
    assert l1_distance(f, lambda x: net(x)[:, 0], dom, pts) <= eps


def test_approximate_zero_function():
    net, plan = approximate_function(np.zeros((4, 4)), 1.0, 0.1, 4)
    assert plan.cubes == []
    X = np.random.default_rng(0).uniform(-1, 1, (50, 2))
    np.testing.assert_array_equal(net(X), 0.0)


def test_halving_epsilon_does_not_increase_error():
    dom = Domain((-2.0,), (2.0,))
    pts = uniform_grid(dom, 20000)
    g_true = np.where((pts[:, 0] >= -0.5) & (pts[:, 0] <= 1.5), 1.0 - 0.3 * pts[:, 0], 0.0)
    f = lambda x: np.where((x[:, 0] >= -0.5) & (x[:, 0] <= 1.5), 1.0 - 0.3 * x[:, 0], 0.0)
    errors = []
    for eps, cells in [(0.4, 8), (0.2, 16), (0.1, 32), (0.05, 64)]:
        net, _ = approximate_function(f, 2.0, eps, cells, n=1)
        errors.append(l1_distance(g_true, net(pts)[:, 0], dom, pts))
    assert all(b <= a for a, b in zip(errors, errors[1:])), errors
