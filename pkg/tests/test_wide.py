import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from widthrelu.network import forward
from widthrelu.wide import (
    E0Error,
    WideVsNarrowSpec,
    build_wide_target,
    check_E0,
    grid_inputs,
    grid_points,
    interpolation_error,
    load_e0_csv,
    narrow_width,
    pwl_to_affine,
    sample_E0,
    save_e0_csv,
    second_layer_values,
)


def relu_basis_eval(coeffs, bias, x):
    x = np.asarray(x, dtype=float)
    return bias + sum(c * np.maximum(x - m, 0.0) for m, c in enumerate(coeffs))


def chain(k, ratio=2.2, start=1.0):
    m = 2 * k * k
    group = start * ratio ** np.arange(m)
    return np.tile(group, k * k)


# -- grid --------------------------------------------------------------------


def test_grid_points_examples():
    g = grid_points(3)
    assert g.points.size == 162
    assert g.points[0] == pytest.approx(19 / 36)
    assert g.points[17] == 1.0
    assert g.points[18] == pytest.approx(3 - 17 / 36)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_grid_monotone_with_fixed_gaps(k):
    pts = grid_points(k).points.reshape(k * k, 2 * k * k)
    np.testing.assert_allclose(np.diff(pts, axis=1), 1 / (4 * k * k), rtol=1e-12)
    assert np.all(np.diff(pts.reshape(-1)) > 0)
    assert pts.min() > 0 and pts.max() <= 2 * k * k - 1


def test_grid_rejects_small_k():
    with pytest.raises(ValueError):
        grid_points(1)


# -- E0 ----------------------------------------------------------------------


def test_check_E0_examples():
    k = 2
    assert check_E0(chain(k, 2.2), k)
    a = chain(k, 2.2)
    a[5] = 0.0
    chk = check_E0(a, k)
    assert not chk and chk.index == 5
    a = chain(k, 2.2)
    a[0], a[1] = 1.0, 2.0
    chk = check_E0(a, k)
    assert not chk and chk.index == 0


def test_check_E0_group_boundary_not_constrained():
    k = 2
    a = chain(k, 2.2)
    # the last value of a group may exceed the next group's first
    assert a[7] > 2 * a[8]
    assert check_E0(a, k)


def test_check_E0_length_mismatch():
    with pytest.raises(ValueError):
        check_E0(np.ones(5), 2)


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
@settings(max_examples=100, deadline=None)
def test_sample_E0_always_valid(seed, k):
    a = sample_E0(k, seed)
    assert check_E0(a, k)
    assert a.max() <= 2.5 ** (2 * k * k - 1)


def test_sample_E0_k5_magnitude_and_determinism():
    a = sample_E0(5, seed=3)
    assert a.max() < 2.5**49 < 3.2e19
    np.testing.assert_array_equal(a, sample_E0(5, seed=3))
    assert not np.array_equal(a, sample_E0(5, seed=4))


# -- second differences -------------------------------------------------------


def test_second_layer_values_small_groups():
    # a hand-made k = 2 vector whose first group starts (1, 3, 8, ...)
    k = 2
    a = chain(k, 2.5)
    a[:3] = [1.0, 3.0, 8.0]
    a[3:8] = 8.0 * 2.5 ** np.arange(1, 6)
    v = second_layer_values(a, k)
    np.testing.assert_allclose(v[:3], [1.0, 1.0, 3.0])


def test_second_layer_values_near_boundary():
    k = 2
    a = chain(k, 2.2)
    a[:2] = [1.0, 2.1]
    a[2:8] = 2.1 * 2.2 ** np.arange(1, 7)
    assert second_layer_values(a, k)[1] == pytest.approx(0.1)


def test_second_layer_values_rejects_non_E0():
    with pytest.raises(E0Error):
        second_layer_values(np.ones(32), 2)


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
@settings(max_examples=200, deadline=None)
def test_second_differences_positive_and_telescope(seed, k):
    a = sample_E0(k, seed)
    v = second_layer_values(a, k).reshape(k * k, -1)
    assert np.all(v > 0)
    g = a.reshape(k * k, -1)
    m = g.shape[1]
    for ip in range(m):
        recon = sum(v[:, i] * (ip - i + 1) for i in range(ip + 1))
        np.testing.assert_allclose(recon, g[:, ip], rtol=1e-12)


# -- PWL conversion -----------------------------------------------------------


def test_pwl_hat():
    coeffs, bias = pwl_to_affine([0.0, 1.0, 0.0], 2)
    np.testing.assert_array_equal(coeffs, [1.0, -2.0])
    assert bias == 0.0
    assert relu_basis_eval(coeffs, bias, 3.0) - relu_basis_eval(coeffs, bias, 2.0) == -1.0


def test_pwl_constant():
    coeffs, bias = pwl_to_affine([2.5] * 6, 6)
    np.testing.assert_array_equal(coeffs, 0.0)
    assert bias == 2.5


def test_pwl_random_reconstruction():
    rng = np.random.default_rng(0)
    vals = rng.uniform(-5, 5, 18)
    coeffs, bias = pwl_to_affine(vals, 18)
    np.testing.assert_allclose(relu_basis_eval(coeffs, bias, np.arange(18)), vals, rtol=0, atol=1e-12)
    # linear between integers
    mid = relu_basis_eval(coeffs, bias, np.arange(17) + 0.5)
    np.testing.assert_allclose(mid, 0.5 * (vals[:-1] + vals[1:]), atol=1e-12)


# -- wide target --------------------------------------------------------------


@pytest.mark.parametrize("k", [3, 4, 5])
def test_wide_target_interpolates(k):
    for seed in range(20):
        a = sample_E0(k, seed)
        net = build_wide_target(k, a)
        assert interpolation_error(net, k, a) <= 1e-9
        assert net.width == 2 * k * k and net.depth == 3


def test_wide_target_k3_shape():
    net = build_wide_target(3, sample_E0(3, 0))
    assert (net.width, net.depth) == (18, 3)


def test_wide_target_second_layer_zeros():
    k = 3
    a = sample_E0(k, 1)
    net = build_wide_target(k, a)
    pts = grid_points(k).points
    step = 1 / (4 * k * k)
    h1 = np.maximum(pts[:, None] * net.layers[0].weights[:, 0] + net.layers[0].biases, 0)
    F2 = h1 @ net.layers[1].weights.T + net.layers[1].biases
    m = 2 * k * k
    for i in range(m):
        zero_pts = pts.reshape(k * k, m)[:, i] - step
        h = np.maximum(zero_pts[:, None] - np.arange(m), 0)
        vals = h @ net.layers[1].weights[i] + net.layers[1].biases[i]
        np.testing.assert_allclose(vals, 0.0, atol=1e-9 * np.abs(F2[:, i]).max())


def test_wide_target_ignores_extra_coordinates():
    k = 3
    a = sample_E0(k, 2)
    net = build_wide_target(k, a, n=2)
    base = forward(net, grid_inputs(k, 2, 0.0))
    for t in (-1.0, 1.0):
        np.testing.assert_array_equal(forward(net, grid_inputs(k, 2, t)), base)
    np.testing.assert_allclose(base[:, 0], a, rtol=1e-9)


def test_wide_target_rejects_non_E0():
    with pytest.raises(E0Error):
        build_wide_target(2, np.ones(32))


def test_e0_csv_roundtrip(tmp_path):
    a = sample_E0(3, 8)
    path = tmp_path / "e0.csv"
    save_e0_csv(a, path)
    np.testing.assert_array_equal(load_e0_csv(path), a)


def test_narrow_width_matches_table_shapes():
    assert [narrow_width(k) for k in (3, 4, 5)] == [16, 24, 34]
    spec = WideVsNarrowSpec(k=4)
    assert (spec.narrow_width, spec.narrow_depth, spec.wide_width, spec.wide_depth) == (24, 6, 32, 3)
    assert WideVsNarrowSpec(k=5, n=1).separation_regime
    assert not WideVsNarrowSpec(k=5, n=2).separation_regime
