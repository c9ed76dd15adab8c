import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fracap import (AlphaContext, Box, Interval, InvalidArgument, SampledFunction,
                    besov_seminorm, build_cutoff, bump, coarea_decompose, frac_perimeter,
                    lp_norm, pyramid, read_grid, superlevel_set, tent, write_grid)
from fracap.besov import diff_volume, l1_norm, levels
from suite import suite_functions


def _tent_oracle(alpha):
    return 2 ** (3 - alpha) / (alpha * (1 - alpha) * (2 - alpha))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_tent_oracle(alpha):
    ctx = AlphaContext(1, alpha)
    b = besov_seminorm(tent(1), ctx)
    assert b.value == pytest.approx(_tent_oracle(alpha), rel=2e-5)


def test_indicator_of_cells_is_twice_perimeter():
    vals = np.zeros((6, 5))
    vals[1:5, 1:3] = 1.0
    f = SampledFunction((0.0, 0.0), 0.25, vals)
    ctx = AlphaContext(2, 0.5)
    box = Box((0.25, 0.25), (1.25, 0.75))
    assert besov_seminorm(f, ctx).value == pytest.approx(2 * frac_perimeter(box, ctx).value,
                                                         rel=1e-9)


def test_mollified_indicator_decreases_toward_twice_perimeter():
    s = Interval(-1.0, 1.0)
    ctx = AlphaContext(1, 0.5)
    target = 2 * frac_perimeter(s, ctx).value
    vals = [besov_seminorm(build_cutoff(s, eps, eps / 64), ctx).value
            for eps in (0.2, 0.1, 0.05)]
    assert vals[0] > vals[1] > vals[2] > target


def test_cutoff_shape():
    f = build_cutoff(Interval(-1.0, 1.0), 0.25)
    x = f.centers()[0]
    inside = (x > -1) & (x < 1)
    assert np.all(f.values[inside] == 1.0)
    assert np.all(f.values[np.abs(x) >= 1.25] == 0.0)
    lo, hi = f.support_box
    assert lo[0] >= -1.25 - 1e-12 and hi[0] <= 1.25 + 1e-12
    with pytest.raises(InvalidArgument):
        build_cutoff(Interval(-1.0, 1.0), 0.25, 0.1)


@pytest.mark.parametrize("name", ["tent1", "bump1", "cutoff1", "pyramid2", "cutoff2"])
def test_coarea_identity(name):
    f = suite_functions()[name]
    ctx = AlphaContext(f.n, 0.5)
    b, c = besov_seminorm(f, ctx), coarea_decompose(f, ctx)
    assert abs(b.value - c.value) <= b.error + c.error


def test_coarea_gauss_option_is_close():
    f = tent(1, 1 / 256)
    ctx = AlphaContext(1, 0.5)
    exact = coarea_decompose(f, ctx)
    gauss = coarea_decompose(f, ctx, t_grid=64)
    assert gauss.value == pytest.approx(exact.value, rel=1e-2)


def test_coarea_is_worker_invariant():
    f = pyramid(2, 1 / 16)
    ctx = AlphaContext(2, 0.5)
    assert coarea_decompose(f, ctx, workers=3) == coarea_decompose(f, ctx)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_scaling(r):
    f = pyramid(2, 1 / 16)
    ctx = AlphaContext(2, 0.5)
    base = besov_seminorm(f, ctx).value
    assert besov_seminorm(f.dilated(r), ctx).value == pytest.approx(r ** (2 - 0.5) * base,
                                                                   rel=1e-3)


def test_zero_function():
    f = SampledFunction((0.0,), 0.1, np.zeros(5))
    ctx = AlphaContext(1, 0.5)
    assert besov_seminorm(f, ctx).value == 0.0
    assert coarea_decompose(f, ctx).value == 0.0
    assert levels(f).size == 0


def _grid_fn(inner):
    return SampledFunction((0.0, 0.0), 0.25, np.pad(inner, 1))


_small = arrays(np.float64, (4, 3), elements=st.floats(-2, 2, allow_subnormal=False))


@settings(max_examples=20, deadline=None)
@given(_small, _small)
def test_triangle_inequality(a, b):
    f, g = _grid_fn(a), _grid_fn(b)
    ctx = AlphaContext(2, 0.5)
    lhs, bf, bg = besov_seminorm(f + g, ctx), besov_seminorm(f, ctx), besov_seminorm(g, ctx)
    assert lhs.value <= bf.value + bg.value + lhs.error + bf.error + bg.error + 1e-12


@settings(max_examples=20, deadline=None)
@given(_small, st.floats(-3, 3), st.floats(-3, 3))
def test_diff_volume_bounds(a, hx, hy):
    f = _grid_fn(a)
    assert diff_volume(f, (hx, hy)) <= 2 * l1_norm(f) * (1 + 1e-12) + 1e-12
    assert diff_volume(f, (5.0, 0.0)) == pytest.approx(2 * l1_norm(f), abs=1e-12)


def test_diff_volume_is_piecewise_constant_reading():
    f = SampledFunction((0.0,), 1.0, [0.0, 1.0, 0.0])
    # an indicator of a unit cell: D(h) = 2 min(|h|, 1)
    for h in (0.0, 0.25, 0.5, 1.0, 3.0):
        assert diff_volume(f, (h,)) == pytest.approx(2 * min(h, 1.0))


def test_lp_norm_and_superlevel():
    f = tent(1, 1 / 64)
    x = f.centers()[0]
    ref = (np.maximum(0, 1 - np.abs(x)) ** 2).sum() / 64
    assert lp_norm(f, 2) == pytest.approx(math.sqrt(ref))
    s = superlevel_set(f, 0.5)
    assert s.n == 1
    with pytest.raises(InvalidArgument):
        lp_norm(f, 0.5)


def test_grid_roundtrip(tmp_path):
    f = bump(2, 1.0, 1 / 8)
    path = tmp_path / "f.grid"
    write_grid(f, path)
    g = read_grid(path)
    assert np.array_equal(g.values, f.values)
    np.testing.assert_array_equal(g.origin, f.origin)
    np.testing.assert_array_equal(g.spacing, f.spacing)


@pytest.mark.parametrize("vals", [np.ones((3, 3)), np.zeros((2, 5)), [0.0, np.nan, 0.0]])
def test_sampled_function_validation(vals):
    with pytest.raises(InvalidArgument):
        SampledFunction((0.0,) * np.ndim(vals), 0.1, vals)


def test_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        besov_seminorm(tent(1, 1 / 16), AlphaContext(2, 0.5))
