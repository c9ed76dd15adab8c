"""The numba kernels and their numpy fallbacks must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fracap import _kernels


def _random_boxes(rng, n, p):
    lo = rng.uniform(-1, 1, (p, n))
    hi = lo + rng.uniform(0.1, 1.0, (p, n))
    # make disjoint by shifting along the first axis
    shift = np.cumsum(np.r_[0, (hi[:-1, 0] - lo[1:, 0]).clip(0) + 0.5])
    lo[:, 0] += shift
    hi[:, 0] += shift
    return lo, hi


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("seed", range(4))
def test_ray_kernels_agree(n, seed):
    rng = np.random.default_rng(seed)
    lo, hi = _random_boxes(rng, n, 1 + seed)
    dirs = rng.normal(size=(64, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    vol = float(np.prod(hi - lo, axis=1).sum())
    R = float(np.linalg.norm(hi.max(0) - lo.min(0)))
    for alpha in (0.3, 0.7):
        a = _kernels._ray_near_numba(dirs, lo, hi, vol, alpha, R)
        b = _kernels._ray_near_numpy(dirs, lo, hi, vol, alpha, R)
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(-5, 5)))
def test_diff_sums_agree_2d(f):
    a = _kernels._diff_sums_numba(np.ascontiguousarray(f))
    b = _kernels._diff_sums_numpy(np.ascontiguousarray(f))
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-10)


@pytest.mark.parametrize("shape", [(7,), (4, 5), (3, 4, 2)])
def test_diff_sums_agree_and_match_brute_force(shape):
    f = np.random.default_rng(1).normal(size=shape)
    a = _kernels._diff_sums_numba(f)
    np.testing.assert_allclose(a, _kernels._diff_sums_numpy(f), rtol=1e-12)
    # brute force: sum_j |f(j + k) - f(j)| with f = 0 off the grid
    pad = [(m, m) for m in shape]
    g = np.pad(f, pad)
    center = tuple(m - 1 for m in shape)
    for k in [(1,) * len(shape), tuple(-m + 1 for m in shape), (0,) * len(shape)]:
        shifted = np.roll(g, k, axis=tuple(range(len(shape))))
        ref = np.abs(shifted - g).sum()
        assert a[tuple(c + o for c, o in zip(center, k))] == pytest.approx(ref)


def test_jit_flag_switches_backend():
    code = ("from fracap import _kernels, JIT_ENABLED; "
            "print(JIT_ENABLED, _kernels.lattice_diff_sums is _kernels._diff_sums_numpy)")
    env = dict(os.environ, FRACAP_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert out == ["False", "True"]


def test_fallback_gives_same_perimeters():
    code = ("from fracap import *; "
            "print(repr(frac_perimeter(Box((0,0),(1,2)), AlphaContext(2,0.5)).value), "
            "repr(besov_seminorm(pyramid(2, 1/16), AlphaContext(2,0.5)).value))")
    runs = []
    for flag in ("0", "1"):
        env = dict(os.environ, FRACAP_DISABLE_JIT=flag)
        runs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout.split())
    for a, b in zip(*runs):
        assert float(a) == pytest.approx(float(b), rel=1e-11)
