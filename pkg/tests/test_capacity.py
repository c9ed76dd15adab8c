import math

import numpy as np
import pytest

from fracap import (AlphaContext, Ball, Box, BoxUnion, ConvergenceFailure, Interval,
                    InvalidArgument, UnsupportedOperation, besov_seminorm, build_cutoff,
                    capacity_bracket, capacity_lower, capacity_upper, capacity_upper_witness,
                    frac_perimeter, homogeneity_check, monotonicity_check, sharp_kappa,
                    usc_check)
from fracap.capacity import (capacity_limit_checks, dilate_family, is_convex, neighborhood,
                             w11_capacity)
from fracap.geometry import volume
from suite import L_SHAPE, suite_shapes


def test_interval_bracket_collapses():
    br = capacity_bracket(Interval(-1, 1), AlphaContext(1, 0.5))
    assert br.lower == pytest.approx(16 * math.sqrt(2), rel=1e-10)
    assert br.upper == pytest.approx(16 * math.sqrt(2), rel=1e-10)
    assert br.witness == "dilates(s=0)"
    assert set(br.as_dict()) >= {"n", "alpha", "lower", "upper", "witness", "gap"}


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_ball_bracket_collapses(n, alpha):
    assert capacity_bracket(Ball.unit(n), AlphaContext(n, alpha)).gap < 1e-4


@pytest.mark.parametrize("name", sorted(suite_shapes()))
@pytest.mark.parametrize("family", ["dilates", "neighborhoods"])
def test_bracket_validity(name, family):
    s = suite_shapes()[name]
    br = capacity_bracket(s, AlphaContext(s.n, 0.5), family)
    assert br.lower <= br.upper * (1 + 1e-9)


def test_family_restricted_witness():
    _, w = capacity_upper_witness(L_SHAPE, AlphaContext(2, 0.5))
    assert w.endswith(", family-restricted)")
    _, w = capacity_upper_witness(Box((0, 0), (1, 1)), AlphaContext(2, 0.5), "neighborhoods")
    assert w.startswith("neighborhoods(") and "restricted" not in w


def test_neighborhoods_never_beat_the_set_for_convex():
    ctx = AlphaContext(2, 0.5)
    sq = Box((0, 0), (1, 1))
    up = capacity_upper(sq, ctx, "neighborhoods").value
    assert up == pytest.approx(2 * frac_perimeter(sq, ctx).value, rel=1e-12)


def test_neighborhood_shapes():
    assert neighborhood(Interval(0, 1), 0.5) == Interval(-0.5, 1.5)
    assert neighborhood(Box((0, 0), (1, 1)), 0.5) == Box((-0.5, -0.5), (1.5, 1.5))
    grown = neighborhood(L_SHAPE, 0.25)
    assert volume(grown).value == pytest.approx(2.5 * 2.5 - 1.0)
    lat = suite_shapes()["lattice_level"]
    step = float(lat.lattice.spacing[0])
    assert volume(neighborhood(lat, step)).value > volume(lat).value


def test_homogeneity_examples():
    h = homogeneity_check(Interval(-1, 1), AlphaContext(1, 0.5), (2.0,))
    assert h.max_deviation < 1e-6
    h = homogeneity_check(Ball.unit(2), AlphaContext(2, 0.5), (0.5, 2.0))
    assert h.max_deviation < 1e-4
    h = homogeneity_check(Ball.unit(2), AlphaContext(2, 0.5), (1.0,))
    assert h.max_deviation == 0.0


def test_monotonicity():
    ctx = AlphaContext(2, 0.3)
    assert monotonicity_check(Box((0, 0), (1, 1)), Box((-1, 0), (1, 2)), ctx)
    fam = dilate_family(L_SHAPE, (1, 4))
    assert monotonicity_check(fam[1], fam[0], ctx)
    with pytest.raises(InvalidArgument):
        monotonicity_check(Box((-1, 0), (1, 2)), Box((0, 0), (1, 1)), ctx)


def test_usc_rejects_non_nested():
    ctx = AlphaContext(1, 0.5)
    fam = [Interval(-1.1, 1.1), Interval(-1.5, 1.5), Interval(-1.01, 1.01)]
    with pytest.raises(InvalidArgument):
        usc_check(fam, ctx, Interval(-1, 1))


def test_w11_capacity():
    assert w11_capacity(Interval(-1, 1)) == 2.0
    assert w11_capacity(Ball.unit(2)) == pytest.approx(2 * math.pi)
    assert w11_capacity(Box((0, 0), (1, 1))) == 4.0
    with pytest.raises(UnsupportedOperation):
        w11_capacity(L_SHAPE)


def test_capacity_limit_examples():
    c0, c1 = capacity_limit_checks(Interval(-1, 1))
    assert c0.target == pytest.approx(8.0) and c0.rel_err < 1e-3
    assert c1.target == pytest.approx(4.0) and c1.rel_err < 1e-3
    c0, _ = capacity_limit_checks(Ball.unit(2))
    assert c0.target == pytest.approx(4 * math.pi ** 2) and c0.rel_err < 0.02
    _, c1 = capacity_limit_checks(Box((0, 0), (1, 1)))
    assert c1.target == pytest.approx(16.0) and c1.rel_err < 0.02
    with pytest.raises(UnsupportedOperation):
        capacity_limit_checks(L_SHAPE)


@pytest.mark.parametrize("eps", [0.25, 0.125])
def test_cutoff_competitors_dominate_capacity(eps):
    for K in (Interval(-1, 1), Box((0, 0), (1, 1))):
        ctx = AlphaContext(K.n, 0.5)
        b = besov_seminorm(build_cutoff(K, eps), ctx)
        assert b.value >= capacity_lower(K, ctx) - b.error


def test_sharp_kappa_and_lower():
    ctx = AlphaContext(1, 0.5)
    assert sharp_kappa(ctx) == pytest.approx(math.sqrt(2) / (16 * math.sqrt(2)))
    assert capacity_lower(Interval(-1, 1), ctx) == pytest.approx(16 * math.sqrt(2))
    with pytest.raises(InvalidArgument):
        capacity_lower(Interval(-1, 1), ctx, -1.0)


def test_is_convex():
    assert is_convex(Ball.unit(3)) and is_convex(Box((0, 0), (1, 1)))
    assert not is_convex(L_SHAPE)


def test_bad_family():
    with pytest.raises(InvalidArgument):
        capacity_upper(Interval(0, 1), AlphaContext(1, 0.5), "spheres")


def test_inverted_bracket_raises(monkeypatch):
    import fracap.capacity as cap
    monkeypatch.setattr(cap, "sharp_kappa", lambda ctx: 1e-9)
    with pytest.raises(ConvergenceFailure) as exc:
        cap.capacity_bracket(Interval(-1, 1), AlphaContext(1, 0.5))
    assert exc.value.estimate is not None
