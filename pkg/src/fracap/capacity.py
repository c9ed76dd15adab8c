"""Two-sided enclosures of the fractional Sobolev capacity cap(K).

Upper bounds come from twice the fractional perimeter of containing sets
(dilates about the centroid, or sup-norm neighbourhoods), lower bounds from
the isocapacitary inequality V(K)^((n-alpha)/n) <= kappa * cap(K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.ndimage import binary_dilation

from .constants import AlphaContext, kappa, tau, unit_sphere_area
from .errors import ConvergenceFailure, InvalidArgument, UnsupportedOperation
from .geometry import (Ball, Box, BoxUnion, Empty, Interval, Lattice, Shape,
                       classical_perimeter, contains_shape, dilate_about_centroid, scale, volume)
from .numerics import Estimate, LimitScanResult, extrapolate_limit
from .perimeter import ALPHA0_GRID, ALPHA1_GRID, ball_perimeter, frac_perimeter

FAMILIES = ("dilates", "neighborhoods")
GOLDEN_ITERATIONS = 40
_INVGOLD = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_CELL_STEPS = 8


@lru_cache(maxsize=256)
def sharp_kappa(ctx: AlphaContext) -> float:
    """kappa_{n,alpha} with P_alpha(B^n) from the radial quadrature."""
    return kappa(ctx, ball_perimeter(ctx).value)


def is_convex(s: Shape) -> bool:
    return isinstance(s, (Interval, Ball, Box)) or (isinstance(s, BoxUnion) and len(s.boxes) == 1)


def _check(K: Shape, ctx: AlphaContext):
    if isinstance(K, Empty):
        raise InvalidArgument("capacity needs a compact set of positive volume")
    if K.n != ctx.n:
        raise InvalidArgument(f"shape dimension {K.n} does not match n={ctx.n}")


# ---------------------------------------------------------------------------
# containing families


def _expand_boxes(lo, hi, s):
    """Disjoint decomposition of the union of the boxes grown by s."""
    lo, hi = lo - s, hi + s
    n = lo.shape[1]
    cuts = [np.unique(np.concatenate([lo[:, k], hi[:, k]])) for k in range(n)]
    covered = np.zeros(tuple(len(c) - 1 for c in cuts), bool)
    for a, b in zip(lo, hi):
        sl = tuple(slice(np.searchsorted(c, a[k]), np.searchsorted(c, b[k]))
                   for k, c in enumerate(cuts))
        covered[sl] = True
    boxes = []
    # merge runs along the last axis
    for idx in np.ndindex(*covered.shape[:-1]):
        row = covered[idx]
        j = 0
        while j < len(row):
            if not row[j]:
                j += 1
                continue
            start = j
            while j < len(row) and row[j]:
                j += 1
            blo = [cuts[k][i] for k, i in enumerate(idx)] + [cuts[-1][start]]
            bhi = [cuts[k][i + 1] for k, i in enumerate(idx)] + [cuts[-1][j]]
            boxes.append(Box(tuple(blo), tuple(bhi)))
    return BoxUnion(tuple(boxes))


def _dilate_lattice(lat: Lattice, steps: int) -> BoxUnion:
    if steps == 0:
        return BoxUnion.from_lattice(lat)
    mask = np.pad(lat.mask, steps)
    mask = binary_dilation(mask, np.ones((3,) * lat.n, bool), iterations=steps)
    return BoxUnion.from_lattice(Lattice(lat.origin - steps * lat.spacing, lat.spacing, mask))


def neighborhood(K: Shape, s: float) -> Shape:
    """{x : dist_inf(x, K) < s}; for balls the Euclidean neighbourhood."""
    if s == 0:
        return K
    if isinstance(K, Interval):
        return Interval(K.a - s, K.b + s)
    if isinstance(K, Ball):
        return Ball(K.center, K.radius + s)
    if isinstance(K, Box):
        return Box(tuple(a - s for a in K.lo), tuple(b + s for b in K.hi))
    if isinstance(K, BoxUnion):
        if K.lattice is not None:
            steps = int(round(s / float(K.lattice.spacing.min())))
            return _dilate_lattice(K.lattice, steps)
        lo, hi = K.as_boxes()
        return _expand_boxes(lo, hi, s)
    raise UnsupportedOperation(f"neighbourhoods are not available for {type(K).__name__}")


def _golden_min(fn, a, b, iterations=GOLDEN_ITERATIONS):
    # minimise over [a, b]; endpoints are evaluated explicitly
    seen = {a: fn(a), b: fn(b)}
    c = b - _INVGOLD * (b - a)
    d = a + _INVGOLD * (b - a)
    fc, fd = fn(c), fn(d)
    seen[c], seen[d] = fc, fd
    for _ in range(iterations):
        if fc.value <= fd.value:
            b, d, fd = d, c, fc
            c = b - _INVGOLD * (b - a)
            fc = fn(c)
            seen[c] = fc
        else:
            a, c, fc = c, d, fd
            d = a + _INVGOLD * (b - a)
            fd = fn(d)
            seen[d] = fd
    best = min(seen, key=lambda s: (seen[s].value, s))
    return best, seen[best]


def capacity_upper_witness(K: Shape, ctx: AlphaContext, family: str = "dilates",
                           s_max: float = 0.5, **kwargs) -> tuple[Estimate, str]:
    """Upper bound 2 min_s P_alpha(O_s) together with a witness description."""
    _check(K, ctx)
    if family not in FAMILIES:
        raise InvalidArgument(f"family must be one of {FAMILIES}, got {family!r}")
    if not s_max > 0:
        raise InvalidArgument("s_max must be positive")
    tag = "" if is_convex(K) else ", family-restricted"

    if family == "dilates":
        # P_alpha((1+s)K) = (1+s)^(n-alpha) P_alpha(K): one perimeter evaluation
        # drives the whole search
        base = frac_perimeter(K, ctx, **kwargs)
        expo = ctx.n - ctx.alpha
        s, est = _golden_min(lambda t: base.scaled((1.0 + t) ** expo), 0.0, s_max)
        return est.scaled(2.0), f"dilates(s={s:.6g}{tag})"

    if isinstance(K, BoxUnion) and K.lattice is not None:
        cells = min(_MAX_CELL_STEPS, int(math.ceil(s_max / float(K.lattice.spacing.min()))))
        vals = {k: frac_perimeter(_dilate_lattice(K.lattice, k), ctx, **kwargs)
                for k in range(cells + 1)}
        k = min(vals, key=lambda j: (vals[j].value, j))
        s = k * float(K.lattice.spacing.min())
        return vals[k].scaled(2.0), f"neighborhoods(s={s:.6g}{tag})"
    cache = {}

    def objective(t):
        if t not in cache:
            cache[t] = frac_perimeter(neighborhood(K, t), ctx, **kwargs)
        return cache[t]

    s, est = _golden_min(objective, 0.0, s_max)
    return est.scaled(2.0), f"neighborhoods(s={s:.6g}{tag})"


def capacity_upper(K: Shape, ctx: AlphaContext, family: str = "dilates", s_max: float = 0.5,
                   **kwargs) -> Estimate:
    return capacity_upper_witness(K, ctx, family, s_max, **kwargs)[0]


def capacity_lower(K: Shape, ctx: AlphaContext, kappa_value: float | None = None) -> float:
    """V(K)^((n-alpha)/n) / kappa."""
    _check(K, ctx)
    k = sharp_kappa(ctx) if kappa_value is None else float(kappa_value)
    if not k > 0:
        raise InvalidArgument("kappa must be positive")
    v = volume(K).value
    if not v > 0:
        raise InvalidArgument("capacity needs a set of positive volume")
    return v ** ctx.volume_exponent / k


@dataclass(frozen=True)
class CapacityBracket:
    lower: float
    upper: float
    witness: str
    ctx: AlphaContext
    upper_error: float = 0.0

    @property
    def gap(self) -> float:
        return (self.upper - self.lower) / self.upper

    def as_dict(self) -> dict:
        return {"n": self.ctx.n, "alpha": self.ctx.alpha, "lower": self.lower,
                "upper": self.upper, "upper_error": self.upper_error,
                "witness": self.witness, "gap": self.gap}


def capacity_bracket(K: Shape, ctx: AlphaContext, family: str = "dilates",
                     **kwargs) -> CapacityBracket:
    upper, witness = capacity_upper_witness(K, ctx, family, **kwargs)
    kap = sharp_kappa(ctx)
    lower = capacity_lower(K, ctx, kap)
    # kappa itself carries the ball quadrature error, of the same order
    slack = 2.0 * upper.error + 1e-9 * upper.value
    if lower > upper.value + slack:
        raise ConvergenceFailure(
            f"capacity bracket inverted: lower {lower!r} > upper {upper.value!r}", upper)
    return CapacityBracket(lower, upper.value, witness, ctx, upper.error)


# ---------------------------------------------------------------------------
# property harnesses: homogeneity, monotonicity, upper semicontinuity


@dataclass(frozen=True)
class HomogeneityReport:
    radii: tuple
    values: tuple
    max_deviation: float
    slope: float
    expected_slope: float

    def as_dict(self) -> dict:
        return {"radii": list(self.radii), "values": list(self.values),
                "max_deviation": self.max_deviation, "slope": self.slope,
                "expected_slope": self.expected_slope}


def homogeneity_check(K: Shape, ctx: AlphaContext, radii: Sequence[float] = (0.5, 2.0, 3.0),
                      **kwargs) -> HomogeneityReport:
    """Compare cap(rK) with r^(n-alpha) cap(K) and fit the log-log slope."""
    base = capacity_upper(K, ctx, **kwargs).value
    expo = ctx.n - ctx.alpha
    rs = [float(r) for r in radii]
    vals = [capacity_upper(scale(K, r), ctx, **kwargs).value for r in rs]
    dev = max((abs(v / (r ** expo * base) - 1.0) for r, v in zip(rs, vals)), default=0.0)
    x = np.log(np.array([1.0] + rs))
    y = np.log(np.array([base] + vals))
    slope = float(np.polyfit(x, y, 1)[0]) if len(set(x)) > 1 else expo
    return HomogeneityReport(tuple(rs), tuple(vals), dev, slope, expo)


@dataclass(frozen=True)
class UscReport:
    values: tuple
    decreasing: bool
    extrapolated: float
    limit: float
    rel_err: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.decreasing and self.rel_err <= self.tol

    def as_dict(self) -> dict:
        return {"values": list(self.values), "decreasing": self.decreasing,
                "extrapolated": self.extrapolated, "limit": self.limit,
                "rel_err": self.rel_err, "passed": self.passed}


def dilate_family(K: Shape, js: Sequence[int] = (1, 2, 4, 8, 16, 32, 64)) -> list[Shape]:
    """K_j = (1 + 1/j) K about the centroid, nested decreasing in j."""
    return [dilate_about_centroid(K, 1.0 + 1.0 / j) for j in js]


def usc_check(family: Sequence[Shape], ctx: AlphaContext, limit: Shape,
              params: Sequence[float] | None = None, tol: float = 1e-4,
              **kwargs) -> UscReport:
    """Capacities along a nested decreasing family converge down to cap(limit).

    ``params`` are the family parameters (e.g. 1/j) that tend to 0; the
    limit is extrapolated from the tail by a quadratic fit in them.
    """
    family = list(family)
    if len(family) < 3:
        raise InvalidArgument("need at least three sets in the family")
    for big, small in zip(family[:-1], family[1:]):
        if not contains_shape(big, small):
            raise InvalidArgument("family is not nested decreasing")
    if not contains_shape(family[-1], limit):
        raise InvalidArgument("limit set is not contained in the family")
    vals = [capacity_upper(k, ctx, **kwargs).value for k in family]
    decreasing = all(b <= a * (1 + 1e-9) for a, b in zip(vals[:-1], vals[1:]))
    target = capacity_upper(limit, ctx, **kwargs).value
    if params is None:
        v0 = volume(limit).value
        params = [volume(k).value - v0 for k in family]
    x = np.asarray(params, dtype=float)[-4:]
    y = np.asarray(vals)[-4:]
    if np.ptp(x) == 0:
        ext = float(y[-1])
    else:
        ext = float(np.polyval(np.polyfit(x, y, min(2, len(x) - 1)), 0.0))
    return UscReport(tuple(vals), decreasing, ext, target, abs(ext - target) / target, tol)


def monotonicity_check(inner: Shape, outer: Shape, ctx: AlphaContext, **kwargs) -> bool:
    """cap(inner) <= cap(outer) (1 + 1e-9) for inner ⊆ outer."""
    if not contains_shape(outer, inner):
        raise InvalidArgument("monotonicity needs inner ⊆ outer")
    a = capacity_upper(inner, ctx, **kwargs).value
    b = capacity_upper(outer, ctx, **kwargs).value
    return a <= b * (1 + 1e-9)


def w11_capacity(K: Shape) -> float:
    """Capacity for the gradient L^1 norm of a convex set: its classical perimeter."""
    if not is_convex(K):
        raise UnsupportedOperation("w11_capacity is only defined here for convex shapes")
    return classical_perimeter(K)


def capacity_limit_checks(K: Shape, grid0: Sequence[float] = ALPHA0_GRID,
                          grid1: Sequence[float] = ALPHA1_GRID,
                          **kwargs) -> tuple[LimitScanResult, LimitScanResult]:
    """alpha cap -> 2 n omega_n V(K) and (1 - alpha) cap -> tau_n P(K)."""
    if not is_convex(K):
        raise UnsupportedOperation("capacity limit laws are checked for convex shapes only")
    n = K.n
    g0 = tuple(float(a) for a in grid0)
    g1 = tuple(float(a) for a in grid1)
    v0 = [a * capacity_upper(K, AlphaContext(n, a), **kwargs).value for a in g0]
    v1 = [(1 - a) * capacity_upper(K, AlphaContext(n, a), **kwargs).value for a in g1]
    t0 = 2.0 * unit_sphere_area(n) * volume(K).value
    t1 = tau(n) * classical_perimeter(K)
    return (LimitScanResult(g0, tuple(v0), extrapolate_limit(list(zip(g0, v0)), 0), t0),
            LimitScanResult(g1, tuple(v1), extrapolate_limit(list(zip(g1, v1)), 1), t1))
