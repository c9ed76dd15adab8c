"""Fractional alpha-perimeter P_alpha(E) = ∫_E ∫_{E^c} |x - y|^(-n-alpha) dx dy.

Everything goes through the covariogram identity
P_alpha(E) = ∫ (V(E) - g_E(h)) |h|^(-n-alpha) dh, split at R = bounding
diameter. Beyond R the covariogram vanishes and the far field is exactly
V(E) * kernel_tail(R). The near field is computed by one of four routes:

* balls: a 1-D radial integral of the cap-volume deficit;
* axis-aligned boxes and box unions in n <= 3: exact integrals along rays
  (the covariogram is piecewise polynomial in rho) and adaptive quadrature
  over directions, with breakpoints at the angles where ray pieces change;
* unions of grid cells in n >= 2: pair-count autocorrelation against
  per-offset cell interaction weights;
* anything else: Monte Carlo over offsets with density ∝ rho^(-gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import roots_legendre

from ._kernels import ray_near_integrals
from .constants import AlphaContext, kernel_tail, tau, unit_ball_volume, unit_sphere_area
from .errors import InvalidArgument, UnsupportedOperation
from .geometry import (Ball, BoxUnion, Empty, IndicatorSet, Lattice, Shape, ball_deficit,
                       bounding_diameter, classical_perimeter, volume)
from .numerics import (Estimate, LimitScanResult, McSpec, QuadratureSpec, extrapolate_limit,
                       integrate_1d, mc_mean)

ALPHA0_GRID = (0.02, 0.01, 0.005)
ALPHA1_GRID = (0.98, 0.99, 0.995)
EPS0 = 0.1

# angular/radial tolerances: the ray integrals themselves are exact
ANGULAR_SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=4000)
_INNER_SPEC = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-12, max_subdivisions=4000)

_METHODS = {"auto": "auto", "quadrature": "quadrature", "quad": "quadrature",
            "monte-carlo": "monte-carlo", "mc": "monte-carlo"}

# grid resolution used when an IndicatorSet is rasterized for quadrature
_RASTER_CELLS = {1: 4096, 2: 256, 3: 32}


def _check(s: Shape, ctx: AlphaContext):
    if isinstance(s, Empty):
        raise InvalidArgument("the fractional perimeter needs a set of positive volume")
    if s.n != ctx.n:
        raise InvalidArgument(f"shape dimension {s.n} does not match n={ctx.n}")


def frac_perimeter(s: Shape, ctx: AlphaContext, method: str = "auto",
                   quad: QuadratureSpec | None = None, mc: McSpec | None = None,
                   eps0: float = EPS0, workers: int = 1) -> Estimate:
    """P_alpha(s) with an error estimate.

    ``quad`` overrides the angular (or radial) tolerance; ``mc`` configures the
    Monte Carlo route, whose importance density is rho^-(alpha + eps0).

    For an IndicatorSet the Monte Carlo estimator samples (x, h) jointly; its
    variance is finite only for alpha < 1/2, so above that the reported
    standard error is not trustworthy. Give a volume hint and use
    method="quadrature" there.
    """
    _check(s, ctx)
    try:
        method = _METHODS[method]
    except KeyError:
        raise InvalidArgument(f"unknown method {method!r}") from None
    if method == "monte-carlo":
        return _mc_perimeter(s, ctx, mc or McSpec(), eps0, workers)

    if isinstance(s, Ball):
        return ball_perimeter(ctx, s.radius, quad)
    if isinstance(s, IndicatorSet):
        if method == "auto":
            return _mc_perimeter(s, ctx, mc or McSpec(), eps0, workers)
        if s.volume_hint is None or ctx.n not in _RASTER_CELLS:
            raise UnsupportedOperation(
                "quadrature for an indicator set needs a volume hint (and n <= 3)")
        return _raster_perimeter(s, ctx)
    if isinstance(s, BoxUnion) and s.lattice is not None and ctx.n >= 2:
        return lattice_perimeter(s.lattice, ctx)
    boxes = s.as_boxes()
    if boxes is not None and ctx.n <= 3:
        return _ray_perimeter(boxes[0], boxes[1], ctx, quad)
    if method == "auto":
        return _mc_perimeter(s, ctx, mc or McSpec(), eps0, workers)
    raise UnsupportedOperation(f"no quadrature route for {type(s).__name__} in n={ctx.n}")


def frac_perimeter_indicator_seminorm(s: Shape, ctx: AlphaContext, **kwargs) -> Estimate:
    """The Besov seminorm of the indicator of ``s``, which is 2 P_alpha(s)."""
    return frac_perimeter(s, ctx, **kwargs).scaled(2.0)


# ---------------------------------------------------------------------------
# balls


def ball_perimeter(ctx: AlphaContext, radius: float = 1.0,
                   quad: QuadratureSpec | None = None) -> Estimate:
    n, alpha = ctx.n, ctx.alpha
    if not radius > 0:
        raise InvalidArgument(f"radius must be positive, got {radius!r}")
    base = quad or ANGULAR_SPEC
    spec = QuadratureSpec(base.abs_tol, base.rel_tol, base.max_subdivisions,
                          endpoint_exponent=-alpha)
    R = 2.0 * radius

    def f(rho):
        return ball_deficit(n, radius, rho) * rho ** (-1.0 - alpha)

    near = integrate_1d(f, 0.0, R, spec).scaled(unit_sphere_area(n))
    vol = unit_ball_volume(n) * radius ** n
    return near.plus(Estimate(vol * kernel_tail(ctx, R)))


# ---------------------------------------------------------------------------
# unions of boxes: exact ray integrals, adaptive over directions


def _edge_diffs(lo, hi, k):
    a, b = lo[:, k], hi[:, k]
    d = np.concatenate([np.subtract.outer(x, y).ravel()
                        for x, y in ((b, b), (a, a), (b, a), (a, b))])
    d = np.unique(d)
    return d[d != 0.0]


def _ray_perimeter(lo, hi, ctx: AlphaContext, quad: QuadratureSpec | None = None) -> Estimate:
    lo = np.ascontiguousarray(lo, dtype=float)
    hi = np.ascontiguousarray(hi, dtype=float)
    n, alpha = ctx.n, ctx.alpha
    vol = float(np.prod(hi - lo, axis=1).sum())
    R = float(np.linalg.norm(hi.max(axis=0) - lo.min(axis=0)))
    spec = quad or ANGULAR_SPEC

    def rays(dirs):
        return ray_near_integrals(np.ascontiguousarray(dirs, dtype=float), lo, hi, vol, alpha, R)

    if n == 1:
        near = Estimate(float(rays(np.array([[1.0], [-1.0]])).sum()), 1e-15 * vol, "quadrature")
    elif n == 2:
        near = _circle_integral(rays, lo, hi, spec)
    elif n == 3:
        near = _sphere_integral(rays, lo, hi, spec)
    else:
        raise UnsupportedOperation("ray quadrature is implemented for n <= 3")
    return near.plus(Estimate(vol * kernel_tail(ctx, R)))


def _circle_integral(rays, lo, hi, spec):
    d1 = np.append(_edge_diffs(lo, hi, 0), 0.0)
    d2 = np.append(_edge_diffs(lo, hi, 1), 0.0)
    c1, c2 = np.meshgrid(d1, d2, indexing="ij")
    keep = (c1 != 0) | (c2 != 0)
    ang = np.mod(np.arctan2(c2[keep], c1[keep]), math.pi)

    def f(phi):
        return rays(np.column_stack([np.cos(phi), np.sin(phi)]))

    # the integrand is even on the circle: integrate over a half turn
    return integrate_1d(f, 0.0, math.pi, spec, points=np.unique(ang)).scaled(2.0)


def _sphere_integral(rays, lo, hi, spec):
    d1, d2, d3 = (_edge_diffs(lo, hi, k) for k in range(3))
    d3p = d3[d3 > 0]
    e1, e2 = np.append(d1, 0.0), np.append(d2, 0.0)
    c1, c2 = np.meshgrid(e1, e2, indexing="ij")
    keep = (c1 != 0) | (c2 != 0)
    base_angles = np.mod(np.arctan2(c2[keep], c1[keep]), 2 * math.pi)
    r1 = np.append(np.divide.outer(d1, d3p).ravel(), 0.0)
    r2 = np.append(np.divide.outer(d2, d3p).ravel(), 0.0)
    g1, g2 = np.meshgrid(r1, r2, indexing="ij")
    tan_breaks = np.hypot(g1, g2).ravel()
    outer_points = np.unique(np.arctan(tan_breaks[tan_breaks > 0]))
    two_pi = 2 * math.pi
    inner_err = [0.0]

    def inner(phi):
        sp, cp = math.sin(phi), math.cos(phi)
        pts = [base_angles]
        if d3p.size and sp > 0:
            t = sp / cp if cp > 0 else math.inf
            x = r1 / t
            x = x[np.abs(x) <= 1]
            pts += [np.arccos(x), -np.arccos(x)]
            y = r2 / t
            y = y[np.abs(y) <= 1]
            pts += [np.arcsin(y), math.pi - np.arcsin(y)]
        pts = np.unique(np.mod(np.concatenate(pts), two_pi))

        def g(psi):
            return rays(np.column_stack([sp * np.cos(psi), sp * np.sin(psi),
                                         np.full_like(psi, cp)]))

        est = integrate_1d(g, 0.0, two_pi, _INNER_SPEC, points=pts)
        inner_err[0] = max(inner_err[0], est.error)
        return est.value * sp

    def f(phis):
        return np.array([inner(float(p)) for p in np.atleast_1d(phis)])

    # upper hemisphere, doubled by evenness
    est = integrate_1d(f, 0.0, 0.5 * math.pi, spec, points=outer_points)
    return Estimate(2.0 * est.value, 2.0 * (est.error + inner_err[0] * 0.5 * math.pi),
                    "quadrature")


# ---------------------------------------------------------------------------
# unions of grid cells


def _interval_cell_weights(alpha, extent):
    # I_k for unit cells in 1-D, k = 0 .. extent-1 (k = 0 holds P(C))
    s = 1.0 - alpha
    out = np.empty(extent)
    out[0] = 2.0 / (alpha * s)
    if extent > 1:
        out[1] = (2.0 - 2.0 ** s) / (alpha * s)
    k = np.arange(2, extent, dtype=float)
    # second difference of k^s without cancellation
    second = k ** s * (np.expm1(s * np.log1p(1.0 / k)) + np.expm1(s * np.log1p(-1.0 / k)))
    out[2:] = -second / (alpha * s)
    return out


def _tensor_rule(m, n):
    x, w = roots_legendre(m)
    # hat weight (1 - |t|) on [-1, 1], split at 0
    t = np.concatenate([0.5 * (x - 1.0), 0.5 * (x + 1.0)])
    wt = np.concatenate([0.5 * w, 0.5 * w]) * (1.0 - np.abs(t))
    grids = np.meshgrid(*([t] * n), indexing="ij")
    wgrid = np.ones_like(grids[0])
    for g in np.meshgrid(*([wt] * n), indexing="ij"):
        wgrid = wgrid * g
    return np.stack([g.ravel() for g in grids], axis=1), wgrid.ravel()


_CELL_CACHE: dict = {}


def _cell_weights(n, alpha, aspect, extent):
    """Weights for cells [0, aspect]: (P(C), err, I over the nonnegative orthant).

    I[k] = ∫_C ∫_{C + k*aspect} |x - y|^(-n-alpha) dx dy for k >= 0
    componentwise, with I[0] = P(C).
    """
    key = (n, alpha, aspect)
    hit = _CELL_CACHE.get(key)
    if hit is not None and all(a >= e for a, e in zip(hit[2].shape, extent)):
        return hit
    a = np.array(aspect)
    if n == 1:
        w = _interval_cell_weights(alpha, extent[0])
        res = (w[0], 0.0, w)
        _CELL_CACHE[key] = res
        return res
    ctx = AlphaContext(n, alpha)
    lo0, hi0 = np.zeros((1, n)), a[None, :]
    pc = _ray_perimeter(lo0, hi0, ctx)
    err = pc.error
    I = np.zeros(extent)
    I[(0,) * n] = pc.value
    # neighbouring cells: P(C) - P(C ∪ C') / 2
    for k in np.ndindex(*(min(2, e) for e in extent)):
        if not any(k):
            continue
        off = np.array(k) * a
        pu = _ray_perimeter(np.vstack([lo0, lo0 + off]), np.vstack([hi0, hi0 + off]), ctx)
        I[k] = pc.value - 0.5 * pu.value
        err += 0.5 * pu.error
    # separated cells: tensor Gauss on the hat-weighted offset integral
    ks = np.array([k for k in np.ndindex(*extent) if max(k) >= 2], dtype=float)
    if ks.size:
        cheb = ks.max(axis=1)
        for lo_c, hi_c, m in ((2, 4, 10), (5, np.inf, 6)):
            sel = (cheb >= lo_c) & (cheb <= hi_c)
            if not sel.any():
                continue
            T, W = _tensor_rule(m, n)
            kk = ks[sel]
            vals = np.empty(len(kk))
            step = max(1, 2_000_000 // len(T))
            for i in range(0, len(kk), step):
                h = (kk[i:i + step, None, :] + T[None, :, :]) * a
                r2 = np.einsum("ijk,ijk->ij", h, h)
                vals[i:i + step] = (r2 ** (-0.5 * (n + alpha))) @ W
            idx = tuple(kk.astype(int).T)
            I[idx] = vals * float(np.prod(a * a))
    res = (pc.value, err, I)
    _CELL_CACHE[key] = res
    return res


def lattice_weights(ctx: AlphaContext, spacing, shape) -> tuple[float, float, np.ndarray]:
    """Cell perimeter, its error, and the full centered interaction array.

    For a grid with cells of size ``spacing`` and ``shape`` cells per axis,
    returns ``(P(C), err, I)`` where ``I`` has shape ``(2N - 1,)*n`` with the
    zero offset at the center (holding P(C)).
    """
    spacing = np.asarray(spacing, dtype=float)
    s0 = float(spacing[0])
    aspect = tuple(float(x) for x in spacing / s0)
    extent = tuple(int(m) for m in shape)
    pc, err, half = _cell_weights(ctx.n, ctx.alpha, aspect, extent)
    factor = s0 ** (ctx.n - ctx.alpha)
    idx = [np.abs(np.arange(-(m - 1), m)) for m in extent]
    full = half[np.ix_(*idx)] * factor
    return pc * factor, err * factor, full


def lattice_perimeter(lat: Lattice, ctx: AlphaContext) -> Estimate:
    """P_alpha of a union of grid cells: count * P(C) - Σ_{k≠0} A_k I_k."""
    if lat.n != ctx.n:
        raise InvalidArgument(f"lattice dimension {lat.n} does not match n={ctx.n}")
    count = lat.count
    if count == 0:
        raise InvalidArgument("the fractional perimeter needs a set of positive volume")
    pc, err, I = lattice_weights(ctx, lat.spacing, lat.mask.shape)
    A = lat.autocorrelation().copy()
    A[tuple(m - 1 for m in lat.mask.shape)] = 0.0
    value = count * pc - float(np.sum(A * I))
    # each pair term in the neighbour weights inherits the cell perimeter error
    near = tuple(slice(m - 2 if m > 1 else 0, m + 1) for m in lat.mask.shape)
    err_total = (count + float(A[near].sum())) * err + 1e-13 * abs(value)
    return Estimate(value, err_total, "quadrature")


def _raster_perimeter(s: IndicatorSet, ctx: AlphaContext) -> Estimate:
    def at(cells):
        lo, hi = s.bounding_box()
        spacing = (hi - lo) / cells
        axes = [lo[i] + (np.arange(cells) + 0.5) * spacing[i] for i in range(ctx.n)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, ctx.n)
        mask = s.contains(pts).reshape((cells,) * ctx.n)
        lat = Lattice(lo, spacing, mask)
        if lat.count == 0:
            raise InvalidArgument("indicator set has no grid cell inside it")
        if ctx.n == 1:
            blo, bhi = lat.boxes()
            return _ray_perimeter(blo, bhi, ctx).value
        return lattice_perimeter(lat, ctx).value

    cells = _RASTER_CELLS[ctx.n]
    fine, coarse = at(cells), at(cells // 2)
    return Estimate(fine, abs(fine - coarse), "quadrature")


# ---------------------------------------------------------------------------
# Monte Carlo over offsets


def _mc_perimeter(s: Shape, ctx: AlphaContext, mc: McSpec, eps0: float,
                  workers: int) -> Estimate:
    n, alpha = ctx.n, ctx.alpha
    if not eps0 > 0:
        raise InvalidArgument(f"eps0 must be positive, got {eps0!r}")
    R = bounding_diameter(s)
    exact_vol = s.exact_volume()
    exact_cov = exact_vol is not None and s.exact_covariogram(np.zeros((1, n))) is not None
    if exact_cov:
        gamma = alpha + eps0 if alpha + eps0 < 1.0 else 0.5 * (1.0 + alpha)
    else:
        # the joint-membership estimator has finite variance only for gamma > 2 alpha
        gamma = alpha + 0.5 if alpha < 0.5 else 0.5 * (1.0 + alpha)
    area = unit_sphere_area(n)
    scale = area * R ** (1.0 - gamma) / (1.0 - gamma)
    lo, hi = s.bounding_box()
    span = hi - lo
    box_vol = float(np.prod(span))

    def sampler(rng, k):
        rho = R * rng.random(k) ** (1.0 / (1.0 - gamma))
        if n == 1:
            theta = np.where(rng.random(k) < 0.5, -1.0, 1.0)[:, None]
        else:
            theta = rng.standard_normal((k, n))
            theta /= np.linalg.norm(theta, axis=1, keepdims=True)
        cols = [rho[:, None], theta]
        if not exact_cov:
            cols.append(lo + span * rng.random((k, n)))
        return np.hstack(cols)

    def integrand(z):
        rho = z[:, 0]
        h = rho[:, None] * z[:, 1:1 + n]
        weight = scale * rho ** (gamma - 1.0 - alpha)
        if isinstance(s, Ball):
            deficit = s.deficit(rho)
        elif exact_cov:
            deficit = exact_vol - s.exact_covariogram(h)
        else:
            x = z[:, 1 + n:]
            deficit = box_vol * (s.contains(x) & ~s.contains(x + h))
        return deficit * weight

    near = mc_mean(sampler, integrand, mc, workers)
    if exact_vol is not None:
        far = Estimate(exact_vol * kernel_tail(ctx, R))
    else:
        # volume from an independent stream derived from the same seed
        vspec = McSpec(mc.samples, mc.seed ^ 0x5DEECE66D, mc.chunks)
        far = volume(s, vspec, workers).scaled(kernel_tail(ctx, R))
    return Estimate(near.value + far.value, math.hypot(near.error, far.error), "monte-carlo",
                    near.samples + far.samples, mc.seed)


# ---------------------------------------------------------------------------
# limit laws


def _scan(values_fn, grid, target, end):
    grid = tuple(float(a) for a in grid)
    vals = [values_fn(a) for a in grid]
    ext = extrapolate_limit(list(zip(grid, vals)), end)
    return LimitScanResult(grid, tuple(vals), ext, target)


def limit_alpha0_check(s: Shape, grid: Sequence[float] = ALPHA0_GRID, **kwargs) -> LimitScanResult:
    """Extrapolate alpha * P_alpha(s) to alpha = 0; target n omega_n V(s)."""
    target = unit_sphere_area(s.n) * volume(s).value
    return _scan(lambda a: a * frac_perimeter(s, AlphaContext(s.n, a), **kwargs).value,
                 grid, target, 0)


def limit_alpha1_check(s: Shape, grid: Sequence[float] = ALPHA1_GRID, **kwargs) -> LimitScanResult:
    """Extrapolate (1 - alpha) * P_alpha(s) to alpha = 1; target tau_n P(s) / 2."""
    target = 0.5 * tau(s.n) * classical_perimeter(s)
    return _scan(lambda a: (1 - a) * frac_perimeter(s, AlphaContext(s.n, a), **kwargs).value,
                 grid, target, 1)
