"""Grid functions, the seminorm ∫ D_f(h) |h|^(-n-alpha) dh and its co-area split.

A :class:`SampledFunction` is read as piecewise constant on its grid cells,
f = Σ_j f_j 1_{C_j}. Under that reading everything is exact up to the cell
interaction weights:

* D_f(h) = ∫ |f(x + h) - f(x)| dx is the multilinear interpolation, in
  h / spacing, of the lattice values D_k = |C| Σ_j |f_{j+k} - f_j|;
* the seminorm is [Σ_{k≠0} (D_k - D_∞) I_k + D_∞ P(C)] / |C| with
  D_∞ = 2 ||f||_1 and I_k the interaction of two cells at offset k;
* the co-area integral over levels is a finite sum over the distinct values
  of |f|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import roots_legendre

from ._kernels import lattice_diff_sums
from .constants import AlphaContext
from .errors import InvalidArgument
from .geometry import (Ball, Box, BoxUnion, Empty, Interval, Lattice, Shape, distance)
from .numerics import Estimate
from .perimeter import frac_perimeter, lattice_weights

__all__ = [
    "SampledFunction", "diff_volume", "besov_seminorm", "lp_norm", "superlevel_set",
    "coarea_decompose", "build_cutoff", "tent", "pyramid", "bump", "read_grid", "write_grid",
]


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Cell values on a regular grid; cell j spans origin + j*spacing .. + spacing."""

    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        n = values.ndim
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        spacing = np.atleast_1d(np.asarray(self.spacing, dtype=float))
        if spacing.size == 1 and n > 1:
            spacing = np.full(n, float(spacing[0]))
        if not 1 <= n <= 16 or origin.shape != (n,) or spacing.shape != (n,):
            raise InvalidArgument("origin/spacing must match the dimension of the value array")
        if np.any(spacing <= 0) or not np.all(np.isfinite(spacing)):
            raise InvalidArgument("spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("function values must be finite")
        if any(m < 3 for m in values.shape):
            raise InvalidArgument("need at least three cells per axis")
        for ax in range(n):
            edge = np.take(values, [0, -1], axis=ax)
            if np.any(edge != 0):
                raise InvalidArgument("values must vanish on the outer layer of cells")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)

    @property
    def n(self) -> int:
        return self.values.ndim

    @property
    def extents(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def centers(self) -> list[np.ndarray]:
        return [self.origin[i] + (np.arange(m) + 0.5) * self.spacing[i]
                for i, m in enumerate(self.extents)]

    @property
    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        nz = np.argwhere(self.values != 0)
        if nz.size == 0:
            return self.origin.copy(), self.origin.copy()
        return (self.origin + nz.min(axis=0) * self.spacing,
                self.origin + (nz.max(axis=0) + 1) * self.spacing)

    def abs(self) -> "SampledFunction":
        return SampledFunction(self.origin, self.spacing, np.abs(self.values))

    def dilated(self, r: float) -> "SampledFunction":
        """x -> f(x / r), i.e. the grid stretched by r."""
        if not r > 0:
            raise InvalidArgument("dilation factor must be positive")
        return SampledFunction(self.origin * r, self.spacing * r, self.values)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        if (self.extents != other.extents or not np.array_equal(self.origin, other.origin)
                or not np.array_equal(self.spacing, other.spacing)):
            raise InvalidArgument("functions must share a grid to be added")
        return SampledFunction(self.origin, self.spacing, self.values + other.values)

    def __mul__(self, c: float) -> "SampledFunction":
        return SampledFunction(self.origin, self.spacing, self.values * float(c))

    __rmul__ = __mul__


def _check_ctx(f: SampledFunction, ctx: AlphaContext):
    if f.n != ctx.n:
        raise InvalidArgument(f"function dimension {f.n} does not match n={ctx.n}")


def _diff_table(f: SampledFunction) -> np.ndarray:
    cache = f.__dict__.setdefault("_cache", {})
    if "D" not in cache:
        cache["D"] = lattice_diff_sums(f.values) * f.cell_volume
    return cache["D"]


def l1_norm(f: SampledFunction) -> float:
    return float(np.abs(f.values).sum()) * f.cell_volume


def diff_volume(f: SampledFunction, h) -> float:
    """∫ |f(x + h) - f(x)| dx for the piecewise-constant reading of ``f``."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.shape != (f.n,):
        raise InvalidArgument(f"offset must have {f.n} components")
    D = _diff_table(f)
    far = 2.0 * l1_norm(f)
    u = h / f.spacing
    base = np.floor(u).astype(int)
    frac = u - base
    center = np.array(f.extents) - 1
    total = 0.0
    for corner in np.ndindex(*(2,) * f.n):
        c = np.array(corner)
        w = float(np.prod(np.where(c == 1, frac, 1.0 - frac)))
        if w == 0.0:
            continue
        idx = center + base + c
        if np.all(idx >= 0) and np.all(idx < np.array(D.shape)):
            total += w * D[tuple(idx)]
        else:
            total += w * far
    return total


def besov_seminorm(f: SampledFunction, ctx: AlphaContext) -> Estimate:
    """∫ D_f(h) |h|^(-n-alpha) dh."""
    _check_ctx(f, ctx)
    if not np.any(f.values):
        return Estimate(0.0)
    D = _diff_table(f)
    d_inf = 2.0 * l1_norm(f)
    pc, err, I = lattice_weights(ctx, f.spacing, f.extents)
    center = tuple(m - 1 for m in f.extents)
    excess = D - d_inf
    excess[center] = 0.0
    vc = f.cell_volume
    value = (math.fsum((excess * I).ravel()) + d_inf * pc) / vc
    near = tuple(slice(max(c - 1, 0), c + 2) for c in center)
    bound = (d_inf + float(np.abs(excess[near]).sum())) * err / vc
    return Estimate(value, bound + 1e-12 * (abs(value) + d_inf * pc / vc), "quadrature")


def lp_norm(f: SampledFunction, p: float) -> float:
    if not p >= 1:
        raise InvalidArgument(f"p must be at least 1, got {p!r}")
    return float((np.abs(f.values) ** p).sum() * f.cell_volume) ** (1.0 / p)


def cells_to_shape(f: SampledFunction, mask: np.ndarray) -> Shape:
    """Union of the grid cells of ``f`` selected by ``mask``."""
    lat = Lattice(f.origin, f.spacing, mask)
    return BoxUnion.from_lattice(lat)


def superlevel_set(f: SampledFunction, t: float) -> Shape:
    """{|f| > t} as a union of grid cells, or :class:`Empty`."""
    if not t > 0:
        raise InvalidArgument(f"level must be positive, got {t!r}")
    return cells_to_shape(f, np.abs(f.values) > t)


def levels(f: SampledFunction) -> np.ndarray:
    """Distinct positive values of |f|, increasing."""
    v = np.unique(np.abs(f.values))
    return v[v > 0]


def coarea_decompose(f: SampledFunction, ctx: AlphaContext, t_grid: int | None = None,
                     workers: int = 1) -> Estimate:
    """2 ∫_0^∞ P_alpha({|f| > t}) dt.

    By default the level integral is summed exactly: between consecutive
    distinct values of |f| the superlevel set does not change. With
    ``t_grid = m`` an m-point Gauss-Legendre rule on (0, max |f|) is used
    instead.
    """
    _check_ctx(f, ctx)
    v = levels(f)
    if v.size == 0:
        return Estimate(0.0)
    a = np.abs(f.values)
    if t_grid is None:
        ts = v
        widths = np.diff(np.concatenate([[0.0], v]))
        masks = [a >= t for t in ts]
    else:
        if t_grid < 1:
            raise InvalidArgument("t_grid must be a positive count")
        x, w = roots_legendre(int(t_grid))
        top = float(v[-1])
        ts = 0.5 * top * (x + 1.0)
        widths = 0.5 * top * w
        masks = [a > t for t in ts]

    def level(mask):
        return frac_perimeter(cells_to_shape(f, mask), ctx)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            pers = list(pool.map(level, masks))
    else:
        pers = [level(m) for m in masks]
    value = 2.0 * math.fsum(float(wi) * p.value for wi, p in zip(widths, pers))
    err = 2.0 * math.fsum(float(wi) * p.error for wi, p in zip(widths, pers))
    return Estimate(value, err, "quadrature")


# ---------------------------------------------------------------------------
# constructors


def _grid(lo, hi, spacing, pad=2):
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    counts = np.ceil((hi - lo) / spacing - 1e-9).astype(int) + 2 * pad
    mid = 0.5 * (lo + hi)
    origin = mid - 0.5 * counts * spacing
    return origin, counts


def _on_grid(fn, lo, hi, spacing) -> SampledFunction:
    n = len(lo)
    spacing = float(spacing)
    origin, counts = _grid(lo, hi, spacing)
    axes = [origin[i] + (np.arange(counts[i]) + 0.5) * spacing for i in range(n)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = fn(pts.reshape(-1, n)).reshape(tuple(counts))
    return SampledFunction(origin, np.full(n, spacing), vals)


def tent(n: int = 1, spacing: float | None = None) -> SampledFunction:
    """max(0, 1 - |x|), a cone over the unit ball."""
    spacing = spacing or (1.0 / 2048 if n == 1 else 1.0 / 64 if n == 2 else 1.0 / 16)
    return _on_grid(lambda x: np.maximum(0.0, 1.0 - np.linalg.norm(x, axis=1)),
                    -np.ones(n), np.ones(n), spacing)


def pyramid(n: int = 2, spacing: float | None = None) -> SampledFunction:
    """max(0, 1 - |x|_inf), whose level sets are cubes."""
    spacing = spacing or (1.0 / 2048 if n == 1 else 1.0 / 64 if n == 2 else 1.0 / 16)
    return _on_grid(lambda x: np.maximum(0.0, 1.0 - np.abs(x).max(axis=1)),
                    -np.ones(n), np.ones(n), spacing)


def bump(n: int = 2, r: float = 1.0, spacing: float | None = None) -> SampledFunction:
    """exp(1 - 1/(1 - |x|^2/r^2)) inside the ball of radius r, 0 outside."""
    if not r > 0:
        raise InvalidArgument("bump radius must be positive")
    spacing = spacing or r * (1.0 / 1024 if n == 1 else 1.0 / 48 if n == 2 else 1.0 / 12)

    def fn(x):
        s = np.einsum("ij,ij->i", x, x) / (r * r)
        out = np.zeros(len(x))
        inside = s < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out

    return _on_grid(fn, -r * np.ones(n), r * np.ones(n), spacing)


def build_cutoff(s: Shape, eps: float, spacing: float | None = None) -> SampledFunction:
    """max(0, 1 - dist(x, s)/eps) sampled at cell centers.

    ``spacing`` defaults to eps/16 and must resolve eps with at least 8 cells.
    """
    if not eps > 0:
        raise InvalidArgument(f"eps must be positive, got {eps!r}")
    if isinstance(s, Empty):
        raise InvalidArgument("cannot build a cutoff around an empty set")
    spacing = eps / 16.0 if spacing is None else float(spacing)
    if not spacing > 0 or eps / spacing < 8 * (1 - 1e-12):
        raise InvalidArgument(f"grid spacing {spacing!r} resolves eps={eps!r} with fewer than 8 cells")
    if not isinstance(s, (Interval, Ball, Box, BoxUnion)):
        raise InvalidArgument(f"cutoffs need an exact shape, got {type(s).__name__}")
    lo, hi = s.bounding_box()
    return _on_grid(lambda x: np.maximum(0.0, 1.0 - distance(s, x) / eps),
                    lo - eps, hi + eps, spacing)


# ---------------------------------------------------------------------------
# grid files: dimension line, origin line, spacing line, extents line, values


def read_grid(path) -> SampledFunction:
    tokens = Path(path).read_text().split("\n")
    lines = [ln for ln in tokens if ln.strip()]
    if len(lines) < 5:
        raise InvalidArgument("grid file needs dimension, origin, spacing, extents and values")
    n = int(lines[0])
    origin = [float(x) for x in lines[1].split()]
    spacing = [float(x) for x in lines[2].split()]
    extents = [int(x) for x in lines[3].split()]
    if not (len(origin) == len(spacing) == len(extents) == n):
        raise InvalidArgument("grid header lines must each have n entries")
    vals = np.array(" ".join(lines[4:]).split(), dtype=float)
    if vals.size != int(np.prod(extents)):
        raise InvalidArgument(f"expected {int(np.prod(extents))} values, found {vals.size}")
    return SampledFunction(origin, spacing, vals.reshape(extents))


def write_grid(f: SampledFunction, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{f.n}\n")
        fh.write(" ".join(repr(float(x)) for x in f.origin) + "\n")
        fh.write(" ".join(repr(float(x)) for x in f.spacing) + "\n")
        fh.write(" ".join(str(m) for m in f.extents) + "\n")
        np.savetxt(fh, f.values.reshape(-1, f.extents[-1]), fmt="%.17g")
