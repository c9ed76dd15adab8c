"""Bounded sets in R^n and their covariograms.

The covariogram g_E(h) = V(E ∩ (E + h)) turns the double integral defining
the fractional perimeter into a single integral over offsets:
P_alpha(E) = ∫ (V(E) - g_E(h)) |h|^(-n-alpha) dh.

Shapes are immutable. Interval, Ball, Box and BoxUnion have exact volumes
and covariograms; IndicatorSet is a membership oracle handled by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import betainc

from .constants import unit_ball_volume
from .errors import InvalidArgument, UnsupportedOperation
from .numerics import Estimate, McSpec, mc_mean

__all__ = [
    "Shape", "Interval", "Ball", "Box", "BoxUnion", "IndicatorSet", "Empty", "Lattice",
    "volume", "covariogram", "scale", "translate", "classical_perimeter",
    "bounding_diameter", "centroid", "distance", "contains_shape", "Estimate",
]


def _vec(values, n=None, name="vector") -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or (n is not None and arr.size != n):
        raise InvalidArgument(f"{name} must have {n} components, got {values!r}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} must be finite, got {values!r}")
    return tuple(float(x) for x in arr)


def _as_points(pts, n) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, n) if n > 1 else pts[:, None]
    if pts.shape[-1] != n:
        raise InvalidArgument(f"points must have {n} coordinates, got shape {pts.shape}")
    return pts


class Shape:
    """Common interface. Subclasses are frozen dataclasses."""

    n: int

    # exact volume, or None when only Monte Carlo knows it
    def exact_volume(self) -> float | None:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def contains(self, pts) -> np.ndarray:
        raise NotImplementedError

    def _scaled(self, r: float) -> "Shape":
        raise NotImplementedError

    def _translated(self, v: np.ndarray) -> "Shape":
        raise NotImplementedError

    def exact_covariogram(self, offsets: np.ndarray) -> np.ndarray | None:
        """Covariogram at each row of ``offsets``, or None if not exact."""
        return None

    def as_boxes(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(lo, hi) arrays of pairwise-disjoint boxes, for axis-aligned shapes."""
        return None


@dataclass(frozen=True)
class Interval(Shape):
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise InvalidArgument(f"interval needs finite a < b, got ({self.a}, {self.b})")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def n(self) -> int:
        return 1

    @property
    def length(self) -> float:
        return self.b - self.a

    def exact_volume(self):
        return self.length

    def bounding_box(self):
        return np.array([self.a]), np.array([self.b])

    def contains(self, pts):
        x = _as_points(pts, 1)[:, 0]
        return (x > self.a) & (x < self.b)

    def _scaled(self, r):
        return Interval(r * self.a, r * self.b)

    def _translated(self, v):
        return Interval(self.a + v[0], self.b + v[0])

    def exact_covariogram(self, offsets):
        h = np.abs(np.asarray(offsets, dtype=float).reshape(-1, 1)[:, 0])
        return np.maximum(0.0, self.length - h)

    def as_boxes(self):
        return np.array([[self.a]]), np.array([[self.b]])


@dataclass(frozen=True)
class Ball(Shape):
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        c = _vec(self.center, name="center")
        if not 1 <= len(c) <= 16:
            raise InvalidArgument(f"ball dimension must lie in [1, 16], got {len(c)}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InvalidArgument(f"ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, n: int) -> "Ball":
        return cls((0.0,) * n, 1.0)

    @property
    def n(self) -> int:
        return len(self.center)

    def exact_volume(self):
        return unit_ball_volume(self.n) * self.radius ** self.n

    def bounding_box(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def contains(self, pts):
        x = _as_points(pts, self.n) - np.array(self.center)
        return np.einsum("ij,ij->i", x, x) < self.radius ** 2

    def _scaled(self, r):
        return Ball(tuple(r * c for c in self.center), r * self.radius)

    def _translated(self, v):
        return Ball(tuple(c + x for c, x in zip(self.center, v)), self.radius)

    def exact_covariogram(self, offsets):
        d = np.linalg.norm(_as_points(offsets, self.n), axis=1)
        return ball_covariogram(self.n, self.radius, d)

    def deficit(self, d) -> np.ndarray:
        """V - g at distance ``d``, evaluated without cancellation."""
        return ball_deficit(self.n, self.radius, d)


def ball_covariogram(n: int, r: float, d) -> np.ndarray:
    """Volume of the intersection of two radius-r balls at center distance d."""
    d = np.abs(np.asarray(d, dtype=float))
    out = np.zeros_like(d)
    inside = d < 2 * r
    x = d[inside]
    if n == 1:
        out[inside] = 2 * r - x
    elif n == 2:
        out[inside] = 2 * r * r * np.arccos(x / (2 * r)) - 0.5 * x * np.sqrt(4 * r * r - x * x)
    elif n == 3:
        out[inside] = math.pi * (4 * r + x) * (2 * r - x) ** 2 / 12.0
    else:
        # two caps of height r - d/2, via the regularized incomplete beta function
        vol = unit_ball_volume(n) * r ** n
        out[inside] = vol * betainc(0.5 * (n + 1), 0.5, 1.0 - (x / (2 * r)) ** 2)
    return out


def ball_deficit(n: int, r: float, d) -> np.ndarray:
    d = np.abs(np.asarray(d, dtype=float))
    vol = unit_ball_volume(n) * r ** n
    x = np.minimum((d / (2 * r)) ** 2, 1.0)
    return vol * betainc(0.5, 0.5 * (n + 1), x)


@dataclass(frozen=True)
class Box(Shape):
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = _vec(self.lo, name="lo")
        hi = _vec(self.hi, len(lo), name="hi")
        if not all(a < b for a, b in zip(lo, hi)):
            raise InvalidArgument(f"box needs lo < hi componentwise, got {lo} / {hi}")
        if not 1 <= len(lo) <= 16:
            raise InvalidArgument(f"box dimension must lie in [1, 16], got {len(lo)}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> np.ndarray:
        return np.array(self.hi) - np.array(self.lo)

    def exact_volume(self):
        return float(np.prod(self.sides))

    def bounding_box(self):
        return np.array(self.lo), np.array(self.hi)

    def contains(self, pts):
        x = _as_points(pts, self.n)
        return np.all((x > np.array(self.lo)) & (x < np.array(self.hi)), axis=1)

    def _scaled(self, r):
        return Box(tuple(r * x for x in self.lo), tuple(r * x for x in self.hi))

    def _translated(self, v):
        return Box(tuple(x + t for x, t in zip(self.lo, v)),
                   tuple(x + t for x, t in zip(self.hi, v)))

    def exact_covariogram(self, offsets):
        h = np.abs(_as_points(offsets, self.n))
        return np.prod(np.maximum(0.0, self.sides - h), axis=1)

    def as_boxes(self):
        return np.array([self.lo]), np.array([self.hi])


class Lattice:
    """A union of grid cells: cell j spans origin + j*spacing .. origin + (j+1)*spacing.

    Transformed copies share the cached cell autocorrelation.
    """

    def __init__(self, origin, spacing, mask, _cache=None):
        self.origin = np.asarray(origin, dtype=float)
        self.spacing = np.asarray(spacing, dtype=float)
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.ndim != self.origin.size or self.spacing.size != self.origin.size:
            raise InvalidArgument("lattice origin/spacing/mask dimensions disagree")
        if np.any(self.spacing <= 0):
            raise InvalidArgument("lattice spacing must be positive")
        self._cache = {} if _cache is None else _cache

    @property
    def n(self) -> int:
        return self.mask.ndim

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def autocorrelation(self) -> np.ndarray:
        """Integer count of cell pairs at each lattice offset, shape (2N-1,)*n."""
        if "acorr" not in self._cache:
            m = self.mask.astype(float)
            shape = [2 * s - 1 for s in m.shape]
            fshape = [int(2 ** math.ceil(math.log2(s))) for s in shape]
            axes = tuple(range(m.ndim))
            fm = np.fft.rfftn(m, fshape, axes=axes)
            full = np.fft.irfftn(fm * np.conj(fm), fshape, axes=axes)
            # wrap negative offsets to the front, center zero offset
            full = np.roll(full, [s - 1 for s in m.shape], axis=axes)
            sl = tuple(slice(0, s) for s in shape)
            self._cache["acorr"] = np.rint(full[sl]) + 0.0
        return self._cache["acorr"]

    def boxes(self) -> tuple[np.ndarray, np.ndarray]:
        """Cells merged into maximal runs along the last axis."""
        if "boxes" not in self._cache:
            m = self.mask
            padded = np.concatenate([np.zeros(m.shape[:-1] + (1,), bool), m,
                                     np.zeros(m.shape[:-1] + (1,), bool)], axis=-1)
            d = np.diff(padded.astype(np.int8), axis=-1)
            starts = np.argwhere(d == 1)
            ends = np.argwhere(d == -1)
            lo_idx = starts.astype(float)
            hi_idx = starts.astype(float)
            hi_idx[:, :-1] += 1.0
            hi_idx[:, -1] = ends[:, -1]
            self._cache["boxes"] = (lo_idx, hi_idx)
        lo_idx, hi_idx = self._cache["boxes"]
        return self.origin + lo_idx * self.spacing, self.origin + hi_idx * self.spacing

    def transformed(self, r: float, v) -> "Lattice":
        return Lattice(r * self.origin + np.asarray(v, dtype=float), r * self.spacing,
                       self.mask, self._cache)


@dataclass(frozen=True)
class BoxUnion(Shape):
    boxes: tuple[Box, ...]
    lattice: Lattice | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise InvalidArgument("box union needs at least one box (use Empty)")
        n = boxes[0].n
        if any(b.n != n for b in boxes):
            raise InvalidArgument("all boxes in a union must share a dimension")
        object.__setattr__(self, "boxes", boxes)
        if self.lattice is None and len(boxes) > 1:
            lo = np.array([b.lo for b in boxes])
            hi = np.array([b.hi for b in boxes])
            overlap = np.all((lo[:, None, :] < hi[None, :, :]) & (lo[None, :, :] < hi[:, None, :]),
                             axis=-1)
            np.fill_diagonal(overlap, False)
            if overlap.any():
                i, j = np.argwhere(overlap)[0]
                raise InvalidArgument(f"boxes {i} and {j} of the union overlap")

    @classmethod
    def from_lattice(cls, lattice: Lattice) -> "BoxUnion | Empty":
        if lattice.count == 0:
            return Empty(lattice.n)
        lo, hi = lattice.boxes()
        boxes = tuple(Box(tuple(a), tuple(b)) for a, b in zip(lo, hi))
        return cls(boxes, lattice)

    @property
    def n(self) -> int:
        return self.boxes[0].n

    def exact_volume(self):
        if self.lattice is not None:
            return self.lattice.count * self.lattice.cell_volume
        return math.fsum(b.exact_volume() for b in self.boxes)

    def bounding_box(self):
        lo, hi = self.as_boxes()
        return lo.min(axis=0), hi.max(axis=0)

    def contains(self, pts):
        x = _as_points(pts, self.n)
        lo, hi = self.as_boxes()
        inside = np.zeros(len(x), bool)
        for a, b in zip(lo, hi):
            inside |= np.all((x > a) & (x < b), axis=1)
        return inside

    def _scaled(self, r):
        lat = self.lattice.transformed(r, np.zeros(self.n)) if self.lattice is not None else None
        return BoxUnion(tuple(b._scaled(r) for b in self.boxes), lat)

    def _translated(self, v):
        lat = self.lattice.transformed(1.0, v) if self.lattice is not None else None
        return BoxUnion(tuple(b._translated(v) for b in self.boxes), lat)

    def exact_covariogram(self, offsets):
        h = _as_points(offsets, self.n)
        lo, hi = self.as_boxes()
        total = np.zeros(len(h))
        for i in range(len(lo)):
            # overlap of box i with every translate box j + h
            a = np.maximum(lo[i][None, None, :], lo[None, :, :] + h[:, None, :])
            b = np.minimum(hi[i][None, None, :], hi[None, :, :] + h[:, None, :])
            total += np.prod(np.maximum(0.0, b - a), axis=-1).sum(axis=1)
        return total

    def as_boxes(self):
        if "arrays" not in self.__dict__:
            lo = np.array([b.lo for b in self.boxes])
            hi = np.array([b.hi for b in self.boxes])
            object.__setattr__(self, "arrays", (lo, hi))
        return self.__dict__["arrays"]


@dataclass(frozen=True)
class IndicatorSet(Shape):
    """Set given by a vectorised membership oracle ``oracle(points) -> bool``."""

    oracle: Callable[[np.ndarray], np.ndarray]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    volume_hint: float | None = None

    def __post_init__(self):
        lo = _vec(self.lo, name="lo")
        hi = _vec(self.hi, len(lo), name="hi")
        if not all(a < b for a, b in zip(lo, hi)):
            raise InvalidArgument("indicator bounding box needs positive volume")
        if self.volume_hint is not None and not self.volume_hint > 0:
            raise InvalidArgument("volume hint must be positive")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return len(self.lo)

    def exact_volume(self):
        return None

    def bounding_box(self):
        return np.array(self.lo), np.array(self.hi)

    def contains(self, pts):
        x = _as_points(pts, self.n)
        lo, hi = self.bounding_box()
        inbox = np.all((x >= lo) & (x <= hi), axis=1)
        return inbox & np.asarray(self.oracle(x), dtype=bool)

    def _scaled(self, r):
        oracle = self.oracle
        hint = None if self.volume_hint is None else self.volume_hint * r ** self.n
        return IndicatorSet(lambda x: oracle(x / r), tuple(r * a for a in self.lo),
                            tuple(r * b for b in self.hi), hint)

    def _translated(self, v):
        oracle = self.oracle
        return IndicatorSet(lambda x: oracle(x - v), tuple(a + t for a, t in zip(self.lo, v)),
                            tuple(b + t for b, t in zip(self.hi, v)), self.volume_hint)


@dataclass(frozen=True)
class Empty(Shape):
    """Marker for an empty superlevel set; never a valid perimeter input."""

    dim: int

    @property
    def n(self) -> int:
        return self.dim

    def exact_volume(self):
        return 0.0

    def contains(self, pts):
        return np.zeros(len(_as_points(pts, self.n)), bool)


# ---------------------------------------------------------------------------
# operations


def _uniform_box_sampler(lo, hi):
    lo = np.asarray(lo, float)
    span = np.asarray(hi, float) - lo

    def sample(rng, k):
        return lo + span * rng.random((k, lo.size))

    return sample


def volume(s: Shape, mc: McSpec | None = None, workers: int = 1) -> Estimate:
    v = s.exact_volume()
    if v is not None:
        return Estimate(v)
    mc = mc or McSpec(samples=1_000_000)
    lo, hi = s.bounding_box()
    est = mc_mean(_uniform_box_sampler(lo, hi), lambda x: s.contains(x).astype(float), mc,
                  workers)
    return est.scaled(float(np.prod(hi - lo)))


def covariogram(s: Shape, h, mc: McSpec | None = None, workers: int = 1) -> Estimate:
    """V(E ∩ (E + h)) at a single offset ``h``."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.shape != (s.n,):
        raise InvalidArgument(f"offset must have {s.n} components, got shape {h.shape}")
    if isinstance(s, Empty):
        return Estimate(0.0)
    exact = s.exact_covariogram(h[None, :])
    if exact is not None:
        return Estimate(float(exact[0]))
    lo, hi = s.bounding_box()
    qlo, qhi = np.maximum(lo, lo + h), np.minimum(hi, hi + h)
    if np.any(qhi <= qlo):
        return Estimate(0.0)
    mc = mc or McSpec()
    est = mc_mean(_uniform_box_sampler(qlo, qhi),
                  lambda x: (s.contains(x) & s.contains(x - h)).astype(float), mc, workers)
    return est.scaled(float(np.prod(qhi - qlo)))


def scale(s: Shape, r: float) -> Shape:
    """The dilate {r x : x in s} about the origin."""
    if not (r > 0 and math.isfinite(r)):
        raise InvalidArgument(f"scale factor must be positive, got {r!r}")
    return s._scaled(float(r))


def translate(s: Shape, v) -> Shape:
    return s._translated(np.asarray(_vec(v, s.n, "translation"), dtype=float))


def centroid(s: Shape) -> np.ndarray:
    """Barycenter for exact shapes; bounding-box center for oracle sets."""
    if isinstance(s, Interval):
        return np.array([0.5 * (s.a + s.b)])
    if isinstance(s, Ball):
        return np.array(s.center)
    if isinstance(s, Box):
        return 0.5 * (np.array(s.lo) + np.array(s.hi))
    if isinstance(s, BoxUnion):
        lo, hi = s.as_boxes()
        w = np.prod(hi - lo, axis=1)
        return (w[:, None] * 0.5 * (lo + hi)).sum(axis=0) / w.sum()
    lo, hi = s.bounding_box()
    return 0.5 * (lo + hi)


def dilate_about_centroid(s: Shape, r: float) -> Shape:
    c = centroid(s)
    return translate(scale(translate(s, -c), r), c)


def bounding_diameter(s: Shape) -> float:
    """Diagonal of the bounding box; the covariogram vanishes beyond it."""
    if isinstance(s, Ball):
        return 2.0 * s.radius
    lo, hi = s.bounding_box()
    return float(np.linalg.norm(hi - lo))


def classical_perimeter(s: Shape) -> float:
    """Surface measure of the boundary (counting measure when n = 1)."""
    if isinstance(s, Interval):
        return 2.0
    if isinstance(s, Ball):
        return s.n * unit_ball_volume(s.n) * s.radius ** (s.n - 1)
    if isinstance(s, Box):
        return _box_surface(np.array(s.lo), np.array(s.hi))
    if isinstance(s, BoxUnion):
        lo, hi = s.as_boxes()
        total = sum(_box_surface(a, b) for a, b in zip(lo, hi))
        # faces shared by touching boxes are interior
        for i in range(len(lo)):
            for j in range(i + 1, len(lo)):
                total -= 2.0 * _shared_face(lo[i], hi[i], lo[j], hi[j])
        return total
    raise UnsupportedOperation(f"classical perimeter is not available for {type(s).__name__}")


def _box_surface(lo, hi) -> float:
    sides = hi - lo
    n = sides.size
    if n == 1:
        return 2.0
    return float(sum(2.0 * np.prod(np.delete(sides, k)) for k in range(n)))


def _shared_face(lo1, hi1, lo2, hi2) -> float:
    n = lo1.size
    for k in range(n):
        if hi1[k] == lo2[k] or hi2[k] == lo1[k]:
            if n == 1:
                return 1.0
            others = [j for j in range(n) if j != k]
            ov = np.minimum(hi1[others], hi2[others]) - np.maximum(lo1[others], lo2[others])
            return float(np.prod(np.maximum(ov, 0.0)))
    return 0.0


def distance(s: Shape, pts) -> np.ndarray:
    """Euclidean distance from each point to the closure of ``s``."""
    x = _as_points(pts, s.n)
    if isinstance(s, Ball):
        return np.maximum(np.linalg.norm(x - np.array(s.center), axis=1) - s.radius, 0.0)
    boxes = s.as_boxes()
    if boxes is None:
        raise UnsupportedOperation(f"distance is not available for {type(s).__name__}")
    lo, hi = boxes
    best = np.full(len(x), np.inf)
    for a, b in zip(lo, hi):
        gap = np.maximum(np.maximum(a - x, x - b), 0.0)
        best = np.minimum(best, np.linalg.norm(gap, axis=1))
    return best


def contains_shape(outer: Shape, inner: Shape, probes: int = 4096) -> bool:
    """Whether ``inner`` ⊆ closure(``outer``).

    Exact for pairs of balls and axis-aligned shapes; otherwise decided on
    a fixed set of probe points drawn from ``inner``.
    """
    if inner.n != outer.n:
        return False
    tol = 1e-12
    if isinstance(outer, Ball) and isinstance(inner, Ball):
        gap = np.linalg.norm(np.array(outer.center) - np.array(inner.center))
        return gap + inner.radius <= outer.radius * (1 + tol)
    ib, ob = inner.as_boxes(), outer.as_boxes()
    if ib is not None and isinstance(outer, (Box, Interval)):
        olo, ohi = ob
        return bool(np.all(ib[0] >= olo[0] - tol) and np.all(ib[1] <= ohi[0] + tol))
    if isinstance(inner, Ball) and ob is not None and isinstance(outer, (Box, Interval)):
        c = np.array(inner.center)
        return bool(np.all(c - inner.radius >= ob[0][0] - tol)
                    and np.all(c + inner.radius <= ob[1][0] + tol))
    if isinstance(outer, Ball) and ib is not None and isinstance(inner, (Box, Interval)):
        lo, hi = ib[0][0], ib[1][0]
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(inner.n, -1).T
        d = np.linalg.norm(corners - np.array(outer.center), axis=1)
        return bool(np.all(d <= outer.radius * (1 + tol)))
    rng = np.random.Generator(np.random.Philox(key=0))
    lo, hi = inner.bounding_box()
    pts = lo + (hi - lo) * rng.random((probes * 4, inner.n))
    pts = pts[inner.contains(pts)][:probes]
    if len(pts) == 0:
        return True
    # probe slightly inward to tolerate shared boundaries
    c = centroid(inner)
    pts = c + (pts - c) * (1 - 1e-9)
    return bool(np.all(outer.contains(pts)))
