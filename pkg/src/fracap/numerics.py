"""Integration machinery shared by the geometric and analytic modules.

* :func:`integrate_1d` -- adaptive Gauss-Kronrod quadrature whose end panels
  switch to Gauss-Jacobi rules when the integrand carries a known power
  singularity there.
* :func:`mc_mean` -- chunked Monte Carlo with counter-based (Philox) streams
  keyed by ``(seed, chunk)``, so results do not depend on the worker count.
* :func:`extrapolate_limit` -- affine least-squares extrapolation used by
  the alpha -> 0 and alpha -> 1 scans.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .errors import ConvergenceFailure, InvalidArgument

METHODS = ("exact", "quadrature", "monte-carlo")
_RANK = {m: i for i, m in enumerate(METHODS)}
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Estimate:
    """A number with its error bar and provenance.

    ``error`` is an accumulated error estimate for deterministic methods and
    one standard error for Monte Carlo.
    """

    value: float
    error: float = 0.0
    method: str = "exact"
    samples: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.method not in _RANK:
            raise InvalidArgument(f"unknown method tag {self.method!r}")
        if not (self.error >= 0.0):
            raise InvalidArgument(f"error must be non-negative, got {self.error!r}")
        if self.method == "exact" and self.error != 0.0:
            raise InvalidArgument("exact estimates carry zero error")
        if self.method == "monte-carlo" and self.samples <= 0:
            raise InvalidArgument("monte-carlo estimates need a positive sample count")
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "error", float(self.error))

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(self.value * factor, self.error * abs(factor), self.method,
                        self.samples, self.seed)

    def plus(self, other: "Estimate") -> "Estimate":
        method = max(self.method, other.method, key=_RANK.__getitem__)
        err = self.error + other.error
        if method == "exact" and err == 0.0:
            return Estimate(self.value + other.value)
        if method == "exact":
            method = "quadrature"
        return Estimate(self.value + other.value, err, method,
                        self.samples + other.samples, self.seed or other.seed)

    @property
    def rel_error(self) -> float:
        return self.error / abs(self.value) if self.value else math.inf if self.error else 0.0

    def as_dict(self) -> dict:
        return {"value": self.value, "error": self.error, "method": self.method,
                "samples": self.samples, "seed": self.seed}


# ---------------------------------------------------------------------------
# adaptive quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000
    endpoint_exponent: float = 0.0
    # power behaviour (b - t)^gamma at the right end; 0 means regular
    right_exponent: float = 0.0

    def __post_init__(self):
        if not (self.abs_tol > 0 or self.rel_tol > 0):
            raise InvalidArgument("need abs_tol > 0 or rel_tol > 0")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise InvalidArgument("tolerances must be non-negative")
        if self.max_subdivisions < 16:
            raise InvalidArgument("max_subdivisions must be at least 16")
        for g in (self.endpoint_exponent, self.right_exponent):
            if not g > -1.0:
                raise InvalidArgument(f"endpoint exponent must exceed -1, got {g}")


# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
GK_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss-7 weights aligned with GK_NODES (zero at Kronrod-only nodes)
G7_WEIGHTS = np.zeros(15)
G7_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])

_JACOBI_LOW, _JACOBI_HIGH = 10, 20
_GRADING = 0.25
_GRADING_LEVELS = 4


@lru_cache(maxsize=256)
def _jacobi_rule(n: int, gamma: float, left: bool):
    # weight (1 + x)^gamma (left) or (1 - x)^gamma (right) on [-1, 1]
    if left:
        x, w = roots_jacobi(n, 0.0, gamma)
    else:
        x, w = roots_jacobi(n, gamma, 0.0)
    return x, w


def _gk_panel(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    fx = np.asarray(f(mid + half * GK_NODES), dtype=float)
    k = half * float(GK_WEIGHTS @ fx)
    g = half * float(G7_WEIGHTS @ fx)
    return k, abs(k - g)


def _jacobi_panel(f, lo, hi, gamma, left):
    # integrates f = |t - end|^gamma * phi(t) with phi evaluated through f
    w_len = hi - lo
    out = []
    for n in (_JACOBI_LOW, _JACOBI_HIGH):
        x, w = _jacobi_rule(n, gamma, left)
        if left:
            dist = 0.5 * w_len * (x + 1.0)
            t = lo + dist
        else:
            dist = 0.5 * w_len * (1.0 - x)
            t = hi - dist
        phi = np.asarray(f(t), dtype=float) / dist ** gamma
        out.append((0.5 * w_len) ** (1.0 + gamma) * float(w @ phi))
    return out[1], abs(out[1] - out[0])


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                 spec: QuadratureSpec | None = None,
                 points: Sequence[float] = ()) -> Estimate:
    """Adaptive integral of a vectorised ``f`` over ``[a, b]``.

    Panels touching an endpoint with a non-zero exponent use a Gauss-Jacobi
    pair with the matching weight; the mesh is geometrically graded toward
    such endpoints before adaptivity starts. ``points`` lists interior
    breakpoints (kinks) that should start as panel edges.

    Raises :class:`ConvergenceFailure` (carrying the best estimate) when the
    tolerance is not met within ``spec.max_subdivisions`` panels.
    """
    spec = spec or QuadratureSpec()
    a, b = float(a), float(b)
    if not a < b:
        raise InvalidArgument(f"need a < b, got [{a}, {b}]")
    gl, gr = spec.endpoint_exponent, spec.right_exponent

    edges = {a, b}
    edges.update(float(p) for p in points if a < p < b)
    if gl < 0:
        edges.update(a + (b - a) * _GRADING ** k for k in range(1, _GRADING_LEVELS + 1))
    if gr < 0:
        edges.update(b - (b - a) * _GRADING ** k for k in range(1, _GRADING_LEVELS + 1))
    if gl != 0 and gr != 0:
        edges.add(0.5 * (a + b))
    edges = sorted(edges)

    def evaluate(lo, hi):
        if gl != 0 and lo == a:
            val, err = _jacobi_panel(f, lo, hi, gl, True)
        elif gr != 0 and hi == b:
            val, err = _jacobi_panel(f, lo, hi, gr, False)
        else:
            val, err = _gk_panel(f, lo, hi)
        if not (math.isfinite(val) and math.isfinite(err)):
            raise ConvergenceFailure(f"integrand not finite on [{lo!r}, {hi!r}]",
                                     Estimate(math.nan, math.inf, "quadrature"))
        return val, err

    heap = []
    total = 0.0
    total_err = 0.0
    frozen = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = evaluate(lo, hi)
        total += val
        total_err += err
        heapq.heappush(heap, (-err, lo, hi, val))
    n_panels = len(heap)

    while True:
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= tol or not heap:
            break
        if n_panels >= spec.max_subdivisions:
            raise ConvergenceFailure(
                f"tolerance {tol:.3g} not reached in {n_panels} panels "
                f"(error estimate {total_err:.3g})",
                Estimate(total, total_err, "quadrature"))
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi) or (hi - lo) <= 4e-16 * max(abs(lo), abs(hi)):
            # cannot split further in floating point
            frozen.append((-neg_err, val))
            continue
        total -= val
        total_err += neg_err
        for lo2, hi2 in ((lo, mid), (mid, hi)):
            v2, e2 = evaluate(lo2, hi2)
            total += v2
            total_err += e2
            heapq.heappush(heap, (-e2, lo2, hi2, v2))
        n_panels += 1

    # re-sum for a clean result free of running-sum drift
    total = math.fsum([item[3] for item in heap] + [v for _, v in frozen])
    total_err = math.fsum([-item[0] for item in heap] + [e for e, _ in frozen])
    tol = max(spec.abs_tol, spec.rel_tol * abs(total))
    if total_err > tol:
        raise ConvergenceFailure(
            f"tolerance {tol:.3g} unreachable in floating point (error {total_err:.3g})",
            Estimate(total, total_err, "quadrature"))
    return Estimate(total, total_err, "quadrature")


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class McSpec:
    samples: int = 200_000
    seed: int = 0
    chunks: int = 16

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidArgument("samples must be at least 1")
        if self.chunks < 1:
            raise InvalidArgument("chunks must be at least 1")
        object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)

    def chunk_sizes(self) -> list[int]:
        chunks = min(self.chunks, self.samples)
        size = -(-self.samples // chunks)
        sizes = [size] * (self.samples // size)
        if self.samples % size:
            sizes.append(self.samples % size)
        return sizes


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based generator for one chunk: Philox keyed by (seed, chunk)."""
    key = (int(seed) & _SEED_MASK) | ((int(chunk) & _SEED_MASK) << 64)
    return np.random.Generator(np.random.Philox(key=key))


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _chunk_stats(sampler, integrand, seed, index, size):
    rng = chunk_rng(seed, index)
    vals = np.asarray(integrand(sampler(rng, size)), dtype=float)
    if vals.shape != (size,):
        raise InvalidArgument(f"integrand returned shape {vals.shape}, expected ({size},)")
    mean = float(vals.mean())
    m2 = float(((vals - mean) ** 2).sum())
    return size, mean, m2


def mc_mean(sampler: Sampler, integrand: Callable[[np.ndarray], np.ndarray],
            spec: McSpec, workers: int = 1) -> Estimate:
    """Sample mean of ``integrand(sampler(rng, k))`` with its standard error.

    Chunks are independent Philox streams; their (count, mean, M2) summaries
    are merged in chunk order, so the result is bit-identical for any
    ``workers``.
    """
    if spec.samples < 1:
        raise InvalidArgument("zero samples requested")
    sizes = spec.chunk_sizes()
    jobs = [(i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(
                lambda job: _chunk_stats(sampler, integrand, spec.seed, *job), jobs))
    else:
        stats = [_chunk_stats(sampler, integrand, spec.seed, *job) for job in jobs]

    count, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in stats:
        tot = count + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * count * nb / tot
        count = tot
    err = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
    return Estimate(mean, err, "monte-carlo", samples=count, seed=spec.seed)


# ---------------------------------------------------------------------------
# limit extrapolation


@dataclass(frozen=True)
class LimitScanResult:
    """Scaled values on an alpha grid, their extrapolated limit and the target."""

    alphas: tuple
    scaled_values: tuple
    extrapolated: float
    target: float

    def __post_init__(self):
        if len(self.alphas) != len(self.scaled_values) or len(self.alphas) < 3:
            raise InvalidArgument("a limit scan needs at least three matching points")

    @property
    def rel_err(self) -> float:
        return abs(self.extrapolated - self.target) / abs(self.target)

    def as_dict(self) -> dict:
        return {"alphas": list(self.alphas), "scaled_values": list(self.scaled_values),
                "extrapolated": self.extrapolated, "target": self.target,
                "rel_err": self.rel_err}


def extrapolate_limit(points: Sequence[tuple[float, float]], end: int | None = None) -> float:
    """Intercept of the least-squares line through ``(alpha, value)`` pairs.

    The abscissa is ``alpha`` when the grid approaches 0 and ``1 - alpha``
    when it approaches 1 (``end`` picks explicitly; otherwise inferred).
    """
    pts = [(float(a), float(v)) for a, v in points]
    if len(pts) < 3:
        raise InvalidArgument("need at least three points to extrapolate")
    alphas = np.array([p[0] for p in pts])
    diffs = np.diff(alphas)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise InvalidArgument("alpha grid must be strictly monotone")
    if end is None:
        end = 0 if alphas.mean() < 0.5 else 1
    if end not in (0, 1):
        raise InvalidArgument(f"end must be 0 or 1, got {end!r}")
    x = alphas if end == 0 else 1.0 - alphas
    y = np.array([p[1] for p in pts])
    xm, ym = x.mean(), y.mean()
    slope = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    return float(ym - slope * xm)
