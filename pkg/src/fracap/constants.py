"""Geometric constants: unit-ball volumes, the angular constant, the sharp
Sobolev constant and the far-field kernel mass."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgument

MAX_DIMENSION = 16


@dataclass(frozen=True)
class AlphaContext:
    """Dimension ``n`` and fractional order ``alpha`` shared by all kernels."""

    n: int
    alpha: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise InvalidArgument(f"dimension must be an integer, got {self.n!r}")
        if not 1 <= self.n <= MAX_DIMENSION:
            raise InvalidArgument(f"dimension must lie in [1, {MAX_DIMENSION}], got {self.n}")
        a = float(self.alpha)
        if not (0.0 < a < 1.0):
            raise InvalidArgument(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", a)

    @property
    def q(self) -> float:
        """Critical Lebesgue exponent n/(n - alpha)."""
        return self.n / (self.n - self.alpha)

    @property
    def volume_exponent(self) -> float:
        """(n - alpha)/n, the power of volume matched against perimeter."""
        return (self.n - self.alpha) / self.n


def _check_dim(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidArgument(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, pi^(n/2) / Gamma(n/2 + 1)."""
    n = _check_dim(n)
    return math.pi ** (0.5 * n) / math.gamma(0.5 * n + 1.0)


def unit_sphere_area(n: int) -> float:
    """Surface measure of S^{n-1}; counting measure (= 2) for n = 1."""
    n = _check_dim(n)
    return n * unit_ball_volume(n)


def tau(n: int) -> float:
    """Integral of |cos theta| over S^{n-1}.

    Equal to 2 * omega_{n-1}; for n = 1 the sphere is the two-point set and
    the value is 2.
    """
    n = _check_dim(n)
    if n == 1:
        return 2.0
    return 2.0 * unit_ball_volume(n - 1)


def kappa(ctx: AlphaContext, p_ball: float) -> float:
    """Sharp constant omega_n^((n-alpha)/n) / (2 P_alpha(B^n)).

    ``p_ball`` is an estimate of the fractional perimeter of the unit ball,
    normally produced by :func:`fracap.perimeter.ball_perimeter`.
    """
    if not (p_ball > 0.0) or not math.isfinite(p_ball):
        raise InvalidArgument(f"p_ball must be positive and finite, got {p_ball!r}")
    return unit_ball_volume(ctx.n) ** ctx.volume_exponent / (2.0 * p_ball)


def kernel_tail(ctx: AlphaContext, radius: float) -> float:
    """Exact mass of |h|^(-n-alpha) outside the ball of the given radius."""
    if not (radius > 0.0):
        raise InvalidArgument(f"radius must be positive, got {radius!r}")
    return unit_sphere_area(ctx.n) * radius ** (-ctx.alpha) / ctx.alpha
