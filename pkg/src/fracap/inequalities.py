"""Verification of the sharp Sobolev / isocapacitary / isoperimetric chain.

Every check returns a :class:`DeficitReport` with both sides, their ratio and
slack. A check passes when lhs <= rhs * (1 + tol), where tol is the base
tolerance widened by the relative error of the estimates involved (three
standard errors for Monte Carlo).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .besov import SampledFunction, besov_seminorm, levels, lp_norm, cells_to_shape
from .capacity import capacity_lower, capacity_upper, sharp_kappa
from .constants import AlphaContext, unit_ball_volume
from .errors import FracapError, InvalidArgument
from .geometry import Ball, Shape, volume
from .numerics import Estimate
from .perimeter import frac_perimeter

IDS = ("eq1", "eq2", "eq3", "eq4", "sobolev", "isocapacitary", "isoperimetric")
BASE_TOL = 1e-6


@dataclass(frozen=True)
class DeficitReport:
    inequality_id: str
    lhs: float
    rhs: float
    tol: float
    floor: float | None = None

    def __post_init__(self):
        if self.inequality_id not in IDS:
            raise InvalidArgument(f"unknown inequality id {self.inequality_id!r}")

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def status(self) -> str:
        return "pass" if self.lhs <= self.rhs * (1.0 + self.tol) else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        out = {"id": self.inequality_id, "lhs": self.lhs, "rhs": self.rhs,
               "ratio": self.ratio, "slack": self.slack, "tol": self.tol,
               "status": self.status}
        if self.floor is not None:
            out["floor"] = self.floor
        return out


def _widen(*ests: Estimate) -> float:
    tol = BASE_TOL
    for e in ests:
        k = 3.0 if e.method == "monte-carlo" else 1.0
        tol += k * e.rel_error if e.value else 0.0
    return tol


def _kappa(ctx, kappa_value):
    return sharp_kappa(ctx) if kappa_value is None else float(kappa_value)


# ---------------------------------------------------------------------------
# functional forms


def verify_sobolev(f: SampledFunction, ctx: AlphaContext, kappa_value: float | None = None,
                   seminorm: Estimate | None = None) -> DeficitReport:
    """||f||_q <= kappa ||f||, q = n/(n - alpha)."""
    k = _kappa(ctx, kappa_value)
    b = seminorm or besov_seminorm(f, ctx)
    return DeficitReport("sobolev", lp_norm(f, ctx.q), k * b.value, _widen(b))


def capacity_integral(f: SampledFunction, ctx: AlphaContext, family: str = "dilates",
                      **kwargs) -> Estimate:
    """∫_0^∞ cap({|f| >= t})^q d(t^q), summed exactly over the levels of |f|."""
    if f.n != ctx.n:
        raise InvalidArgument(f"function dimension {f.n} does not match n={ctx.n}")
    q = ctx.q
    v = levels(f)
    if v.size == 0:
        return Estimate(0.0)
    a = np.abs(f.values)
    steps = np.diff(np.concatenate([[0.0], v ** q]))
    terms, errs = [], []
    for t, dt in zip(v, steps):
        cap = capacity_upper(cells_to_shape(f, a >= t), ctx, family, **kwargs)
        terms.append(cap.value ** q * dt)
        errs.append(q * cap.value ** (q - 1) * cap.error * dt)
    return Estimate(math.fsum(terms), math.fsum(errs), "quadrature")


def _root(est: Estimate, q: float) -> Estimate:
    if est.value == 0:
        return Estimate(0.0)
    val = est.value ** (1.0 / q)
    return Estimate(val, val * est.rel_error / q, "quadrature" if est.method == "exact"
                    else est.method, est.samples, est.seed)


def verify_cap_strong_sobolev(f: SampledFunction, ctx: AlphaContext,
                              kappa_value: float | None = None,
                              integral: Estimate | None = None) -> DeficitReport:
    """||f||_q <= kappa (∫ cap(O_t)^q d(t^q))^(1/q)."""
    k = _kappa(ctx, kappa_value)
    j = _root(integral or capacity_integral(f, ctx), ctx.q)
    return DeficitReport("eq1", lp_norm(f, ctx.q), k * j.value, _widen(j))


def verify_truncation(f: SampledFunction, ctx: AlphaContext,
                      integral: Estimate | None = None,
                      seminorm: Estimate | None = None) -> DeficitReport:
    """(∫ cap(O_t)^q d(t^q))^(1/q) <= ||f||."""
    j = _root(integral or capacity_integral(f, ctx), ctx.q)
    b = seminorm or besov_seminorm(f, ctx)
    return DeficitReport("eq3", j.value, b.value, _widen(j, b))


def verify_chain(f: SampledFunction, ctx: AlphaContext,
                 kappa_value: float | None = None) -> list[DeficitReport]:
    """eq1, eq3 and the Sobolev inequality they compose into, on one f."""
    k = _kappa(ctx, kappa_value)
    integral = capacity_integral(f, ctx)
    b = besov_seminorm(f, ctx)
    r1 = verify_cap_strong_sobolev(f, ctx, k, integral)
    r3 = verify_truncation(f, ctx, integral, b)
    rs = verify_sobolev(f, ctx, k, b)
    if r1.passed and r3.passed and not rs.passed:
        raise FracapError("eq1 and eq3 pass but their composition does not")
    return [r1, r3, rs]


# ---------------------------------------------------------------------------
# geometric forms


def verify_isoperimetric(E: Shape, ctx: AlphaContext, kappa_value: float | None = None,
                         **kwargs) -> DeficitReport:
    """V(E)^((n-alpha)/n) <= 2 kappa P_alpha(E)."""
    k = _kappa(ctx, kappa_value)
    v = volume(E)
    p = frac_perimeter(E, ctx, **kwargs)
    return DeficitReport("isoperimetric", v.value ** ctx.volume_exponent, 2.0 * k * p.value,
                         _widen(p, v))


def verify_isocapacitary(O: Shape, ctx: AlphaContext, kappa_value: float | None = None,
                         inequality_id: str = "eq2", **kwargs) -> DeficitReport:
    """V(O)^((n-alpha)/n) <= kappa cap(O), with cap from the containing family."""
    if inequality_id not in ("eq2", "isocapacitary"):
        raise InvalidArgument("inequality_id must be eq2 or isocapacitary")
    k = _kappa(ctx, kappa_value)
    v = volume(O)
    cap = capacity_upper(O, ctx, **kwargs)
    floor = k * capacity_lower(O, ctx, k)
    return DeficitReport(inequality_id, v.value ** ctx.volume_exponent, k * cap.value,
                         _widen(cap, v), floor)


def verify_cap_perimeter(O: Shape, ctx: AlphaContext, family: str = "dilates",
                         **kwargs) -> DeficitReport:
    """cap(closure of O) <= 2 P_alpha(O)."""
    cap = capacity_upper(O, ctx, family, **kwargs)
    p = frac_perimeter(O, ctx, **kwargs)
    return DeficitReport("eq4", cap.value, 2.0 * p.value, _widen(cap, p))


def sharpness_gap(ctx: AlphaContext, **kwargs) -> float:
    """|1 - V(B)^((n-alpha)/n) / (kappa cap(B))|; zero when balls are extremal."""
    ball = Ball.unit(ctx.n)
    cap = capacity_upper(ball, ctx, **kwargs).value
    return abs(1.0 - unit_ball_volume(ctx.n) ** ctx.volume_exponent / (sharp_kappa(ctx) * cap))


def verify_all_function(f: SampledFunction, ctx: AlphaContext) -> list[DeficitReport]:
    return verify_chain(f, ctx)


def verify_all_shape(E: Shape, ctx: AlphaContext) -> list[DeficitReport]:
    return [verify_isocapacitary(E, ctx), verify_cap_perimeter(E, ctx),
            verify_isoperimetric(E, ctx)]
