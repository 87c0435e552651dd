"""Plateau-and-ramp window functions sandwiching the indicator of [-s/N, s/N].

Two flavors share one shape: value 1 on a plateau [-p, p], a cubic
smoothstep ramp of width delta down to 0, zero elsewhere, evenly reflected
and 1-periodic.  The outer flavor puts the plateau edge at s/N (so it
dominates the indicator), the inner one ends its ramp at s/N (so the
indicator dominates it).  All widths are kept as exact fractions, which
makes integrals closed-form identities rather than quadrature results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import DomainError

__all__ = [
    "Mollifier", "CenteredMollifier", "HypothesisCheck", "HypothesisReport",
    "make_outer", "make_inner", "centered", "verify_hypotheses",
    "outer_min_n", "inner_min_n", "window_fraction",
]


def window_fraction(s) -> Fraction:
    """Exact window parameter; floats convert by their exact binary value."""
    v = Fraction(s)
    if v <= 0:
        raise DomainError(f"window parameter s must be positive, got {s}")
    return v


def outer_min_n(s) -> int:
    """Least N whose default outer support s/N + 1/N^2 stays within 1/2."""
    s = window_fraction(s)
    n = max(1, math.ceil(2 * s))
    while s / n + Fraction(1, n * n) > Fraction(1, 2):
        n += 1
    return n


def inner_min_n(s) -> int:
    """Least N keeping the inner plateau s/N - 1/N^2 positive and the
    support edge s/N within 1/2."""
    s = window_fraction(s)
    return max(math.floor(1 / s) + 1, math.ceil(2 * s))


@dataclass(frozen=True)
class Mollifier:
    """Even, 1-periodic plateau/ramp window.

    p is the plateau half-width, delta the ramp width; the support is
    contained in the integers plus [-(p + delta), p + delta].  peak is the
    plateau value, 1 for the genuine families (other values exist only so
    tests can plant defects).
    """

    s: Fraction
    N: int
    delta: Fraction
    flavor: str
    p: Fraction
    peak: float = 1.0

    def __post_init__(self) -> None:
        if self.flavor not in ("inner", "outer"):
            raise DomainError(f"unknown flavor {self.flavor!r}")
        if self.delta <= 0:
            raise DomainError("ramp width must be positive")
        if self.p < 0:
            raise DomainError("plateau half-width must be non-negative")
        if self.p + self.delta > Fraction(1, 2):
            # beyond 1/2 the periodized ramps fold onto each other and the
            # closed-form moments stop being the true period integrals
            raise DomainError(
                f"support edge p + delta = {self.p + self.delta} exceeds 1/2")

    # exact quantities ---------------------------------------------------

    @property
    def edge(self) -> Fraction:
        """Half-width of the support around each integer."""
        return self.p + self.delta

    @property
    def integral(self) -> Fraction:
        """Exact integral over one period: peak * (2p + delta)."""
        return Fraction(self.peak) * (2 * self.p + self.delta)

    @property
    def integral_sq(self) -> Fraction:
        """Exact integral of the square: each ramp contributes 13/35 * delta."""
        return Fraction(self.peak) ** 2 * (
            2 * self.p + 2 * Fraction(13, 35) * self.delta)

    @property
    def deriv_sup(self) -> Fraction:
        """Exact sup of |derivative|: peak * (3/2) / delta at ramp midpoints."""
        return Fraction(self.peak) * Fraction(3, 2) / self.delta

    # float mirrors used by the evaluators -------------------------------

    @cached_property
    def p_f(self) -> float:
        return float(self.p)

    @cached_property
    def edge_f(self) -> float:
        return float(self.edge)

    @cached_property
    def delta_f(self) -> float:
        return float(self.delta)

    # evaluation ----------------------------------------------------------

    def eval(self, t: float) -> float:
        """Value at t; reduction uses IEEE remainder, which is exact."""
        u = abs(math.remainder(t, 1.0))
        if u <= self.p_f:
            return self.peak
        if u >= self.edge_f:
            return 0.0
        v = (u - self.p_f) / self.delta_f
        v = 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)
        return self.peak * (1.0 - v * v * (3.0 - 2.0 * v))

    def eval_deriv(self, t: float) -> float:
        r = math.remainder(t, 1.0)
        u = abs(r)
        if u <= self.p_f or u >= self.edge_f:
            return 0.0
        v = (u - self.p_f) / self.delta_f
        v = 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)
        slope = -self.peak * 6.0 * v * (1.0 - v) / self.delta_f
        return slope if r >= 0.0 else -slope

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        u = np.abs(ts - np.round(ts))
        v = np.clip((u - self.p_f) / self.delta_f, 0.0, 1.0)
        vals = self.peak * (1.0 - v * v * (3.0 - 2.0 * v))
        vals = np.where(u <= self.p_f, self.peak, vals)
        return np.where(u >= self.edge_f, 0.0, vals)


@dataclass(frozen=True)
class CenteredMollifier:
    """base minus its exact mean; integrates to zero by construction."""

    base: Mollifier
    mean: Fraction

    @property
    def integral(self) -> Fraction:
        return self.base.integral - self.mean

    @property
    def integral_sq(self) -> Fraction:
        """Exact integral of the square of the centered function."""
        return self.base.integral_sq - self.mean ** 2

    @cached_property
    def mean_f(self) -> float:
        return float(self.mean)

    def eval(self, t: float) -> float:
        return self.base.eval(t) - self.mean_f

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        return self.base.eval_array(ts) - self.mean_f

    @property
    def sup_abs(self) -> float:
        """max(|peak - mean|, mean) over one period."""
        return max(abs(self.base.peak - self.mean_f), self.mean_f)


def centered(F: Mollifier) -> CenteredMollifier:
    return CenteredMollifier(base=F, mean=F.integral)


def _resolve_delta(s: Fraction, N: int, delta) -> Fraction:
    if delta is None:
        return Fraction(1, N * N)
    d = Fraction(delta)
    if d <= 0:
        raise DomainError("ramp width must be positive")
    return d


def make_outer(s, N: int, delta=None) -> Mollifier:
    """Window dominating the indicator: plateau out to s/N, ramp beyond."""
    s = window_fraction(s)
    needed = outer_min_n(s)
    if N < needed:
        raise DomainError(
            f"outer window needs N >= {needed} for s = {s} "
            f"(ramp must fit inside the 2s/N support cap), got N = {N}")
    d = _resolve_delta(s, N, delta)
    if d > s / N:
        raise DomainError(
            f"ramp width {d} exceeds the plateau half-width {s}/{N}")
    return Mollifier(s=s, N=N, delta=d, flavor="outer", p=s / N)


def make_inner(s, N: int, delta=None) -> Mollifier:
    """Window dominated by the indicator: ramp ends exactly at s/N."""
    s = window_fraction(s)
    needed = inner_min_n(s)
    if N < needed:
        raise DomainError(
            f"inner window needs N >= {needed} for s = {s} "
            f"(plateau s/N - delta must stay positive), got N = {N}")
    d = _resolve_delta(s, N, delta)
    if d >= s / N:
        raise DomainError(
            f"ramp width {d} leaves no inner plateau for s/N = {s}/{N}")
    return Mollifier(s=s, N=N, delta=d, flavor="inner", p=s / N - d)


# ---- hypothesis verifier -------------------------------------------------

@dataclass(frozen=True)
class HypothesisCheck:
    index: int
    name: str
    passed: bool
    witness: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class HypothesisReport:
    checks: tuple

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c for c in self.checks if not c.passed]


def _probe_points(F: Mollifier, count: int, seed: int) -> np.ndarray:
    """Grid plus ramp-focused points, all on a coarse dyadic lattice.

    The lattice (multiples of 2^-45) keeps t+1 and -t exact in binary64, so
    the periodicity and evenness checks can demand bit equality.
    """
    rng = np.random.default_rng(seed)
    grid = rng.integers(0, 1 << 45, size=count).astype(np.float64) / (1 << 45)
    ramp = np.linspace(float(F.p), float(F.edge), 257)
    near = np.concatenate([ramp, -ramp, 1.0 + ramp])
    snapped = np.round(near * (1 << 45)) / (1 << 45)
    return np.concatenate([grid, snapped])


def verify_hypotheses(F: Mollifier, s=None, N: int | None = None,
                      grid_points: int = 4096, seed: int = 2026) -> HypothesisReport:
    """Check the six window hypotheses; failures carry a witness point."""
    s = F.s if s is None else window_fraction(s)
    N = F.N if N is None else N
    ts = _probe_points(F, grid_points, seed)
    checks = []

    bad = next((t for t in ts if F.eval(t) != F.eval(t + 1.0)
                or F.eval(t) != F.eval(t - 1.0)), None)
    checks.append(HypothesisCheck(
        1, "periodicity F(t+1) = F(t)", bad is None, bad,
        "bit-exact on a dyadic lattice"))

    bad = next((t for t in ts if F.eval(t) != F.eval(-t)), None)
    checks.append(HypothesisCheck(
        2, "evenness F(-t) = F(t)", bad is None, bad,
        "bit-exact on a dyadic lattice"))

    target = 2 * s / N
    closed = Fraction(F.peak) * (2 * F.p + F.delta)
    ok3 = (F.integral == closed) and abs(F.integral - target) <= Fraction(1, N * N)
    checks.append(HypothesisCheck(
        3, "integral = 2s/N + O(1/N^2)", ok3, None,
        f"exact integral {F.integral}, target 2s/N = {target}"))

    vals = F.eval_array(ts)
    idx = np.nonzero((vals < 0.0) | (vals > 1.0))[0]
    witness = float(ts[idx[0]]) if len(idx) else None
    checks.append(HypothesisCheck(
        4, "0 <= F <= 1", len(idx) == 0, witness,
        f"max value {vals.max()}, min value {vals.min()}"))

    bound = 1.5 / float(F.delta)
    derivs = np.array([F.eval_deriv(t) for t in ts])
    sup = float(np.abs(derivs).max())
    mid = float(F.p) + 0.5 * float(F.delta)
    sup = max(sup, abs(F.eval_deriv(mid)))
    ok5 = sup <= bound * (1.0 + 1e-12)
    checks.append(HypothesisCheck(
        5, "sup |F'| <= (3/2)/delta", ok5, None if ok5 else mid,
        f"measured sup {sup}, bound {bound}"))

    support_cap = F.edge <= 2 * s / N
    u = np.abs(ts - np.round(ts))
    outside = ts[u > F.edge_f]
    nonzero = outside[F.eval_array(outside) != 0.0]
    ok6 = support_cap and len(nonzero) == 0
    checks.append(HypothesisCheck(
        6, "support within [-2s/N, 2s/N] + Z", ok6,
        float(nonzero[0]) if len(nonzero) else None,
        f"support half-width {F.edge}, cap {2 * s / N}"))

    return HypothesisReport(checks=tuple(checks))
