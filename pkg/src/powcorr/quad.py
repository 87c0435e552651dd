"""Quadrature engines for the proof probes.

Three tools live here: composite Gauss-Legendre with a doubling
certification, a safeguarded Newton root finder for strictly increasing
maps, and a Levin collocation integrator for exponentials exp(2*pi*i*l*
(x^n - x^m)) whose cycle count makes node-per-oscillation quadrature
impossible.  Phases are only ever reduced modulo one at dyadic panel
endpoints, in exact rational arithmetic, so no precision is lost to the
size of x^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .dyadic import DyadicRational, as_dyadic
from .errors import DomainError, NumericalError

__all__ = [
    "QuadConfig", "gauss_rule", "integrate_fixed", "integrate_adaptive",
    "monotone_root", "oscillatory_power_integral", "power_diff",
]


@dataclass(frozen=True)
class QuadConfig:
    """Tuning knobs shared by every quadrature-backed probe."""

    rel_tol: float = 1e-8
    nodes_per_osc: float = 8.0
    min_nodes: int = 32
    max_nodes: int = 500_000
    nodes_per_piece: int = 12
    direct_osc_limit: float = 64.0
    levin_nodes: int = 24

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.nodes_per_osc <= 0:
            raise DomainError("tolerances and node densities must be positive")
        if self.min_nodes < 2 or self.levin_nodes < 8:
            raise DomainError("node counts too small to integrate anything")


DEFAULT_QUAD = QuadConfig()


@lru_cache(maxsize=256)
def gauss_rule(nodes: int):
    """Cached Gauss-Legendre rule on [-1, 1]."""
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    xs.setflags(write=False)
    ws.setflags(write=False)
    return xs, ws


def integrate_fixed(f, a: float, b: float, nodes: int, panels: int = 1) -> float:
    """Composite Gauss-Legendre with `nodes` points per panel."""
    if not b > a:
        return 0.0
    xs, ws = gauss_rule(nodes)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        total += half * float(np.dot(ws, np.asarray(f(mid + half * xs))))
    return total


def integrate_adaptive(f, a: float, b: float, est_osc: float,
                       cfg: QuadConfig = DEFAULT_QUAD) -> float:
    """Oscillation-scaled composite rule, accepted by Richardson doubling."""
    base = max(cfg.min_nodes, int(math.ceil(cfg.nodes_per_osc * max(est_osc, 1.0))))
    panels = max(1, base // 16)
    nodes = 16
    coarse = integrate_fixed(f, a, b, nodes, panels)
    while True:
        panels2 = panels * 2
        if panels2 * nodes > cfg.max_nodes:
            raise NumericalError(
                "quadrature did not converge within the node budget",
                coarse=coarse, fine=coarse)
        fine = integrate_fixed(f, a, b, nodes, panels2)
        if abs(fine - coarse) <= cfg.rel_tol * (abs(fine) + 1e-15):
            return fine
        coarse, panels = fine, panels2


def monotone_root(g, dg, target: float, lo: float, hi: float,
                  max_iter: int = 80, x0: float | None = None) -> float:
    """Root of g(x) = target on [lo, hi] for strictly increasing g.

    Newton iteration with a bisection safeguard; returns a float root
    accurate to a few ulps.  An optional starting point skips the slow
    bracket-middle warmup when a good estimate is already known.
    """
    glo = g(lo) - target
    ghi = g(hi) - target
    if glo > 0 or ghi < 0:
        raise DomainError("root not bracketed")
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    x = 0.5 * (lo + hi) if x0 is None else min(max(x0, lo), hi)
    for _ in range(max_iter):
        val = g(x) - target
        if val > 0:
            hi = x
        elif val < 0:
            lo = x
        else:
            return x
        d = dg(x)
        step = val / d if d > 0 else math.inf
        nxt = x - step
        if abs(nxt - x) <= 4.0 * math.ulp(x):
            return nxt if lo < nxt < hi else x
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        x = nxt
    return x


# ---------------------------------------------------------------------------
# Levin collocation for exp(2 pi i l (x^n - x^m))
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _cheb(n: int):
    """Chebyshev-Lobatto points (descending) and differentiation matrix."""
    if n == 0:
        return np.zeros((1, 1)), np.ones(1)
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    x.setflags(write=False)
    return D, x


def power_diff(x, p: float, n: int):
    """x^n - p^n evaluated without cancellation for x near p (x, p > 0)."""
    return p ** n * np.expm1(n * np.log1p((np.asarray(x, dtype=float) - p) / p))


def _exact_phase(l: int, n: int, m: int, p: DyadicRational) -> float:
    """Fractional part of l*(p^n - p^m) for dyadic p, reduced exactly."""
    q = p.as_fraction()
    return float((l * (q ** n - q ** m)) % 1)


def _phase_delta(l: int, n: int, m: int, xs, p: float):
    return l * (power_diff(xs, p, n) - power_diff(xs, p, m))


def _panel_direct(l, n, m, p: DyadicRational, q: DyadicRational,
                  osc: float, cfg: QuadConfig, refine: int) -> complex:
    pf, qf = float(p), float(q)
    nodes = int(math.ceil(cfg.nodes_per_osc * max(osc, 1.0))) + 16
    nodes = min(nodes * refine, 8000)
    xs, ws = gauss_rule(nodes)
    half = 0.5 * (qf - pf)
    mid = 0.5 * (qf + pf)
    pts = mid + half * xs
    phase = _exact_phase(l, n, m, p) + _phase_delta(l, n, m, pts, pf)
    vals = np.exp(2j * np.pi * phase)
    return half * complex(np.dot(ws, vals))


def _panel_levin(l, n, m, p: DyadicRational, q: DyadicRational,
                 nodes: int) -> complex:
    pf, qf = float(p), float(q)
    D, t = _cheb(nodes - 1)
    half = 0.5 * (qf - pf)
    mid = 0.5 * (qf + pf)
    xs = mid + half * t          # xs[0] = q, xs[-1] = p
    dphi = l * (n * xs ** (n - 1) - m * xs ** (m - 1))
    M = D / half + 2j * np.pi * np.diag(dphi)
    try:
        u = np.linalg.solve(M, np.ones(nodes, dtype=complex))
    except np.linalg.LinAlgError:
        u, *_ = np.linalg.lstsq(M, np.ones(nodes, dtype=complex), rcond=None)
    e_q = np.exp(2j * np.pi * _exact_phase(l, n, m, q))
    e_p = np.exp(2j * np.pi * _exact_phase(l, n, m, p))
    return u[0] * e_q - u[-1] * e_p


def _snap_between(x: float, lo: DyadicRational, hi: DyadicRational,
                  grid_bits: int = 40) -> DyadicRational:
    cand = DyadicRational(int(round(x * (1 << grid_bits))), grid_bits)
    if not lo < cand < hi:
        cand = lo + DyadicRational(1, 1) * (hi - lo)  # midpoint fallback
    return cand


def _power_panels(l: int, n: int, m: int, a: DyadicRational,
                  b: DyadicRational) -> list:
    """Panel edges with at most a doubling of the phase speed per panel."""
    ratio = 2.0 ** (1.0 / max(n - 1, 1))
    edges = [a]
    x = float(a) * ratio
    while x * ratio < float(b):
        edges.append(_snap_between(x, edges[-1], b))
        x *= ratio
    edges.append(b)
    return edges


def _osc_count(l, n, m, p: DyadicRational, q: DyadicRational) -> float:
    qp, pp = q.as_fraction(), p.as_fraction()
    return float(l * ((qp ** n - qp ** m) - (pp ** n - pp ** m)))


def oscillatory_power_integral(l: int, n: int, m: int, a, b,
                               cfg: QuadConfig = DEFAULT_QUAD) -> complex:
    """integral over [a, b] of exp(2*pi*i*l*(x^n - x^m)) dx.

    Low-cycle panels use direct Gauss-Legendre with the phase anchored
    exactly at the panel's left edge; high-cycle panels use Levin
    collocation, whose cost is independent of the cycle count.  The whole
    integral is recomputed at a finer setting and must agree to rel_tol.
    """
    a, b = as_dyadic(a), as_dyadic(b)
    if not (DyadicRational(1, 0) < a < b):
        raise DomainError(f"need 1 < a < b, got a={a}, b={b}")
    if not (isinstance(l, int) and isinstance(n, int) and isinstance(m, int)):
        raise DomainError("l, n, m must be integers")
    if not (n > m >= 1 and l >= 1):
        raise DomainError(f"need n > m >= 1 and l >= 1, got l={l}, n={n}, m={m}")
    edges = _power_panels(l, n, m, a, b)

    def run(refine: int) -> complex:
        total = 0.0 + 0.0j
        for p, q in zip(edges[:-1], edges[1:]):
            osc = _osc_count(l, n, m, p, q)
            if osc <= cfg.direct_osc_limit:
                total += _panel_direct(l, n, m, p, q, osc, cfg, refine)
            else:
                total += _panel_levin(l, n, m, p, q,
                                      cfg.levin_nodes + 12 * (refine - 1))
        return total

    coarse = run(1)
    fine = run(2)
    if abs(fine - coarse) > cfg.rel_tol * (abs(fine) + 1e-13):
        raise NumericalError(
            "oscillatory quadrature failed its doubling check",
            coarse=abs(coarse), fine=abs(fine))
    return fine
