"""Fourier analysis of the centered window: coefficients, truncation error.

The window is piecewise cubic, so its Fourier coefficients have a closed
form.  Writing phi = 2*pi*l*p and omega = 2*pi*l*delta,

    c_l = (2 * sin(phi + omega/2) / (pi * l)) * h(omega),
    h(omega) = (6 / omega^3) * (2*sin(omega/2) - omega*cos(omega/2)),

which is evaluated through a power series for small omega (the direct form
cancels catastrophically there) and directly otherwise.  All trigonometric
arguments are reduced exactly in rational arithmetic before any float trig
runs, so large l costs no accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .mollify import CenteredMollifier, centered, make_outer, outer_min_n

__all__ = [
    "FourierTruncation", "TruncationResult", "JacksonReport",
    "coefficients", "truncation_sup", "jackson_trend", "dirichlet_kernel",
]

_TWO_PI = 2.0 * math.pi

# h(omega) = 1/2 - w^2/80 + w^4/8960 - w^6/1935360 + w^8/681246720 - ...
_H_SERIES = (
    (0, Fraction(1, 2)),
    (2, Fraction(-1, 80)),
    (4, Fraction(1, 8960)),
    (6, Fraction(-1, 1935360)),
    (8, Fraction(1, 681246720)),
    (10, Fraction(-1, 354248294400)),
)
_H_SERIES_CUT = 0.8


def _h_factor(omega: float, sin_half: float, cos_half: float) -> float:
    if abs(omega) <= _H_SERIES_CUT:
        w2 = omega * omega
        acc = 0.0
        for power, coeff in reversed(_H_SERIES):
            acc = acc * w2 + float(coeff)
        return acc
    return 6.0 * (2.0 * sin_half - omega * cos_half) / omega ** 3


def _coefficient_table(G: CenteredMollifier, L: int) -> dict:
    """Exact-phase closed-form c_l for l = 0..L."""
    F = G.base
    center = F.p + F.delta / 2          # phase center p + delta/2
    a, b = center.numerator, center.denominator
    c, d = F.delta.numerator, F.delta.denominator
    delta_f = float(F.delta)
    coeffs = {0: 0.0}
    for l in range(1, L + 1):
        theta = _TWO_PI * ((l * a) % b) / b
        half_red = math.pi * ((l * c) % (2 * d)) / d
        omega = _TWO_PI * l * delta_f
        h = _h_factor(omega, math.sin(half_red), math.cos(half_red))
        coeffs[l] = F.peak * 2.0 * math.sin(theta) / (math.pi * l) * h
    return coeffs


@dataclass(frozen=True)
class FourierTruncation:
    """Real cosine coefficients of the centered window up to |l| <= cutoff.

    coeffs maps l >= 0 to c_l; the window is even so c_{-l} = c_l and every
    coefficient is real.  c_0 is identically zero (the source is centered).
    """

    cutoff: int
    coeffs: dict
    source: CenteredMollifier

    def __post_init__(self) -> None:
        if self.coeffs.get(0, 0.0) != 0.0:
            raise DomainError("centered source must have zero mean mode")

    def coeff(self, l: int) -> float:
        return self.coeffs[abs(l)]

    def parseval_sum(self) -> float:
        """Sum of c_l^2 over |l| <= cutoff."""
        return 2.0 * sum(v * v for l, v in self.coeffs.items() if l > 0)

    def reconstruct_grid(self, grid_size: int) -> np.ndarray:
        """Partial sum sampled at j/grid_size, j = 0..grid_size-1, via FFT."""
        if grid_size < 2 * self.cutoff + 1:
            raise DomainError("grid must resolve the highest mode")
        spec = np.zeros(grid_size // 2 + 1, dtype=np.complex128)
        for l, v in self.coeffs.items():
            spec[l] = v * grid_size
        return np.fft.irfft(spec, grid_size)

    def export_text(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            for l in sorted(self.coeffs):
                fh.write(f"{l} {self.coeffs[l]:.17g}\n")


def coefficients(G: CenteredMollifier, L: int) -> FourierTruncation:
    if L < 1:
        raise DomainError(f"cutoff must be >= 1, got {L}")
    return FourierTruncation(cutoff=L, coeffs=_coefficient_table(G, L),
                             source=G)


@dataclass(frozen=True)
class TruncationResult:
    sup: float
    grid_size: int


def truncation_sup(G: CenteredMollifier, L: int,
                   grid_size: int | None = None) -> TruncationResult:
    """Sup over a uniform grid of |G - partial Fourier sum up to L|."""
    if L < 0:
        raise DomainError(f"cutoff must be >= 0, got {L}")
    if grid_size is None:
        grid_size = max(8 * L, 4096)
    if grid_size < max(8 * L, 2):
        raise DomainError(
            f"grid_size {grid_size} cannot resolve cutoff {L} (need >= {8 * L})")
    ts = np.arange(grid_size, dtype=np.float64) / grid_size
    gv = G.eval_array(ts)
    if L == 0:
        pv = np.zeros_like(gv)
    else:
        pv = coefficients(G, L).reconstruct_grid(grid_size)
    return TruncationResult(sup=float(np.abs(gv - pv).max()),
                            grid_size=grid_size)


@dataclass(frozen=True)
class JacksonReport:
    s: Fraction
    n_list: tuple
    cutoffs: tuple
    sups: tuple
    envelopes: tuple
    slope: float
    residuals: tuple
    passed: bool
    sups_non_decreasing: bool


def jackson_trend(s, n_list, cutoff_rule=None) -> JacksonReport:
    """Fit log(truncation sup) against log(N^2 log L / L).

    The envelope is the derivative-bound-times-log(L)/L shape; the check
    passes when the fitted slope stays below 1.15, i.e. the measured error
    decays at least as fast as the envelope.
    """
    ns = tuple(int(n) for n in n_list)
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError(
            f"need at least 3 strictly increasing N values, got {list(ns)}")
    if cutoff_rule is None:
        cutoff_rule = lambda n: n ** 3
    sups, cutoffs, envelopes = [], [], []
    for n in ns:
        L = int(cutoff_rule(n))
        if L < 1:
            raise DomainError(f"cutoff rule gave {L} for N = {n}")
        G = centered(make_outer(s, n))
        sups.append(truncation_sup(G, L).sup)
        cutoffs.append(L)
        envelopes.append(n * n * math.log(L) / L)
    usable = [(math.log(e), math.log(v))
              for e, v in zip(envelopes, sups) if v > 0.0]
    if len(usable) < 3:
        raise DomainError(
            f"only {len(usable)} usable points for the fit; need 3")
    xs = np.array([u[0] for u in usable])
    ys = np.array([u[1] for u in usable])
    xc = xs - xs.mean()
    slope = float(np.dot(xc, ys - ys.mean()) / np.dot(xc, xc))
    resid = ys - (ys.mean() + slope * xc)
    non_decreasing = all(b >= a for a, b in zip(sups, sups[1:]))
    return JacksonReport(
        s=Fraction(s), n_list=ns, cutoffs=tuple(cutoffs), sups=tuple(sups),
        envelopes=tuple(envelopes), slope=slope,
        residuals=tuple(float(r) for r in resid),
        passed=slope <= 1.15, sups_non_decreasing=non_decreasing)


def dirichlet_kernel(M: int, t):
    """sin(2 pi (M + 1/2) t) / sin(pi t) with the integer limit 2M + 1."""
    if M < 0:
        raise DomainError(f"order must be >= 0, got {M}")
    if isinstance(t, np.ndarray):
        r = t - np.round(t)
        limit = float(2 * M + 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.sin(_TWO_PI * (M + 0.5) * r) / np.sin(math.pi * r)
        return np.where(r == 0.0, limit, vals)
    r = math.remainder(float(t), 1.0)
    if r == 0.0:
        return float(2 * M + 1)
    return math.sin(_TWO_PI * (M + 0.5) * r) / math.sin(math.pi * r)
