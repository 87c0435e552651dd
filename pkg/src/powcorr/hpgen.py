"""Certified generation of the fractional parts {xi * x^n}, n = 1..N.

Two routes produce a UnitSample:

* exact_frac_powers: exact big-integer arithmetic, intended for moderate N;
  the only error in the stored points is binary64 output rounding.
* ladder_frac_powers: incremental fixed-point multiplication that keeps, at
  step n, the full integer part plus F_n fractional bits, where the schedule
  F_n = ceil((N - n) * log2 x) + g sheds precision exactly as fast as the
  remaining amplification x^(N-n) decays.  The certified error bound is
  2^(-g) * N * x / (x - 1) plus one binary64 quantum for output rounding.

Both bases x and seeds xi are dyadic rationals, so every intermediate
quantity is an integer and the oracle route has no rounding at all before
the final float conversion.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import DyadicRational, as_dyadic
from .errors import DomainError, PrecisionError, ResourceError

#: float64 output quantization: points are correctly rounded to binary64,
#: which perturbs a value in [0, 1) by at most 2^-53.
FLOAT64_QUANTUM = Fraction(1, 2 ** 53)

#: work cap for the exact oracle, in units of (steps x operand bits);
#: N ~ 2000 with 64-bit bases sits two orders of magnitude below it.
DEFAULT_ORACLE_WORK_CAP = 2 ** 31

_ONE_MINUS = math.nextafter(1.0, 0.0)


def _log2_int(p: int) -> float:
    """log2 of a positive integer, safe for arbitrary size."""
    bl = p.bit_length()
    if bl <= 900:
        return math.log2(p)
    shift = bl - 60
    return math.log2(p >> shift) + shift


def ceil_mul_log2(p: int, mult: int) -> int:
    """ceil(mult * log2(p)) computed exactly (p >= 1, mult >= 0)."""
    if mult == 0 or p == 1:
        return 0
    if p & (p - 1) == 0:
        return mult * (p.bit_length() - 1)
    t = mult * _log2_int(p)
    frac = t - math.floor(t)
    if 1e-7 < frac < 1.0 - 1e-7:
        return math.floor(t) + 1
    # near-tie: settle by one exact big power
    b = p ** mult
    floor_exact = b.bit_length() - 1
    return floor_exact if b & (b - 1) == 0 else floor_exact + 1


def ceil_log2_ratio(x: DyadicRational, mult: int) -> int:
    """ceil(mult * log2(x)) for dyadic x > 1, exact."""
    return ceil_mul_log2(x.numerator, mult) - mult * x.exponent


@dataclass(frozen=True)
class PrecisionBudget:
    """Per-step fractional-bit schedule for the ladder.

    frac_bits[n-1] is F_n = ceil((N - n) * log2 x) + g; the total operand
    width stays near ceil(N * log2 x) + g throughout the run.
    """

    total_bits: int
    guard_bits: int
    frac_bits: tuple

    def __post_init__(self) -> None:
        fb = self.frac_bits
        if any(fb[i + 1] > fb[i] for i in range(len(fb) - 1)):
            raise DomainError("precision schedule must be non-increasing")
        if fb and fb[-1] != self.guard_bits:
            raise DomainError("schedule must end at the guard-bit count")


def precision_budget(x: DyadicRational, N: int, g: int) -> PrecisionBudget:
    x = as_dyadic(x)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    frac_bits = tuple(ceil_log2_ratio(x, N - n) + g for n in range(1, N + 1))
    total = ceil_log2_ratio(x, N) + g + 1
    return PrecisionBudget(total_bits=total, guard_bits=g, frac_bits=frac_bits)


@dataclass(frozen=True, eq=False)
class UnitSample:
    """Fractional parts of xi * x^n for n = 1..n_max, stored as binary64.

    err_bound is a certified sup over n of |points[n-1] - {xi * x^n}|,
    measured in circular (mod 1) distance; it includes the binary64 output
    quantization.
    """

    n_max: int
    points: np.ndarray
    err_bound: float
    base: DyadicRational
    xi: DyadicRational
    guard_bits: int = 0

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or len(pts) != self.n_max:
            raise DomainError(
                f"expected {self.n_max} points, got shape {pts.shape}")
        if len(pts) and (pts.min() < 0.0 or pts.max() >= 1.0):
            raise DomainError("all points must lie in [0, 1)")
        if not (math.isfinite(self.err_bound) and self.err_bound >= 0.0):
            raise DomainError(f"bad err_bound {self.err_bound}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)


def sample_x(A, mantissa_bits: int, seed: int) -> DyadicRational:
    """Draw x = A + u with u uniform on the mantissa_bits-deep dyadic grid.

    Deterministic for a fixed seed; the draw lands in [A, A+1).
    """
    A = as_dyadic(A)
    if not A > DyadicRational(1, 0):
        raise DomainError(f"A must exceed 1, got {A}")
    if mantissa_bits < 1:
        raise DomainError(f"mantissa_bits must be >= 1, got {mantissa_bits}")
    u = random.Random(seed).getrandbits(mantissa_bits)
    return A + DyadicRational(u, mantissa_bits)


def _check_gen_args(x: DyadicRational, xi: DyadicRational, N: int) -> None:
    if not x > DyadicRational(1, 0):
        raise DomainError(f"base must exceed 1, got {x}")
    if xi.numerator == 0:
        raise DomainError("xi must be nonzero")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")


def _big_ratio_to_unit_float(num: int, shift: int) -> float:
    """Correctly rounded num / 2^shift, clamped into [0, 1)."""
    if num == 0:
        return 0.0
    v = num / (1 << shift)
    return v if v < 1.0 else _ONE_MINUS


def exact_frac_powers(x, xi, N: int,
                      work_cap: int = DEFAULT_ORACLE_WORK_CAP) -> UnitSample:
    """Exact oracle: {xi * x^n} as (xi_num * x_num^n mod 2^E) / 2^E.

    Runs a single running product modulo 2^(f + N*e), from which every
    prefix fractional part is recovered by masking low bits; err_bound is
    one binary64 quantum.
    """
    x = as_dyadic(x)
    xi = as_dyadic(xi)
    _check_gen_args(x, xi, N)
    p, e = x.numerator, x.exponent
    q, f = xi.numerator, xi.exponent
    work = N * (f + N * max(e, 1))
    if work > work_cap:
        raise ResourceError(
            f"exact oracle work estimate {work} exceeds cap {work_cap} "
            f"(N={N}, base exponent {e})")
    full_shift = f + N * e
    full_mod = 1 << full_shift
    pts = np.empty(N, dtype=np.float64)
    r = q % full_mod
    for n in range(1, N + 1):
        r = (r * p) % full_mod
        shift = f + n * e
        pts[n - 1] = _big_ratio_to_unit_float(r & ((1 << shift) - 1), shift)
    return UnitSample(n_max=N, points=pts, err_bound=float(FLOAT64_QUANTUM),
                      base=x, xi=xi, guard_bits=0)


def default_guard_bits(N: int) -> int:
    return 64 + max(0, (max(N, 1) - 1).bit_length())


def _round_shift(a: int, k: int) -> int:
    """round(a / 2^k) half-up for a >= 0; exact left shift for k <= 0."""
    if k <= 0:
        return a << (-k)
    return ((a >> (k - 1)) + 1) >> 1


def ladder_err_bound(x: DyadicRational, N: int, g: int) -> Fraction:
    """Certified sup error of the ladder points, before float rounding."""
    p, e = x.numerator, x.exponent
    return Fraction(N * p, (p - (1 << e))) / (1 << g)


def _round_float_up(value: Fraction) -> float:
    f = float(value)
    if Fraction(f) < value:
        f = math.nextafter(f, math.inf)
    return f


def ladder_frac_powers(x, xi, N: int, g: int | None = None) -> UnitSample:
    """Sliding-precision fixed-point evaluation of {xi * x^n}, n = 1..N.

    Rounding at step n costs at most 2^(-F_n - 1) and is amplified by the
    remaining factor x^(N-n) <= 2^ceil((N-n) log2 x), so each step
    contributes at most 2^(-g-1) to the final error; the stored bound
    2^(-g) * N * x/(x-1) dominates the total, plus 2^-53 for binary64
    output rounding.
    """
    x = as_dyadic(x)
    xi = as_dyadic(xi)
    _check_gen_args(x, xi, N)
    if g is None:
        g = default_guard_bits(N)
    if g < 32:
        raise DomainError(f"guard bits must be >= 32, got {g}")
    p, e = x.numerator, x.exponent
    q, f = xi.numerator, xi.exponent
    budget = precision_budget(x, N, g)
    F = budget.frac_bits
    pts = np.empty(N, dtype=np.float64)
    # V approximates the full value xi * x^n scaled by 2^F_n; the integer
    # part must ride along (x * integer is not an integer), only fractional
    # bits below the schedule are shed.
    V = _round_shift(q * p, (f + e) - F[0])
    pts[0] = _big_ratio_to_unit_float(V & ((1 << F[0]) - 1), F[0])
    for n in range(1, N):
        V = _round_shift(V * p, F[n - 1] + e - F[n])
        pts[n] = _big_ratio_to_unit_float(V & ((1 << F[n]) - 1), F[n])
    bound = ladder_err_bound(x, N, g) + FLOAT64_QUANTUM
    return UnitSample(n_max=N, points=pts, err_bound=_round_float_up(bound),
                      base=x, xi=xi, guard_bits=g)


def required_bits(x, N: int, eps: float, margin: int = 16) -> int:
    """Operand width needed to resolve {xi * x^N} to absolute accuracy eps."""
    x = as_dyadic(x)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if not x > DyadicRational(1, 0):
        raise DomainError(f"base must exceed 1, got {x}")
    return ceil_log2_ratio(x, N) + math.ceil(math.log2(N / eps)) + margin


def required_guard_bits(sample: UnitSample, s: float) -> int:
    """Least guard-bit count whose ladder bound meets the s/N/100 gate."""
    N = sample.n_max
    target = Fraction(s) / N / 100 - FLOAT64_QUANTUM
    if target <= 0:
        raise DomainError(
            f"window s/N = {s}/{N} is below binary64 resolution; "
            "no guard-bit count can certify it")
    x = sample.base
    g = max(32, int(math.ceil(math.log2(
        N * float(x) / (float(x) - 1.0) / float(target)))))
    while ladder_err_bound(x, N, g) >= target:
        g += 1
    return g


def ensure_window_resolution(sample: UnitSample, s: float) -> None:
    """Gate: certified error must be far below the statistic window s/N."""
    N = sample.n_max
    gate = (s / N) / 100.0
    if sample.err_bound < gate:
        return
    if not sample.base > DyadicRational(1, 0):
        raise PrecisionError(
            f"err_bound {sample.err_bound} fails the (s/N)/100 gate {gate}")
    g = required_guard_bits(sample, s)
    raise PrecisionError(
        f"err_bound {sample.err_bound:.3e} is not below (s/N)/100 = "
        f"{gate:.3e}; regenerate with guard bits >= {g}",
        required_guard_bits=g)


# ---- serialization ------------------------------------------------------

def save_sample(sample: UnitSample, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"x={sample.base} xi={sample.xi} N={sample.n_max} "
            f"g={sample.guard_bits} err_bound={sample.err_bound:.17g}\n")
        for v in sample.points:
            fh.write(f"{v:.17g}\n")


def load_sample(path) -> UnitSample:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        fields = dict(item.split("=", 1) for item in header)
        pts = [float(line) for line in fh if line.strip()]
    return UnitSample(
        n_max=int(fields["N"]),
        points=np.array(pts, dtype=np.float64),
        err_bound=float(fields["err_bound"]),
        base=DyadicRational.parse(fields["x"]),
        xi=DyadicRational.parse(fields["xi"]),
        guard_bits=int(fields["g"]),
    )
