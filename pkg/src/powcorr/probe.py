"""Constructive objects behind the martingale argument.

The pieces implemented here are the index blocks of length N^(1/10), the
centered block sums Y over pairs whose larger exponent falls in one
block, the dyadic interval filtration whose atom widths track the local
oscillation scale, conditional expectations of Y over filtration atoms,
and the oscillatory/level-set integral bounds the argument rests on.
Everything that can be exact is exact: partition points are dyadic
rationals, level-set endpoints are certified by rational sign checks,
and phases of high-frequency integrals reduce modulo one in integer
arithmetic.
"""

from __future__ import annotations

import math
import numbers
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import DyadicRational, as_dyadic
from .errors import DomainError, NumericalError, ResourceError
from .hpgen import UnitSample, ladder_frac_powers, sample_x
from .corr import forward_window_pairs
from .mollify import (CenteredMollifier, Mollifier, centered, make_outer,
                      window_fraction)
from .quad import (DEFAULT_QUAD, QuadConfig, gauss_rule, monotone_root,
                   oscillatory_power_integral)

__all__ = [
    "BlockScheme", "FiltrationRun", "FiltrationPartition", "ProbeReport",
    "LevelInterval", "blocks", "mu", "filtration", "filtration_runs",
    "refinement_holds", "block_sum_Y", "parity_block_sums",
    "parity_identity_check", "cond_exp_Z", "tower_check", "approx_gap",
    "cond_exp_cross", "parity_moment", "parity_moment_both",
    "second_moment_slope", "vdc_bound_check", "level_intervals",
    "convexity_measure", "pair_overlap_integral",
]

#: refuse to materialize partitions with more atoms than this
DEFAULT_ATOM_CAP = 1_000_000
#: largest N for the direct double-sum side of the parity identity
IDENTITY_N_CAP = 4096
#: fitted envelope constants for the overlap integral bounds, frozen after
#: a calibration sweep over feasible (n, m1, m2, A, N) tuples; measured
#: worst ratios were 0.96 (cross) and 2.27 (equal)
C_OVERLAP_CROSS = 3.0
C_OVERLAP_EQUAL = 4.0


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeReport:
    """One measured quantity next to the bound it is probed against."""

    quantity: str
    params: dict
    measured: tuple
    bound: float | None
    exponent: float | None
    verdict: str                 # "pass" | "fail" | "reported"
    detail: str = ""

    def __post_init__(self) -> None:
        if self.verdict not in ("pass", "fail", "reported"):
            raise DomainError(f"unknown verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "params": {k: (str(v) if isinstance(v, DyadicRational) else v)
                       for k, v in self.params.items()},
            "measured": list(self.measured),
            "bound": self.bound,
            "exponent": self.exponent,
            "verdict": self.verdict,
            "detail": self.detail,
        }

    def csv_row(self) -> dict:
        row = {"quantity": self.quantity}
        row.update({k: (str(v) if isinstance(v, DyadicRational) else v)
                    for k, v in self.params.items()})
        row["measured"] = self.measured[0] if len(self.measured) == 1 else \
            ";".join(repr(v) for v in self.measured)
        row["bound"] = self.bound
        row["verdict"] = self.verdict
        return row


# ---------------------------------------------------------------------------
# blocks and the dyadic filtration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockScheme:
    """Partition of {1,...,N} into K^9 consecutive blocks of length K."""

    N: int
    K: int

    def __post_init__(self) -> None:
        if self.K < 2 or self.K ** 10 != self.N:
            raise DomainError(f"N = {self.N} is not K^10 for integer K >= 2")

    @property
    def n_blocks(self) -> int:
        return self.K ** 9

    def block(self, k: int) -> range:
        """1-based index range of block k (inclusive start, exclusive end)."""
        if not 1 <= k <= self.n_blocks:
            raise DomainError(f"block index {k} outside 1..{self.n_blocks}")
        return range((k - 1) * self.K + 1, k * self.K + 1)

    @property
    def blocks(self) -> tuple:
        return tuple(self.block(k) for k in range(1, self.n_blocks + 1))


def blocks(N: int) -> BlockScheme:
    """BlockScheme for N = K^10; names the nearest valid N otherwise."""
    if N < 2 ** 10:
        raise DomainError(f"N = {N} is not a 10th power; nearest valid is 1024")
    K = round(N ** 0.1)
    for cand in (K, K - 1, K + 1):
        if cand >= 2 and cand ** 10 == N:
            return BlockScheme(N=N, K=cand)
    best = min((max(K - 1, 2), K, K + 1), key=lambda c: abs(c ** 10 - N))
    raise DomainError(
        f"N = {N} is not a 10th power; nearest valid is {best ** 10}")


def mu(x, k: int, K: int) -> int:
    """The integer with 2^mu <= x^((k+1/2)K) < 2^(mu+1).

    Computed through the squared relation 2^(2mu) <= x^((2k+1)K) <
    2^(2mu+2) so only integer powers of x appear.
    """
    x = as_dyadic(x)
    if not x > DyadicRational.from_int(1):
        raise DomainError(f"x must exceed 1, got {x}")
    if k < 1 or K < 1:
        raise DomainError(f"need k >= 1 and K >= 1, got k={k}, K={K}")
    M = (2 * k + 1) * K
    t = (x.numerator ** M).bit_length() - 1 - x.exponent * M
    return t >> 1


@dataclass(frozen=True)
class FiltrationRun:
    """Maximal stretch of consecutive atoms sharing one width 2^-mu."""

    start: DyadicRational
    mu: int
    count: int

    @property
    def end(self) -> DyadicRational:
        return self.start + DyadicRational(self.count, self.mu)


@dataclass(frozen=True)
class FiltrationPartition:
    """Dyadic partition of [A, A+1] driven by the recurrence
    z_{i+1} = z_i + 2^(-mu_k(z_i)); terminates at A+1 exactly."""

    A: DyadicRational
    k: int
    K: int
    z: tuple
    mus: tuple
    N_k: int
    runs: tuple

    def atom(self, i: int) -> tuple:
        if not 0 <= i < self.N_k:
            raise DomainError(f"atom index {i} outside 0..{self.N_k - 1}")
        return self.z[i], self.z[i + 1]


def _scale_floor(d: DyadicRational, m: int) -> int:
    """floor(d * 2^m) for d >= 0."""
    if m >= d.exponent:
        return d.numerator << (m - d.exponent)
    return d.numerator >> (d.exponent - m)


def filtration_runs(A, k: int, K: int) -> tuple:
    """Run-length form of the partition; cost scales with the number of
    distinct widths, not the atom count, so arbitrarily fine partitions
    can be checked exactly."""
    A = as_dyadic(A)
    if not A > DyadicRational.from_int(1):
        raise DomainError(f"A must exceed 1, got {A}")
    if k < 1 or K < 1:
        raise DomainError(f"need k >= 1 and K >= 1, got k={k}, K={K}")
    end = A + DyadicRational.from_int(1)
    runs = []
    z = A
    total = 0
    while z < end:
        m = mu(z, k, K)
        step = DyadicRational(1, m)
        remaining = end - z
        if remaining.exponent > m:
            raise NumericalError(
                "partition step does not divide the remaining length; "
                "the dyadic recurrence invariant is broken")
        navail = _scale_floor(remaining, m)
        # first interior index where the width changes, else navail
        lo_i, hi_i = 1, navail
        while lo_i < hi_i:
            mid = (lo_i + hi_i) // 2
            if mu(z + DyadicRational(mid, m), k, K) != m:
                hi_i = mid
            else:
                lo_i = mid + 1
        count = lo_i
        runs.append(FiltrationRun(start=z, mu=m, count=count))
        total += count
        z = z + DyadicRational(count, m)
    return tuple(runs), total


def filtration(A, k: int, K: int,
               atom_cap: int = DEFAULT_ATOM_CAP) -> FiltrationPartition:
    """Materialized partition; refuses when the atom count exceeds the cap."""
    A = as_dyadic(A)
    est = float(A) ** ((k + 0.5) * K)
    if est > atom_cap:
        raise ResourceError(
            f"estimated atom count A^((k+1/2)K) = {est:.4g} exceeds the "
            f"cap {atom_cap}")
    runs, total = filtration_runs(A, k, K)
    if total > atom_cap:
        raise ResourceError(
            f"partition has {total} atoms, above the cap {atom_cap}")
    z = []
    mus = []
    for run in runs:
        for i in range(run.count):
            z.append(run.start + DyadicRational(i, run.mu))
            mus.append(run.mu)
    z.append(A + DyadicRational.from_int(1))
    if any(a > b for a, b in zip(mus, mus[1:])):
        raise NumericalError("atom widths failed to shrink monotonically")
    return FiltrationPartition(A=A, k=k, K=K, z=tuple(z), mus=tuple(mus),
                               N_k=total, runs=runs)


def refinement_holds(A, j: int, k: int, K: int) -> bool:
    """Exact check that every partition point for index j reappears for
    index k > j, using run-length walks so giant partitions stay cheap."""
    if not 1 <= j < k:
        raise DomainError(f"need 1 <= j < k, got j={j}, k={k}")
    coarse, _ = filtration_runs(A, j, K)
    fine, _ = filtration_runs(A, k, K)
    ends = [run.end for run in fine]
    fi = 0
    for run in coarse:
        i = 0
        while i < run.count:
            point = run.start + DyadicRational(i, run.mu)
            while ends[fi] <= point:
                fi += 1
            f = fine[fi]              # point sits in this fine run
            d = point - f.start
            if d.exponent > f.mu:
                return False          # point off the fine lattice
            # batch every coarse point that also lands in this fine run
            span = ends[fi] - point
            n_batch = _scale_floor(span, run.mu)
            if DyadicRational(n_batch, run.mu) != span:
                n_batch += 1
            n_batch = min(n_batch, run.count - i)
            if n_batch > 1 and f.mu < run.mu:
                return False          # fine lattice coarser than the points
            i += max(n_batch, 1)
    return True


# ---------------------------------------------------------------------------
# block sums Y
# ---------------------------------------------------------------------------

def _term_count(k: int, K: int) -> int:
    """Number of (n, m) pairs with n in block k and 1 <= m < n."""
    lo = (k - 1) * K
    hi = k * K
    return (hi * (hi - 1) - lo * (lo - 1)) // 2


def _window_F_sums_by_block(points: np.ndarray, scheme: BlockScheme,
                            F: Mollifier):
    """Sorted window enumeration; returns (per-pair F values, block index
    of each pair's larger exponent)."""
    pw = forward_window_pairs(points, F.edge_f)
    orig_i = pw.order[pw.pos_i]
    orig_j = pw.order[pw.pos_j]
    larger = np.maximum(orig_i, orig_j)          # 0-based; power = larger + 1
    vals = F.eval_array(pw.gaps)
    return vals, larger // scheme.K + 1


def block_sum_Y(sample: UnitSample, k: int, scheme: BlockScheme,
                G: CenteredMollifier) -> float:
    """Y_k = sum over n in block k, m < n of G(points[n] - points[m])."""
    if not 1 <= k <= scheme.n_blocks:
        raise DomainError(f"block index {k} outside 1..{scheme.n_blocks}")
    top = k * scheme.K
    if sample.n_max < top:
        raise DomainError(
            f"sample holds {sample.n_max} points but block {k} reaches "
            f"index {top}")
    pts = sample.points[:top]
    vals, pair_block = _window_F_sums_by_block(pts, scheme, G.base)
    f_sum = float(vals[pair_block == k].sum())
    return f_sum - _term_count(k, scheme.K) * G.mean_f


def _parity_term_counts(scheme: BlockScheme) -> tuple:
    odd = even = 0
    for k in range(1, scheme.n_blocks + 1):
        t = _term_count(k, scheme.K)
        if k % 2:
            odd += t
        else:
            even += t
    return odd, even


def parity_block_sums(sample: UnitSample, scheme: BlockScheme,
                      G: CenteredMollifier) -> tuple:
    """(sum of Y_k over odd k, over even k) in one window enumeration."""
    if sample.n_max != scheme.N:
        raise DomainError(
            f"sample has N = {sample.n_max}, scheme expects {scheme.N}")
    vals, pair_block = _window_F_sums_by_block(sample.points, scheme, G.base)
    odd_mask = (pair_block % 2).astype(bool)
    f_odd = float(vals[odd_mask].sum())
    f_even = float(vals.sum()) - f_odd
    t_odd, t_even = _parity_term_counts(scheme)
    return f_odd - t_odd * G.mean_f, f_even - t_even * G.mean_f


def parity_identity_check(sample: UnitSample, scheme: BlockScheme,
                          G: CenteredMollifier) -> tuple:
    """(lhs, rhs, relative gap) for
    sum_{m != n} G(y_n - y_m) == 2 (sum_odd Y_k + sum_even Y_k)."""
    n = sample.n_max
    if n > IDENTITY_N_CAP:
        raise ResourceError(
            f"direct double sum needs N <= {IDENTITY_N_CAP}, got {n}")
    pts = sample.points
    diffs = pts[:, None] - pts[None, :]
    lhs = float(G.eval_array(diffs).sum()) - n * float(G.eval_array(
        np.zeros(1))[0])
    y_odd, y_even = parity_block_sums(sample, scheme, G)
    rhs = 2.0 * (y_odd + y_even)
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-12)
    return lhs, rhs, rel


def _y_at(x: DyadicRational, k: int, scheme: BlockScheme,
          G: CenteredMollifier) -> float:
    """Pointwise Y_k(x) from a fresh certified power ladder at x."""
    top = k * scheme.K
    pts = ladder_frac_powers(x, 1, top).points
    total = 0.0
    for n_idx in range((k - 1) * scheme.K, top):   # 0-based larger exponent
        if n_idx == 0:
            continue
        diffs = pts[n_idx] - pts[:n_idx]
        total += float(G.eval_array(diffs).sum())
    return total


# ---------------------------------------------------------------------------
# piecewise integration of F(x^n - x^m) over an interval
# ---------------------------------------------------------------------------

def _powpair(n: int, m: int):
    if m == 0:
        return (lambda x: x ** n - 1.0,
                lambda x: n * x ** (n - 1))
    return (lambda x: x ** n - x ** m,
            lambda x: n * x ** (n - 1) - m * x ** (m - 1))


def _term_cuts(n: int, m: int, lo: float, hi: float, F: Mollifier) -> list:
    """x-locations inside (lo, hi) where F(g(x)) changes analytic piece."""
    g, dg = _powpair(n, m)
    glo, ghi = g(lo), g(hi)
    offsets = sorted({-F.edge_f, -F.p_f, F.p_f, F.edge_f})
    cuts = []
    cursor = lo
    for M in range(math.floor(glo), math.ceil(ghi) + 1):
        for off in offsets:
            target = M + off
            if glo < target < ghi:
                root = monotone_root(g, dg, target, cursor, hi)
                cuts.append(root)
                cursor = max(cursor, root)
    return cuts


def _integral_F_of_power(n: int, m: int, lo: float, hi: float, F: Mollifier,
                         nodes: int) -> float:
    """integral over [lo, hi] of F(x^n - x^m) dx, piecewise exact.

    Pieces are delimited by the preimages of the window boundaries, so
    plateau pieces contribute peak * length exactly and ramp pieces are
    analytic, where a small Gauss rule is already spectral.
    """
    if not hi > lo:
        return 0.0
    g, _dg = _powpair(n, m)
    edges = [lo] + _term_cuts(n, m, lo, hi, F) + [hi]
    peak = float(F.peak)
    xs_ref, ws_ref = gauss_rule(nodes)
    total = 0.0
    for x0, x1 in zip(edges[:-1], edges[1:]):
        if not x1 > x0:
            continue
        gm = g(0.5 * (x0 + x1))
        u = abs(gm - round(gm))
        if u >= F.edge_f:
            continue
        if u <= F.p_f:
            total += peak * (x1 - x0)
            continue
        half = 0.5 * (x1 - x0)
        mid = 0.5 * (x1 + x0)
        pts = mid + half * xs_ref
        total += half * float(np.dot(ws_ref, F.eval_array(g(pts))))
    return total


def _block_terms(k: int, K: int):
    for n in range((k - 1) * K + 1, k * K + 1):
        for m in range(1, n):
            yield n, m


def _check_power_scale(top: int, hi: float) -> None:
    if top * math.log2(hi) > 45:
        raise ResourceError(
            f"x^{top} near {hi:.3g} exceeds the float window-decomposition "
            "scale (2^45); this probe caps k and A")


def _integral_Y(lo: float, hi: float, k: int, scheme: BlockScheme,
                G: CenteredMollifier, nodes: int) -> float:
    total = 0.0
    for n, m in _block_terms(k, scheme.K):
        total += _integral_F_of_power(n, m, lo, hi, G.base, nodes)
    return total - G.mean_f * (hi - lo) * _term_count(k, scheme.K)


def _integral_Y_certified(lo: float, hi: float, k: int, scheme: BlockScheme,
                          G: CenteredMollifier, cfg: QuadConfig) -> float:
    _check_power_scale(k * scheme.K, hi)
    coarse = _integral_Y(lo, hi, k, scheme, G, cfg.nodes_per_piece)
    fine = _integral_Y(lo, hi, k, scheme, G, 2 * cfg.nodes_per_piece)
    if abs(fine - coarse) > cfg.rel_tol * (abs(fine) + 1e-15):
        raise NumericalError(
            "window-piece quadrature failed its doubling check",
            coarse=coarse, fine=fine)
    return fine


def cond_exp_Z(A, k: int, scheme: BlockScheme, G, atom_index: int,
               quad_cfg: QuadConfig = DEFAULT_QUAD) -> float:
    """Average of Y_k over one atom of the level-k partition.

    A constant G short-circuits to constant * term count; otherwise each
    (n, m) term is integrated over its window preimages with fresh exact
    power evaluations at the piece boundaries.
    """
    if isinstance(G, numbers.Real) and not isinstance(G, bool):
        return float(G) * _term_count(k, scheme.K)
    part = filtration(as_dyadic(A), k, scheme.K)
    z0, z1 = part.atom(atom_index)
    lo, hi = float(z0), float(z1)
    return _integral_Y_certified(lo, hi, k, scheme, G, quad_cfg) / (hi - lo)


def tower_check(A, k: int, scheme: BlockScheme, G: CenteredMollifier,
                quad_cfg: QuadConfig = DEFAULT_QUAD) -> tuple:
    """(length-weighted atom average of Z, direct integral of Y, rel gap)."""
    A = as_dyadic(A)
    part = filtration(A, k, scheme.K)
    weighted = 0.0
    for i in range(part.N_k):
        z0, z1 = part.atom(i)
        lo, hi = float(z0), float(z1)
        weighted += _integral_Y_certified(lo, hi, k, scheme, G, quad_cfg)
    direct = _integral_Y_certified(float(A), float(A) + 1.0, k, scheme, G,
                                   quad_cfg)
    rel = abs(weighted - direct) / max(abs(direct), 1e-12)
    return weighted, direct, rel


def approx_gap(A, k: int, scheme: BlockScheme, G: CenteredMollifier,
               sample_count: int = 10, seed: int = 2026,
               quad_cfg: QuadConfig = DEFAULT_QUAD,
               max_atoms: int = 32) -> ProbeReport:
    """Measured sup |Y - Z| over sampled x against the decay envelope
    N^(41/10) * A^(-K/2)."""
    if sample_count < 10:
        raise DomainError(f"sample_count must be >= 10, got {sample_count}")
    A = as_dyadic(A)
    part = filtration(A, k, scheme.K)
    if part.N_k <= max_atoms:
        atom_ids = range(part.N_k)
    else:
        atom_ids = sorted({i * (part.N_k - 1) // (max_atoms - 1)
                           for i in range(max_atoms)})
    rng = random.Random(seed)
    sup_gap = 0.0
    widest = 0.0
    for i in atom_ids:
        z0, z1 = part.atom(i)
        lo, hi = float(z0), float(z1)
        widest = max(widest, hi - lo)
        z_val = _integral_Y_certified(lo, hi, k, scheme, G, quad_cfg) / (hi - lo)
        for _ in range(sample_count):
            u = DyadicRational(rng.getrandbits(40), 40)
            x = z0 + u * (z1 - z0)
            sup_gap = max(sup_gap, abs(_y_at(x, k, scheme, G) - z_val))
    # mean-value control: |Y - Z| <= atom width * sup |Y'|, with sup |Y'|
    # bounded term by term through the exact ramp slope of F
    hi_end = float(A) + 1.0
    dsup = float(G.base.deriv_sup)
    y_slope = sum(dsup * (n * hi_end ** (n - 1) - m * hi_end ** (m - 1))
                  for n, m in _block_terms(k, scheme.K))
    mv_bound = widest * y_slope
    envelope = float(scheme.N) ** 4.1 * float(A) ** (-scheme.K / 2.0)
    verdict = "pass" if sup_gap <= mv_bound else "fail"
    return ProbeReport(
        quantity="approx_gap",
        params={"A": A, "N": scheme.N, "K": scheme.K, "k": k,
                "samples": sample_count, "seed": seed},
        measured=(sup_gap,),
        bound=envelope,
        exponent=4.1,
        verdict=verdict,
        detail=f"mean-value control {mv_bound:.6g} from exact ramp slope; "
               f"envelope constant untracked, reported as trend",
    )


def cond_exp_cross(A, j: int, k: int, scheme: BlockScheme,
                   G: CenteredMollifier, atom_sample: int = 4,
                   quad_cfg: QuadConfig = DEFAULT_QUAD) -> ProbeReport:
    """Averages of Y_k over atoms of the coarser level-j partition; the
    argument needs these to vanish at scale log N / N^(29/10)."""
    if k - j < 2:
        raise DomainError(f"need k - j >= 2, got j={j}, k={k}")
    A = as_dyadic(A)
    part = filtration(A, j, scheme.K)
    count = min(atom_sample, part.N_k)
    atom_ids = sorted({i * (part.N_k - 1) // max(count - 1, 1)
                       for i in range(count)})
    values = []
    for i in atom_ids:
        z0, z1 = part.atom(i)
        lo, hi = float(z0), float(z1)
        avg = _integral_Y_certified(lo, hi, k, scheme, G, quad_cfg) / (hi - lo)
        values.append(avg)
    worst = max(abs(v) for v in values)
    envelope = math.log(scheme.N) / float(scheme.N) ** 2.9
    return ProbeReport(
        quantity="cond_exp_cross",
        params={"A": A, "N": scheme.N, "K": scheme.K, "j": j, "k": k,
                "atoms": list(atom_ids)},
        measured=tuple(values),
        bound=envelope,
        exponent=-2.9,
        verdict="reported",
        detail=f"max |E[Y_k | atom of F_j]| = {worst:.6g}; envelope "
               f"constant untracked",
    )


# ---------------------------------------------------------------------------
# parity second moments
# ---------------------------------------------------------------------------

def parity_moment_both(A, scheme: BlockScheme, G: CenteredMollifier,
                       mc_samples: int, seed: int,
                       mantissa_bits: int = 32) -> dict:
    """Monte Carlo second moments of the odd and even parity sums, sharing
    one set of draws and one window enumeration per draw."""
    if mc_samples < 100:
        raise DomainError(f"mc_samples must be >= 100, got {mc_samples}")
    sq_odd = 0.0
    sq_even = 0.0
    for i in range(mc_samples):
        x = sample_x(A, mantissa_bits, seed + i)
        pts = ladder_frac_powers(x, 1, scheme.N)
        y_odd, y_even = parity_block_sums(pts, scheme, G)
        sq_odd += y_odd * y_odd
        sq_even += y_even * y_even
    return {"odd": sq_odd / mc_samples, "even": sq_even / mc_samples}


def parity_moment(A, scheme: BlockScheme, G: CenteredMollifier,
                  parity: str, mc_samples: int, seed: int,
                  mantissa_bits: int = 32) -> ProbeReport:
    if parity not in ("odd", "even"):
        raise DomainError(f"parity must be 'odd' or 'even', got {parity!r}")
    both = parity_moment_both(A, scheme, G, mc_samples, seed, mantissa_bits)
    measured = both[parity]
    envelope = float(scheme.N) ** 1.1
    return ProbeReport(
        quantity="parity_moment",
        params={"A": as_dyadic(A), "N": scheme.N, "parity": parity,
                "mc_samples": mc_samples, "seed": seed,
                "mantissa_bits": mantissa_bits},
        measured=(measured,),
        bound=envelope,
        exponent=1.1,
        verdict="reported",
        detail=f"other parity: {both['odd' if parity == 'even' else 'even']:.6g}",
    )


def second_moment_slope(A, s: float, mc_samples: int, seed: int,
                        Ns: tuple = (2 ** 10, 3 ** 10),
                        parity: str = "odd",
                        mantissa_bits: int = 32) -> tuple:
    """log-log growth rate of the parity second moment along an N ladder."""
    if len(Ns) < 2:
        raise DomainError("need at least two N values for a slope")
    moments = []
    for N in sorted(Ns):
        scheme = blocks(N)
        G = centered(make_outer(s, N))
        both = parity_moment_both(A, scheme, G, mc_samples, seed,
                                  mantissa_bits)
        moments.append(both[parity])
    xs = np.log([float(N) for N in sorted(Ns)])
    ys = np.log(np.maximum(moments, 1e-300))
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, moments


# ---------------------------------------------------------------------------
# van der Corput
# ---------------------------------------------------------------------------

def vdc_bound_check(a, b, l: int, n: int, m: int,
                    quad_cfg: QuadConfig = DEFAULT_QUAD) -> tuple:
    """(|integral of exp(2 pi i l (x^n - x^m))|, 1/gamma) with the bound
    gamma = l n a^(n-1) (1 - 1/a); the inequality is asserted."""
    a, b = as_dyadic(a), as_dyadic(b)
    if not (DyadicRational.from_int(1) < a < b):
        raise DomainError(f"need 1 < a < b, got a={a}, b={b}")
    if n < 2 or not n > m >= 1 or l < 1:
        raise DomainError(
            f"need n >= 2, n > m >= 1, l >= 1; got l={l}, n={n}, m={m}")
    af = a.as_fraction()
    curv = n * (n - 1) * af ** (n - 2) - m * (m - 1) * af ** (m - 2)
    if not curv > 0:
        raise DomainError("phase is not strictly convex on [a, b]")
    value = abs(oscillatory_power_integral(l, n, m, a, b, quad_cfg))
    gamma = float(l * n * af ** (n - 1) * (1 - 1 / af))
    bound = 1.0 / gamma
    if value > bound:
        raise NumericalError(
            "oscillatory integral exceeded its van der Corput bound; "
            "quadrature is untrustworthy here", coarse=value, fine=bound)
    return value, bound


# ---------------------------------------------------------------------------
# level sets of x^n - x^m near integers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelInterval:
    """Preimage interval {x: x^n - x^m in [M - w, M + w]}."""

    M: int
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


def _frac_pow(x: Fraction, n: int) -> Fraction:
    return x ** n if n else Fraction(1)


def _dyadic_parts(fr: Fraction) -> tuple:
    den = fr.denominator
    e = den.bit_length() - 1
    if (1 << e) != den:
        raise DomainError(f"endpoint {fr} is not a dyadic rational")
    return fr.numerator, e


def _sign_at(c: int, e: int, n: int, m: int, target: Fraction) -> int:
    """Exact sign of (c/2^e)^n - (c/2^e)^m - target, integers only."""
    if m:
        lhs = c ** n - (c ** m << (e * (n - m)))
    else:
        lhs = c ** n - (1 << (e * n))
    val = target.denominator * lhs - (target.numerator << (e * n))
    return (val > 0) - (val < 0)


def _certified_root(n: int, m: int, target: Fraction, lo: Fraction,
                    hi: Fraction, seed: float | None = None) -> float:
    """Root of x^n - x^m = target on [lo, hi], certified by exact integer
    sign checks around a float Newton estimate."""
    lo_c, lo_e = _dyadic_parts(lo)
    hi_c, hi_e = _dyadic_parts(hi)
    if _sign_at(lo_c, lo_e, n, m, target) >= 0:
        return float(lo)
    if _sign_at(hi_c, hi_e, n, m, target) <= 0:
        return float(hi)
    g, dg = _powpair(n, m)
    r = monotone_root(g, dg, float(target), float(lo), float(hi), x0=seed)
    se = 48
    center = int(round(r * (1 << se)))
    lo_grid = -((-lo_c << se) >> lo_e)          # ceil(lo * 2^se)
    hi_grid = (hi_c << se) >> hi_e              # floor(hi * 2^se)
    for spread in (4, 64, 4096, 1 << 20):
        blo = max(center - spread, lo_grid)
        bhi = min(center + spread, hi_grid)
        if blo <= bhi and _sign_at(blo, se, n, m, target) <= 0 \
                and _sign_at(bhi, se, n, m, target) >= 0:
            return (blo + bhi) / 2 / float(1 << se)
    # certified bisection fallback on an exact dyadic grid
    e = max(lo_e, hi_e)
    a_c = lo_c << (e - lo_e)
    b_c = hi_c << (e - hi_e)
    for _ in range(80):
        a_c <<= 1
        b_c <<= 1
        e += 1
        mid = (a_c + b_c) >> 1
        if _sign_at(mid, e, n, m, target) <= 0:
            a_c = mid
        else:
            b_c = mid
    return (a_c + b_c) / 2 / float(1 << e)


def _root_seeds(n: int, m: int, a_f: float, b_f: float,
                targets: np.ndarray) -> np.ndarray:
    """Vectorized Newton estimates for x^n - x^m = target, one per target.

    Seeds only; every returned value is re-certified in exact arithmetic.
    """
    grid = np.linspace(a_f, b_f, 4097)
    gv = grid ** n - (grid ** m if m else 1.0)
    xs = np.interp(targets, gv, grid)
    for _ in range(8):
        gx = xs ** n - (xs ** m if m else 1.0)
        dgx = n * xs ** (n - 1) - (m * xs ** (m - 1) if m else 0.0)
        xs = np.clip(xs - (gx - targets) / dgx, a_f, b_f)
    return xs


def _preimage_intervals(n: int, m: int, a: Fraction, b: Fraction,
                        w: Fraction) -> list:
    """Certified intervals where x^n - x^m lies within w of an integer."""
    g_a = _frac_pow(a, n) - _frac_pow(a, m)
    g_b = _frac_pow(b, n) - _frac_pow(b, m)
    m_lo, m_hi = math.floor(g_a), math.ceil(g_b)
    w_f = float(w)
    ms = np.arange(m_lo, m_hi + 1, dtype=float)
    lo_seeds = _root_seeds(n, m, float(a), float(b), ms - w_f)
    hi_seeds = _root_seeds(n, m, float(a), float(b), ms + w_f)
    out = []
    for idx, M in enumerate(range(m_lo, m_hi + 1)):
        lo_t, hi_t = M - w, M + w
        if hi_t < g_a or lo_t > g_b:
            continue
        lo = _certified_root(n, m, lo_t, a, b, seed=float(lo_seeds[idx]))
        hi = _certified_root(n, m, hi_t, a, b, seed=float(hi_seeds[idx]))
        if hi > lo:
            out.append(LevelInterval(M=M, lo=lo, hi=hi))
    return out


def level_intervals(m1: int, m2: int, A, s: float, N: int) -> list:
    """Preimages of the windows [M - 4s/N, M + 4s/N] under x^m1 - x^m2
    on [A, A+1]; the map is strictly increasing there."""
    if not m1 > m2 >= 1:
        raise DomainError(f"need m1 > m2 >= 1, got m1={m1}, m2={m2}")
    A = as_dyadic(A)
    if not A > DyadicRational.from_int(1):
        raise DomainError(f"A must exceed 1, got {A}")
    w = 4 * window_fraction(s) / N
    if not w < Fraction(1, 2):
        raise DomainError(f"window 4s/N = {float(w)} reaches 1/2")
    af = A.as_fraction()
    return _preimage_intervals(m1, m2, af, af + 1, w)


def convexity_measure(f_spec, interval, s: float, N: int,
                      slack: float = 0.25) -> tuple:
    """(exact preimage measure, bound) for {x in [a,b]:
    dist(f(x), Z) <= s/N} with f increasing and convex.

    The bound is 4s(b-a)/N + 4s/(N f'(a)); the measure must stay below
    bound * (1 + slack) or the run is declared numerically broken.
    """
    if isinstance(f_spec, int):
        n, m = f_spec, 0
    else:
        n, m = f_spec
    if not (n > m >= 0 and n >= 1):
        raise DomainError(f"need exponents n > m >= 0, got ({n}, {m})")
    a, b = (as_dyadic(interval[0]), as_dyadic(interval[1]))
    if not (DyadicRational.from_int(1) < a < b):
        raise DomainError(f"need 1 < a < b, got a={a}, b={b}")
    af, bf = a.as_fraction(), b.as_fraction()
    deriv_a = n * _frac_pow(af, n - 1) - m * _frac_pow(af, m - 1)
    curv_a = (n * (n - 1) * _frac_pow(af, n - 2)
              - m * (m - 1) * _frac_pow(af, m - 2))
    if not deriv_a > 0:
        raise DomainError("f is not strictly increasing at the left end")
    if curv_a < 0:
        raise DomainError("f is not convex at the left end")
    w = window_fraction(s) / N
    if not w < Fraction(1, 2):
        raise DomainError(f"window s/N = {float(w)} reaches 1/2")
    pieces = _preimage_intervals(n, m, af, bf, w)
    measure = float(sum(p.length for p in pieces))
    bound = float(4 * window_fraction(s) * (bf - af) / N
                  + 4 * window_fraction(s) / (N * deriv_a))
    if measure > bound * (1.0 + slack):
        raise NumericalError(
            "preimage measure exceeded the convexity bound",
            coarse=measure, fine=bound)
    return measure, bound


# ---------------------------------------------------------------------------
# overlap integral of two window factors
# ---------------------------------------------------------------------------

def _overlap_threshold(n: int, m1: int, m2: int, A: DyadicRational) -> int:
    """Least exponent m making (floor(A^m - A^m2) - 2)^2 >= A^m.

    Feasibility of the sparse-overlap bound only needs the gap between
    consecutive level values of x^n - x^m to dominate sqrt(A^m); raising
    both sides of that inequality to the power 2m/(n - m) removes n from
    the test, so the threshold depends on (m1, m2, A) alone."""
    af = A.as_fraction()
    for m in range(m2 + 1, 501):
        L = math.floor(_frac_pow(af, m) - _frac_pow(af, m2))
        if L >= 3 and Fraction(L - 2) ** 2 >= _frac_pow(af, m):
            return m
    raise DomainError("no feasible overlap threshold below 500")


def pair_overlap_integral(n: int, m1: int, m2: int, A, F: Mollifier,
                          quad_cfg: QuadConfig = DEFAULT_QUAD) -> tuple:
    """(value, bound) for integral over [A, A+1] of
    F(x^n - x^m1) F(x^n - x^m2) dx.

    The integrand lives only on the level intervals of the sparser first
    factor; inside each the second factor's own window boundaries are
    added as cuts, after which every piece is analytic.
    """
    if not (n > m1 >= m2 >= 1):
        raise DomainError(f"need n > m1 >= m2 >= 1, got ({n}, {m1}, {m2})")
    A = as_dyadic(A)
    if not A > DyadicRational.from_int(1):
        raise DomainError(f"A must exceed 1, got {A}")
    if m1 > m2:
        n0 = _overlap_threshold(n, m1, m2, A)
        if m1 < n0:
            raise DomainError(
                f"m1 = {m1} is below the computed feasibility threshold "
                f"N0 = {n0} for (n={n}, m2={m2}, A={A})")
    _check_power_scale(n, float(A) + 1.0)
    af = A.as_fraction()
    edge = F.edge                      # exact half-width of the support
    supports = _preimage_intervals(n, m1, af, af + 1, edge)

    g1, _ = _powpair(n, m1)
    g2, _ = _powpair(n, m2)
    peak = float(F.peak)

    def run(nodes: int) -> float:
        xs_ref, ws_ref = gauss_rule(nodes)
        total = 0.0
        for piece in supports:
            lo, hi = piece.lo, piece.hi
            if not hi > lo:
                continue
            cuts = sorted(set(
                _term_cuts(n, m1, lo, hi, F) + _term_cuts(n, m2, lo, hi, F)))
            edges = [lo] + cuts + [hi]
            for x0, x1 in zip(edges[:-1], edges[1:]):
                if not x1 > x0:
                    continue
                xm = 0.5 * (x0 + x1)
                u1 = abs(g1(xm) - round(g1(xm)))
                u2 = abs(g2(xm) - round(g2(xm)))
                if u1 >= F.edge_f or u2 >= F.edge_f:
                    continue
                if u1 <= F.p_f and u2 <= F.p_f:
                    total += peak * peak * (x1 - x0)
                    continue
                half = 0.5 * (x1 - x0)
                mid = 0.5 * (x1 + x0)
                pts = mid + half * xs_ref
                vals = F.eval_array(g1(pts)) * F.eval_array(g2(pts))
                total += half * float(np.dot(ws_ref, vals))
        return total

    coarse = run(quad_cfg.nodes_per_piece)
    fine = run(2 * quad_cfg.nodes_per_piece)
    if abs(fine - coarse) > quad_cfg.rel_tol * (abs(fine) + 1e-15):
        raise NumericalError(
            "overlap quadrature failed its doubling check",
            coarse=coarse, fine=fine)

    N = F.N
    if m1 == m2:
        bound = C_OVERLAP_EQUAL / N
    else:
        bound = C_OVERLAP_CROSS * (
            1.0 / N ** 2
            + m1 * float(A) ** ((m1 - n) / 2.0) / (N * n * (n - m1)))
    if fine > bound:
        raise NumericalError(
            "overlap integral exceeded its fitted envelope",
            coarse=fine, fine=bound)
    return fine, bound
