"""Command-line front end.

Every subcommand resolves one flat ExperimentConfig (defaults, then an
optional key=value config file, then flags), runs, and emits a JSON
report with the resolved configuration embedded, so a report is always
reproducible from its own header.  Plot-oriented tables are mirrored as
CSV next to the JSON when --out is given.  Human-readable PASS/FAIL
lines go to stderr; stdout stays machine-readable.

Exit codes: 0 all asserted checks passed, 1 a check failed, 2 usage,
3 domain error, 4 failed numerical certification, 5 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import (ExperimentConfig, UsageError, parse_rational,
                     parse_config_file, resolve_config, is_power,
                     subsequence_index)
from .dyadic import DyadicRational
from .errors import DomainError, NumericalError, ResourceError
from . import corr, fourier, hpgen, mollify, probe

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4
EXIT_RESOURCE = 5

PROBE_MODES = ("partition", "y", "z", "condexp", "moment", "vdc",
               "count", "overlap")
# probe modes that slice n = 1..N into K-sized blocks and therefore
# require N to be a 10th power
_BLOCK_MODES = ("partition", "y", "z", "condexp", "moment")


def _say(line: str) -> None:
    print(line, file=sys.stderr)


def _delta_arg(cfg: ExperimentConfig):
    return None if cfg.delta is None else parse_rational(cfg.delta).as_fraction()


def _window(cfg: ExperimentConfig, s: float, N: int) -> mollify.Mollifier:
    maker = mollify.make_inner if cfg.flavor == "inner" else mollify.make_outer
    return maker(s, N, _delta_arg(cfg))


def _sample_for(cfg: ExperimentConfig, idx: int, N: int) -> hpgen.UnitSample:
    """One point set per (sample index, N) according to the control mode."""
    if cfg.control == "uniform":
        return corr.uniform_control(N, cfg.seed + idx)
    if cfg.control == "nalpha":
        return corr.control_nalpha(corr.golden_ratio_dyadic(), N)
    if cfg.control != "none":
        raise UsageError(f"unknown control mode {cfg.control!r}")
    if cfg.x is not None:
        x = parse_rational(cfg.x)
    else:
        x = hpgen.sample_x(parse_rational(cfg.A), cfg.mantissa_bits,
                           cfg.seed + idx)
    return hpgen.ladder_frac_powers(x, parse_rational(cfg.xi), N,
                                    cfg.guard_bits)


def _effective_samples(cfg: ExperimentConfig) -> int:
    # a pinned x or the deterministic {n alpha} control admit one sample
    if cfg.control == "nalpha" or (cfg.control == "none" and cfg.x is not None):
        return 1
    return cfg.samples


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(cfg: ExperimentConfig):
    if cfg.out is None:
        raise UsageError("gen requires --out (path for the sample file)")
    N = cfg.n_values[0]
    sample = _sample_for(cfg, 0, N)
    hpgen.save_sample(sample, cfg.out)
    results = {"path": cfg.out, "x": str(sample.base), "xi": str(sample.xi),
               "N": sample.n_max, "guard_bits": sample.guard_bits,
               "err_bound": sample.err_bound}
    _say(f"PASS gen wrote N={N} points to {cfg.out} "
         f"(err_bound={sample.err_bound:.3g})")
    return results, None, EXIT_OK


def cmd_paircorr(cfg: ExperimentConfig):
    rows = []
    n_samples = _effective_samples(cfg)
    for idx in range(n_samples):
        for N in cfg.n_values:
            sample = _sample_for(cfg, idx, N)
            for s in cfg.s_grid:
                r2 = corr.pair_corr(sample, s)
                ratio = r2 / (2.0 * s)
                row = {"sample": idx, "control": cfg.control, "N": N,
                       "s": s, "r2": r2, "ratio": ratio,
                       "within_tol": abs(ratio - 1.0) <= cfg.tol}
                if cfg.smoothed:
                    row["r2_inner"] = corr.pair_corr_smoothed(
                        sample, mollify.make_inner(s, N, _delta_arg(cfg)))
                    row["r2_outer"] = corr.pair_corr_smoothed(
                        sample, mollify.make_outer(s, N, _delta_arg(cfg)))
                rows.append(row)
    summary = []
    for N in cfg.n_values:
        for s in cfg.s_grid:
            sel = [r for r in rows if r["N"] == N and r["s"] == s]
            frac = sum(r["within_tol"] for r in sel) / len(sel)
            summary.append({"N": N, "s": s, "fraction_within": frac})
    results = {"rows": rows, "summary": summary}
    code = EXIT_OK
    if cfg.control == "nalpha":
        # the asserted check: this control must NOT look Poissonian
        flagged = all(not r["within_tol"] for r in rows)
        results["non_poissonian"] = flagged
        _say(("PASS" if flagged else "FAIL")
             + " nalpha control deviates from the Poisson value 2s")
        code = EXIT_OK if flagged else EXIT_CHECK_FAILED
    else:
        for item in summary:
            _say(f"INFO paircorr N={item['N']} s={item['s']}: "
                 f"{item['fraction_within']:.0%} of {n_samples} samples "
                 f"within {cfg.tol:.0%} of 2s")
    return results, rows, code


def cmd_spacings(cfg: ExperimentConfig):
    rows, ecdf_rows = [], []
    for idx in range(_effective_samples(cfg)):
        for N in cfg.n_values:
            sample = _sample_for(cfg, idx, N)
            ecdf = corr.level_spacings(sample)
            rows.append({"sample": idx, "N": N,
                         "sup_exponential": corr.spacings_sup_exponential(ecdf),
                         "star_discrepancy": corr.star_discrepancy(sample)})
            if idx == 0 and N == max(cfg.n_values):
                ecdf_rows = [{"t": float(t), "ecdf": float(f),
                              "model": 1.0 - math.exp(-float(t))}
                             for t, f in ecdf]
    results = {"rows": rows, "ecdf": ecdf_rows}
    return results, ecdf_rows or rows, EXIT_OK


def cmd_triple(cfg: ExperimentConfig):
    rows = []
    for idx in range(_effective_samples(cfg)):
        for N in cfg.n_values:
            sample = _sample_for(cfg, idx, N)
            for s in cfg.s_grid:
                r3 = corr.triple_corr(sample, s, s)
                rows.append({"sample": idx, "N": N, "s1": s, "s2": s,
                             "r3": r3, "poisson_value": 4.0 * s * s})
    return {"rows": rows}, rows, EXIT_OK


def cmd_mollifier_check(cfg: ExperimentConfig):
    rows = []
    all_ok = True
    for N in cfg.n_values:
        for s in cfg.s_grid:
            for flavor, maker in (("inner", mollify.make_inner),
                                  ("outer", mollify.make_outer)):
                F = maker(s, N, _delta_arg(cfg))
                report = mollify.verify_hypotheses(F, seed=cfg.seed)
                for chk in report.checks:
                    rows.append({"N": N, "s": s, "flavor": flavor,
                                 "index": chk.index, "name": chk.name,
                                 "passed": chk.passed,
                                 "witness": chk.witness})
                ok = report.all_pass
                all_ok &= ok
                _say(f"{'PASS' if ok else 'FAIL'} window hypotheses "
                     f"flavor={flavor} s={s} N={N} "
                     f"({sum(c.passed for c in report.checks)}/"
                     f"{len(report.checks)})")
    return ({"rows": rows, "all_pass": all_ok}, rows,
            EXIT_OK if all_ok else EXIT_CHECK_FAILED)


def cmd_fourier_check(cfg: ExperimentConfig):
    s0 = cfg.s_grid[0]
    N0 = max(cfg.n_values)
    G = mollify.centered(_window(cfg, s0, N0))
    ladder = []
    L = 16
    while L <= 1024:
        ladder.append({"L": L, "sup": fourier.truncation_sup(G, L).sup})
        L *= 2
    monotone = all(b["sup"] <= a["sup"] + 1e-15
                   for a, b in zip(ladder, ladder[1:]))
    results = {"ladder": ladder, "sup_non_increasing": monotone}
    _say(f"{'PASS' if monotone else 'FAIL'} truncation sup non-increasing "
         f"over the doubling cutoff ladder at N={N0}")
    ok = monotone
    if len(cfg.n_values) >= 3:
        rep = fourier.jackson_trend(s0, cfg.n_values)
        results["jackson"] = {
            "n_list": list(rep.n_list), "cutoffs": list(rep.cutoffs),
            "sups": list(rep.sups), "envelopes": list(rep.envelopes),
            "slope": rep.slope, "passed": rep.passed,
            "sups_non_decreasing": rep.sups_non_decreasing}
        _say(f"{'PASS' if rep.passed else 'FAIL'} cutoff-trend slope "
             f"{rep.slope:.3f} (need <= 1.15)")
        ok = ok and rep.passed
    return results, ladder, (EXIT_OK if ok else EXIT_CHECK_FAILED)


def _probe_scheme(cfg: ExperimentConfig) -> probe.BlockScheme:
    N = cfg.n_values[0]
    if not is_power(N, 10):
        raise UsageError(
            f"probe needs N = K^10 to slice blocks; {N} is not a 10th power")
    return probe.blocks(N)


def cmd_probe(cfg: ExperimentConfig, mode: str):
    A = parse_rational(cfg.A)
    s0 = cfg.s_grid[0]
    N0 = cfg.n_values[0]

    if mode in _BLOCK_MODES:
        scheme = _probe_scheme(cfg)
        G = mollify.centered(_window(cfg, s0, scheme.N))

    if mode == "partition":
        part = probe.filtration(A, cfg.k, scheme.K)
        results = {"A": str(A), "k": cfg.k, "K": scheme.K,
                   "atoms": part.N_k,
                   "mus": list(part.mus) if part.N_k <= 4096 else
                          [r.mu for r in part.runs],
                   "runs": [{"start": str(r.start), "mu": r.mu,
                             "count": r.count} for r in part.runs]}
        if part.N_k <= 4096:
            results["z"] = [str(z) for z in part.z]
        _say(f"PASS partition A={A} k={cfg.k} K={scheme.K}: "
             f"{part.N_k} atoms, {len(part.runs)} runs")
        return results, results["runs"], EXIT_OK

    if mode == "y":
        rows = []
        for idx in range(cfg.samples):
            sample = _sample_for(cfg, idx, scheme.N)
            rows.append({"sample": idx, "x": str(sample.base), "k": cfg.k,
                         "y": probe.block_sum_Y(sample, cfg.k, scheme, G)})
        _say(f"INFO block sum Y_k at k={cfg.k}, N={scheme.N}: "
             f"max |y| = {max(abs(r['y']) for r in rows):.6g} "
             f"over {len(rows)} samples")
        return {"rows": rows}, rows, EXIT_OK

    if mode == "z":
        z_val = probe.cond_exp_Z(A, cfg.k, scheme, G, cfg.atom_index)
        weighted, direct, rel = probe.tower_check(A, cfg.k, scheme, G)
        ok = rel <= 1e-6
        results = {"z_atom": z_val, "atom_index": cfg.atom_index,
                   "tower_weighted": weighted, "tower_direct": direct,
                   "tower_rel_gap": rel, "tower_ok": ok}
        _say(f"{'PASS' if ok else 'FAIL'} tower property k={cfg.k}: "
             f"relative gap {rel:.3g}")
        return results, None, EXIT_OK if ok else EXIT_CHECK_FAILED

    if mode == "condexp":
        rep = probe.cond_exp_cross(A, cfg.j, cfg.k, scheme, G,
                                   atom_sample=cfg.sample_count)
        _say(f"INFO conditional expectation across levels j={cfg.j} "
             f"k={cfg.k}: max |E| = {max(abs(v) for v in rep.measured):.3g}")
        return rep.to_json_dict(), None, EXIT_OK

    if mode == "moment":
        rep = probe.parity_moment(A, scheme, G, cfg.parity, cfg.mc_samples,
                                  cfg.seed, cfg.mantissa_bits)
        _say(f"INFO {cfg.parity}-parity second moment at N={scheme.N}: "
             f"{rep.measured[0]:.6g}")
        return rep.to_json_dict(), None, EXIT_OK

    if mode == "vdc":
        a, b = parse_rational(cfg.a), parse_rational(cfg.b)
        rows = []
        for l in cfg.l_values:
            for n in cfg.n_powers:
                for m in cfg.m_powers:
                    if not n > m >= 1:
                        continue
                    value, bound = probe.vdc_bound_check(a, b, l, n, m)
                    rows.append({"l": l, "n": n, "m": m,
                                 "abs_integral": value, "bound": bound,
                                 "within": value <= bound})
        if not rows:
            raise UsageError("no (l, n, m) tuples with n > m >= 1")
        _say(f"PASS oscillatory bound on {len(rows)}/{len(rows)} tuples")
        return {"rows": rows}, rows, EXIT_OK

    if mode == "count":
        intervals = probe.level_intervals(cfg.m1, cfg.m2, A, s0, N0)
        rows = [{"M": iv.M, "lo": iv.lo, "hi": iv.hi, "length": iv.length}
                for iv in intervals]
        total = sum(iv.length for iv in intervals)
        measure, bound = probe.convexity_measure((cfg.m1, cfg.m2),
                                                 (A, A + DyadicRational.from_int(1)),
                                                 s0, N0)
        results = {"rows": rows, "total_level_measure": total,
                   "window_measure": measure, "window_bound": bound}
        _say(f"PASS level-set measure m1={cfg.m1} m2={cfg.m2}: "
             f"{len(rows)} intervals, measure {measure:.3g} "
             f"<= bound {bound:.3g}")
        return results, rows, EXIT_OK

    if mode == "overlap":
        F = mollify.make_outer(s0, N0, _delta_arg(cfg))
        value, bound = probe.pair_overlap_integral(
            cfg.n_powers[0], cfg.m1, cfg.m2, A, F)
        results = {"n": cfg.n_powers[0], "m1": cfg.m1, "m2": cfg.m2,
                   "value": value, "bound": bound}
        _say(f"PASS window-product overlap n={cfg.n_powers[0]} "
             f"m1={cfg.m1} m2={cfg.m2}: {value:.3g} <= {bound:.3g}")
        return results, None, EXIT_OK

    raise UsageError(f"unknown probe mode {mode!r}")


def _ladder_work_units(A_plus_1_log2: float, N: int) -> float:
    """Coarse operation count for one power ladder: N steps on numbers of
    about N log2(A+1) bits."""
    return N * (N * A_plus_1_log2 + 64.0)


def _sweep_sample(args: tuple) -> tuple:
    """Worker: all (N, s) statistics for one seeded x-sample."""
    (idx, A_str, xi_str, bits, seed, n_values, s_grid, guard, tol) = args
    A = parse_rational(A_str)
    x = hpgen.sample_x(A, bits, seed + idx)
    rows = []
    for N in n_values:
        sample = hpgen.ladder_frac_powers(x, parse_rational(xi_str), N, guard)
        M = subsequence_index(N)
        squeeze = ((M + 1) / M) ** 20
        for s in s_grid:
            r2 = corr.pair_corr(sample, s)
            ratio = r2 / (2.0 * s)
            rows.append({"sample": idx, "x": str(x), "N": N, "M": M,
                         "squeeze": squeeze, "s": s, "r2": r2,
                         "ratio": ratio,
                         "within_tol": abs(ratio - 1.0) <= tol})
    return idx, rows


def cmd_sweep(cfg: ExperimentConfig):
    if cfg.samples < 10:
        raise UsageError(
            f"sweep needs at least 10 x-samples, got {cfg.samples}")
    if cfg.subsequence:
        bad = [N for N in cfg.n_values if not is_power(N, 20)]
        if bad:
            raise UsageError(
                f"subsequence mode needs every N = M^20, got {bad}")

    log_a1 = math.log2(float(parse_rational(cfg.A)) + 1.0)
    per_sample = sum(_ladder_work_units(log_a1, N) for N in cfg.n_values)
    budgeted = min(cfg.samples, max(int(cfg.work_cap // per_sample), 0))
    partial = budgeted < cfg.samples
    if budgeted == 0:
        raise ResourceError(
            f"work cap {cfg.work_cap} cannot fund even one sample "
            f"(about {per_sample:.3g} units each)")

    workers = cfg.workers or int(os.environ.get("POWCORR_WORKERS", "0")) or None
    jobs = [(idx, cfg.A, cfg.xi, cfg.mantissa_bits, cfg.seed,
             tuple(cfg.n_values), tuple(cfg.s_grid), cfg.guard_bits, cfg.tol)
            for idx in range(budgeted)]
    if workers == 1 or len(jobs) == 1:
        outcomes = [_sweep_sample(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_sample, jobs))
    outcomes.sort(key=lambda t: t[0])
    rows = [row for _, sample_rows in outcomes for row in sample_rows]

    summary = []
    for N in cfg.n_values:
        for s in cfg.s_grid:
            sel = [r for r in rows if r["N"] == N and r["s"] == s]
            frac = sum(r["within_tol"] for r in sel) / len(sel)
            summary.append({"N": N, "s": s, "fraction_within": frac,
                            "samples": len(sel)})
    top_n = max(cfg.n_values)
    gate = all(item["fraction_within"] >= cfg.q
               for item in summary if item["N"] == top_n)
    results = {"rows": rows, "summary": summary, "partial": partial,
               "samples_run": budgeted, "samples_requested": cfg.samples,
               "poissonian": gate}
    for item in summary:
        mark = " (asserted)" if item["N"] == top_n else ""
        _say(f"INFO sweep N={item['N']} s={item['s']}: "
             f"{item['fraction_within']:.0%} within tolerance{mark}")
    _say(f"{'PASS' if gate else 'FAIL'} sweep fraction >= {cfg.q:.0%} "
         f"at N={top_n} for every s")
    if partial:
        _say(f"FAIL sweep stopped at the work cap after {budgeted} of "
             f"{cfg.samples} samples; report is partial")
        return results, rows, EXIT_RESOURCE
    return results, rows, EXIT_OK if gate else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser and dispatch


def _add_common(sp: argparse.ArgumentParser) -> None:
    add = sp.add_argument
    add("--config", default=None, help="key=value config file")
    add("--A", dest="A", default=None, help="left endpoint of [A, A+1]")
    add("--x", dest="x", default=None, help="pin the base x (rational)")
    add("--xi", dest="xi", default=None, help="multiplier xi (rational)")
    add("--mantissa-bits", dest="mantissa_bits", type=int, default=None)
    add("--seed", dest="seed", type=int, default=None)
    add("--N", dest="n_values", default=None,
        help="comma-separated N values")
    add("--s", dest="s_grid", default=None,
        help="comma-separated window scales")
    add("--guard-bits", dest="guard_bits", type=int, default=None)
    add("--delta", dest="delta", default=None, help="window ramp width")
    add("--flavor", dest="flavor", choices=("inner", "outer"), default=None)
    add("--smoothed", dest="smoothed", action="store_const", const=True,
        default=None, help="also report smoothed pair statistics")
    add("--control", dest="control", choices=("none", "uniform", "nalpha"),
        default=None)
    add("--samples", dest="samples", type=int, default=None)
    add("--q", dest="q", type=float, default=None,
        help="required fraction of samples within tolerance")
    add("--tol", dest="tol", type=float, default=None)
    add("--subsequence", dest="subsequence", action="store_const", const=True,
        default=None, help="restrict sweeps to N = M^20")
    add("--work-cap", dest="work_cap", type=int, default=None)
    add("--k", dest="k", type=int, default=None, help="block index")
    add("--j", dest="j", type=int, default=None, help="coarser block index")
    add("--atom-index", dest="atom_index", type=int, default=None)
    add("--parity", dest="parity", choices=("odd", "even"), default=None)
    add("--mc-samples", dest="mc_samples", type=int, default=None)
    add("--sample-count", dest="sample_count", type=int, default=None)
    add("--l", dest="l_values", default=None,
        help="comma-separated frequency multipliers")
    add("--n-powers", dest="n_powers", default=None,
        help="comma-separated larger exponents")
    add("--m-powers", dest="m_powers", default=None,
        help="comma-separated smaller exponents")
    add("--m1", dest="m1", type=int, default=None)
    add("--m2", dest="m2", type=int, default=None)
    add("--a", dest="a", default=None, help="interval left endpoint")
    add("--b", dest="b", default=None, help="interval right endpoint")
    add("--out", dest="out", default=None,
        help="output path (sample file for gen, else JSON/CSV prefix)")
    add("--workers", dest="workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powcorr",
        description="Correlation statistics of fractional parts of"
                    " xi * x^n, with exactness probes for every"
                    " constructive step of the analysis.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
            ("gen", "generate and save one certified sample file"),
            ("paircorr", "pair correlation over a sample/N/s grid"),
            ("spacings", "nearest-neighbour spacing statistics"),
            ("triple", "third correlation over the s grid"),
            ("mollifier-check", "verify the window hypotheses"),
            ("fourier-check", "truncation ladder and cutoff trend"),
            ("probe", "exactness probes for the constructive analysis"),
            ("sweep", "multi-sample Poissonian verdict with gating")):
        sp = subs.add_parser(name, help=blurb)
        if name == "probe":
            sp.add_argument("mode", choices=PROBE_MODES)
        _add_common(sp)
    return parser


_FLAG_KEYS = tuple(f.name for f in dataclasses.fields(ExperimentConfig))


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    flag_values = {key: getattr(args, key, None) for key in _FLAG_KEYS}
    return resolve_config(file_values, flag_values)


_DISPATCH = {
    "gen": cmd_gen,
    "paircorr": cmd_paircorr,
    "spacings": cmd_spacings,
    "triple": cmd_triple,
    "mollifier-check": cmd_mollifier_check,
    "fourier-check": cmd_fourier_check,
    "sweep": cmd_sweep,
}


def _emit(command: str, cfg: ExperimentConfig, results: dict,
          csv_rows) -> None:
    payload = {"schema": 1, "command": command,
               "config": cfg.to_json_dict(), "results": results}
    text = json.dumps(payload, indent=2, default=str)
    if cfg.out and command != "gen":
        with open(cfg.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        if csv_rows:
            with open(cfg.out + ".csv", "w", encoding="utf-8",
                      newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(csv_rows[0]))
                writer.writeheader()
                writer.writerows(csv_rows)
    else:
        print(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.command == "probe":
            results, csv_rows, code = cmd_probe(cfg, args.mode)
        else:
            results, csv_rows, code = _DISPATCH[args.command](cfg)
        _emit(args.command, cfg, results, csv_rows)
        return code
    except UsageError as exc:
        _say(f"usage error: {exc}")
        return EXIT_USAGE
    except DomainError as exc:
        _say(f"domain error: {exc}")
        return EXIT_DOMAIN
    except NumericalError as exc:
        _say(f"numerical certification failed: {exc}")
        return EXIT_NUMERICAL
    except ResourceError as exc:
        _say(f"resource cap: {exc}")
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
