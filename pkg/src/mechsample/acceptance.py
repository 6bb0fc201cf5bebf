"""Acceptance harness: every headline guarantee as a pass/fail check.

Each criterion is a function returning a CriterionResult with its metrics,
CSV-ready rows and a pass flag; ``run_all`` executes the whole battery.
Tolerances are pinned here and can only be overridden explicitly (the
``reproduce-all`` manifest records the delta when a check fails).  All
randomness flows from fixed per-criterion master seeds, so reruns are
byte-identical.
"""

from __future__ import annotations

import functools
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from mechsample import vandermonde as vd
from mechsample.ascending import (
    ascending_auction,
    inclusion_rate_experiment,
    simultaneous_additive,
    truthfulness_probe,
)
from mechsample.facility import SampleSpec, approx_median, make_counterexample, sampling_percentile
from mechsample.kernel import vcg_oracle
from mechsample.multiunit import multi_unit_auction
from mechsample.plurality import SingleMindedProfile, approx_plurality, plurality, sample_size, social_welfare
from mechsample.seeding import trial_rng
from mechsample.spaces import Instance, Line, StarTree, median, social_cost
from mechsample.valuations import ValuationProfile

# Reference grids from the appendix tables (4-decimal prints).
REF_EXPECTED_ABS_RANK = {
    (100, 10): 0.1603, (500, 10): 0.1667, (1000, 10): 0.1674, (2000, 10): 0.1678, (5000, 10): 0.1680,
    (100, 20): 0.1100, (500, 20): 0.1200, (1000, 20): 0.1212, (2000, 20): 0.1218, (5000, 20): 0.1222,
    (100, 30): 0.0848, (500, 30): 0.0979, (1000, 30): 0.0994, (2000, 30): 0.1002, (5000, 30): 0.1006,
    (100, 40): 0.0683, (500, 40): 0.0843, (1000, 40): 0.0861, (2000, 40): 0.0870, (5000, 40): 0.0875,
    (100, 50): 0.0559, (500, 50): 0.0748, (1000, 50): 0.0769, (2000, 50): 0.0778, (5000, 50): 0.0784,
}
REF_TV = {
    (100, 10): 0.0472, (500, 10): 0.0090, (1000, 10): 0.0045, (2000, 10): 0.0022, (5000, 10): 0.0009,
    (100, 20): 0.1041, (500, 20): 0.0190, (1000, 20): 0.0094, (2000, 20): 0.0047, (5000, 20): 0.0019,
    (100, 30): 0.1685, (500, 30): 0.0292, (1000, 30): 0.0144, (2000, 30): 0.0071, (5000, 30): 0.0028,
    (100, 40): 0.2422, (500, 40): 0.0396, (1000, 40): 0.194, (2000, 40): 0.0096, (5000, 40): 0.0038,
    (100, 50): 0.3286, (500, 50): 0.0502, (1000, 50): 0.0245, (2000, 50): 0.0121, (5000, 50): 0.0048,
}
# This printed cell is inconsistent with its neighbors (10x the expected
# magnitude, almost surely a misprint of 0.0194); the check must flag it
# rather than match it.
TV_TYPO_CELL = (1000, 40)


@dataclass
class CriterionResult:
    cid: int
    title: str
    passed: bool
    metrics: dict
    seconds: float = 0.0
    detail: str = ""
    rows: list = field(default_factory=list)


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(**kwargs) -> CriterionResult:
        t0 = time.perf_counter()
        res = fn(**kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    return wrapper


@_timed
def criterion_01_expected_rank_table(tol: float = 2e-4) -> CriterionResult:
    rows, worst = [], 0.0
    for (kappa, rho), ref in sorted(REF_EXPECTED_ABS_RANK.items()):
        val = vd.expected_abs_rank(vd.VandermondeDist(kappa, rho))
        delta = abs(val - ref)
        worst = max(worst, delta)
        rows.append({"kappa": kappa, "rho": rho, "e_abs_rank": f"{val:.6f}",
                     "reference": ref, "delta": f"{delta:.2e}"})
    return CriterionResult(
        1, "expected |rank| table (25 cells)", worst <= tol,
        {"worst_delta": worst, "tolerance": tol}, rows=rows,
    )


@_timed
def criterion_02_tv_table(tol: float = 0.005) -> CriterionResult:
    rows, worst = [], 0.0
    typo_flagged = False
    typo_value = None
    for (kappa, rho), ref in sorted(REF_TV.items()):
        val = vd.tv_distance(vd.VandermondeDist(kappa, rho))
        delta = abs(val - ref)
        if (kappa, rho) == TV_TYPO_CELL:
            typo_flagged = delta > tol
            typo_value = val
            rows.append({"kappa": kappa, "rho": rho, "tv": f"{val:.6f}",
                         "reference": ref, "delta": f"{delta:.2e}", "note": "flagged-misprint"})
            continue
        worst = max(worst, delta)
        rows.append({"kappa": kappa, "rho": rho, "tv": f"{val:.6f}",
                     "reference": ref, "delta": f"{delta:.2e}", "note": ""})
    return CriterionResult(
        2, "TV-distance table (24 cells + misprint flag)",
        worst <= tol and typo_flagged,
        {"worst_delta": worst, "tolerance": tol,
         "typo_cell_value": typo_value, "typo_flagged": typo_flagged},
        detail=f"cell {TV_TYPO_CELL} computes to {typo_value:.4f}, printed 0.194",
    )


@_timed
def criterion_03_vandermonde_identity(max_kappa: int = 200) -> CriterionResult:
    ok = vd.verify_identity_upto(max_kappa)
    return CriterionResult(
        3, f"exact rank-pmf normalization identity, every kappa <= {max_kappa}",
        ok, {"max_kappa": max_kappa},
    )


@_timed
def criterion_04_moment_law(
    band: tuple = (0.5, 1.2), agree_tol: float = 1e-3
) -> CriterionResult:
    scaled = [vd.abs_moment(rho, 1) * math.sqrt(rho) for rho in range(10, 501)]
    lo, hi = min(scaled), max(scaled)
    in_band = band[0] <= lo and hi <= band[1]
    worst = 0.0
    for rho in (10, 20, 30, 40, 50):
        gap = abs(vd.expected_abs_rank(vd.VandermondeDist(5000, rho)) - vd.abs_moment(rho, 1))
        worst = max(worst, gap)
    return CriterionResult(
        4, "E|X| scaling band and kappa=5000 convergence", in_band and worst <= agree_tol,
        {"band_min": lo, "band_max": hi, "worst_convergence_gap": worst, "tolerance": agree_tol},
    )


@_timed
def criterion_05_sampling_median(
    n: int = 100_001, trials: int = 200, mean_bound: float = 1.1,
    frac_bound: float = 0.9, seed: int = 501,
) -> CriterionResult:
    rows = []
    ratios_mean, ratios_whp = [], []
    for t in range(trials):
        rng = trial_rng(seed, t)
        inst = Instance(Line(), rng.random(n).tolist())
        for label, spec in (
            ("expectation", SampleSpec(epsilon=0.1, delta=1.0, seed=seed * 1000 + t)),
            ("whp", SampleSpec(epsilon=0.1, delta=0.1, seed=seed * 2000 + t)),
        ):
            out = approx_median(inst, spec)
            (ratios_mean if label == "expectation" else ratios_whp).append(out.ratio_vs_optimal)
            rows.append({"trial": t, "mode": label, "c": spec.sample_size(n),
                         "sc": f"{out.social_cost:.6f}", "ratio": f"{out.ratio_vs_optimal:.8f}"})
    mean_ratio = float(np.mean(ratios_mean))
    frac_ok = float(np.mean([r <= mean_bound for r in ratios_whp]))
    return CriterionResult(
        5, "sampling median on the line (mean and w.h.p.)",
        mean_ratio <= mean_bound and frac_ok >= frac_bound,
        {"mean_ratio_c101": mean_ratio, "frac_within_1.1_c10001": frac_ok,
         "mean_bound": mean_bound, "frac_bound": frac_bound}, rows=rows,
    )


@_timed
def criterion_06_star_counterexample(
    n: int = 100, c: int = 50, trials: int = 10_000,
    freq_tol: float = 0.02, seed: int = 601,
) -> CriterionResult:
    inst = Instance(StarTree(n), range(n))
    expected_ratio = 2.0 - 1.0 / (n - 1)
    non_center = 0
    ratio_exact = True
    for t in range(trials):
        out = approx_median(inst, SampleSpec(epsilon=1.0, c=c, seed=seed * 100_000 + t))
        if out.facilities[0] != 0:
            non_center += 1
            ratio_exact &= out.ratio_vs_optimal == expected_ratio
    freq = non_center / trials
    hypergeom = math.comb(n - 1, c) / math.comb(n, c)
    return CriterionResult(
        6, "star-graph sampling counterexample",
        abs(freq - 0.5) <= freq_tol and ratio_exact and hypergeom == 0.5,
        {"non_center_freq": freq, "freq_tol": freq_tol,
         "ratio_exact": ratio_exact, "no_center_probability": hypergeom},
    )


@_timed
def criterion_07_percentile_counterexample(
    n: int = 10, alpha: float = 0.5, inner: float = 1.0,
    growth_bound: float = 500.0, seed: int = 701,
) -> CriterionResult:
    """Exact expected ratio by enumerating every without-replacement sample."""
    c = int(alpha * n)
    expected = {}
    for sep in (1e3, 1e6):
        inst = make_counterexample(n, alpha, sep, inner)
        pts = np.asarray(inst.points)
        full_sc = None
        total = 0.0
        combos = list(itertools.combinations(range(n), c))
        for combo in combos:
            sample = pts[list(combo)]
            facs = (sample.min(), sample.max())  # ranks (1, n) map to (1, c)
            sc = np.minimum(np.abs(pts - facs[0]), np.abs(pts - facs[1])).sum()
            if full_sc is None:
                full_sc = np.minimum(np.abs(pts - pts.min()), np.abs(pts - pts.max())).sum()
            total += sc / full_sc
        expected[sep] = total / len(combos)
    growth = expected[1e6] / expected[1e3]
    # spot-check that the library's sampled mechanism agrees with the oracle
    inst = make_counterexample(n, alpha, 1e6, inner)
    probe = sampling_percentile(inst, (1, n), c, seed=seed)
    return CriterionResult(
        7, "percentile counterexample: expected ratio grows with separation",
        growth >= growth_bound,
        {"expected_ratio_l1e3": expected[1e3], "expected_ratio_l1e6": expected[1e6],
         "growth": growth, "growth_bound": growth_bound,
         "library_probe_ratio": probe.ratio_vs_optimal},
    )


@_timed
def criterion_08_ascending_correctness(
    runs: int = 10_000, k: int = 8, seed: int = 801
) -> CriterionResult:
    sizes = (10, 100, 1000, 10_000)
    cs = (2, 8, 32)
    matches = 0
    total = 0
    per_config = runs // (len(sizes) * 2)
    for sub in ("sealed", "english"):
        for n in sizes:
            for t in range(per_config):
                prof = ValuationProfile.uniform(n, k, seed=seed + total)
                c = min(cs[t % len(cs)], n)
                out = ascending_auction(prof, sub=sub, c=c, seed=seed * 7 + total)
                matches += out.stats["vcg_match"]
                total += 1
    return CriterionResult(
        8, "ascending auction equals the VCG oracle",
        matches == total, {"runs": total, "matches": matches},
    )


@_timed
def criterion_09_ascending_bits(
    n: int = 100_000, trials: int = 50,
    sealed_bound: float = 1.15, english_bound: float = 1.5, seed: int = 901,
) -> CriterionResult:
    rows = []
    means = {}
    for sub, k, bound in (("sealed", 16, sealed_bound), ("english", 8, english_bound)):
        bpa = []
        for t in range(trials):
            prof = ValuationProfile.uniform(n, k, seed=seed + 97 * t + (0 if sub == "sealed" else 1))
            out = ascending_auction(prof, sub=sub, c=100, seed=seed * 11 + t)
            if not out.stats["vcg_match"]:
                return CriterionResult(9, "ascending auction communication", False,
                                       {"error": f"vcg mismatch in {sub} trial {t}"})
            bpa.append(out.bits_per_agent)
            rows.append({"trial": t, "n": n, "c": 100, "sub": sub, "rounds": out.rounds,
                         "total_bits": out.total_bits,
                         "bits_per_agent": f"{out.bits_per_agent:.6f}",
                         "vcg_match": int(out.stats["vcg_match"])})
        means[sub] = float(np.mean(bpa))
    passed = means["sealed"] <= sealed_bound and means["english"] <= english_bound
    return CriterionResult(
        9, "ascending auction bits per agent", passed,
        {"sealed_mean": means["sealed"], "sealed_bound": sealed_bound,
         "english_mean": means["english"], "english_bound": english_bound}, rows=rows,
    )


@_timed
def criterion_10_inclusion_rate(
    n: int = 100_000, c: int = 9, trials: int = 1000,
    mean_band: tuple = (0.18, 0.22), var_rel_tol: float = 0.25, seed: int = 1001,
) -> CriterionResult:
    st = inclusion_rate_experiment(n, c, trials, seed=seed)
    var_rel = abs(st["variance"] - st["predicted_variance"]) / st["predicted_variance"]
    passed = mean_band[0] <= st["mean"] <= mean_band[1] and var_rel <= var_rel_tol
    return CriterionResult(
        10, "one-round inclusion rate", passed,
        {**st, "variance_rel_err": var_rel, "var_rel_tol": var_rel_tol},
    )


@_timed
def criterion_11_multi_item(
    n: int = 100_000, m: int = 3, k: int = 8, delta: float = 0.1,
    trials: int = 5, bits_bound: float = 1.3, seed: int = 1101,
) -> CriterionResult:
    rows, bpa, per_round = [], [], []
    all_match = True
    for t in range(trials):
        prof = ValuationProfile.uniform(n, k, seed=seed + t, m=m)
        out = simultaneous_additive(prof, delta=delta, seed=seed * 13 + t)
        all_match &= out.stats["vcg_match"]
        bpa.append(out.bits_per_agent)
        per_round.append(float(np.mean(out.message_bits_per_round)))
        rows.append({"trial": t, "n": n, "c": out.stats["c"], "rounds": out.rounds,
                     "total_bits": out.total_bits,
                     "bits_per_agent": f"{out.bits_per_agent:.6f}",
                     "vcg_match": int(out.stats["vcg_match"])})
    mean_bpa = float(np.mean(bpa))
    mean_round_bits = float(np.mean(per_round))
    passed = all_match and mean_bpa <= bits_bound and mean_round_bits <= n * (1 + delta)
    return CriterionResult(
        11, "simultaneous multi-item auction", passed,
        {"vcg_all": all_match, "mean_bits_per_agent": mean_bpa, "bits_bound": bits_bound,
         "mean_per_round_message_bits": mean_round_bits, "round_bound": n * (1 + delta)},
        rows=rows,
    )


@_timed
def criterion_12_multi_unit_correctness(runs: int = 1000, seed: int = 1201) -> CriterionResult:
    matches = 0
    total = 0
    sizes = (8, 64, 256, 1000)
    while total < runs:
        n = sizes[total % len(sizes)]
        k = (4, 8)[total % 2]
        m = (1, max(1, n // 4), max(1, n // 2))[total % 3]
        prof = ValuationProfile.uniform(n, k, seed=seed + total)
        out = multi_unit_auction(prof, m, epsilon=0.1, delta=0.1, seed=seed * 17 + total)
        ow, op = vcg_oracle(prof, m)
        matches += int(out.winners == ow and out.payment == op)
        total += 1
    return CriterionResult(
        12, "two-price multi-unit auction equals the VCG oracle",
        matches == total, {"runs": total, "matches": matches},
    )


@_timed
def criterion_13_multi_unit_bits(
    k: int = 16, epsilon: float = 0.1, delta: float = 0.05,
    trials: int = 3, bound: float = 2.0, seed: int = 1301,
) -> CriterionResult:
    rows = []
    means = {}
    for n in (100_000, 1_000_000):
        bpa = []
        for t in range(trials):
            prof = ValuationProfile.uniform(n, k, seed=seed + t)
            out = multi_unit_auction(prof, int(0.3 * n), epsilon=epsilon, delta=delta,
                                     seed=seed * 19 + t)
            if not out.stats["vcg_match"]:
                return CriterionResult(13, "multi-unit communication trend", False,
                                       {"error": f"vcg mismatch at n={n} trial {t}"})
            bpa.append(out.bits_per_agent)
            rows.append({"trial": t, "n": n, "m": int(0.3 * n), "rounds": out.rounds,
                         "retries": out.stats["retries"],
                         "estimator_bits": out.stats["estimator_bits"],
                         "agent_bits": out.total_bits - out.stats["estimator_bits"],
                         "bits_per_agent": f"{out.bits_per_agent:.6f}",
                         "vcg_match": int(out.stats["vcg_match"])})
        means[n] = float(np.mean(bpa))
    passed = means[1_000_000] <= bound and means[1_000_000] < means[100_000]
    return CriterionResult(
        13, "multi-unit bits per agent decrease with n", passed,
        {"mean_bpa_1e5": means[100_000], "mean_bpa_1e6": means[1_000_000], "bound": bound},
        rows=rows,
    )


def _median_misreport_clean(grid: range, max_n: int = 5) -> bool:
    """Brute force: no unilateral misreport moves the median closer to the liar."""
    for n in range(2, max_n + 1):
        for pts in itertools.product(grid, repeat=n):
            inst = Instance(Line(), pts)
            fac = median(inst)
            for agent in range(n):
                truth_dist = abs(pts[agent] - fac)
                for lie in grid:
                    moved = list(pts)
                    moved[agent] = lie
                    fac2 = median(Instance(Line(), moved))
                    if abs(pts[agent] - fac2) < truth_dist - 1e-12:
                        return False
    return True


@_timed
def criterion_14_truthfulness(seeds: int = 50, seed0: int = 1401) -> CriterionResult:
    profiles = [ValuationProfile(3, [5, 3, 7, 2]), ValuationProfile(3, [1, 6, 6, 0])]
    mechanisms = {
        "ascending_sealed": lambda p, s: ascending_auction(p, sub="sealed", c=2, seed=s),
        "ascending_english": lambda p, s: ascending_auction(p, sub="english", c=2, seed=s),
        "multi_unit": lambda p, s: multi_unit_auction(p, 2, epsilon=0.5, delta=0.5, seed=s, c=8),
    }
    counts = {}
    clean = True
    for name, mech in mechanisms.items():
        profitable = 0
        runs = 0
        for prof in profiles:
            rep = truthfulness_probe(prof, mech, seeds=range(seed0, seed0 + seeds))
            profitable += len(rep.profitable)
            runs += rep.runs
        counts[name] = profitable
        clean &= profitable == 0

    multi_prof = ValuationProfile(2, [[3, 1], [0, 2], [2, 3], [1, 0]])
    rep = truthfulness_probe(
        multi_prof,
        lambda p, s: simultaneous_additive(p, delta=0.5, seed=s, c=2),
        seeds=range(seed0, seed0 + seeds),
    )
    counts["multi_item"] = len(rep.profitable)
    clean &= rep.clean

    median_ok = _median_misreport_clean(range(4), max_n=5)
    counts["median_grid_clean"] = int(median_ok)
    clean &= median_ok
    return CriterionResult(
        14, "no profitable unilateral misreports", clean,
        {**counts, "seeds": seeds},
    )


@_timed
def criterion_15_plurality(
    n: int = 10_000, trials: int = 10_000,
    ratio_bound: float = 0.9, frac_bound: float = 0.9, seed: int = 1501,
) -> CriterionResult:
    prof = SingleMindedProfile.near_tie(n, 2)
    c = sample_size(2, 0.1, 0.1)
    sw_opt = social_welfare(prof, plurality(prof))
    good = 0
    for t in range(trials):
        w = approx_plurality(prof, 0.1, 0.1, seed=seed * 100_000 + t, c=c)
        good += social_welfare(prof, w) / sw_opt >= ratio_bound
    frac = good / trials
    return CriterionResult(
        15, "near-tie plurality welfare", frac >= frac_bound,
        {"c": c, "frac_ratio_ge_0.9": frac, "frac_bound": frac_bound},
    )


ALL_CRITERIA = (
    criterion_01_expected_rank_table,
    criterion_02_tv_table,
    criterion_03_vandermonde_identity,
    criterion_04_moment_law,
    criterion_05_sampling_median,
    criterion_06_star_counterexample,
    criterion_07_percentile_counterexample,
    criterion_08_ascending_correctness,
    criterion_09_ascending_bits,
    criterion_10_inclusion_rate,
    criterion_11_multi_item,
    criterion_12_multi_unit_correctness,
    criterion_13_multi_unit_bits,
    criterion_14_truthfulness,
    criterion_15_plurality,
)


def run_all(overrides: dict | None = None) -> list[CriterionResult]:
    """Run every criterion; ``overrides`` maps criterion id to kwargs."""
    overrides = overrides or {}
    results = []
    for fn in ALL_CRITERIA:
        cid = int(fn.__name__.split("_")[1])
        results.append(fn(**overrides.get(cid, {})))
    return results
