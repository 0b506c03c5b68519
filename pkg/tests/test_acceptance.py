"""Acceptance battery: one test and one printed verdict line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete.  Every clause is asserted at its stated tolerance; a criterion
that fails does so loudly, with the measured number in the message, rather
than being weakened until it fits.
"""

import inspect
import math

import numpy as np
import pytest

from artifact import channel as ch
from artifact import codec_compound as cc
from artifact import harness, info
from artifact.channel import Dmc, StateDistribution


def verdict(num: int, name: str, clauses: dict[str, bool], extra: str = ""):
    ok = all(clauses.values())
    status = "PASS" if ok else "FAIL"
    detail = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in clauses.items())
    tail = f" [{extra}]" if extra else ""
    print(f"criterion {num:2d} {name:<34s} {status}  ({detail}){tail}")
    assert ok, f"criterion {num}: {detail}{tail}"


def binom_se(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


def test_criterion_01_energy_capacity_closed_form():
    base = info.gaussian_capacity_per_unit_energy(1.0, 1.0)
    want = 1.0 / (2.0 * math.log(2.0))
    exact = abs(base - want) <= 1e-9
    scaled = True
    for mu in (0.25, 0.5, 1.0, 2.0, 4.0):
        for eta2 in (0.25, 1.0, 4.0):
            got = info.gaussian_capacity_per_unit_energy(mu, eta2)
            if not math.isclose(got, base * mu / eta2, rel_tol=1e-12):
                scaled = False
    verdict(1, "energy capacity closed form",
            {"value": exact, "mu/eta2 scaling": scaled},
            f"value {base:.9f}")


def test_criterion_02_ratio_formula_vs_brute_force():
    rng = np.random.default_rng(20240811)
    worst = 0.0
    for _ in range(20):
        w = rng.dirichlet(np.ones(3), size=3)
        cost = np.concatenate(([0.0], rng.uniform(0.2, 3.0, size=2)))
        dmc = Dmc(w, cost)
        got = info.capacity_per_unit_cost(dmc).value
        oracle = max(info.kl_divergence(w[x], w[0]) / cost[x] for x in (1, 2))
        worst = max(worst, abs(got - oracle) / oracle)
    verdict(2, "ratio formula vs brute force",
            {"20 random channels to 1e-9": worst <= 1e-9},
            f"worst rel err {worst:.2e}")


def test_criterion_03_two_sided_bounds():
    finite = []
    for dmc in (Dmc.bsc(0.2), Dmc.bsc(0.35),
                Dmc(np.array([[0.7, 0.2, 0.1], [0.1, 0.8, 0.1],
                              [0.25, 0.25, 0.5]]),
                    np.array([0.0, 1.0, 2.5]))):
        for mu in (0.5, 1.0, 2.0):
            rep = info.ids_capacity_bounds(mu, dmc)
            finite.append(rep.lower == rep.upper / 2.0
                          and math.isfinite(rep.upper))
    noiseless = info.ids_capacity_bounds(1.0, Dmc.identity(2))
    verdict(3, "two-sided timing bounds",
            {"halving exact": all(finite),
             "noiseless is +inf/+inf": noiseless.upper == math.inf
             and noiseless.lower == math.inf})


def test_criterion_04_repetition_channel_exactness():
    out = ch.idc_apply(np.array([0, 0, 1, 0, 1, 0]),
                       ch.StateSequence(np.array([1, 1, 2, 1, 0, 2])))
    example = out.tolist() == [0, 0, 1, 1, 0, 0, 0]
    rng = np.random.default_rng(8)
    invariants = True
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        x = rng.integers(0, 4, size=n)
        s = rng.integers(0, 4, size=n)
        y = ch.idc_apply(x, ch.StateSequence(s))
        if y.size != int(s.sum()):
            invariants = False
            break
        cum = np.cumsum(s)
        t = np.searchsorted(cum, np.arange(1, y.size + 1))
        if np.any(np.diff(t) < 0) or not np.array_equal(y, x[t]):
            invariants = False
            break
    verdict(4, "repetition channel exactness",
            {"worked example": example, "1000 random invariants": invariants})


def gauss_acceptance_config(M: int, trials: int) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        scheme="gauss", M=M, epsilon=0.2, delta=0.5, trials=trials,
        base_seed=1009, idc=StateDistribution.deletion(0.1), eta2=1.0)


def test_criterion_05_gauss_monte_carlo():
    rep = harness.run_trials(gauss_acceptance_config(M=256, trials=500))
    bound = 0.2 + 3 * binom_se(0.2, 500)
    rate_want = 0.9 / (1.5 ** 2 * 2.5 * math.log(2.0))
    rate_ok = math.isclose(rep.rate_per_unit_cost, rate_want, rel_tol=1e-12)
    verdict(5, "gauss scheme error and rate",
            {"error within budget": rep.error_rate <= bound,
             "rate identity": rate_ok},
            f"error {rep.error_rate:.3f} vs {bound:.3f}, "
            f"rate {rep.rate_per_unit_cost:.6f}")


def test_criterion_06_dmc_monte_carlo():
    cfg = harness.ExperimentConfig(
        scheme="dmc", M=64, epsilon=0.25, delta=0.5, trials=500,
        base_seed=2003, idc=StateDistribution.deletion(0.1), dmc=Dmc.bsc(0.2))
    rep = harness.run_trials(cfg)
    bound = 0.25 + 3 * binom_se(0.25, 500)
    drift_free = rep.diagnostics["drift_free"]
    clean = rep.diagnostics["drift_free_clean"]
    cond = clean / drift_free if drift_free else 0.0
    verdict(6, "dmc scheme error and geometry",
            {"error within budget": rep.error_rate <= bound,
             "window geometry on >=95% of calm trials": cond >= 0.95},
            f"error {rep.error_rate:.3f} vs {bound:.3f}, "
            f"geometry {clean}/{drift_free}")


def test_criterion_07_compound_robustness():
    idcs = {
        0.80: StateDistribution.deletion(0.2),
        0.95: StateDistribution.deletion(0.05),
        1.10: StateDistribution(((1, 0.9), (2, 0.1))),
    }
    trials = 800
    bound = 0.25 + 3 * binom_se(0.25, trials)
    params = cc.derive_params(M=64, epsilon=0.25, delta=0.1,
                              mu1=0.8, mu2=1.1, sigma2=0.25)
    rates_ok = {}
    measured = {}
    for mu, idc in sorted(idcs.items()):
        assert idc.sigma2 <= 0.25 + 1e-12
        cfg = harness.ExperimentConfig(
            scheme="compound", M=64, epsilon=0.25, delta=0.1, trials=trials,
            base_seed=4001 + int(100 * mu), idc=idc,
            mu1=0.8, mu2=1.1, sigma2_bound=0.25)
        rep = harness.run_trials(cfg)
        assert harness.derive_scheme_params(cfg).offsets == params.offsets
        measured[mu] = rep.error_rate
        rates_ok[f"mu={mu:.2f} error"] = rep.error_rate <= bound
    sig = inspect.signature(cc.decode).parameters
    blind = not ({"mu", "mu1", "mu2", "idc", "dist"} & set(sig))
    verdict(7, "compound codec across rates",
            {**rates_ok, "decoder blind to realized rate": blind},
            "errors " + ", ".join(f"{v:.3f}" for v in measured.values())
            + f" vs {bound:.3f}")


def test_criterion_08_cost_equivalence():
    base = dict(scheme="dmc", M=64, epsilon=0.25, delta=0.5, trials=10000,
                base_seed=31, dmc=Dmc.bsc(0.2))
    half = harness.verify_cost_equivalence(harness.ExperimentConfig(
        idc=StateDistribution.deletion(0.5), **base))
    double = harness.verify_cost_equivalence(harness.ExperimentConfig(
        idc=StateDistribution.constant(2), **base))
    verdict(8, "input/output cost identity",
            {"deletion 0.5 within 4 SE": half.within_tolerance,
             "duplication exact": double.within_tolerance
             and double.abs_difference == 0.0
             and double.max_trial_abs_diff == 0.0},
            f"diff {half.abs_difference:.4f} vs tol {half.tolerance:.4f}")


def test_criterion_09_error_monotone_in_message_count():
    reports = [harness.run_trials(gauss_acceptance_config(M=m, trials=512))
               for m in (64, 256, 1024)]
    ok = True
    for prev, nxt in zip(reports, reports[1:]):
        non_increasing = nxt.error_rate <= prev.error_rate
        overlap = (nxt.error_ci_low <= prev.error_ci_high
                   and prev.error_ci_low <= nxt.error_ci_high)
        if not (non_increasing or overlap):
            ok = False
    rates = ", ".join(f"{r.error_rate:.3f}" for r in reports)
    verdict(9, "error rate falls with M", {"monotone within CIs": ok},
            f"rates {rates}")


def test_criterion_10_geometry_guards_report_clean():
    checks = {}
    for m in (64, 256, 1024):
        d = harness.derive_scheme_params(
            gauss_acceptance_config(M=m, trials=1)).diagnostics
        checks[f"gauss M={m}"] = (d.regions_disjoint and d.wrong_windows_clear
                                  and d.wrong_windows_clear_jitter)
    dmc_cfg = harness.ExperimentConfig(
        scheme="dmc", M=64, epsilon=0.25, delta=0.5, trials=1,
        base_seed=1, idc=StateDistribution.deletion(0.1), dmc=Dmc.bsc(0.2))
    d = harness.derive_scheme_params(dmc_cfg).diagnostics
    checks["dmc M=64"] = (d.regions_disjoint and d.wrong_windows_clear
                          and d.wrong_windows_clear_jitter)
    sched = cc.schedule_diagnostics(cc.derive_params(
        M=64, epsilon=0.25, delta=0.1, mu1=0.8, mu2=1.1, sigma2=0.25))
    checks["compound M=64"] = (sched.offsets_separate and
                               sched.windows_disjoint)
    verdict(10, "spacing inequalities all hold", checks)
