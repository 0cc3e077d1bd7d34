"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the report lines.
"""

import io
import math
import time
from contextlib import redirect_stdout

import numpy as np
import pytest
from scipy import special as sps

from onoffnet.bounds import closed_form_alpha0, closed_form_M_equals_K, guaranteed_bounds
from onoffnet.cli import run
from onoffnet.config import NetworkConfig, ShadowingModel
from onoffnet.harness import SweepSpec, compare_strategies, concentration_suite, run_sweep, scaling_suite
from onoffnet.metrics import (average_sum_rate, combined_stderr, guaranteed_sum_rate,
                              truncation_contribution)
from onoffnet.power import EXACT, PowerStrategy, grid_maximizer, threshold_asymptotic, threshold_exact
from onoffnet.special import e1

# alpha_hat = 0.5 reference scenario: every cross link present, lognormal shadowing of mean 0.5
SHADOW = ShadowingModel.lognormal(0.5, 1.0)
STRONG = NetworkConfig(alpha=1.0, shadowing=SHADOW)


def report(tag, ok, detail, elapsed=None, limit=None):
    timing_ok = limit is None or elapsed is None or elapsed < limit
    passed = bool(ok and timing_ok)
    extra = "" if elapsed is None else f" [{elapsed:.1f}s" + (f" < {limit:g}s]" if limit else "]")
    print(f"\n{'PASS' if passed else 'FAIL'} {tag}: {detail}{extra}")
    assert ok, detail
    assert timing_ok, f"runtime {elapsed:.1f}s exceeds {limit}s"


def test_c01_alpha_zero_closed_form():
    t0 = time.perf_counter()
    cfg = NetworkConfig(K=100, M=4, alpha=0.0)
    est = average_sum_rate(cfg, PowerStrategy.full_power(), 20_000)
    dt = time.perf_counter() - t0
    target = 33.524
    exact = closed_form_alpha0(100, 4)
    ok = abs(est.mean - target) <= 3 * est.stderr
    report("C1 alpha=0 closed form", ok,
           f"mean={est.mean:.4f} se={est.stderr:.4f} target={target} (exact {exact:.5f})", dt, 60)


def test_c02_one_link_per_cluster():
    t0 = time.perf_counter()
    cfg = NetworkConfig(K=1000, M=1000, alpha=0.5)
    est = average_sum_rate(cfg, PowerStrategy.full_power(), 20_000)
    exact, _ = closed_form_M_equals_K(1000)
    e6, a6 = closed_form_M_equals_K(10 ** 6)
    dt = time.perf_counter() - t0
    rel = abs(e6 / a6 - 1)
    ok = abs(est.mean - exact) <= 3 * est.stderr and rel < 2e-3
    report("C2 M=K closed form", ok,
           f"mean={est.mean:.5f} se={est.stderr:.5f} exact={exact:.5f}; K=1e6 exact/asymptote-1={rel:.2e}", dt, 60)


def test_c03_threshold_matches_grid():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (10 ** 3, 10 ** 4):
        for ah in (0.25, 0.5, 1.0):
            worst = max(worst, abs(threshold_exact(n, ah).tau - grid_maximizer(n, ah, step=1e-4)))
    dt = time.perf_counter() - t0
    report("C3 exact threshold vs grid maximizer", worst < 1e-3, f"max |tau - grid| = {worst:.2e}", dt, 10)


def test_c04_threshold_asymptote():
    t0 = time.perf_counter()
    ns = (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5)
    taus = [threshold_exact(n, 0.5).tau for n in ns]
    gaps = [abs(t - threshold_asymptotic(n).tau) for n, t in zip(ns, taus)]
    dt = time.perf_counter() - t0
    ok = max(gaps) <= 3 and all(b > a for a, b in zip(taus, taus[1:]))
    report("C4 threshold asymptote", ok,
           "tau=" + ",".join(f"{t:.3f}" for t in taus) + f" max gap={max(gaps):.3f}", dt, 1)


def test_c05_sum_rate_decreasing_in_clusters():
    t0 = time.perf_counter()
    base = NetworkConfig(K=20, alpha=0.5, shadowing=SHADOW)
    res = run_sweep(SweepSpec(base, "M", (1, 2, 4, 5, 10, 20), EXACT, trials=20_000))
    dt = time.perf_counter() - t0
    means, ses = res.means(), res.stderrs()
    steps = [(means[i + 1] - means[i]) / math.hypot(ses[i], ses[i + 1]) for i in range(len(means) - 1)]
    ok = all(s <= 3 for s in steps) and int(np.argmax(means)) == 0
    detail = ("means=" + ",".join(f"{m:.3f}" for m in means) + " worst rise="
              f"{max(steps):.1f} sigma; tau=" + ",".join(f"{r.strategy.tau:.2f}" for r in res.rows))
    report("C5 sum-rate nonincreasing in M", ok, detail, dt, 120)


def test_c06_scaling_law():
    t0 = time.perf_counter()
    rows = scaling_suite([10 ** 3, 10 ** 4], M=1, alpha=STRONG.alpha, shadowing=SHADOW)
    dt = time.perf_counter() - t0
    r3, r4 = rows
    ok = all(0.5 <= r.ratio <= 1.5 for r in rows) and r4.deviation <= r3.deviation + 0.05
    report("C6 scaling law", ok, f"ratio(K=1e3)={r3.ratio:.3f} ratio(K=1e4)={r4.ratio:.3f}", dt, 300)


def test_c07_interference_concentration():
    t0 = time.perf_counter()
    cfg = STRONG.with_(K=10 ** 4)
    rep = concentration_suite(cfg, EXACT, 500, rel_dev=0.2)
    dt = time.perf_counter() - t0
    report("C7 interference concentration", rep.exceedance < 0.05,
           f"P(|I-mu|>0.2 mu)={rep.exceedance:.3f} mu_n={rep.mu_n:.2f} mean I={rep.mean_interference:.2f} "
           f"pairs={rep.pairs}", dt, 120)


def test_c08_truncation():
    t0 = time.perf_counter()
    cfg = STRONG.with_(K=10 ** 4)
    s = PowerStrategy.on_off(threshold_exact(cfg.n, cfg.alpha_hat))
    frac = truncation_contribution(cfg, s, 2.0, 2000)
    dt = time.perf_counter() - t0
    report("C8 truncation", frac < 0.01, f"fraction above 2 log n = {frac:.2e}", dt, 120)


def test_c09_onoff_beats_full_power():
    t0 = time.perf_counter()
    cfg = NetworkConfig(K=100, M=1, alpha=0.5, shadowing=SHADOW)
    (_, on), (_, full) = compare_strategies(cfg, [EXACT, "full"], 20_000)
    dt = time.perf_counter() - t0
    gap = on.mean - full.mean
    se = combined_stderr(on, full)
    report("C9 on-off beats full power", gap > 3 * se,
           f"onoff={on.mean:.3f} full={full.mean:.3f} gap={gap:.3f} ({gap / se:.0f} sigma)", dt, 60)


def test_c10_guaranteed_sandwich():
    t0 = time.perf_counter()
    cfg = STRONG.with_(K=10 ** 4)
    s = PowerStrategy.on_off(threshold_exact(cfg.n, cfg.alpha_hat))
    g = guaranteed_sum_rate(cfg, s, 0.05, 2000)
    a = average_sum_rate(cfg, s, 2000)
    b = guaranteed_bounds(cfg.K, cfg.M, cfg.alpha_hat, cfg.W, cfg.N0, s.tau)
    dt = time.perf_counter() - t0
    ok = 0.8 * b.lower <= g.mean <= 1.2 * b.upper and g.mean <= a.mean + 3 * combined_stderr(g, a)
    report("C10 guaranteed sandwich", ok,
           f"guaranteed={g.mean:.3f} in [{0.8 * b.lower:.3f}, {1.2 * b.upper:.3f}]? average={a.mean:.3f} "
           f"eps_conc={b.eps_conc:.3f}", dt, 300)


# mpmath at 30 digits, frozen
E1_ORACLE = {0.1: 1.8229239584193906, 0.25: 1.0442826344437382, 0.5: 0.55977359477616081,
             1.0: 0.21938393439552027, 10.0: 4.1569689296853243e-6}


def test_c11_special_functions():
    t0 = time.perf_counter()
    worst = max(abs(e1(x) / v - 1) for x, v in E1_ORACLE.items())
    xs = np.linspace(5, 50, 451)
    ident = max(abs(e1(x) / -sps.expi(-x) - 1) for x in xs)
    dt = time.perf_counter() - t0
    report("C11 special functions", worst < 1e-8 and ident < 1e-6,
           f"max rel err vs oracle={worst:.1e}; E1=-Ei(-x) on [5,50] max rel={ident:.1e}", dt, 1)


def _cli(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = run(argv)
    return code, buf.getvalue()


REPRO_RUNS = [
    ["simulate", "--k", "100", "--m", "4", "--alpha", "0", "--trials", "20000"],
    ["sweep-m", "--k", "20", "--values", "1,2,4,5,10,20", "--alpha", "0.5", "--strategy", "exact",
     "--trials", "2000"],
    ["compare", "--k", "100", "--alpha", "0.5", "--trials", "2000"],
    ["concentration", "--k", "10000", "--alpha", "1", "--strategy", "exact", "--trials", "100"],
    ["guaranteed", "--k", "1000", "--alpha", "1", "--trials", "500"],
]


def test_c12_reproducible_csv():
    t0 = time.perf_counter()
    same = []
    for argv in REPRO_RUNS:
        c1, o1 = _cli(argv + ["--threads", "1", "--seed", "2024"])
        c8, o8 = _cli(argv + ["--threads", "8", "--seed", "2024"])
        again = _cli(argv + ["--threads", "1", "--seed", "2024"])[1]
        same.append(c1 == c8 == 0 and o1 == o8 == again and o1.count("\n") >= 2)
    dt = time.perf_counter() - t0
    report("C12 byte-identical CSV across threads", all(same),
           f"{sum(same)}/{len(same)} runs identical for --threads 1 vs 8 and on repeat", dt)
