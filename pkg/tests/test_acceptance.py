"""Acceptance criteria 1-10, one test each.

Every test records a single ``PASS``/``FAIL`` verdict line (also echoed in
the terminal summary) and then asserts the criterion at its stated
tolerance and runtime budget.
"""

import math
import time

import mpmath as mp
import numpy as np
import pytest

from stepanov.constants import kappa_profile, theta_st
from stepanov.corpus import levitan, run_scenario, scenario, spike_train, stability_experiment
from stepanov.deterministic import deterministic_mild_solve
from stepanov.functions import Compose, Const, Sum, Trig, sample
from stepanov.grid import GridWindow, SampledPath
from stepanov.laws import EmpiricalLaw, dbl, wasserstein, wasserstein_assignment
from stepanov.metrics import (
    MetricKind,
    bochner_slice,
    distance,
    lp_slice_distance,
    mp_prime_defect,
    oscillation_witness,
    scan_almost_periods,
)

pytestmark = pytest.mark.slow

VERDICTS: dict[int, str] = {}
SQRT2 = math.sqrt(2.0)
N_FIXTURES = 100
SEED = 20240611


def verdict(k: int, ok: bool, detail: str) -> bool:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[k] = line
    print(line)
    return ok


@pytest.fixture(scope="module")
def periodic_run():
    t = time.perf_counter()
    run = run_scenario(scenario("periodic_sde"))
    return run, time.perf_counter() - t


# ---------------------------------------------------------------------- 1


def test_criterion_01_affine_levitan_bound():
    t = time.perf_counter()
    run = run_scenario(scenario("affine_levitan"))
    elapsed = time.perf_counter() - t
    m = float(np.max(np.abs(run.path.scalar)))
    ok = m <= 2.0 + 1e-3 and elapsed < 10.0
    assert verdict(1, ok, f"max|x| = {m:.6f} (<= 2.001), {elapsed:.1f} s (< 10 s)")


# ---------------------------------------------------------------------- 2


def test_criterion_02_purely_stepanov():
    t = time.perf_counter()
    window = GridWindow(0.0, 200.0, 1e-3)
    x = deterministic_mild_solve(1.0, levitan("h"), window, 40.0)
    s1 = MetricKind.stepanov(1)
    coarse = scan_almost_periods(x, 0.15, s1, (0.0, 50.0), 0.01)
    fine = scan_almost_periods(x, 0.15, s1, (0.0, 0.01), 1e-3)
    n_s1 = len(set(coarse.periods) | set(fine.periods))
    best_s1 = min(coarse.distances.min(), fine.distances.min())
    uni = scan_almost_periods(x, 0.3, MetricKind.uniform(), (0.0, 50.0), 1e-3)
    pair = oscillation_witness(levitan("H"), (0.0, 500.0), 1e-3)
    elapsed = time.perf_counter() - t
    sep = abs(pair.t_a - pair.t_b)
    parts = {
        "stepanov1": n_s1 >= 5,
        "uniform_empty": len(uni) == 0,
        "witness": sep < 1e-3 and pair.gap > 1.0,
        "runtime": elapsed < 60.0,
    }
    detail = (
        f"S1(eps=0.15) accepts {n_s1} tau (need >= 5; smallest distance {best_s1:.4f}); "
        f"uniform(eps=0.3) accepts {len(uni)}; |H(t1)-H(t2)| = {pair.gap:.4f} at |t1-t2| = {sep:.1e}; "
        f"{elapsed:.1f} s"
    )
    assert verdict(2, all(parts.values()), detail), parts


# ---------------------------------------------------------------------- 3


def test_criterion_03_small_set_defect():
    t = time.perf_counter()
    w = GridWindow(0.0, 200.0, 1e-4)
    d_h = mp_prime_defect(sample(levitan("h"), w), 1.0, 1e-3)
    d_sin = mp_prime_defect(sample(Trig(((1.0, 1.0, 0.0),)), w), 1.0, 1e-3)
    spikes = []
    for n in range(3, 7):
        path = sample(spike_train(n), GridWindow(0.0, 4.0 * n, 1e-5))
        spikes.append(mp_prime_defect(path, 1.0, 1e-3, xi_step=0.01))
    elapsed = time.perf_counter() - t
    monotone = all(a < b for a, b in zip(spikes, spikes[1:]))
    ok = d_h > 10 * d_sin and monotone and elapsed < 30.0
    detail = (
        f"defect(h) = {d_h:.4g} vs 10 x defect(sin) = {10 * d_sin:.4g}; spike defects n=3..6 "
        f"{', '.join(f'{s:.3g}' for s in spikes)} ({'increasing' if monotone else 'not monotone'}); {elapsed:.1f} s"
    )
    assert verdict(3, ok, detail)


# ---------------------------------------------------------------------- 4


def test_criterion_04_ou_oracle():
    t = time.perf_counter()
    run = run_scenario(scenario("ou"))
    elapsed = time.perf_counter() - t
    ok = run.passed and len(run.records) == 4 and elapsed < 120.0
    detail = "; ".join(
        f"{r.check} {r.observed:.4f} vs {r.expected:.4f} +/- {r.tolerance:.4f}" for r in run.records
    )
    assert verdict(4, ok, f"{detail}; {elapsed:.1f} s")


# ---------------------------------------------------------------------- 5

QUOTED_THETA_PREFIX = 0.054772


def test_criterion_05_contraction_constants(periodic_run):
    mp.mp.dps = 50
    K, d, Q = mp.mpf("0.1"), mp.mpf(1), mp.mpf(1)
    oracle = 2 * K**2 / (d * (1 - mp.exp(-d))) + 2 * K**2 * Q / (1 - mp.exp(-2 * d))
    value = theta_st(0.1, 1.0, 1.0)
    err = abs(value - float(oracle))
    run, _ = periodic_run
    ens = run.ensembles["picard"]
    diag = ens.diagnostics
    ratios = [diag[i + 1] / diag[i] for i in range(1, len(diag) - 1)]
    ratio_ok = bool(ratios) and max(ratios) <= ens.theta_st + 0.1
    ok = err <= 1e-9 and ratio_ok
    detail = (
        f"theta_st(0.1,1,1) = {value:.12f}, high-precision {mp.nstr(oracle, 12)}, |diff| = {err:.1e} (<= 1e-9); "
        f"quoted prefix {QUOTED_THETA_PREFIX} differs by {abs(value - QUOTED_THETA_PREFIX):.1e} (note); "
        f"periodic_sde max Picard ratio {max(ratios):.4f} <= theta_St + 0.1 = {ens.theta_st + 0.1:.4f}"
    )
    assert verdict(5, ok, detail)


# ---------------------------------------------------------------------- 6


def test_criterion_06_ap_in_distribution(periodic_run):
    run, elapsed = periodic_run
    rows = {round(r.tau_requested, 9): r for r in run.apd_rows}
    r2pi, rpi = rows[round(2 * math.pi, 9)], rows[round(math.pi, 9)]
    ui = next(r for r in run.records if r.check == "ui_defect")
    ok = r2pi.accepted and not rpi.accepted and ui.observed < 0.01 and elapsed < 180.0
    detail = (
        f"sup W2 at tau=2pi {r2pi.sup_distance:.4f} (accept <= 0.05), at tau=pi {rpi.sup_distance:.4f} (reject); "
        f"ui_defect {ui.observed:.3g} (< 0.01); N = {run.ensembles['picard'].size}; {elapsed:.1f} s"
    )
    assert verdict(6, ok, detail)


# ---------------------------------------------------------------------- 7


def test_criterion_07_pseudo_ap_decomposition():
    t = time.perf_counter()
    run = run_scenario(scenario("pseudo_ap"))
    elapsed = time.perf_counter() - t
    prof = run.extra["profile"]
    ratio = prof[200.0] / prof[25.0]
    ok = ratio < 0.5 and elapsed < 300.0
    detail = f"mean(200) = {prof[200.0]:.4g}, mean(25) = {prof[25.0]:.4g}, ratio {ratio:.4f} (< 0.5); {elapsed:.1f} s"
    assert verdict(7, ok, detail)


# ---------------------------------------------------------------------- 8


def test_criterion_08_kappa_bound():
    Ks = {
        "const": Const(0.7),
        "|sin|": Compose("abs", Trig(((1.0, 1.0, 0.0),))),
        "0.5+0.5|cos(sqrt2 t)|": Sum((Const(0.5), Compose("abs", Trig(((0.5, SQRT2, 0.5 * math.pi),))))),
    }
    window = GridWindow(0.0, 50.0, 1e-2)
    failures, worst = [], 0.0
    for name, K in Ks.items():
        for delta in (0.5, 1.0, 2.0):
            for p in (1.0, 2.0):
                prof = kappa_profile(K, delta, p, window, slack=0.01)
                worst = max(worst, prof.max_kappa / prof.bound)
                if not prof.bound_ok:
                    failures.append((name, delta, p))
    ok = not failures
    assert verdict(8, ok, f"18 combinations, bound_ok on {18 - len(failures)}; max kappa/bound = {worst:.4f}"), failures


# ---------------------------------------------------------------------- 9


def _random_trig(rng, n_terms=3):
    return Trig(tuple((rng.normal(0, 1.5), rng.uniform(0.2, 4), rng.uniform(0, 6.3)) for _ in range(n_terms)))


def _property_suite():
    """Each property on ``N_FIXTURES`` fixtures drawn from one fixed seed."""
    rng = np.random.default_rng(SEED)
    w = GridWindow(0.0, 6.0, 0.01)
    kinds = [MetricKind.uniform(), MetricKind.stepanov(1), MetricKind.stepanov(2), MetricKind.smeasure()]
    counts = {}

    def run(name, check):
        for _ in range(N_FIXTURES):
            check()
        counts[name] = N_FIXTURES

    def paths(k):
        return [sample(_random_trig(rng), w) for _ in range(k)]

    def axioms():
        f, g, h = paths(3)
        for m in kinds:
            assert distance(f, f, m) == 0.0
            fg, gf = distance(f, g, m), distance(g, f, m)
            assert fg == pytest.approx(gf, rel=1e-12, abs=1e-15) and fg >= 0
            assert distance(f, h, m) <= fg + distance(g, h, m) + 1e-12

    def p_monotone():
        f, g = paths(2)
        ps = sorted(rng.uniform(1, 8, size=3))
        ds = [distance(f, g, MetricKind.stepanov(p)) for p in ps]
        assert all(a <= b * (1 + 1e-12) + 1e-15 for a, b in zip(ds, ds[1:]))

    def ess_sup_trend():
        # step functions with one tall step of random height and width
        v = np.zeros(w.n)
        start = rng.integers(0, w.n - 60)
        width = rng.integers(5, 50)
        v[start : start + width] = rng.uniform(0.5, 3.0)
        f, z = SampledPath(w, v), SampledPath(w, np.zeros(w.n))
        ds = [distance(f, z, MetricKind.stepanov(p)) for p in (1, 2, 4, 8, 16)]
        sup = distance(f, z, MetricKind.uniform())
        assert all(a <= b * (1 + 1e-12) for a, b in zip(ds, ds[1:]))
        assert ds[-1] <= sup * (1 + 1e-12) and sup - ds[-1] < sup - ds[0]

    def cap_dominance():
        f, g = paths(2)
        s0 = distance(f, g, MetricKind.smeasure())
        assert s0 <= min(distance(f, g, MetricKind.stepanov(1)), 1.0) + 1e-12

    def bochner():
        f, g = paths(2)
        p = float(rng.choice([1.0, 2.0, 3.0]))
        n_win = int(round(1.0 / w.dt))
        starts = w.times[: w.n - n_win]
        direct = max(lp_slice_distance(bochner_slice(f, s), bochner_slice(g, s), p) for s in starts[::7])
        assert direct <= distance(f, g, MetricKind.stepanov(p)) * (1 + 1e-9) + 1e-12
        full = max(lp_slice_distance(bochner_slice(f, s), bochner_slice(g, s), p) for s in starts)
        assert full == pytest.approx(distance(f, g, MetricKind.stepanov(p)), rel=1e-9, abs=1e-12)

    def equivariance():
        n = int(rng.integers(5, 200))
        a, b = EmpiricalLaw(rng.normal(size=n)), EmpiricalLaw(rng.standard_t(4, size=n) + rng.normal())
        c, s = rng.normal(0, 5), rng.uniform(0.1, 10)
        base = wasserstein(a, b).value
        assert wasserstein(a.shifted(c), b.shifted(c)).value == pytest.approx(base, rel=1e-9, abs=1e-9)
        assert wasserstein(a.scaled(s), b.scaled(s)).value == pytest.approx(s * base, rel=1e-9, abs=1e-9)
        assert wasserstein(a, a.shifted(c)).value == pytest.approx(abs(c), rel=1e-9)

    def quantile_exact():
        n = int(rng.integers(2, 257))
        a, b = EmpiricalLaw(rng.normal(size=n)), EmpiricalLaw(rng.exponential(size=n))
        for p in (1.0, 2.0):
            assert abs(wasserstein(a, b, p).value - wasserstein_assignment(a, b, p)) <= 1e-9

    def dbl_bound():
        n = int(rng.integers(2, 80))
        a = EmpiricalLaw(rng.normal(size=n))
        b = EmpiricalLaw(rng.normal(rng.normal(0, 2), rng.uniform(0.5, 2), size=int(rng.integers(2, 80))))
        v = dbl(a, b).value
        assert 0.0 <= v <= min(wasserstein(a, b, 1.0).value, 2.0) + 1e-9

    for name, check in [
        ("metric axioms", axioms),
        ("p-monotonicity", p_monotone),
        ("ess-sup trend", ess_sup_trend),
        ("cap dominance", cap_dominance),
        ("Bochner consistency", bochner),
        ("Wasserstein equivariance", equivariance),
        ("quantile = assignment", quantile_exact),
        ("dBL <= min(W1, 2)", dbl_bound),
    ]:
        run(name, check)
    return counts


def test_criterion_09_property_suites():
    try:
        counts = _property_suite()
        ok, detail = True, ", ".join(f"{k} x{v}" for k, v in counts.items())
    except AssertionError as exc:
        ok, detail = False, f"property failed: {exc}"
    assert verdict(9, ok, f"{detail} (seed {SEED})")


# --------------------------------------------------------------------- 10


def test_criterion_10_stability():
    res = stability_experiment((0.1, 0.05, 0.025))
    C = max(d / e for d, e in zip(res.distances, res.etas))
    ok = res.r_squared >= 0.95 and all(d <= C * e * (1 + 1e-12) for d, e in zip(res.distances, res.etas))
    detail = (
        f"distances {', '.join(f'{d:.5f}' for d in res.distances)} at eta 0.1, 0.05, 0.025; "
        f"slope {res.slope:.4f}, C = {C:.4f}, R^2 = {res.r_squared:.6f} (>= 0.95)"
    )
    assert verdict(10, ok, detail)
