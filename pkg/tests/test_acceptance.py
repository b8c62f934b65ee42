"""Acceptance criteria 1 to 12 at their stated tolerances.

Each test records a ``criterion`` property; the terminal summary prints one
PASS/FAIL line per criterion.  Criterion 10(c) cannot hold for any Hadamard
gap sequence (the lacunary sum grows only logarithmically as the offset
shrinks) and is kept as a strict expected failure, with a companion test
showing the unbounded growth over a wider offset range.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import FAMILY_NAMES, family
from merocont.bases import (
    hurwitz_zeta_em,
    make_flat_weierstrass,
    make_geometric_plus_b,
    make_zeta_beta,
)
from merocont.boundary import (
    CounterexampleSeries,
    boundary_scan,
    counterexample_direct,
    decompose_counterexample,
)
from merocont.engine import (
    compute_delta,
    consistency_check,
    epsilon_k,
    evaluate_extension,
    plan_truncation,
)
from merocont.numerics import (
    falling_factorial_bound,
    falling_factorial_ratio,
    multinomial_weight,
    shift_inner_product,
    weak_compositions,
)
from merocont.oracle import overlap_compare
from merocont.poles import (
    difference_profile,
    predicted_poles,
    residue_at,
    residue_match_flat,
    verify_pole,
)
from merocont.series import pn_halfplane

SEED = 20240611
_U = 2.0**-53


def _record(record_property, label, detail):
    record_property("criterion", label)
    record_property("detail", detail)


def _grid(re_lo, re_hi, n_re, im_lo, im_hi, n_im):
    return [complex(x, y) for x in np.linspace(re_lo, re_hi, n_re)
            for y in np.linspace(im_lo, im_hi, n_im)]


def test_c01_overlap_agreement(record_property):
    series = make_geometric_plus_b(2.0, 1.0)
    grid = _grid(1, 3, 5, -1, 1, 4)
    t0 = time.perf_counter()
    worst = overlap_compare(series, grid, 1e-10, oracle_tol=1e-12)
    elapsed = time.perf_counter() - t0
    _record(record_property, "1", f"max discrepancy {worst:.2e} over 20 points in {elapsed:.2f} s")
    assert worst <= 1e-8
    assert elapsed < 30


def test_c02_continuation_stability(record_property):
    series = make_geometric_plus_b(2.0, 1.0)
    base = evaluate_extension(series, -0.5, 1e-10)
    doubled = evaluate_extension(series, -0.5, 1e-10, K_scale=2, M_scale=2, nu_scale=2)
    change = abs(doubled.value - base.value)
    _record(record_property, "2", f"g(-0.5) = {base.value.real:.15f}, change {change:.2e}")
    assert np.isfinite(base.value.real) and np.isfinite(base.value.imag)
    assert change < 1e-6


def _cross_n_series():
    out = {name: family(name) for name in FAMILY_NAMES if name != "counterexample"}
    # m = 2 allows only N in {0, 1}; m = 3 is the smallest with N and N + 2.
    out["counterexample_m3"] = CounterexampleSeries(3).as_perturbed_series()
    return out


def _lattice_free_points(series, re_lo, re_hi, rng, count=10):
    pts = []
    while len(pts) < count:
        s = complex(rng.uniform(re_lo, re_hi), rng.uniform(-2, 2))
        rect = (s.real - 0.05, s.real + 0.05, s.imag - 0.05, s.imag + 0.05)
        if not predicted_poles(series, rect, shift_cap=12):
            pts.append(s)
    return pts


def test_c03_cross_n_consistency(record_property):
    rng = np.random.default_rng(SEED)
    failures = []
    checked = 0
    for name, series in _cross_n_series().items():
        thr = pn_halfplane(series, 0).threshold
        top = series.expansion.max_truncation - 2
        lo = max(thr - 0.5, pn_halfplane(series, top).threshold + 0.3)
        for s in _lattice_free_points(series, lo, thr + 1.5, rng):
            # The automatic N keeps the n-sum short; forcing a small N on a
            # zeta base would need far more than the term cap.
            N = min(plan_truncation(series, s, 1e-10).N, top)
            diff, budget = consistency_check(series, s, N, N + 2, full_output=True)
            checked += 1
            if not diff <= budget:
                failures.append((name, s, diff, budget))
    _record(record_property, "3", f"{checked} points, N against N + 2, "
                                  f"{len(failures)} outside budget")
    assert not failures


def test_c04_pole_lattice(record_property):
    series = make_geometric_plus_b(2.0, 1.0)
    cands = predicted_poles(series, (-2.2, 0.2, -0.5, 0.5))
    locs = [c.location for c in cands]
    at_zero = verify_pole(series, cands[0])
    reg, reg_budget, _ = residue_at(series, -0.5, 0.1)
    unpert, _, _ = residue_at(make_geometric_plus_b(2.0, 0.0), 0.0, 0.1)
    unpert_err = abs(unpert - 1 / math.log(2))
    _record(record_property, "4",
            f"candidates {[round(z.real, 12) for z in locs]}, |res(0)| {abs(at_zero.residue):.4f}, "
            f"|res(-0.5)| {abs(reg):.1e}, unperturbed err {unpert_err:.1e}")
    assert len(locs) == 3
    assert all(abs(z - w) <= 1e-12 for z, w in zip(locs, (0, -1, -2)))
    assert abs(at_zero.residue) > 1e-3
    assert abs(reg) <= 1e-6 + reg_budget
    assert unpert_err <= 1e-9


def test_c05_zeta_machinery(record_property):
    errs = [
        abs(hurwitz_zeta_em(2) - math.pi**2 / 6),
        abs(hurwitz_zeta_em(0) - -0.5),
        abs(hurwitz_zeta_em(-1) - -1 / 12),
    ]
    _record(record_property, "5", f"errors zeta(2) {errs[0]:.1e}, zeta(0) {errs[1]:.1e}, "
                                  f"zeta(-1) {errs[2]:.1e}")
    assert max(errs) <= 1e-10


def test_c06_zeta_perturbation(record_property):
    series = make_zeta_beta(0.5)
    grid = _grid(2, 3, 3, -1, 1, 3)
    # After n terms the tail at Re s = 2 is about 1/n: 5e-8 needs 2e7 terms.
    worst = overlap_compare(series, grid, 1e-10, oracle_tol=5e-8, max_terms=4 * 10**7)
    res, budget, _ = residue_at(series, 0.75, 0.1)
    _record(record_property, "6", f"max discrepancy {worst:.2e} over 9 points, "
                                  f"|res(0.75)| {abs(res):.1e} (budget {budget:.1e})")
    assert worst <= 1e-7
    assert abs(res) <= 1e-6 + budget


def test_c07_epsilon_bound(record_property):
    violations = []
    checked = 0
    for name in FAMILY_NAMES:
        h = family(name).h
        exp = h.expansion
        for N in sorted({0, 1, min(exp.max_truncation, 2)}):
            delta = compute_delta(exp, N)
            top = min(delta, exp.radius * (1 - 1e-12))
            C = exp.error_constant(N)
            s_next = exp.sigma(N + 1)
            for z in np.geomspace(top * 1e-6, top, 1000):
                hz = abs(complex(h(z)))
                for k in range(1, 13):
                    e = abs(epsilon_k(h, z, k, N))
                    bound = C * z**s_next * k * 2.0 ** -(k - 1)
                    # E_k is h**k minus its power part; both are O((|h| + ...)**k)
                    # and the subtraction leaves rounding at that scale.
                    floor = 64 * _U * k * (hz + 0.5) ** k
                    checked += 1
                    if e > bound + floor:
                        violations.append((name, N, z, k))
    _record(record_property, "7", f"{checked} checks, {len(violations)} violations")
    assert not violations


def test_c08_falling_factorial(record_property):
    rng = np.random.default_rng(SEED)
    radius = 10 * np.sqrt(rng.uniform(0, 1, 100))
    angle = rng.uniform(0, 2 * np.pi, 100)
    violations = 0
    for s in radius * np.exp(1j * angle):
        for k in range(1, 201):
            if abs(falling_factorial_ratio(s, k)) > falling_factorial_bound(s, k) * (1 + 1e-12):
                violations += 1
    _record(record_property, "8", f"{100 * 200} checks, {violations} violations")
    assert violations == 0


def test_c09_multinomial_identity(record_property):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(200):
        N = int(rng.integers(1, 5))
        k = int(rng.integers(0, 9))
        alphas = np.abs(rng.normal(size=N) + 1j * rng.normal(size=N))
        sigmas = np.cumsum(rng.uniform(0.1, 2.0, size=N))
        t = float(rng.uniform(0, 1))
        lhs = sum(
            multinomial_weight(kv, alphas).real * t ** shift_inner_product(kv, sigmas)
            for kv in weak_compositions(k, N)
        )
        rhs = float(np.sum(alphas * t**sigmas)) ** k
        if rhs > 0:
            worst = max(worst, abs(lhs - rhs) / rhs)
    _record(record_property, "9", f"max relative error {worst:.1e} over 200 instances")
    assert worst <= 1e-12


def test_c10a_counterexample_bound(record_property):
    violations = 0
    for m in (1, 2, 3):
        series = CounterexampleSeries(m)
        for z in np.geomspace(1e-15, 1, 1000):
            if abs(series.h(z)) > z**m:
                violations += 1
    _record(record_property, "10a", f"3000 grid checks, {violations} violations")
    assert violations == 0


def test_c10b_decomposition(record_property):
    series = CounterexampleSeries(1)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10):
        s = complex(rng.uniform(1, 3), rng.uniform(-3, 3))
        d = decompose_counterexample(series, s, 80)
        direct, _ = counterexample_direct(series, s, 80)
        worst = max(worst, abs(d.total - direct))
    _record(record_property, "10b", f"max |t1+t2+t3 - direct| {worst:.1e} over 10 points")
    assert worst <= 1e-10


@pytest.mark.xfail(strict=True, reason="the dyadic lacunary sum grows like log2(1/offset); "
                   "three decades of offset give a factor of about 3.5, not 10")
def test_c10c_real_approach_blow_up(record_property):
    recs = boundary_scan(CounterexampleSeries(1), [0.1, 0.01, 0.001], [0.0])
    mags = [r.t2_abs for r in recs]
    ratio = mags[-1] / mags[0]
    _record(record_property, "10c", f"|t2| {mags[0]:.3f} -> {mags[-1]:.3f}, factor {ratio:.2f}")
    assert mags[0] < mags[1] < mags[2]
    assert ratio >= 10


def test_c10c_growth_is_unbounded():
    recs = boundary_scan(CounterexampleSeries(1), [0.1, 1e-3, 1e-6, 1e-10], [0.0])
    mags = [r.t2_abs for r in recs]
    assert all(a < b for a, b in zip(mags, mags[1:]))
    assert mags[-1] / mags[0] > 10


def test_c10d_stability(record_property):
    series = CounterexampleSeries(1)
    heights = [0.0, 0.5, 2.0]
    a = boundary_scan(series, [0.5], heights, n_max=100)
    b = boundary_scan(series, [0.5], heights, n_max=200)
    change = max(abs(complex(x.t2_re, x.t2_im) - complex(y.t2_re, y.t2_im))
                 for x, y in zip(a, b))
    _record(record_property, "10d", f"max change under n_max doubling {change:.1e}")
    assert change <= 1e-10


def test_c11_flat_entireness(record_property):
    series = make_flat_weierstrass(math.e)
    poles = (0j, 2j * math.pi)
    diffs = [residue_match_flat(series, series.base, p, radius=0.25) for p in poles]
    ratios = []
    for p in poles:
        inner, outer = difference_profile(series, series.base, p)
        ratios.append(inner / outer if outer > 0 else 0.0)
    _record(record_property, "11", f"residue differences {diffs[0]:.1e}, {diffs[1]:.1e}; "
                                   f"max|d| ratios {ratios[0]:.2f}, {ratios[1]:.2f}")
    assert max(diffs) <= 1e-6
    assert max(ratios) <= 10


def test_c12_determinism(record_property):
    def once():
        return subprocess.run([sys.executable, "-m", "merocont", "selftest"],
                              capture_output=True, check=False).stdout

    first, second = once(), once()
    _record(record_property, "12", f"two selftest reports, {len(first)} bytes, "
                                   f"identical={first == second}")
    assert first and first == second
