"""Fast invariant checks with a byte-reproducible report.

Every check uses fixed inputs or a fixed-seed generator, so two runs on the
same machine print the same lines.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .bases import (
    ZetaBase,
    geometric_continuation,
    hurwitz_zeta_em,
    make_geometric_plus_b,
    make_zeta_beta,
)
from .boundary import (
    CounterexampleSeries,
    counterexample_direct,
    counterexample_h,
    decompose_counterexample,
    lacunary_sum,
)
from .config import build_series, series_config
from .engine import compute_delta, consistency_check, epsilon_k, evaluate_extension
from .errors import MeroContError
from .numerics import (
    falling_factorial_bound,
    falling_factorial_ratios,
    multinomial_weight,
    residue_estimate,
    shift_inner_product,
    weak_compositions,
)
from .oracle import overlap_compare
from .poles import predicted_poles

SEED = 20240611

_CONFIGS = (
    {"type": "geometric_plus_b", "a": 2, "b_re": 1},
    {"type": "zeta_beta", "beta": 0.5},
    {"type": "poly_reciprocal", "coeffs": [1, 0, 1]},
    {"type": "multi_geometric", "bases": [0.5, 0.25], "weights": [1, 0.5]},
    {"type": "flat_weierstrass", "a": math.e},
    {"type": "counterexample", "m": 1, "gap": "dyadic"},
    {"type": "custom", "base": {"kind": "geometric", "a": 2}, "sigma": 1,
     "alphas": [-1, 1], "sigmas": [1, 2, 3], "radius": 0.5,
     "h_expr": "-z / (1 + z)"},
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    limit: float

    def as_dict(self):
        return {
            "name": self.name,
            "status": "PASS" if self.passed else "FAIL",
            "measured": self.measured,
            "limit": self.limit,
        }


def check_falling_factorial():
    """``|(s)_k / k!| <= |s| k**|s+1|``: returns the worst ratio to the bound."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        r = 10 * math.sqrt(rng.random())
        s = complex(cmath.rect(r, 2 * math.pi * rng.random()))
        ratios = falling_factorial_ratios(s, 200)
        for k in range(1, 201):
            b = falling_factorial_bound(s, k)
            if b > 0:
                worst = max(worst, abs(ratios[k]) / b)
    return worst, 1.0


def check_multinomial():
    """Multinomial identity with ``|alpha_j|``: worst relative error."""
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(50):
        N = int(rng.integers(1, 5))
        k = int(rng.integers(0, 9))
        alphas = rng.normal(size=N) + 1j * rng.normal(size=N)
        sigmas = np.cumsum(rng.uniform(0.2, 1.5, size=N))
        t = float(rng.uniform(0.05, 0.9))
        mods = np.abs(alphas)
        lhs = sum(
            multinomial_weight(kv, mods).real * t ** shift_inner_product(kv, sigmas)
            for kv in weak_compositions(k, N)
        )
        rhs = float(np.sum(mods * t**sigmas)) ** k
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst, 1e-12


def check_zeta_values():
    err = max(
        abs(hurwitz_zeta_em(2.0) - math.pi**2 / 6),
        abs(hurwitz_zeta_em(0.0) + 0.5),
        abs(hurwitz_zeta_em(-1.0) + 1 / 12),
    )
    return err, 1e-10


def check_geometric_residue():
    res = residue_estimate(lambda s: geometric_continuation(2.0, s), 0.0, 0.5)
    return abs(res - 1 / math.log(2)), 1e-9


def check_overlap():
    series = make_geometric_plus_b(2.0, 1.0)
    grid = [1 + 0.5j, 2.0, 3 - 1j]
    return overlap_compare(series, grid, 1e-10), 1e-8


def check_cross_n():
    series = make_geometric_plus_b(2.0, 1.0)
    worst = 0.0
    for s in (-0.5 + 0.3j, 1.5, 0.25 - 2j):
        diff, budget = consistency_check(series, s, 3, 5, 1e-10, full_output=True)
        worst = max(worst, diff / budget)
    return worst, 1.0


def check_pole_lattice():
    series = make_geometric_plus_b(2.0, 1.0)
    locs = sorted(c.location.real for c in predicted_poles(series, (-2.2, 0.2, -0.5, 0.5)))
    target = [-2.0, -1.0, 0.0]
    if len(locs) != len(target):
        return math.inf, 1e-12
    return max(abs(a - b) for a, b in zip(locs, target)), 1e-12


def check_continuation_stability():
    series = make_geometric_plus_b(2.0, 1.0)
    v1 = evaluate_extension(series, -0.5, 1e-10)
    v2 = evaluate_extension(series, -0.5, 1e-10, nu_scale=2, K_scale=2, M_scale=2)
    return abs(v1.value - v2.value), 1e-6


def check_zeta_perturbation():
    series = make_zeta_beta(0.5)
    v = evaluate_extension(series, 3.0, 1e-10)
    # Binomial series: zeta(s) + sum_k binom(-s, k) (zeta(s + k/2) - 1) + 2**-s - 1.
    s = 3.0
    ref = 2.0**-s
    coef = 1.0
    for k in range(0, 240):
        if k:
            coef *= (-s - k + 1) / k
        ref += coef * (hurwitz_zeta_em(s + k / 2) - 1)
    return abs(v.value - ref), 1e-9


def check_epsilon_bound():
    """``|E_k(z)| <= C_N z**sigma_{N+1} k 2**-(k-1)``: worst ratio to the bound."""
    series = make_geometric_plus_b(2.0, 1.0)
    h = series.h
    exp = h.expansion
    N = 3
    delta = compute_delta(exp, N)
    C = exp.error_constant(N)
    s_next = exp.sigma(N + 1)
    worst = 0.0
    for z in np.geomspace(delta * 1e-3, delta, 25):
        for k in range(1, 9):
            e = abs(epsilon_k(h, z, k, N))
            bound = C * z**s_next * k * 2.0 ** -(k - 1)
            # Rounding floor of the reference subtraction.
            floor = 64 * 2.0**-53 * (1 + abs(h(z))) ** k
            worst = max(worst, e / (bound + floor))
    return worst, 1.0


def check_counterexample_h():
    series = CounterexampleSeries(1)
    worst = 0.0
    for z in np.geomspace(1e-6, 0.9, 400):
        worst = max(worst, abs(counterexample_h(float(z), 1, series.gaps)) / z)
    return worst, 1.0


def check_decomposition():
    series = CounterexampleSeries(1)
    worst = 0.0
    for s in (1.0, 2 + 1j, 3 - 0.5j):
        dec = decompose_counterexample(series, s, 200)
        direct, _ = counterexample_direct(series, s, 200)
        worst = max(worst, abs(dec.total - direct))
    return worst, 1e-10


def check_lacunary_functional_equation():
    """``f(z**2) = f(z) - z`` for dyadic gaps."""
    gaps = CounterexampleSeries(1).gaps
    worst = 0.0
    for z in (0.5, 0.3 + 0.4j, -0.7j, 0.8 * cmath.exp(0.3j)):
        lhs = lacunary_sum(gaps, z * z, 4096)
        rhs = lacunary_sum(gaps, z, 4096) - z
        worst = max(worst, abs(lhs - rhs))
    return worst, 1e-12


def check_config_roundtrip():
    failures = 0
    for cfg in _CONFIGS:
        # Defaults such as n_start resolve on the first build; after that
        # serialisation must be a fixed point.
        first = series_config(build_series(cfg))
        if series_config(build_series(first)) != first:
            failures += 1
    return float(failures), 0.0


def check_zeta_base_tail():
    """Riemann zeta base: partial sum plus tail bound brackets zeta(3)."""
    base = ZetaBase()
    terms = sum(a * c**3 for a, c in (base.term(n) for n in range(1, 101)))
    gap = abs(hurwitz_zeta_em(3.0) - terms)
    return gap / base.tail_bound(3.0, 101), 1.0


CHECKS = (
    ("falling_factorial_bound", check_falling_factorial),
    ("multinomial_identity", check_multinomial),
    ("zeta_classical_values", check_zeta_values),
    ("zeta_base_tail_bound", check_zeta_base_tail),
    ("geometric_residue", check_geometric_residue),
    ("overlap_agreement", check_overlap),
    ("continuation_stability", check_continuation_stability),
    ("cross_n_consistency", check_cross_n),
    ("pole_lattice", check_pole_lattice),
    ("zeta_perturbation_binomial", check_zeta_perturbation),
    ("epsilon_k_bound", check_epsilon_bound),
    ("counterexample_h_bound", check_counterexample_h),
    ("counterexample_decomposition", check_decomposition),
    ("lacunary_functional_equation", check_lacunary_functional_equation),
    ("config_roundtrip", check_config_roundtrip),
)


def run_selftest(checks=CHECKS):
    """Run every check; a check that raises counts as failed with ``inf``."""
    out = []
    for name, fn in checks:
        try:
            measured, limit = fn()
            passed = measured <= limit
        except (MeroContError, ArithmeticError, ValueError):
            measured, limit, passed = math.inf, math.nan, False
        out.append(CheckResult(name, bool(passed), float(measured), float(limit)))
    return out


def format_text(results):
    """One ``PASS``/``FAIL`` line per check and a summary line."""
    lines = [
        f"{'PASS' if r.passed else 'FAIL'} {r.name} measured={r.measured:.3e} limit={r.limit:.3e}"
        for r in results
    ]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
