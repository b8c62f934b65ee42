"""Concrete base series with exact continuations, and example families.

Two bases are provided:

* :class:`GeometricBase` -- ``c_n = a**-n``, continuation ``1/(a**s - 1)``.
* :class:`HurwitzBase` -- ``c_n = 1/(n - 1 + q)``, continuation the Hurwitz
  zeta function ``zeta(s, q)`` by Euler-Maclaurin.  ``q = 1`` is Riemann zeta.

The ``make_*`` constructors build perturbed series for the standard example
families, each with analytically derived error constants.
"""

import cmath
import math

import numpy as np
from scipy.special import loggamma

from .errors import AccuracyUnreachable, InvalidPerturbation, NearPole
from .numerics import bernoulli_numbers, invert_monotone
from .series import (
    EXACT_CONSTANT,
    BaseSeries,
    Continuation,
    PerturbationExpansion,
    PerturbationFunction,
    PerturbedSeries,
    PoleDescription,
    PoleLattice,
    POLE_EXCLUSION_RADIUS,
    estimate_error_constants,
)

_U = 2.0**-53

#: Euler-Maclaurin remainder target, relative to the leading term when it is below 1.
EM_TARGET = 1e-13
EM_MAX_TERMS = 10**6
EM_MAX_ORDER = 32

#: Largest integer ``q`` for which the reflection route is tried.
REFLECTION_MAX_Q = 10**5


def _cexpm1(x):
    """``exp(x) - 1`` for complex arrays without cancellation near 0."""
    x = np.asarray(x, dtype=complex)
    return 2.0 * np.exp(x / 2) * np.sinh(x / 2)


# --------------------------------------------------------------------------
# Geometric base


class _GeometricContinuation(Continuation):
    def __init__(self, base):
        super().__init__(base)
        L = base.log_a
        self.poles = PoleDescription(
            lattices=(PoleLattice(0j, 2j * math.pi / L, 1.0 / L, "geometric"),)
        )

    def _evaluate(self, w):
        return complex(1.0 / _cexpm1(w * self.base.log_a))

    def evaluate_tail(self, w, nu):
        vals, errs = self.evaluate_tail_many(np.array([complex(w)]), nu)
        return complex(vals[0]), float(errs[0])

    def evaluate_tail_many(self, ws, nu):
        ws = np.asarray(ws, dtype=complex)
        for w in ws:
            self.check_pole(w)
        x = ws * self.base.log_a
        vals = np.exp(-(nu - 1) * x) / _cexpm1(x)
        errs = 8 * _U * (2.0 + nu * np.abs(x)) * np.abs(vals)
        return vals, errs


class GeometricBase(BaseSeries):
    """``sum_{n>=1} (a**-n)**s = 1/(a**s - 1)`` for ``a > 1``."""

    S0 = 0.0
    monotone_from = 1

    def __init__(self, a):
        a = float(a)
        if not a > 1:
            raise ValueError("geometric base needs a > 1")
        self.a = a
        self.log_a = math.log(a)
        self.name = f"geometric(a={a:g})"
        self.continuation = _GeometricContinuation(self)

    def term(self, n):
        return 1.0 + 0j, math.exp(-n * self.log_a)

    def terms(self, n_lo, n_hi):
        n = np.arange(n_lo, n_hi, dtype=float)
        return np.ones(n.shape, dtype=complex), np.exp(-n * self.log_a)

    def tail_bound(self, t, n0):
        if t <= self.S0:
            return math.inf
        x = t * self.log_a
        return math.exp(-n0 * x) / -math.expm1(-x)

    def to_config(self):
        return {"kind": "geometric", "a": self.a}


def geometric_continuation(a, s):
    """``1/(a**s - 1)``; raises :class:`NearPole` within 1e-8 of ``2 pi i k / log a``."""
    return GeometricBase(a).continuation.evaluate(s)


# --------------------------------------------------------------------------
# Hurwitz / Riemann zeta base


def _em_plan(s, q, target, log_target=None):
    """Pick ``(M, K)`` for one argument ``s``; see :func:`_em_plan_many`."""
    lt = math.log(target) if log_target is None else log_target
    M, K = _em_plan_many(np.array([complex(s)]), q, np.array([lt]))
    return int(M[0]), int(K[0])


def _em_plan_many(s, q, log_target):
    """Per-argument ``(M, K)`` arrays meeting the remainder bound.

    The bound is ``4 |(s)_{2K}| / (2 pi)**2K * x**-(sigma+2K-1) / (sigma+2K-1)``
    with ``x = M + q`` and ``(s)_{2K}`` the rising factorial.  For
    ``Re s < 1`` the direct sum grows like ``M**(1 - Re s)`` and cancels
    against the correction, so the smallest ``M`` wins; otherwise ``M + K``
    is minimised.
    """
    s = np.asarray(s, dtype=complex)
    sig = s.real
    # Keep the Bernoulli terms in their asymptotic regime.
    M_floor = np.ceil(np.abs(s) / (2 * math.pi)) + 1
    log_rising = np.zeros(s.shape)
    best_M = np.full(s.shape, np.inf)
    best_K = np.zeros(s.shape, dtype=int)
    small = sig < 1
    with np.errstate(divide="ignore", invalid="ignore"):
        for K in range(1, EM_MAX_ORDER + 1):
            log_rising = log_rising + np.log(np.abs(s + 2 * K - 2))
            log_rising = log_rising + np.log(np.abs(s + 2 * K - 1))
            expo = sig + 2 * K - 1
            log_needed = (
                math.log(4.0) + log_rising - 2 * K * math.log(2 * math.pi)
                - np.log(np.maximum(expo, 1e-300)) - log_target
            ) / np.maximum(expo, 1e-300)
            x_needed = np.exp(np.minimum(log_needed, 700.0))
            M = np.maximum(np.maximum(np.ceil(x_needed - q), 1.0), M_floor)
            M = np.where((expo > 0.5) & (M <= EM_MAX_TERMS), M, np.inf)
            better = np.where(small, M < best_M, M + K < best_M + best_K)
            best_M = np.where(better, M, best_M)
            best_K = np.where(better, K, best_K)
    if not np.all(np.isfinite(best_M)):
        raise AccuracyUnreachable(
            f"Euler-Maclaurin cannot reach its target within {EM_MAX_TERMS} terms"
        )
    return best_M.astype(int), best_K


def _em_remainder(s, q, M, K):
    s = np.asarray(s, dtype=complex)
    expo = s.real + 2 * K - 1
    log_rising = np.zeros(s.shape)
    with np.errstate(divide="ignore"):
        for j in range(2 * K):
            log_rising = log_rising + np.log(np.abs(s + j))
    return np.exp(
        math.log(4.0) + log_rising - 2 * K * math.log(2 * math.pi)
        - expo * math.log(M + q) - np.log(expo)
    )


def hurwitz_zeta_em_many(s, q, target=EM_TARGET):
    """Vectorised Euler-Maclaurin Hurwitz zeta; returns ``(values, abs_errors)``.

    ``target`` bounds the remainder relative to ``min(1, q**-Re s)``.  The
    returned error combines that bound with a rounding estimate proportional
    to the sum of absolute values of all terms.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    q = float(q)
    if not q > 0:
        raise ValueError("q must be positive")
    d = np.abs(s - 1.0)
    if np.any(d < POLE_EXCLUSION_RADIUS):
        raise NearPole("Hurwitz zeta evaluated at its pole s=1", location=1.0)
    # The target is relative to the leading term q**-Re(s), so that tiny
    # values far to the right keep their relative accuracy.
    lq = max(math.log(q), 0.0)
    Ms, Ks = _em_plan_many(s, q, math.log(target) - np.maximum(s.real, 0.0) * lq)
    values = np.empty(s.shape, dtype=complex)
    errors = np.empty(s.shape)
    groups = {}
    # Round M up to a coarse geometric grid so that nearby arguments share one
    # vectorised pass; a larger M only shrinks the remainder.
    Ms = np.where(Ms > 16, np.ceil(1.25 ** np.ceil(np.log(Ms) / math.log(1.25))), Ms)
    Ms = Ms.astype(int)
    for idx, plan in enumerate(zip(Ms.tolist(), Ks.tolist())):
        groups.setdefault(plan, []).append(idx)
    for (M, K), idx in groups.items():
        idx = np.array(idx)
        values[idx], errors[idx] = _em_eval(s[idx], q, M, K)
    if q == int(q) and q <= REFLECTION_MAX_Q:
        left = np.nonzero(s.real < 0)[0]
        for i in left:
            v, e = _hurwitz_reflected(s[i], int(q), target)
            if e < errors[i]:
                values[i], errors[i] = v, e
    return values, errors


def _log_sin(z):
    # log sin z without overflow for large |Im z| (any branch).
    if z.imag >= 0:
        return -1j * z + cmath.log(1 - cmath.exp(2j * z)) - cmath.log(-2j)
    return 1j * z + cmath.log(1 - cmath.exp(-2j * z)) - cmath.log(2j)


def _hurwitz_reflected(s, q, target):
    """``zeta(s) - sum_{n<q} n**-s`` with ``zeta`` from the reflection formula.

    ``zeta(s) = 2**s pi**(s-1) sin(pi s / 2) Gamma(1-s) zeta(1-s)``, accurate
    to a few ulps relative for ``Re s < 0`` where Euler-Maclaurin cancels.
    """
    s = complex(s)
    if s == int(s.real) and s.real <= 0 and int(s.real) % 2 == 0 and s != 0:
        z, z_err = 0j, 0.0  # trivial zeros
    else:
        zv, ze = _em_eval(np.array([1 - s]), 1.0, *_em_plan(1 - s, 1.0, target))
        logs = (
            s * math.log(2.0) + (s - 1) * math.log(math.pi)
            + _log_sin(math.pi * s / 2) + complex(loggamma(1 - s))
        )
        if logs.real > 700:
            return np.nan, np.inf
        factor = cmath.exp(logs)
        z = factor * complex(zv[0])
        rel = 8 * _U * (abs(logs) + 16) + float(ze[0]) / max(abs(complex(zv[0])), 1e-300)
        z_err = abs(z) * rel
    if q > 1:
        n = np.arange(1, q, dtype=float)
        head = np.exp(-s * np.log(n))
        z = z - complex(head.sum())
        growth = math.log2(q) + 2 + abs(s) * math.log(q)
        z_err += 8 * _U * growth * float(np.abs(head).sum())
    return z, z_err


def _em_eval(s, q, M, K):
    logs = np.log(np.arange(M, dtype=float) + q)
    powers = np.exp(-np.outer(logs, s))
    head = powers.sum(axis=0)
    mag = np.abs(powers).sum(axis=0)

    x = M + q
    lx = math.log(x)
    xs = np.exp(-s * lx)
    em = x * xs / (s - 1.0) + 0.5 * xs
    mag = mag + np.abs(x * xs / (s - 1.0)) + 0.5 * np.abs(xs)
    B = bernoulli_numbers(2 * K)
    poch = s.copy()
    fact = 2.0
    for k in range(1, K + 1):
        term = B[2 * k] / fact * poch * xs * x ** (1 - 2 * k)
        em = em + term
        mag = mag + np.abs(term)
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
    values = head + em
    # exp(-s log x) carries relative error ~ u |s log x| from its argument.
    growth = math.log2(M) + 4 + np.abs(s) * math.log(M + q)
    errors = _em_remainder(s, q, M, K) + 8 * _U * growth * mag
    return values, errors


def hurwitz_zeta_em(s, q=1.0):
    """Hurwitz zeta ``zeta(s, q) = sum_{n>=0} (n + q)**-s`` by Euler-Maclaurin.

    ``M`` and ``K`` are chosen so that the remainder bound is below 1e-13.

    Raises
    ------
    NearPole
        Within 1e-8 of ``s = 1``.
    AccuracyUnreachable
        If no ``M <= 10**6`` and ``K <= 32`` meet the target.
    """
    vals, _ = hurwitz_zeta_em_many([s], q)
    return complex(vals[0])


class _HurwitzContinuation(Continuation):
    def __init__(self, base):
        super().__init__(base)
        self.poles = PoleDescription(points=(1.0 + 0j,), residues=(1.0 + 0j,))

    def _evaluate(self, w):
        return hurwitz_zeta_em(w, self.base.q)

    def evaluate_tail(self, w, nu):
        vals, errs = self.evaluate_tail_many(np.array([complex(w)]), nu)
        return complex(vals[0]), float(errs[0])

    def evaluate_tail_many(self, ws, nu):
        ws = np.asarray(ws, dtype=complex)
        for w in ws:
            self.check_pole(w)
        return hurwitz_zeta_em_many(ws, self.base.q + nu - 1)


class HurwitzBase(BaseSeries):
    """``c_n = 1/(n - 1 + q)``, ``a_n = 1``; continuation ``zeta(s, q)``."""

    S0 = 1.0
    monotone_from = 1

    def __init__(self, q=1.0):
        q = float(q)
        if not q > 0:
            raise ValueError("q must be positive")
        self.q = q
        self.name = "zeta" if q == 1 else f"hurwitz(q={q:g})"
        self.continuation = _HurwitzContinuation(self)

    def term(self, n):
        return 1.0 + 0j, 1.0 / (n - 1 + self.q)

    def terms(self, n_lo, n_hi):
        n = np.arange(n_lo, n_hi, dtype=float)
        return np.ones(n.shape, dtype=complex), 1.0 / (n - 1 + self.q)

    def tail_bound(self, t, n0):
        # Integral test: first term plus integral from its abscissa.
        if t <= self.S0:
            return math.inf
        x0 = n0 - 1 + self.q
        return x0**-t + x0 ** (1 - t) / (t - 1)

    def to_config(self):
        return {"kind": "hurwitz", "q": self.q}


def ZetaBase():
    """Riemann zeta as a base series."""
    return HurwitzBase(1.0)


def shifted_tail_D_nu(base, w, nu):
    """Continuation of ``sum_{n >= nu} a_n c_n**w``.

    Equal to ``g(w) - sum_{n<nu} a_n c_n**w``; the bases compute it in closed
    form rather than by subtraction.
    """
    if nu < 1:
        raise ValueError("nu must be positive")
    return base.continuation.evaluate_tail(w, nu)[0]


# --------------------------------------------------------------------------
# Example families


def make_geometric_plus_b(a, b, J=30):
    """``sum_n 1/(a**n + b)**s`` as a perturbation of ``1/(a**s - 1)``.

    ``h(z) = -b z / (1 + b z)``, ``alpha_j = (-b)**j``, ``sigma_j = j``.  The
    radius is ``1/(2|b|)`` (capped at 1), so ``|b z| <= 1/2`` and
    ``|E_N(z)| <= |b|**(N+1) z**(N+1) / (1 - |b| eps)``.
    """
    a = float(a)
    b = complex(b)
    if not a > 1:
        raise InvalidPerturbation("need a > 1")
    base = GeometricBase(a)
    ab = abs(b)
    n_check = int(math.log(ab) / base.log_a) + 3 if ab > 1 else 3
    for n in range(1, n_check + 1):
        v = a**n + b
        if v == 0:
            raise InvalidPerturbation(f"a**n + b vanishes at n={n}")
        one_plus_bc = 1 + b * a**-n
        if one_plus_bc.imag == 0 and one_plus_bc.real <= 0:
            raise InvalidPerturbation(f"1 + h(c_{n}) on the branch cut")
    if ab == 0:
        expansion = PerturbationExpansion(
            alphas=(0j,) * J,
            sigmas=tuple(float(j) for j in range(1, J + 2)),
            error_constants=(EXACT_CONSTANT,) * (J + 1),
            radius=1.0,
            exact=True,
        )
    else:
        eps = min(1.0, 1.0 / (2 * ab))
        expansion = PerturbationExpansion(
            alphas=tuple((-b) ** j for j in range(1, J + 1)),
            sigmas=tuple(float(j) for j in range(1, J + 2)),
            error_constants=tuple(
                1.0 + ab ** (N + 1) / (1 - ab * eps) for N in range(J + 1)
            ),
            radius=eps,
        )

    def h(z):
        return -b * z / (1 + b * z)

    def rem(z, N):
        return (-b * z) ** (N + 1) / (1 + b * z)

    return PerturbedSeries(
        base,
        1.0,
        PerturbationFunction(h, expansion, name=f"-bz/(1+bz), b={b}", remainder=rem),
        name=f"geometric_plus_b(a={a:g}, b={b})",
        config={"type": "geometric_plus_b", "a": a, "b_re": b.real, "b_im": b.imag},
    )


def make_zeta_beta(beta, J=24):
    """``sum_n 1/(n + n**beta)**s`` as a perturbation of zeta.

    ``h(z) = -u/(1+u)`` with ``u = z**(1-beta)``; ``alpha_j = (-1)**j``,
    ``sigma_j = (1-beta) j``.  For ``0 < z < 1``,
    ``|E_N| = u**(N+1)/(1+u) <= z**sigma_{N+1}``.
    """
    beta = float(beta)
    if not 0 < beta < 1:
        raise InvalidPerturbation("beta must lie in (0, 1)")
    g = 1.0 - beta
    expansion = PerturbationExpansion(
        alphas=tuple(float((-1) ** j) for j in range(1, J + 1)),
        sigmas=tuple(g * j for j in range(1, J + 2)),
        error_constants=(2.0,) * (J + 1),
        radius=1.0,
    )

    def h(z):
        u = z**g
        return -u / (1 + u)

    def rem(z, N):
        u = z**g
        return (-u) ** (N + 1) / (1 + u)

    return PerturbedSeries(
        HurwitzBase(1.0),
        1.0,
        PerturbationFunction(
            h, expansion, name=f"-z^(1-b)/(1+z^(1-b)), b={beta:g}", remainder=rem
        ),
        name=f"zeta_beta(beta={beta:g})",
        config={"type": "zeta_beta", "beta": beta},
    )


def _series_reciprocal(p, order):
    """Coefficients of ``1/p(z)`` up to ``z**order`` (``p[0] != 0``)."""
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0 / p[0]
    for m in range(1, order + 1):
        acc = 0j
        for j in range(1, min(m, len(p) - 1) + 1):
            acc += p[j] * out[m - j]
        out[m] = -acc / p[0]
    return out


def _majorant_tail(Q, L, eps, eps2):
    """Bound on ``sum_{m >= L} H_m eps**m`` with ``H`` the coefficients of ``Q/(1-Q)``.

    Sums ``H_m eps**m`` for ``L <= m < L + 400`` exactly and bounds the rest by
    the Cauchy estimate ``H_m <= (Q(eps2)/(1-Q(eps2))) eps2**-m``.
    """
    upto = L + 400
    # Expand Q(eps t)/(1 - Q(eps t)), whose t**m coefficient is H_m eps**m:
    # the raw H_m grow geometrically and overflow for large m.
    scaled = np.asarray(Q, dtype=float) * eps ** np.arange(len(Q))
    one_minus = np.zeros(len(Q), dtype=float)
    one_minus[0] = 1.0
    one_minus[1:] = -scaled[1:]
    H = _series_reciprocal(one_minus, upto).real
    H[0] = 0.0  # 1/(1-Q) - 1 = Q/(1-Q)
    explicit = float(np.sum(H[L:]))
    q2 = float(np.polyval(np.asarray(Q, dtype=float)[::-1], eps2))
    r = eps / eps2
    rest = q2 / (1 - q2) * r ** (upto + 1) / (1 - r)
    return explicit + rest


def make_poly_reciprocal(coeffs, n_start=None, J=12, scan_cap=10**6):
    """``sum_{n >= n_start} 1/p(n)**s`` for monic ``p``, over ``zeta(s, n_start)``.

    ``coeffs`` lists ``p`` highest degree first with leading 1, e.g.
    ``[1, 0, 1]`` for ``z**2 + 1``.  With ``q(z) = sum_{j<d} a_j z**(d-j)``,
    ``h = -q/(1+q)``.  Its nonzero power-series coefficients give the expansion;
    the error constants come from the majorant ``Q/(1-Q)`` of ``h`` with
    ``Q(t) = sum |a_j| t**(d-j)``, on the radius where ``Q = 1/4``.
    """
    coeffs = [complex(c) for c in coeffs]
    if len(coeffs) < 2 or coeffs[0] != 1:
        raise InvalidPerturbation("need a monic polynomial of degree >= 1")
    d = len(coeffs) - 1
    q_asc = np.array(coeffs, dtype=complex)  # q_asc[m] = coefficient of z**m in q
    q_asc[0] = 0.0
    Q = np.abs(q_asc)

    def p_of(n):
        return complex(np.polyval(coeffs, n))

    # Past the Cauchy-type radius |q(1/n)| < 1, so p(n) != 0 and no branch issue.
    safe = int(math.ceil(float(np.sum(Q)))) + 1
    if n_start is None:
        n_start = 1
        for n in range(1, min(safe, scan_cap) + 1):
            v = p_of(n) / n**d
            if v == 0 or (v.imag == 0 and v.real <= 0):
                n_start = n + 1
        if n_start > scan_cap:
            raise InvalidPerturbation("no valid starting index below the scan cap")
    else:
        n_start = int(n_start)
        for n in range(n_start, max(safe, n_start) + 1):
            v = p_of(n) / n**d
            if v == 0 or (v.imag == 0 and v.real <= 0):
                raise InvalidPerturbation(f"p({n}) invalid for the principal branch")

    base = HurwitzBase(float(n_start))
    name = f"poly_reciprocal({coeffs})"
    config = {
        "type": "poly_reciprocal",
        "coeffs": [[c.real, c.imag] for c in coeffs],
        "n_start": n_start,
    }

    if not np.any(Q):
        expansion = PerturbationExpansion(
            alphas=(), sigmas=(1.0,), error_constants=(EXACT_CONSTANT,),
            radius=1.0, exact=True,
        )
        return PerturbedSeries(
            base, float(d), PerturbationFunction(lambda z: 0.0 * z, expansion, "0"),
            name=name, config=config,
        )

    def Qt(t):
        return float(np.polyval(Q[::-1], t))

    eps = invert_monotone(Qt, 0.25, (0.0, max(1.0, 1.0 / (Q[Q > 0].min()) + 1)))
    eps = min(eps, 1.0)
    eps2 = invert_monotone(Qt, 0.5, (0.0, max(1.0, 2.0 / (Q[Q > 0].min()) + 2)))

    # h = 1/(1+q) - 1
    order = max(4 * (J + 2) * d, 64)
    hs = _series_reciprocal(np.concatenate([[1.0], q_asc[1:]]), order)
    hs[0] = 0.0
    nz = [m for m in range(1, order + 1) if abs(hs[m]) > 1e-300]
    if len(nz) < J + 1:
        raise InvalidPerturbation("could not find enough nonzero expansion terms")
    powers = nz[: J + 1]
    alphas = tuple(complex(hs[m]) for m in powers[:J])
    consts = tuple(
        1.0 + eps ** -powers[N] * _majorant_tail(Q, powers[N], eps, eps2)
        for N in range(J + 1)
    )
    expansion = PerturbationExpansion(
        alphas=alphas,
        sigmas=tuple(float(m) for m in powers),
        error_constants=consts,
        radius=eps,
    )
    q_coeffs = q_asc[1:]

    def h(z):
        z = np.asarray(z, dtype=float)
        qz = np.zeros(z.shape, dtype=complex)
        for m, qm in enumerate(q_coeffs, start=1):
            qz = qz + qm * z**m
        return -qz / (1 + qz)

    one_plus_q = np.concatenate([[1.0], q_coeffs])
    rem_polys = {}

    def rem(z, N):
        # E_N = -R / (1 + q) with R = (1 + q)(1 + p_N) - 1, whose coefficients
        # below degree sigma_{N+1} vanish and are dropped exactly.
        if N not in rem_polys:
            one_plus_p = np.zeros(powers[N], dtype=complex)
            one_plus_p[0] = 1.0
            for m in powers[:N]:
                one_plus_p[m] = hs[m]
            R = np.convolve(one_plus_q, one_plus_p)
            R[: powers[N]] = 0.0
            rem_polys[N] = R
        R = rem_polys[N]
        z = np.asarray(z, dtype=float)
        return -np.polyval(R[::-1], z) / np.polyval(one_plus_q[::-1], z)

    return PerturbedSeries(
        base, float(d),
        PerturbationFunction(h, expansion, name="-q/(1+q)", remainder=rem),
        name=name, config=config,
    )


def make_multi_geometric(bases, weights):
    """``sum_n (sum_j w_j a_j**n)**s`` for ``1 > a_1 > ... > a_d > 0``, ``w_1 = 1``.

    The base is geometric with ratio ``1/a_1``; ``h(z) = sum_{j>=2} w_j z**sigma_j``
    exactly, with ``sigma_j = log a_j / log a_1 - 1`` so that
    ``z**sigma_j = (a_j / a_1)**n`` at ``z = a_1**n``.
    """
    bases = [float(x) for x in bases]
    weights = [float(w) for w in weights]
    if len(bases) != len(weights) or not bases:
        raise InvalidPerturbation("bases and weights must have equal nonzero length")
    if any(not 0 < x < 1 for x in bases):
        raise InvalidPerturbation("bases must lie in (0, 1)")
    if any(y >= x for x, y in zip(bases, bases[1:])):
        raise InvalidPerturbation("bases must be strictly decreasing")
    if any(w <= 0 for w in weights):
        raise InvalidPerturbation("weights must be positive")
    if weights[0] != 1.0:
        raise InvalidPerturbation("leading weight must be normalised to 1")
    la1 = math.log(bases[0])
    alphas = tuple(weights[1:])
    sig = [math.log(x) / la1 - 1.0 for x in bases[1:]]
    last = sig[-1] + 1.0 if sig else 1.0
    sigmas = tuple(sig) + (last,)
    J = len(alphas)
    consts = []
    for N in range(J + 1):
        if N == J:
            consts.append(EXACT_CONSTANT)
        else:
            # z < 1, so sum_{j>N} w_j z**sigma_j <= z**sigma_{N+1} sum_{j>N} w_j.
            consts.append(1.0 + sum(alphas[N:]))
    expansion = PerturbationExpansion(
        alphas=alphas, sigmas=sigmas, error_constants=tuple(consts),
        radius=1.0, exact=True,
    )

    def h(z):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=complex)
        for w, s in zip(alphas, sig):
            out = out + w * z**s
        return out

    def rem(z, N):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=complex)
        for w, s in zip(alphas[N:], sig[N:]):
            out = out + w * z**s
        return out

    return PerturbedSeries(
        GeometricBase(1.0 / bases[0]),
        1.0,
        PerturbationFunction(h, expansion, name="sum w_j z^sigma_j", remainder=rem),
        name=f"multi_geometric({bases}, {weights})",
        config={"type": "multi_geometric", "bases": bases, "weights": weights},
    )


def weierstrass_w(t, n_terms=200):
    """``sum_{n < n_terms} (5/6)**n cos(7**n pi t)``.

    ``7**n t mod 2`` is reduced exactly from the binary expansion of ``t``,
    so high-frequency terms keep full accuracy.
    """
    num, den = float(t).as_integer_ratio()
    total = 0.0
    mod = 2 * den
    p7 = 1
    for n in range(n_terms):
        r = (p7 * num) % mod
        total += (5.0 / 6.0) ** n * math.cos(math.pi * r / den)
        p7 = (p7 * 7) % mod
    return total


def flat_perturbation(t, n_terms=200):
    """``exp(-1/t**2) W(t)``: no nonzero asymptotic term, nowhere differentiable factor."""
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive")
    return math.exp(-1.0 / (t * t)) * weierstrass_w(t, n_terms)


def flat_error_constant(m, eps=1.0):
    """``1 + 6 * sup_{0<t<eps} exp(-1/t**2) t**-m``."""
    t_star = math.sqrt(2.0 / m)
    t = min(t_star, eps)
    return 1.0 + 6.0 * math.exp(-1.0 / (t * t) - m * math.log(t))


def make_flat_weierstrass(a=math.e, J=40, n_terms=200):
    """Geometric base perturbed by ``h(t) = exp(-1/t**2) W(t)``.

    All expansion coefficients vanish; ``|h(t)| <= C_N t**(N+1)`` for every
    ``N`` with the constant from :func:`flat_error_constant`.
    """
    expansion = PerturbationExpansion(
        alphas=(0j,) * J,
        sigmas=tuple(float(j) for j in range(1, J + 2)),
        error_constants=tuple(flat_error_constant(N + 1) for N in range(J + 1)),
        radius=1.0,
    )
    return PerturbedSeries(
        GeometricBase(a),
        1.0,
        PerturbationFunction(
            lambda t: flat_perturbation(t, n_terms) if t > 0 else 0.0,
            expansion, name="exp(-1/t^2) W(t)", vectorized=False,
        ),
        name=f"flat_weierstrass(a={float(a):g})",
        config={"type": "flat_weierstrass", "a": float(a)},
    )


def make_custom(base, sigma, alphas, sigmas, func=None, error_constants=None,
                radius=1.0, exact=False, name="custom"):
    """Perturbed series from a user-supplied expansion.

    Without ``func`` the perturbation is the finite power sum itself
    (``exact`` is forced).  Without ``error_constants`` they are estimated by
    :func:`estimate_error_constants` and every result is flagged uncertified.
    """
    alphas = tuple(complex(x) for x in alphas)
    sigmas = tuple(float(x) for x in sigmas)
    if len(sigmas) == len(alphas):
        sigmas = sigmas + ((sigmas[-1] + 1.0) if sigmas else 1.0,)
    certified = True
    rem = None
    if func is None:
        exact = True

        def rem(z, N):
            z = np.asarray(z, dtype=float)
            out = np.zeros(z.shape, dtype=complex)
            for a_, s_ in zip(alphas[N:], sigmas[N:]):
                out = out + a_ * z**s_
            return out

        def func(z):
            z = np.asarray(z, dtype=float)
            out = np.zeros(z.shape, dtype=complex)
            for a_, s_ in zip(alphas, sigmas):
                out = out + a_ * z**s_
            return out

        if error_constants is None:
            error_constants = []
            for N in range(len(alphas) + 1):
                if N == len(alphas):
                    error_constants.append(EXACT_CONSTANT)
                else:
                    tail = sum(
                        abs(a_) * radius ** (s_ - sigmas[N])
                        for a_, s_ in zip(alphas[N:], sigmas[N:])
                    )
                    error_constants.append(1.0 + tail)
    elif error_constants is None:
        error_constants = estimate_error_constants(func, alphas, sigmas, radius)
        certified = False
    expansion = PerturbationExpansion(
        alphas=alphas, sigmas=sigmas, error_constants=tuple(error_constants),
        radius=radius, exact=exact, certified=certified,
    )
    return PerturbedSeries(
        base, float(sigma),
        PerturbationFunction(func, expansion, name=name, remainder=rem),
        name=name,
    )
