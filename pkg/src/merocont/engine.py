"""Constructive meromorphic extension of a perturbed Dirichlet series.

For a truncation order ``N`` the extension is assembled as

    g_N(s) = head(s) + q_N(s) + h_N(s)

* ``head`` -- the first ``nu - 1`` terms summed directly (entire in ``s``);
* ``q_N`` -- ``sum_k (s)_k/k! sum_{|k|=k} A(k, alpha) D_nu(sigma s + sigma.k)``,
  the meromorphic main term built from shifted tails of the base continuation;
* ``h_N`` -- ``sum_{k>=1} (s)_k/k! sum_{n>=nu} a_n c_n**(sigma s) E_k(c_n)``,
  holomorphic on ``P_N``.

Each infinite sum is truncated with a certified tail bound, and the value
carries the sum of those bounds plus a floating-point rounding estimate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AccuracyUnreachable,
    CapacityExceeded,
    DomainError,
    NearPole,
    ScanExceeded,
    TruncationUnavailable,
)
from .numerics import (
    falling_factorial_ratios,
    invert_monotone,
    multinomial_weight,
    power_geometric_tail,
    shift_inner_product,
    weak_compositions,
)
from .series import POLE_EXCLUSION_RADIUS, pn_halfplane

_U = 2.0**-53

#: Largest ``nu`` that :func:`choose_nu` will search for.
NU_SCAN_LIMIT = 10**6

#: Bound on ``|h(c_n)|`` enforced for ``n >= nu``.
H_SMALLNESS = 0.4

#: Preferred and hard limits on ``M_max`` used by N-selection.
M_SOFT_CAP = 20_000
M_HARD_CAP = 10**6
K_CAP = 4000

#: Maximum number of distinct (k, shift) pairs in the main term.
SHIFT_CAP = 2 * 10**6

#: How many truncation orders past the first admissible one N-selection tries.
N_SEARCH_WIDTH = 12

_CHUNK = 4096


@dataclass(frozen=True)
class TruncationPlan:
    """Truncation parameters behind one evaluation.

    ``M_max == 0`` marks an identically vanishing error term (no ``n`` sum).
    """

    N: int
    nu: int
    delta: float
    kstar: int
    K_max: int
    M_max: int

    def as_dict(self):
        return {
            "N": self.N,
            "nu": self.nu,
            "delta": self.delta,
            "kstar": self.kstar,
            "K_max": self.K_max,
            "M_max": self.M_max,
        }


@dataclass(frozen=True)
class ExtensionValue:
    value: complex
    error_bound: float
    plan: TruncationPlan
    certified: bool
    components: dict = field(default_factory=dict, compare=False)


# --------------------------------------------------------------------------
# Truncation parameters


def compute_delta(expansion, N):
    """``delta = min(eps, M^{-1}(1/2))``.

    ``M(t) = max(sum_{j<=N} |alpha_j| t**sigma_j, C_N t**sigma_{N+1})``.  The
    returned value satisfies ``M(delta) <= 1/2``.
    """
    eps = expansion.radius

    def M(t):
        return expansion.M(t, N)

    if M(eps) <= 0.5:
        return eps
    return invert_monotone(M, 0.5, (0.0, eps))


def choose_nu(base, delta, scan_limit=NU_SCAN_LIMIT):
    """Smallest ``nu >= 1`` with ``c_n < delta`` for every ``n >= nu``.

    Searches past ``base.monotone_from`` by bisection (``c_n`` is nonincreasing
    there) and scans the indices before it directly.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    m0 = max(int(base.monotone_from), 1)

    def c(n):
        return base.term(n)[1]

    if c(m0) < delta:
        first_good = m0
    else:
        hi = m0 + 1
        while c(hi) >= delta:
            if hi > scan_limit:
                raise ScanExceeded(f"c_n >= {delta!r} for all n <= {scan_limit}")
            hi = min(2 * hi, scan_limit + 1)
        lo = hi // 2 if hi // 2 >= m0 else m0
        # invariant: c(lo) >= delta > c(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if c(mid) < delta:
                hi = mid
            else:
                lo = mid
        first_good = hi
    if first_good == 1:
        return 1
    _, cs = base.terms(1, first_good)
    bad = np.nonzero(cs >= delta)[0]
    return int(bad[-1]) + 2 if len(bad) else 1


def kstar(expansion, N):
    """``ceil(sigma_{N+1} / sigma_1)``; 1 for ``N = 0`` or a zero expansion."""
    alphas, sigmas = expansion.active(N)
    if N == 0 or not alphas:
        return 1
    ratio = expansion.sigma(N + 1) / expansion.sigma(1)
    return max(1, math.ceil(ratio - 1e-12))


def epsilon_k(h, z, k, N):
    """``E_k(z) = h(z)**k - sum_{|k|=k} A(k, alpha) z**(sigma.k)``.

    Evaluated by enumerating weak compositions; used as the reference for the
    vectorised recurrence inside :func:`error_term_hN`.
    """
    exp = h.expansion
    z = float(z)
    if not 0 < z < exp.radius:
        raise DomainError(f"z={z!r} outside (0, {exp.radius!r})")
    if k < 1:
        raise ValueError("k must be positive")
    hz = complex(h(z))
    if N == 0:
        return hz**k
    alphas, sigmas, _ = exp.truncation(N)
    power = 0j
    for kv in weak_compositions(k, N):
        power += multinomial_weight(kv, alphas) * z ** shift_inner_product(kv, sigmas)
    return hz**k - power


def _margin(series):
    return max(0.25, 0.1 * abs(series.base.S0) / series.sigma)


def _tail_exponent(series, s, N):
    return series.sigma * complex(s).real + series.expansion.sigma(N + 1)


def _smallness_radius(expansion, N, delta):
    """Largest ``t <= delta`` with the ``|h|`` majorant at most ``H_SMALLNESS``."""

    def f(t):
        return expansion.h_majorant(t, N)

    if f(delta) <= H_SMALLNESS:
        return delta
    return invert_monotone(f, H_SMALLNESS, (0.0, delta))


def _q_tail(series, s, N, delta, nu, K):
    exp = series.expansion
    alphas, _ = exp.active(N)
    if not alphas:
        return 0.0
    s = complex(s)
    if s == 0:
        return 0.0
    T = series.base.tail_bound(_tail_exponent(series, s, N), nu)
    sig = exp.sigma(N + 1)
    return abs(s) * delta**-sig * T * power_geometric_tail(K, abs(s + 1))


def _hk_tail(series, s, N, nu, K):
    exp = series.expansion
    if exp.remainder_vanishes(N):
        return 0.0
    s = complex(s)
    if s == 0:
        return 0.0
    C = exp.error_constant(N)
    T = series.base.tail_bound(_tail_exponent(series, s, N), nu)
    return 2.0 * C * abs(s) * T * power_geometric_tail(K, abs(s + 1) + 1)


def _hn_tail(series, s, N, M):
    exp = series.expansion
    if exp.remainder_vanishes(N):
        return 0.0
    s = complex(s)
    if s == 0:
        return 0.0
    C = exp.error_constant(N)
    T = series.base.tail_bound(_tail_exponent(series, s, N), M + 1)
    return 2.0 * C * abs(s) * T * power_geometric_tail(0, abs(s + 1) + 1)


def _choose_M(series, s, N, nu, budget, cap):
    if series.expansion.remainder_vanishes(N):
        return 0
    if _hn_tail(series, s, N, nu - 1) <= budget:
        return max(nu - 1, 0)
    lo, hi = max(nu - 1, 0), max(2 * nu, 16)
    while _hn_tail(series, s, N, hi) > budget:
        lo = hi
        if hi >= cap:
            return None
        hi = min(2 * hi, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _hn_tail(series, s, N, mid) <= budget:
            hi = mid
        else:
            lo = mid
    return hi


def build_plan(series, s, tol, N, nu_scale=1, K_scale=1, M_scale=1, M_cap=M_HARD_CAP):
    """Truncation plan for fixed ``N`` meeting the tail budget ``tol / 2``.

    Budget split: ``tol/4`` for the main-term k-tail, ``tol/8`` each for the
    error term's k-tail and n-tail.  Returns ``None`` when the n-sum would
    need more than ``M_cap`` terms.
    """
    s = complex(s)
    exp = series.expansion
    if N > exp.max_truncation:
        raise TruncationUnavailable(f"N={N} exceeds expansion length {exp.J}")
    thr = pn_halfplane(series, N).threshold
    if not s.real > thr:
        raise TruncationUnavailable(f"s={s!r} not in P_{N} (Re s > {thr:g})")
    if not math.isfinite(series.base.tail_bound(_tail_exponent(series, s, N), 10**9)):
        raise TruncationUnavailable(f"s={s!r} too close to the edge of P_{N}")

    delta = compute_delta(exp, N)
    alphas, _ = exp.active(N)
    if not alphas and exp.remainder_vanishes(N):
        return TruncationPlan(N, max(1, nu_scale), delta, 1, 0, 0)
    nu = choose_nu(series.base, _smallness_radius(exp, N, delta)) * int(nu_scale)
    ks = kstar(exp, N)
    K = ks
    while (
        _q_tail(series, s, N, delta, nu, K) > tol / 4
        or _hk_tail(series, s, N, nu, K) > tol / 8
    ):
        K += 1
        if K > K_CAP:
            raise AccuracyUnreachable(f"k-sum needs more than {K_CAP} terms")
    K = int(K * K_scale)
    M = _choose_M(series, s, N, nu, tol / 8, M_cap)
    if M is None:
        return None
    M = int(M * M_scale) if M else M
    return TruncationPlan(N, nu, delta, ks, K, M)


def plan_truncation(series, s, tol, N=None, nu_scale=1, K_scale=1, M_scale=1):
    """Pick ``N`` and build a :class:`TruncationPlan`.

    Starts at the smallest ``N`` whose half-plane contains ``s`` with margin
    ``max(0.25, 0.1 |S0| / sigma)`` and moves to larger ``N`` while the
    error term's n-sum would be long (its tail exponent grows with ``N``).
    """
    s = complex(s)
    exp = series.expansion
    if N is not None:
        plan = build_plan(series, s, tol, N, nu_scale, K_scale, M_scale)
        if plan is None:
            raise AccuracyUnreachable(f"n-sum for N={N} exceeds {M_HARD_CAP} terms")
        return plan
    margin = _margin(series)
    n_min = None
    for cand in range(0, exp.max_truncation + 1):
        if s.real > pn_halfplane(series, cand).threshold + margin:
            n_min = cand
            break
    if n_min is None:
        raise TruncationUnavailable(
            f"s={s!r} outside every available half-plane P_N (N <= {exp.max_truncation})"
        )
    best = None
    for cand in range(n_min, min(exp.max_truncation, n_min + N_SEARCH_WIDTH) + 1):
        plan = build_plan(series, s, tol, cand, nu_scale, K_scale, M_scale)
        if plan is None:
            continue
        if plan.M_max <= M_SOFT_CAP * M_scale:
            return plan
        if best is None or plan.M_max < best.M_max:
            best = plan
    if best is None:
        raise AccuracyUnreachable(f"no truncation order meets tol={tol:g}")
    return best


# --------------------------------------------------------------------------
# The three pieces.  Each works on an array of s values sharing one plan, so
# contour quadrature and grids cost one vectorised pass.


def head_term(series, s, nu):
    """``sum_{n<nu} a_n exp(s (sigma ln c_n + Log(1 + h(c_n))))``."""
    values, _ = _head_many(series, np.array([complex(s)]), nu)
    return complex(values[0])


def _head_many(series, S, nu):
    if nu <= 1:
        return np.zeros(S.shape, dtype=complex), np.zeros(S.shape)
    a, logc = series.log_bases(1, nu)
    expo = np.outer(S, logc)
    terms = a * np.exp(expo)
    err = 8 * _U * np.sum(np.abs(terms) * (2.0 + np.abs(expo)), axis=1)
    return terms.sum(axis=1), err


def shift_weights(expansion, N, K, cap=SHIFT_CAP):
    """Coefficients of ``(sum_j alpha_j x**sigma_j)**k`` for ``k = 0..K``.

    Returns a list whose ``k``-th entry maps each distinct shift ``sigma.k``
    (rounded to 10 decimals as a key) to ``(shift, sum A(k, alpha))`` over the
    compositions of weight ``k`` producing it.  This is the multinomial
    expansion grouped by shift; zero coefficients are dropped up front so they
    contribute no shifts.
    """
    alphas, sigmas = expansion.active(N)
    levels = [{0.0: (0.0, 1.0 + 0j)}]
    total = 1
    for _ in range(K):
        prev = levels[-1]
        nxt = {}
        if alphas:
            for sh, c in prev.values():
                for a, sg in zip(alphas, sigmas):
                    new = sh + sg
                    key = round(new, 10)
                    if key in nxt:
                        old_sh, old_c = nxt[key]
                        nxt[key] = (old_sh, old_c + c * a)
                    else:
                        nxt[key] = (new, c * a)
        total += len(nxt)
        if total > cap:
            raise CapacityExceeded(f"main term needs more than {cap} shifted terms")
        levels.append(nxt)
    return levels


def _ratio_matrix(S, K):
    return np.array([falling_factorial_ratios(s, K) for s in S]).reshape(len(S), K + 1)


def _binomial_slope(k, n0):
    """Derivative of ``(s)_k/k!`` at its zero ``s = n0`` with ``0 <= n0 < k``."""
    return (-1) ** (k - 1 - n0) / (k * math.comb(k - 1, n0))


def _removable_limits(series, S, R, coeff, W, used):
    """Limits of ``(s)_k/k! * D_nu(sigma s + shift)`` where both factors degenerate.

    At an integer ``s0`` with ``(s0)_k/k! = 0`` and ``sigma s0 + shift`` on a
    base pole ``p`` of residue ``r`` the product tends to the slope of the
    binomial times ``r / sigma``.
    """
    out = np.zeros(len(S), dtype=complex)
    idle = ~used & (np.abs(coeff).sum(axis=0) > 0)[None, :]
    if not idle.any():
        return out
    table = series.base.continuation.poles
    for i, j in zip(*np.nonzero(idle)):
        w = W[i, j]
        near = [
            (p, r) for p, r in table.poles_in(w.imag - 1.0, w.imag + 1.0)
            if abs(w - p) < POLE_EXCLUSION_RADIUS
        ]
        if not near:
            continue
        _, r = near[0]
        n0 = int(round(S[i].real))
        slope = sum(
            _binomial_slope(k, n0) * coeff[k, j]
            for k in range(1, R.shape[1])
            if coeff[k, j] != 0 and R[i, k] == 0
        )
        out[i] += slope * r / series.sigma
    return out


def _main_many(series, S, plan):
    exp = series.expansion
    N, nu = plan.N, plan.nu
    alphas, _ = exp.active(N)
    K = plan.K_max if alphas else 0
    levels = shift_weights(exp, N, K)
    keys = []
    index = {}
    for level in levels:
        for key, (sh, _) in level.items():
            if key not in index:
                index[key] = len(keys)
                keys.append(sh)
    coeff = np.zeros((K + 1, len(keys)), dtype=complex)
    for k, level in enumerate(levels):
        for key, (_, c) in level.items():
            coeff[k, index[key]] = c
    R = _ratio_matrix(S, K)
    # A shifted argument is evaluated only where some nonzero (s)_k/k! meets
    # a nonzero weight.  The others occur at s in {0, 1, 2, ...}; if such an
    # argument sits on a base pole the product has a finite limit, added below.
    used = ((R != 0).astype(float) @ (coeff != 0).astype(float)) > 0
    shifts = np.array(keys)
    W = series.sigma * S[:, None] + shifts[None, :]
    limits = _removable_limits(series, S, R, coeff, W, used)
    D = np.zeros(W.shape, dtype=complex)
    Derr = np.zeros(W.shape)
    flat = W[used]
    if flat.size:
        try:
            vals, errs = series.base.continuation.evaluate_tail_many(flat, nu)
        except NearPole as exc:
            w = exc.location
            bad = int(np.argmin(np.abs(flat - w))) if w is not None else 0
            row = np.nonzero(used)[0][bad]
            s_bad = complex(S[row])
            raise NearPole(
                f"s={s_bad!r}: shifted argument {complex(flat[bad])!r} meets a base pole",
                location=s_bad,
                shift=complex(flat[bad]) - series.sigma * s_bad,
            ) from exc
        D[used] = vals
        Derr[used] = errs
    # per_k[i, k] = sum over shifts of A * D for point i.
    per_k = D @ coeff.T
    values = np.sum(R * per_k, axis=1) + limits
    absRC = np.abs(R) @ np.abs(coeff)  # nodes x keys
    cont_err = np.sum(absRC * Derr, axis=1)
    mag = np.sum(absRC * np.abs(D), axis=1) + np.abs(limits)
    errs = cont_err + 8 * _U * (math.log2(max(len(keys), 2)) + K + 2) * mag
    tails = np.array([_q_tail(series, s, N, plan.delta, nu, K) for s in S])
    return values, tails, errs


def main_term_qN(series, s, plan, full_output=False):
    """Main term ``q_N`` truncated at ``k <= K_max``; returns ``(value, tail_bound)``.

    Summation is by distinct shift: ``sum_k (s)_k/k! sum_shift W_k(shift)
    D_nu(sigma s + shift)``.  With ``full_output`` a third item, the rounding
    and continuation error estimate, is returned.
    """
    v, tail, err = _main_many(series, np.array([complex(s)]), plan)
    out = (complex(v[0]), float(tail[0]))
    return out + (float(err[0]),) if full_output else out


def _error_many(series, S, plan):
    exp = series.expansion
    N, nu, K, M = plan.N, plan.nu, plan.K_max, plan.M_max
    zeros = np.zeros(S.shape, dtype=complex)
    if exp.remainder_vanishes(N):
        return zeros, np.zeros(S.shape), np.zeros(S.shape)
    tails = np.array([
        _hk_tail(series, s, N, nu, K) + _hn_tail(series, s, N, max(M, nu - 1))
        for s in S
    ])
    if M < nu or K < 1:
        return zeros, tails, np.zeros(S.shape)
    R = _ratio_matrix(S, K)[:, 1:]
    absR = np.abs(R)
    values = np.zeros(S.shape, dtype=complex)
    mag = np.zeros(S.shape)
    err = np.zeros(S.shape)
    sig_s = series.sigma * S
    for lo in range(nu, M + 1, _CHUNK):
        hi = min(lo + _CHUNK, M + 1)
        a, c = series.base.terms(lo, hi)
        hz = series.h(c)
        pz = exp.partial_sum(c, N)
        E, E_err = series.h.remainder(c, N, hz, pz)
        # E_k = E * dh_k with dh_1 = 1, dh_k = h dh_{k-1} + p**(k-1).
        DH = np.empty((K, len(c)), dtype=complex)
        DH[0] = 1.0
        p_pow = np.ones_like(pz)
        for k in range(1, K):
            p_pow = p_pow * pz
            DH[k] = hz * DH[k - 1] + p_pow
        acc = R @ DH
        acc_abs = absR @ np.abs(DH)
        logc = np.log(c)
        with np.errstate(divide="ignore"):
            logE = np.log(E)
            logEerr = np.log(E_err)
        # a_n c_n**(sigma s) E_N(c_n) is formed in log space so a huge
        # c_n**(sigma s) never meets a tiny E unprotected.
        expo = np.outer(sig_s, logc) + logE
        weight = a * np.exp(expo)
        werr = np.abs(a) * np.exp(np.outer(sig_s.real, logc) + logEerr)
        terms = weight * acc
        values += terms.sum(axis=1)
        tabs = np.abs(terms)
        mag += tabs.sum(axis=1)
        err += np.sum(werr * acc_abs, axis=1)
        # Relative error of exp() from the rounding of its argument.
        arg = np.where(np.isfinite(logE), np.abs(expo), 0.0)
        err += 4 * _U * np.sum(tabs * arg, axis=1)
    err += 8 * _U * (math.log2(max(M - nu + 1, 2)) + K + 4) * mag
    return values, tails, err


def error_term_hN(series, s, plan, full_output=False):
    """Error term ``h_N`` truncated at ``k <= K_max`` and ``nu <= n <= M_max``.

    ``E_k(z) = h(z)**k - p(z)**k`` with ``p`` the ``N``-term partial sum (the
    multinomial theorem collapses the composition sum to ``p**k``).  It is
    computed as ``E_N(z)`` times ``(h**k - p**k)/(h - p)``, the latter by a
    cancellation-free recurrence, with ``E_N`` taken from the perturbation's
    closed-form remainder when it has one.  Returns ``(value, tail_bound)``,
    plus a rounding estimate with ``full_output``.
    """
    v, tail, err = _error_many(series, np.array([complex(s)]), plan)
    out = (complex(v[0]), float(tail[0]))
    return out + (float(err[0]),) if full_output else out


# --------------------------------------------------------------------------
# Assembly


def evaluate_with_plan(series, s, plan):
    """Assemble ``head + q_N + h_N`` for a fixed plan."""
    return evaluate_many_with_plan(series, [s], plan)[0]


def evaluate_many_with_plan(series, s_values, plan):
    """Vectorised :func:`evaluate_with_plan`; one ExtensionValue per point."""
    S = np.asarray(s_values, dtype=complex).ravel()
    head, head_err = _head_many(series, S, plan.nu)
    q, q_tail, q_err = _main_many(series, S, plan)
    hN, h_tail, h_err = _error_many(series, S, plan)
    certified = series.expansion.certified
    out = []
    for i in range(len(S)):
        rounding = float(q_err[i] + h_err[i] + head_err[i])
        out.append(ExtensionValue(
            value=complex(head[i] + q[i] + hN[i]),
            error_bound=float(q_tail[i] + h_tail[i]) + rounding,
            plan=plan,
            certified=certified,
            components={
                "head": complex(head[i]),
                "q": complex(q[i]),
                "h": complex(hN[i]),
                "q_tail": float(q_tail[i]),
                "h_tail": float(h_tail[i]),
                "rounding": rounding,
            },
        ))
    return out


def evaluate_extension(series, s, tol=1e-10, N=None, nu_scale=1, K_scale=1, M_scale=1):
    """Value of the meromorphic extension at ``s`` with a certified error bound.

    Parameters
    ----------
    series : PerturbedSeries
    s : complex
    tol : float
        Target for the truncation error; the tail bounds are driven below
        ``tol / 2``.  The reported ``error_bound`` also includes rounding and
        continuation errors.
    N : int, optional
        Force a truncation order instead of selecting one.
    nu_scale, K_scale, M_scale : int
        Multiply the planned ``nu``, ``K_max`` and ``M_max`` (stability checks).

    Raises
    ------
    NearPole
        If a shifted argument of the base continuation hits a base pole.
    TruncationUnavailable
        If ``s`` lies left of every available half-plane ``P_N``.
    AccuracyUnreachable
        If truncation caps are hit before ``tol`` is met.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    plan = plan_truncation(series, s, tol, N, nu_scale, K_scale, M_scale)
    return evaluate_with_plan(series, s, plan)


def common_plan(series, s_values, tol, N=None):
    """One plan valid for every point of ``s_values``.

    ``N`` comes from the point with the smallest real part; ``K_max`` and
    ``M_max`` are the maxima of the per-point plans for that ``N``.
    """
    S = np.asarray(s_values, dtype=complex).ravel()
    if N is None:
        N = plan_truncation(series, S[np.argmin(S.real)], tol).N
    plans = [build_plan(series, s, tol, N) for s in S]
    if any(p is None for p in plans):
        raise AccuracyUnreachable(f"n-sum for N={N} exceeds {M_HARD_CAP} terms")
    first = plans[0]
    return TruncationPlan(
        N=N,
        nu=first.nu,
        delta=first.delta,
        kstar=first.kstar,
        K_max=max(p.K_max for p in plans),
        M_max=max(p.M_max for p in plans),
    )


def evaluate_many(series, s_values, tol=1e-10, N=None):
    """Evaluate the extension on many points with one shared plan."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    plan = common_plan(series, s_values, tol, N)
    return evaluate_many_with_plan(series, s_values, plan)


def consistency_check(series, s, N1, N2, tol=1e-10, full_output=False):
    """``|g_{N1}(s) - g_{N2}(s)|``; with ``full_output`` also the sum of both bounds."""
    v1 = evaluate_extension(series, s, tol, N=N1)
    v2 = evaluate_extension(series, s, tol, N=N2)
    diff = abs(v1.value - v2.value)
    if full_output:
        return diff, v1.error_bound + v2.error_bound
    return diff
