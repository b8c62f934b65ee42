"""Numeric and combinatorial primitives shared by the rest of the package.

Everything here works in plain double precision.  Functions are pure; the
Bernoulli table is memoised but immutable.
"""

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import BracketInvalid, CapacityExceeded, EvaluationFailed

#: Default cap on the number of compositions a single ``(k, N)`` call may yield.
COMPOSITION_CAP = 10**7

#: Relative tolerance used by :func:`invert_monotone`.
BISECTION_RTOL = 1e-14

#: Default node count for :func:`residue_estimate`.
RESIDUE_NODES = 256


def falling_factorial_ratio(s, k):
    """Return ``(s)_k / k!`` for complex ``s`` and integer ``k >= 0``.

    Uses the recurrence ``r_{j+1} = r_j (s - j) / (j + 1)``, which never forms
    ``(s)_k`` or ``k!`` separately and so does not overflow for large ``k``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    r = complex(1.0)
    s = complex(s)
    for j in range(k):
        r *= (s - j) / (j + 1)
    return r


def falling_factorial_ratios(s, k_max):
    """Array ``[(s)_0/0!, ..., (s)_{k_max}/k_max!]`` from the same recurrence."""
    s = complex(s)
    out = np.empty(k_max + 1, dtype=complex)
    r = complex(1.0)
    out[0] = r
    for j in range(k_max):
        r *= (s - j) / (j + 1)
        out[j + 1] = r
    return out


def falling_factorial_bound(s, k):
    """Upper bound ``|s| * k**|s+1|`` on ``|(s)_k / k!|`` for ``k >= 1``."""
    s = complex(s)
    return abs(s) * float(k) ** abs(s + 1)


def composition_count(k, N):
    """Number of weak compositions of ``k`` into ``N`` parts."""
    if N < 1:
        return 1 if k == 0 else 0
    return math.comb(k + N - 1, N - 1)


def weak_compositions(k, N, cap=COMPOSITION_CAP):
    """Yield every ``N``-tuple of nonnegative ints summing to ``k``.

    Tuples come out in lexicographically decreasing order, e.g. for
    ``k=2, N=2``: ``(2, 0), (1, 1), (0, 2)``.

    Raises
    ------
    CapacityExceeded
        If the total count would exceed ``cap``.  Checked before anything is
        yielded, so a caller never sees a silently truncated stream.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if k < 0:
        raise ValueError("k must be nonnegative")
    count = composition_count(k, N)
    if count > cap:
        raise CapacityExceeded(
            f"{count} compositions of {k} into {N} parts exceeds cap {cap}"
        )
    return _compositions(k, N)


def _compositions(k, N):
    if N == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(k - first, N - 1):
            yield (first,) + rest


def multinomial_coefficient(parts):
    """Exact multinomial coefficient ``(sum parts)! / prod(parts!)`` as an int.

    Built as a product of binomials so intermediate values stay as small as
    the result allows.
    """
    total = 0
    coeff = 1
    for p in parts:
        if p < 0:
            raise ValueError("parts must be nonnegative")
        total += p
        coeff *= math.comb(total, p)
    return coeff


def multinomial_weight(k, alphas):
    """``A(k, alphas)``: multinomial coefficient times ``prod alpha_j**k_j``."""
    if len(alphas) < len(k):
        raise ValueError("need at least as many alphas as parts")
    coeff = multinomial_coefficient(k)
    try:
        value = complex(float(coeff))
    except OverflowError as exc:
        raise CapacityExceeded(f"multinomial coefficient for {k} overflows") from exc
    for kj, a in zip(k, alphas):
        if kj:
            value *= complex(a) ** kj
    return value


def shift_inner_product(k, sigmas):
    """``sum_j sigma_j * k_j``."""
    if len(sigmas) < len(k):
        raise ValueError("need at least as many sigmas as parts")
    return float(sum(sj * kj for kj, sj in zip(k, sigmas)))


def invert_monotone(f, target, bracket, rtol=BISECTION_RTOL, max_iter=200):
    """Solve ``f(t) = target`` for strictly increasing ``f`` by bisection.

    Returns the lower end of the final bracket, so ``f(t) <= target`` always
    holds; callers that need a one-sided guarantee (``M(delta) <= 1/2``) rely
    on this.

    Raises
    ------
    BracketInvalid
        If ``f(lo) <= target <= f(hi)`` fails.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if not (flo <= target <= fhi):
        raise BracketInvalid(
            f"target {target!r} not in [f(lo), f(hi)] = [{flo!r}, {fhi!r}]"
        )
    atol = rtol * max(1.0, abs(target))
    if target - flo <= atol:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid <= target:
            lo, flo = mid, fmid
            if target - flo <= atol:
                break
        else:
            hi = mid
    return lo


def residue_estimate(f, center, radius, nodes=RESIDUE_NODES, full_output=False):
    """Trapezoid-rule value of ``(1/2 pi i) * contour integral of f``.

    The contour is the circle ``|z - center| = radius``.  For ``f``
    meromorphic with no singularity on the circle the error decays
    geometrically in ``nodes``.

    With ``full_output=True`` also return a quadrature error estimate, the
    difference from the same rule on every other node.
    """
    if nodes < 16:
        raise ValueError("need at least 16 nodes")
    center = complex(center)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    units = np.exp(1j * theta)
    vals = np.empty(nodes, dtype=complex)
    for j, u in enumerate(units):
        try:
            v = complex(f(center + radius * u))
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise EvaluationFailed(f"f failed at node {j}: {exc}") from exc
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise EvaluationFailed(f"f returned {v!r} at node {j}")
        vals[j] = v
    weighted = vals * units
    value = complex(radius * weighted.mean())
    if not full_output:
        return value
    half = complex(radius * weighted[::2].mean())
    return value, abs(value - half)


@lru_cache(maxsize=None)
def _bernoulli_fractions(n_max):
    B = [Fraction(1)]
    for m in range(1, n_max + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += math.comb(m + 1, j) * B[j]
        B.append(-acc / (m + 1))
    return tuple(B)


def bernoulli_numbers(n_max):
    """``B_0 .. B_{n_max}`` as floats, with the ``B_1 = -1/2`` convention."""
    if not 0 <= n_max <= 64:
        raise ValueError("n_max must lie in [0, 64]")
    return [float(b) for b in _bernoulli_fractions(n_max)]


def power_geometric_tail(K, p, ratio_cap=0.9):
    """Upper bound on ``sum_{k > K} k**p * 2**-k`` for ``p >= 0``.

    Once the consecutive-term ratio ``r = ((K+2)/(K+1))**p / 2`` is at most
    ``ratio_cap`` the tail is majorised by ``2 (K+1)**p 2**-(K+1) / (1 - r)``.
    Terms before that point are summed explicitly.
    """
    p = max(float(p), 0.0)
    total = 0.0
    k = int(K)
    while True:
        r = ((k + 2) / (k + 1)) ** p / 2.0
        if r <= ratio_cap:
            return total + 2.0 * _term(k + 1, p) / (1.0 - r)
        total += _term(k + 1, p)
        k += 1


def _term(k, p):
    return math.exp(p * math.log(k) - k * math.log(2.0))


def is_finite_complex(z):
    return cmath.isfinite(complex(z))
