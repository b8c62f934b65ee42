"""A perturbation with a natural boundary.

With ``c_n = e**-n`` and ``h(z) = z**m sum_n alpha_n chi(e**n z - 1)``, where
``chi`` is a smooth bump supported in ``(-1/2, 1/2)`` and ``alpha_n`` is the
indicator of a lacunary set ``{p_j}``, the series

    sum_{n>=1} e**(-n s) (1 + h(e**-n))**s

has ``|h(z)| <= z**m`` yet cannot be continued past ``Re s = -m``.  It splits
as ``t1 + t2 + t3``: ``t1 = 1/(e**s - 1)``, ``t3`` holomorphic on
``Re s > -2m``, and ``t2 = s sum_n alpha_n e**(-n (s+m))``, a lacunary power
series in ``z = e**-(s+m)`` whose unit circle is a natural boundary.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .bases import GeometricBase, flat_perturbation, geometric_continuation
from .errors import InvalidPerturbation
from .series import PerturbationExpansion, PerturbationFunction, PerturbedSeries

__all__ = [
    "GapSequence",
    "CounterexampleSeries",
    "Decomposition",
    "BoundaryScanRecord",
    "bump_chi",
    "counterexample_h",
    "r1_remainder",
    "r1_constant",
    "decompose_counterexample",
    "counterexample_direct",
    "lacunary_sum",
    "boundary_scan",
    "flat_perturbation",
]

#: Largest exponent considered when enumerating a dyadic gap set.
DYADIC_LIMIT = 2**200


@dataclass(frozen=True)
class GapSequence:
    """Strictly increasing positive exponents with ``p_{j+1}/p_j >= ratio_floor``.

    ``dyadic`` sequences are ``1, 2, 4, 8, ...`` without end; otherwise
    ``exponents`` is a finite explicit list.
    """

    exponents: tuple = ()
    ratio_floor: float = 2.0
    dyadic: bool = False

    def __post_init__(self):
        ex = tuple(int(p) for p in self.exponents)
        object.__setattr__(self, "exponents", ex)
        if not self.ratio_floor > 1:
            raise InvalidPerturbation("ratio_floor must exceed 1")
        if any(p < 1 for p in ex):
            raise InvalidPerturbation("exponents must be positive")
        for a, b in zip(ex, ex[1:]):
            if not b > a:
                raise InvalidPerturbation("exponents must be strictly increasing")
            if b / a < self.ratio_floor:
                raise InvalidPerturbation(
                    f"gap ratio {b}/{a} below ratio_floor {self.ratio_floor}"
                )

    @classmethod
    def powers_of_two(cls):
        return cls(dyadic=True, ratio_floor=2.0)

    @classmethod
    def explicit(cls, exponents):
        ex = [int(p) for p in exponents]
        ratios = [b / a for a, b in zip(ex, ex[1:])]
        return cls(tuple(ex), min(ratios) if ratios else 2.0)

    def up_to(self, n_max):
        """Exponents ``<= n_max`` in increasing order."""
        if self.dyadic:
            out = []
            p = 1
            while p <= n_max and p <= DYADIC_LIMIT:
                out.append(p)
                p *= 2
            return out
        return [p for p in self.exponents if p <= n_max]

    def contains(self, n):
        n = int(n)
        if self.dyadic:
            return n >= 1 and n & (n - 1) == 0
        return n in self.exponents

    def to_config(self):
        return "dyadic" if self.dyadic else list(self.exponents)


def bump_chi(t):
    """``exp(t**2 / (4 t**2 - 1))`` on ``|t| < 1/2``, else 0; ``chi(0) = 1``."""
    t = float(t)
    if abs(t) >= 0.5:
        return 0.0
    return math.exp(t * t / (4 * t * t - 1))


def _bump_array(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    inside = np.abs(t) < 0.5
    ti = t[inside]
    out[inside] = np.exp(ti * ti / (4 * ti * ti - 1))
    return out


def counterexample_h(z, m, gaps):
    """``z**m sum_n alpha_n chi(e**n z - 1)``.

    ``chi(e**n z - 1) != 0`` needs ``z`` in ``(e**-n / 2, 3 e**-n / 2)``.
    Since ``e < 3`` neighbouring windows overlap near their edges, so up to
    two adjacent ``n`` contribute; there the two bump values sum to at most
    0.77, and at the sample points ``z = e**-n`` only ``n`` itself does.
    Only ``n = round(-ln z)`` and its two neighbours can be nonzero.
    """
    z = float(z)
    if not z > 0:
        raise ValueError("z must be positive")
    n0 = int(round(-math.log(z)))
    total = 0.0
    for n in (n0 - 1, n0, n0 + 1):
        if n >= 1 and gaps.contains(n):
            total += bump_chi(math.exp(n) * z - 1.0)
    return z**m * total


def _counterexample_h_array(z, m, gaps):
    z = np.asarray(z, dtype=float)
    n0 = np.rint(-np.log(z)).astype(np.int64)
    total = np.zeros(z.shape)
    for d in (-1, 0, 1):
        n = n0 + d
        alpha = np.array([1.0 if (k >= 1 and gaps.contains(k)) else 0.0 for k in n.ravel()])
        alpha = alpha.reshape(z.shape)
        total = total + alpha * _bump_array(np.exp(n.astype(float)) * z - 1.0)
    return z**m * total


def r1_constant(s):
    """``C(s) = |s (s-1)| 2**max(Re s - 2, 0)`` with ``|R_1(z; s)| <= C(s) z**2``."""
    s = complex(s)
    return abs(s * (s - 1)) * 2.0 ** max(s.real - 2.0, 0.0)


def _expm1_minus_x(x):
    """``exp(x) - 1 - x`` for complex ``x`` without cancellation."""
    if abs(x) < 0.1:
        term = x * x / 2
        total = term
        for k in range(3, 30):
            term *= x / k
            total += term
        return total
    return cmath.exp(x) - 1 - x


def _log1p_minus_x(z):
    """``log(1 + z) - z`` for real ``z >= 0`` without cancellation."""
    if z < 0.1:
        total = 0.0
        p = z
        for k in range(2, 40):
            p *= z
            total += (-1) ** (k + 1) * p / k
        return total
    return math.log1p(z) - z


def r1_remainder(z, s):
    """``R_1(z; s) = (1 + z)**s - 1 - s z`` on ``0 <= z <= 1`` (principal branch).

    Split as ``(e**(sL) - 1 - sL) + s (L - z)`` with ``L = log(1 + z)`` so that
    both pieces keep full relative accuracy as ``z -> 0``.
    """
    z = float(z)
    s = complex(s)
    if not 0 <= z <= 1:
        raise ValueError("z must lie in [0, 1]")
    if z == 0:
        return 0j
    L = math.log1p(z)
    return _expm1_minus_x(s * L) + s * _log1p_minus_x(z)


@dataclass(frozen=True)
class CounterexampleSeries:
    """``sum_{n>=1} e**(-n s) (1 + h(e**-n))**s`` with the bump perturbation."""

    m: int
    gaps: GapSequence = field(default_factory=GapSequence.powers_of_two)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InvalidPerturbation("m must be a positive integer")
        object.__setattr__(self, "m", int(self.m))

    def h(self, z):
        # e**-n underflows to 0 past n ~ 745, where h is 0 as well.
        if z == 0:
            return 0.0
        return counterexample_h(z, self.m, self.gaps)

    def alpha(self, n):
        return 1.0 if self.gaps.contains(n) else 0.0

    def as_perturbed_series(self):
        """The same series as a :class:`PerturbedSeries` over ``1/(e**s - 1)``.

        ``h`` has no nonzero expansion term but ``|h(z)| <= z**m``, so
        truncations ``N < m`` are available with ``E_N = h`` and
        ``C_N = 2``; the extension is then computable on ``Re s > -m``.
        """
        m = self.m
        J = m - 1
        expansion = PerturbationExpansion(
            alphas=(0j,) * J,
            sigmas=tuple(float(j) for j in range(1, m + 1)),
            error_constants=(2.0,) * m,
            radius=1.0,
        )
        gaps = self.gaps
        return PerturbedSeries(
            GeometricBase(math.e),
            1.0,
            PerturbationFunction(
                lambda z: _counterexample_h_array(z, m, gaps), expansion,
                name=f"bump perturbation, m={m}",
            ),
            name=f"counterexample(m={m})",
            config={"type": "counterexample", "m": m, "gap": gaps.to_config()},
        )


@dataclass(frozen=True)
class Decomposition:
    """``t1 + t2 + t3`` with a tail bound for each truncated sum.

    Iterating yields ``t1, t2, t3``.
    """

    t1: complex
    t2: complex
    t3: complex
    tail1: float
    tail2: float
    tail3: float
    n_max: int

    def __iter__(self):
        return iter((self.t1, self.t2, self.t3))

    @property
    def total(self):
        return self.t1 + self.t2 + self.t3

    @property
    def tail(self):
        return self.tail1 + self.tail2 + self.tail3

    def t1_closed(self, s):
        return geometric_continuation(math.e, s)


def _geometric_tail(rate, n_max):
    """``sum_{n > n_max} e**(-n rate)`` for ``rate > 0``."""
    if not rate > 0:
        return math.inf
    return math.exp(-(n_max + 1) * rate) / -math.expm1(-rate)


def decompose_counterexample(series, s, n_max):
    """Truncated ``t1``, ``t2``, ``t3`` at ``s`` with geometric tail bounds.

    ``t1 = sum e**(-ns)``, ``t2 = s sum alpha_n e**(-n(s+m))`` and ``t3 =
    sum e**(-ns) R_1(h(e**-n); s)``.  Tails need ``Re s > 0``, ``Re s > -m``
    and ``Re s > -2m`` respectively; an infinite bound marks a divergent tail.
    """
    s = complex(s)
    m = series.m
    n = np.arange(1, n_max + 1, dtype=float)
    gaps = np.array(series.gaps.up_to(n_max), dtype=float)
    # h vanishes at e**-n off the gap set, so R_1 does too.
    r1 = np.array([r1_remainder(series.h(math.exp(-p)), s) for p in gaps], dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        # Left of each convergence line the partial sums may overflow; the
        # matching tail bound is infinite there anyway.
        t1 = complex(np.sum(np.exp(-n * s)))
        t2 = s * complex(np.sum(np.exp(-gaps * (s + m))))
        live = r1 != 0
        t3 = complex(np.sum(np.exp(-gaps[live] * s) * r1[live]))
    sig = s.real
    return Decomposition(
        t1=t1,
        t2=t2,
        t3=t3,
        tail1=_geometric_tail(sig, n_max),
        tail2=abs(s) * _geometric_tail(sig + m, n_max),
        tail3=r1_constant(s) * _geometric_tail(sig + 2 * m, n_max),
        n_max=n_max,
    )


def counterexample_direct(series, s, n_max):
    """``sum_{n<=n_max} e**(-ns) (1 + h(e**-n))**s`` and its tail bound.

    ``0 <= h <= 1`` on the sample points, so ``|(1+h)**s| <= 2**max(Re s, 0)``.
    """
    s = complex(s)
    total = 0j
    for n in range(1, n_max + 1):
        hz = series.h(math.exp(-n))
        total += cmath.exp(-n * s + s * math.log1p(hz))
    tail = 2.0 ** max(s.real, 0.0) * _geometric_tail(s.real, n_max)
    return total, tail


def lacunary_sum(gaps, z, n_max):
    """``sum_{p in gaps, p <= n_max} z**p`` for complex ``|z| < 1``."""
    z = complex(z)
    total = 0j
    if z == 0:
        return total
    lz = cmath.log(z)
    for p in gaps.up_to(n_max):
        total += cmath.exp(p * lz)
    return total


@dataclass(frozen=True)
class BoundaryScanRecord:
    offset: float
    height: float
    re_s: float
    im_s: float
    t2_abs: float
    t2_re: float
    t2_im: float
    n_used: int

    def as_dict(self):
        return {
            "offset": self.offset,
            "height": self.height,
            "re_s": self.re_s,
            "im_s": self.im_s,
            "t2_abs": self.t2_abs,
            "t2_re": self.t2_re,
            "t2_im": self.t2_im,
            "n_used": self.n_used,
        }


def default_scan_terms(offset):
    """Enough terms that ``e**(-n offset)`` falls below ``e**-40``."""
    return int(math.ceil(40.0 / offset)) + 1


def boundary_scan(series, offsets, heights, n_max=None):
    """``t2`` at ``s = -m + offset + i height`` for every (offset, height).

    Records come out in the order offsets-major, heights-minor.  With
    ``n_max=None`` each offset gets :func:`default_scan_terms` terms.
    """
    m = series.m
    out = []
    for off in offsets:
        off = float(off)
        if not off > 0:
            raise ValueError("offsets must be positive")
        n_used = default_scan_terms(off) if n_max is None else int(n_max)
        for ht in heights:
            ht = float(ht)
            s = complex(-m + off, ht)
            t2 = s * lacunary_sum(series.gaps, cmath.exp(-(s + m)), n_used)
            out.append(BoundaryScanRecord(
                offset=off, height=ht, re_s=s.real, im_s=s.imag,
                t2_abs=abs(t2), t2_re=t2.real, t2_im=t2.imag, n_used=n_used,
            ))
    return out
