"""Domain types: base Dirichlet series, their continuations, perturbations.

A perturbed series is

    sum_n a_n * (c_n**sigma * (1 + h(c_n)))**s

where ``sum a_n c_n**s`` is a :class:`BaseSeries` with a known meromorphic
continuation and ``h`` carries a :class:`PerturbationExpansion`
``h(z) ~ sum_j alpha_j z**sigma_j``.
"""

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BranchViolation,
    DomainError,
    InvalidPerturbation,
    NearPole,
    TruncationUnavailable,
)

#: Uniform radius of the disk around a pole inside which evaluation refuses.
POLE_EXCLUSION_RADIUS = 1e-8

#: Error constant used for truncations at or beyond an exact (finite) expansion,
#: where the remainder vanishes identically and any C > 1 is valid.
EXACT_CONSTANT = 2.0

#: Floor applied to estimated error constants so that C_N > 1 holds.
MIN_CONSTANT = 1.0 + 1e-9

_UNIT_ROUNDOFF = 2.0**-53


# --------------------------------------------------------------------------
# Poles and continuations


@dataclass(frozen=True)
class PoleLattice:
    """Points ``origin + k * period`` for all integers ``k``."""

    origin: complex
    period: complex
    residue: complex
    label: str = ""

    def nearest(self, w):
        k = round(((w - self.origin) / self.period).real)
        return self.origin + k * self.period

    def points_in(self, im_lo, im_hi):
        """Lattice points with imaginary part in ``[im_lo, im_hi]`` (vertical lattices)."""
        per = self.period.imag
        if per == 0:
            raise ValueError("only vertical lattices are enumerable by height")
        ks = range(
            math.ceil((im_lo - self.origin.imag) / abs(per) - 1e-12),
            math.floor((im_hi - self.origin.imag) / abs(per) + 1e-12) + 1,
        )
        return [self.origin + k * 1j * abs(per) for k in ks]


@dataclass(frozen=True)
class PoleDescription:
    """Isolated poles plus vertical pole lattices, each with a residue."""

    points: tuple = ()
    residues: tuple = ()
    lattices: tuple = ()

    def nearest_distance(self, w):
        w = complex(w)
        best = math.inf
        for p in self.points:
            best = min(best, abs(w - p))
        for lat in self.lattices:
            best = min(best, abs(w - lat.nearest(w)))
        return best

    def poles_in(self, im_lo, im_hi):
        """Every pole with imaginary part in ``[im_lo, im_hi]`` and its residue."""
        out = []
        for p, r in zip(self.points, self.residues):
            if im_lo <= p.imag <= im_hi:
                out.append((complex(p), complex(r)))
        for lat in self.lattices:
            for p in lat.points_in(im_lo, im_hi):
                out.append((complex(p), complex(lat.residue)))
        return out


class Continuation:
    """Meromorphic continuation ``g`` of a base series.

    Subclasses implement :meth:`_evaluate` and may override
    :meth:`evaluate_tail` with a closed form for the shifted tail
    ``sum_{n >= nu} a_n c_n**w``.
    """

    poles = PoleDescription()
    exclusion_radius = POLE_EXCLUSION_RADIUS

    def __init__(self, base):
        self.base = base

    def check_pole(self, w):
        d = self.poles.nearest_distance(w)
        if d < self.exclusion_radius:
            raise NearPole(f"w={w!r} is within {d:.3g} of a base pole", location=w)

    def evaluate(self, w):
        w = complex(w)
        self.check_pole(w)
        return self._evaluate(w)

    def _evaluate(self, w):
        raise NotImplementedError

    def evaluate_tail(self, w, nu):
        """Return ``(value, abs_error)`` of the continuation of ``sum_{n>=nu}``."""
        w = complex(w)
        value = self.evaluate(w)
        head = 0j
        mag = abs(value)
        for n in range(1, nu):
            a, c = self.base.term(n)
            t = a * cmath.exp(w * math.log(c))
            head += t
            mag += abs(t)
        return value - head, 16 * _UNIT_ROUNDOFF * mag

    def evaluate_tail_many(self, ws, nu):
        """Vectorised :meth:`evaluate_tail` over an array of arguments."""
        vals = np.empty(len(ws), dtype=complex)
        errs = np.empty(len(ws))
        for i, w in enumerate(ws):
            vals[i], errs[i] = self.evaluate_tail(w, nu)
        return vals, errs


class BaseSeries:
    """A Dirichlet series ``sum_{n>=1} a_n c_n**s`` with positive ``c_n -> 0``.

    Attributes
    ----------
    S0 : float
        Abscissa of absolute convergence.
    monotone_from : int
        Index from which ``c_n`` is nonincreasing.
    continuation : Continuation
    """

    S0 = 0.0
    monotone_from = 1
    name = "base"

    def term(self, n):
        """``(a_n, c_n)`` for ``n >= 1``."""
        raise NotImplementedError

    def terms(self, n_lo, n_hi):
        """Arrays ``a, c`` for ``n_lo <= n < n_hi``."""
        pairs = [self.term(n) for n in range(n_lo, n_hi)]
        a = np.array([p[0] for p in pairs], dtype=complex)
        c = np.array([p[1] for p in pairs], dtype=float)
        return a, c

    def tail_bound(self, t, n0):
        """Upper bound on ``sum_{n >= n0} |a_n| c_n**t``; ``inf`` if ``t <= S0``."""
        raise NotImplementedError

    def to_config(self):
        raise NotImplementedError


# --------------------------------------------------------------------------
# Perturbations


@dataclass(frozen=True)
class PerturbationExpansion:
    """Asymptotic expansion ``h(z) = sum_{j<=N} alpha_j z**sigma_j + E_N(z)``.

    ``sigmas`` has one more entry than ``alphas``, so ``sigma_{N+1}`` exists
    for every usable truncation ``0 <= N <= J``.  ``error_constants[N]`` is
    ``C_N`` with ``|E_N(z)| <= C_N z**sigma_{N+1}`` on ``(0, radius)``.

    When ``exact`` is set the expansion is finite (``E_J == 0``) and is padded
    past ``J`` with zero coefficients and unit steps in the exponents.
    Unbounded growth of the exponents cannot be checked and is taken on trust.
    """

    alphas: tuple
    sigmas: tuple
    error_constants: tuple
    radius: float
    exact: bool = False
    certified: bool = True

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(complex(a) for a in self.alphas))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(
            self, "error_constants", tuple(float(c) for c in self.error_constants)
        )
        J = len(self.alphas)
        if len(self.sigmas) != J + 1:
            raise InvalidPerturbation("need exactly one more sigma than alphas")
        if len(self.error_constants) != J + 1:
            raise InvalidPerturbation("need one error constant per truncation 0..J")
        if any(s <= 0 for s in self.sigmas):
            raise InvalidPerturbation("sigmas must be positive")
        if any(b <= a for a, b in zip(self.sigmas, self.sigmas[1:])):
            raise InvalidPerturbation("sigmas must be strictly increasing")
        if any(not c > 1 for c in self.error_constants):
            raise InvalidPerturbation("error constants must exceed 1")
        if not self.radius > 0:
            raise InvalidPerturbation("radius must be positive")

    @property
    def J(self):
        return len(self.alphas)

    @property
    def max_truncation(self):
        """Largest usable ``N``; exact expansions pad up to 64 extra orders."""
        return self.J + 64 if self.exact else self.J

    def truncation(self, N):
        """``(alphas[:N], sigmas[:N+1], C_N)``, padding exact expansions."""
        if N < 0 or N > self.max_truncation:
            raise TruncationUnavailable(
                f"truncation N={N} unavailable (expansion has J={self.J} terms)"
            )
        if N <= self.J:
            return self.alphas[:N], self.sigmas[: N + 1], self.error_constants[N]
        extra = N - self.J
        alphas = self.alphas + (0j,) * extra
        last = self.sigmas[-1]
        sigmas = self.sigmas + tuple(last + k for k in range(1, extra + 1))
        return alphas, sigmas, EXACT_CONSTANT

    def sigma(self, j):
        """1-based ``sigma_j``, following padding for exact expansions."""
        if j <= self.J + 1:
            return self.sigmas[j - 1]
        if not self.exact:
            raise TruncationUnavailable(f"sigma_{j} unavailable")
        return self.sigmas[-1] + (j - self.J - 1)

    def error_constant(self, N):
        return self.truncation(N)[2]

    def remainder_vanishes(self, N):
        """True when ``E_N == 0`` identically."""
        return self.exact and N >= self.J

    def partial_sum(self, z, N):
        alphas, sigmas, _ = self.truncation(N)
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=complex)
        for a, s in zip(alphas, sigmas):
            if a != 0:
                out = out + a * z**s
        return out

    def power_majorant(self, t, N):
        """``sum_{j<=N} |alpha_j| t**sigma_j``."""
        alphas, sigmas, _ = self.truncation(N)
        return float(sum(abs(a) * t**s for a, s in zip(alphas, sigmas)))

    def M(self, t, N):
        """``max(sum |alpha_j| t**sigma_j, C_N t**sigma_{N+1})``; strictly increasing."""
        _, sigmas, C = self.truncation(N)
        return max(self.power_majorant(t, N), C * t ** sigmas[N])

    def h_majorant(self, t, N):
        """Upper bound on ``|h(z)|`` for ``0 < z <= t < radius``."""
        _, sigmas, C = self.truncation(N)
        rem = 0.0 if self.remainder_vanishes(N) else C * t ** sigmas[N]
        return self.power_majorant(t, N) + rem

    def active(self, N):
        """``(alphas, sigmas)`` restricted to nonzero coefficients among the first N."""
        alphas, sigmas, _ = self.truncation(N)
        pairs = [(a, s) for a, s in zip(alphas, sigmas[:N]) if a != 0]
        return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


class PerturbationFunction:
    """A pointwise-evaluable ``h`` together with its expansion.

    Parameters
    ----------
    func : callable
        ``func(z)`` for real ``z > 0``.  Must accept numpy arrays when
        ``vectorized`` is true; otherwise it is wrapped elementwise.
    expansion : PerturbationExpansion
    remainder : callable, optional
        ``remainder(z, N)`` returning ``E_N(z)`` for an array ``z`` without
        forming ``h(z) - partial_sum``.  For small ``z`` that difference loses
        all relative accuracy, which matters once it is multiplied by a large
        ``c_n**(sigma s)``.
    """

    def __init__(self, func, expansion, name="h", vectorized=True, remainder=None):
        self._func = func
        self.expansion = expansion
        self.name = name
        self.vectorized = vectorized
        self._remainder = remainder

    def __call__(self, z):
        if np.ndim(z) == 0:
            return complex(self._func(float(z)))
        z = np.asarray(z, dtype=float)
        if self.vectorized:
            return np.asarray(self._func(z), dtype=complex) * np.ones(z.shape)
        return np.array([complex(self._func(float(x))) for x in z.ravel()]).reshape(
            z.shape
        )

    eval = __call__

    def remainder(self, z, N, hz=None, pz=None):
        """``(E_N(z), abs_error)`` on an array ``z``.

        Uses the closed form when one was supplied; otherwise ``h - partial_sum``
        with an absolute rounding error of ``4u (|h| + |partial_sum|)``.
        """
        z = np.asarray(z, dtype=float)
        if self.expansion.remainder_vanishes(N):
            return np.zeros(z.shape, dtype=complex), np.zeros(z.shape)
        if self._remainder is not None:
            E = np.asarray(self._remainder(z, N), dtype=complex) * np.ones(z.shape)
            return E, 8 * _UNIT_ROUNDOFF * np.abs(E)
        hz = self(z) if hz is None else hz
        pz = self.expansion.partial_sum(z, N) if pz is None else pz
        return hz - pz, 4 * _UNIT_ROUNDOFF * (np.abs(hz) + np.abs(pz))

    def __repr__(self):
        return f"PerturbationFunction({self.name!r})"


def expansion_remainder(h, z, N):
    """``E_N(z) = h(z) - sum_{j<=N} alpha_j z**sigma_j`` for ``0 < z < radius``."""
    z = float(z)
    if not 0 < z < h.expansion.radius:
        raise DomainError(f"z={z!r} outside (0, {h.expansion.radius!r})")
    return complex(h.remainder(np.array([z]), N)[0][0])


def estimate_error_constants(func, alphas, sigmas, radius, n_grid=200):
    """Sampled ``C_N`` estimates for a user-supplied ``h``.

    ``C_N = 1.5 * sup |E_N(z)| / z**sigma_{N+1}`` over a log grid in
    ``(0, radius)``.  Results are not certified bounds.
    """
    z = np.geomspace(radius * 1e-6, radius * (1 - 1e-9), n_grid)
    hz = np.array([complex(func(float(x))) for x in z])
    consts = []
    partial = np.zeros_like(hz)
    for N in range(len(alphas) + 1):
        if N > 0:
            partial = partial + complex(alphas[N - 1]) * z ** sigmas[N - 1]
        ratio = np.abs(hz - partial) / z ** sigmas[N]
        consts.append(max(1.5 * float(np.max(ratio)), MIN_CONSTANT))
    return tuple(consts)


# --------------------------------------------------------------------------
# Perturbed series and half-planes


@dataclass(frozen=True)
class HalfPlane:
    """Open half-plane ``{Re(s) > threshold}``."""

    threshold: float

    def contains(self, s, margin=0.0):
        return complex(s).real > self.threshold + margin


@dataclass(frozen=True)
class PerturbedSeries:
    """``sum_n a_n (c_n**sigma (1 + h(c_n)))**s``."""

    base: BaseSeries
    sigma: float
    h: PerturbationFunction
    name: str = "perturbed"
    config: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidPerturbation("sigma must be positive")

    @property
    def expansion(self):
        return self.h.expansion

    def log_bases(self, n_lo, n_hi):
        """``log(c~_n) = sigma log c_n + Log(1 + h(c_n))`` for ``n_lo <= n < n_hi``.

        Raises
        ------
        BranchViolation
            If some ``1 + h(c_n)`` lies on ``(-inf, 0]``.
        """
        a, c = self.base.terms(n_lo, n_hi)
        one_plus_h = 1.0 + self.h(c)
        bad = (one_plus_h.imag == 0) & (one_plus_h.real <= 0)
        if np.any(bad):
            n = n_lo + int(np.argmax(bad))
            raise BranchViolation(f"1 + h(c_{n}) = {one_plus_h[bad][0]!r} on the cut")
        return a, self.sigma * np.log(c) + np.log(one_plus_h)

    def perturbed_base(self, n):
        """``c~_n = c_n**sigma (1 + h(c_n))``."""
        _, c = self.base.term(n)
        return c**self.sigma * (1.0 + self.h(c))

    def check_branch(self, n_max):
        self.log_bases(1, n_max + 1)


def pn_halfplane(series, N):
    """Half-plane ``P_N`` on which the ``N``-truncated decomposition is valid.

    ``threshold = (S0 - sigma_{N+1}) / sigma``, with ``sigma_0 = 0`` so that
    ``P_{-1} = {Re(s) > S0 / sigma}`` is where the perturbed series converges
    absolutely.
    """
    if N < -1:
        raise TruncationUnavailable("N must be at least -1")
    if N == -1:
        return HalfPlane(series.base.S0 / series.sigma)
    _, sigmas, _ = series.expansion.truncation(N)
    return HalfPlane((series.base.S0 - sigmas[N]) / series.sigma)
