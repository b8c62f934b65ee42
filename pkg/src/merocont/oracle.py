"""Brute-force evaluation of a perturbed series where it converges absolutely.

Plain partial sums with a certified tail, no acceleration: the point is an
independent ground truth for the extension engine on the overlap of the two
domains.
"""

import math
from dataclasses import dataclass

import numpy as np

from .engine import _smallness_radius, choose_nu, compute_delta, evaluate_extension
from .errors import AccuracyUnreachable, DomainError

#: Default cap on the number of summed terms.
MAX_TERMS = 10**6

#: Required distance of ``Re s`` from the abscissa ``S0 / sigma``.
ORACLE_MARGIN = 0.1

_U = 2.0**-53
_CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleValue:
    value: complex
    tail_bound: float
    terms_used: int
    rounding: float = 0.0

    @property
    def error_bound(self):
        return self.tail_bound + self.rounding


def _sup_factor(series, s, n0):
    """Bound on ``|(1 + h(c_n))**s|`` for ``n >= n0`` given ``|h(c_n)| <= rho``.

    ``|1 + h|**Re s`` is at most ``(1 + rho)**Re s`` (or ``(1 - rho)**Re s``
    when ``Re s < 0``) and ``|arg(1 + h)| <= arcsin(rho)`` contributes
    ``exp(|Im s| arcsin rho)`` for complex ``h``.
    """
    s = complex(s)
    # Past the monotone index c_n <= c_{n0}; before it only the 0.4 cap holds.
    rho = 0.4
    if n0 >= series.base.monotone_from:
        _, c0 = series.base.term(n0)
        rho = min(rho, series.expansion.h_majorant(c0, 0))
    mod = (1 + rho) ** s.real if s.real >= 0 else (1 - rho) ** s.real
    return mod * math.exp(abs(s.imag) * math.asin(min(rho, 1.0)))


def _tail_start(series):
    """First index past which ``|h(c_n)| <= 0.4`` by the order-0 majorant."""
    exp = series.expansion
    delta = compute_delta(exp, 0)
    return choose_nu(series.base, _smallness_radius(exp, 0, delta))


def direct_sum(series, s, tol=1e-12, max_terms=MAX_TERMS):
    """Partial sum of ``a_n exp(s (sigma ln c_n + Log(1 + h(c_n))))`` with certified tail.

    The number of terms is the smallest ``n1`` for which

        sup_{n > n1} |(1 + h(c_n))**s| * tail_bound_base(sigma Re s, n1 + 1) <= tol.

    Raises
    ------
    DomainError
        If ``Re s`` is within 0.1 of the abscissa of absolute convergence.
    AccuracyUnreachable
        If more than ``max_terms`` terms would be needed.
    BranchViolation
        If some ``1 + h(c_n)`` lies on the branch cut.
    """
    s = complex(s)
    base = series.base
    abscissa = base.S0 / series.sigma
    if not s.real > abscissa + ORACLE_MARGIN:
        raise DomainError(
            f"Re s={s.real:g} not right of the abscissa {abscissa:g} by {ORACLE_MARGIN}"
        )
    n0 = _tail_start(series)
    t = series.sigma * s.real

    def tail(n1):
        n_from = max(n1 + 1, n0)
        return _sup_factor(series, s, n_from) * base.tail_bound(t, n_from)

    if tail(n0 - 1) <= tol:
        n1 = max(n0 - 1, 1)
    else:
        lo, hi = n0 - 1, max(2 * n0, 64)
        while tail(hi) > tol:
            if hi >= max_terms:
                raise AccuracyUnreachable(
                    f"direct sum needs more than {max_terms} terms for tol={tol:g}"
                )
            lo, hi = hi, min(2 * hi, max_terms)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if tail(mid) <= tol:
                hi = mid
            else:
                lo = mid
        n1 = hi
    total = 0j
    mag = 0.0
    for lo in range(1, n1 + 1, _CHUNK):
        hi = min(lo + _CHUNK, n1 + 1)
        a, logc = series.log_bases(lo, hi)
        expo = s * logc
        terms = a * np.exp(expo)
        total += complex(terms.sum())
        mag += float(np.sum(np.abs(terms) * (2.0 + np.abs(expo))))
    rounding = 8 * _U * (math.log2(max(n1, 2)) + 2) * mag
    return OracleValue(value=total, tail_bound=tail(n1), terms_used=n1, rounding=rounding)


@dataclass(frozen=True)
class OverlapRecord:
    s: complex
    extension: complex
    extension_bound: float
    oracle: complex
    oracle_bound: float
    discrepancy: float

    @property
    def within_budget(self):
        return self.discrepancy <= self.extension_bound + self.oracle_bound

    def as_dict(self):
        return {
            "re_s": self.s.real,
            "im_s": self.s.imag,
            "extension_re": self.extension.real,
            "extension_im": self.extension.imag,
            "extension_bound": self.extension_bound,
            "oracle_re": self.oracle.real,
            "oracle_im": self.oracle.imag,
            "oracle_bound": self.oracle_bound,
            "discrepancy": self.discrepancy,
            "within_budget": self.within_budget,
        }


def compare_point(series, s, tol, max_terms=MAX_TERMS, oracle_tol=None):
    """Extension and direct sum at one point; ``oracle_tol`` defaults to ``tol``."""
    ext = evaluate_extension(series, s, tol)
    ora = direct_sum(series, s, tol if oracle_tol is None else oracle_tol, max_terms)
    return OverlapRecord(
        s=complex(s),
        extension=ext.value,
        extension_bound=ext.error_bound,
        oracle=ora.value,
        oracle_bound=ora.error_bound,
        discrepancy=abs(ext.value - ora.value),
    )


def overlap_compare(series, grid, tol, max_terms=MAX_TERMS, full_output=False,
                    mapper=map, oracle_tol=None):
    """Max ``|extension - direct sum|`` over ``grid``.

    ``mapper`` lets callers parallelise over points; results stay in grid
    order.  With ``full_output`` the per-point :class:`OverlapRecord` list is
    returned as well.
    """
    records = list(mapper(
        lambda s: compare_point(series, s, tol, max_terms, oracle_tol), list(grid)
    ))
    worst = max((r.discrepancy for r in records), default=0.0)
    if full_output:
        return worst, records
    return worst
