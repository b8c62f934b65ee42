"""Candidate poles of the extension and their numerical verification.

Every pole of the extension sits where some shifted argument of the base
continuation meets a base pole: ``sigma s + shift = p`` with ``shift`` in the
additive semigroup generated by the exponents that carry nonzero
coefficients.  :func:`predicted_poles` enumerates that set in a rectangle;
:func:`verify_pole` tests a candidate with a contour integral of the
extension.
"""

from dataclasses import dataclass, replace

import numpy as np

from .engine import evaluate_many
from .errors import CapacityExceeded, NearPole
from .numerics import RESIDUE_NODES

#: Candidates closer than this are treated as one point.
DEDUP_TOL = 1e-9

#: Upper limit on enumerated shifts.
SHIFT_ENUM_CAP = 10**6

#: Default largest contour radius.
MAX_RADIUS = 0.1

#: A candidate is verified when ``|residue|`` exceeds this many error bounds.
VERIFY_FACTOR = 10.0


@dataclass(frozen=True)
class PoleCandidate:
    """A point of the predicted pole set.

    ``base_pole`` and ``shift`` record provenance: ``location =
    (base_pole - shift) / sigma``.  The verification fields are filled by
    :func:`verify_pole`; ``status`` is ``"candidate"``, ``"verified"`` or
    ``"inconclusive"``.
    """

    location: complex
    base_pole: complex = None
    shift: float = None
    residue: complex = None
    passed: bool = None
    budget: float = None
    radius: float = None
    status: str = "candidate"

    def as_dict(self):
        res = self.residue
        return {
            "re": self.location.real,
            "im": self.location.imag,
            "shift": self.shift,
            "residue_re": None if res is None else res.real,
            "residue_im": None if res is None else res.imag,
            "status": self.status,
        }


def semigroup_shifts(sigmas, cap, limit=SHIFT_ENUM_CAP):
    """Sorted distinct values ``sum_j k_j sigma_j <= cap`` with ``k_j >= 0``."""
    gens = sorted({float(s) for s in sigmas if s > 0})
    found = {0.0: 0.0}
    frontier = [0.0]
    while frontier:
        nxt = []
        for base in frontier:
            for g in gens:
                v = base + g
                if v > cap + DEDUP_TOL:
                    break
                key = round(v, 9)
                if key not in found:
                    found[key] = v
                    nxt.append(v)
                    if len(found) > limit:
                        raise CapacityExceeded(
                            f"more than {limit} shifts below {cap:g}"
                        )
        frontier = nxt
    return sorted(found.values())


def default_shift_cap(series, rect):
    """``sigma (re_hi - re_lo) + sigma_{J+1}``, widened to reach ``re_lo``.

    Base poles right of ``re_hi`` (the geometric lattice sits on ``Re = 0``)
    need shifts up to ``max Re p - sigma re_lo``.
    """
    re_lo, re_hi, im_lo, im_hi = rect
    exp = series.expansion
    cap = series.sigma * (re_hi - re_lo) + exp.sigma(exp.J + 1)
    poles = series.base.continuation.poles.poles_in(
        series.sigma * im_lo - 1.0, series.sigma * im_hi + 1.0
    )
    if poles:
        cap = max(cap, max(p.real for p, _ in poles) - series.sigma * re_lo)
    return cap


def predicted_poles(series, rect, shift_cap=None):
    """Candidate poles ``(p - shift)/sigma`` inside ``rect``.

    Parameters
    ----------
    series : PerturbedSeries
    rect : tuple
        ``(re_lo, re_hi, im_lo, im_hi)``.
    shift_cap : float, optional
        Largest shift enumerated; see :func:`default_shift_cap`.

    Returns
    -------
    list of PoleCandidate
        Deduplicated at 1e-9, sorted by real part descending then imaginary
        part ascending.
    """
    re_lo, re_hi, im_lo, im_hi = (float(x) for x in rect)
    if not (re_lo <= re_hi and im_lo <= im_hi):
        raise ValueError("empty rectangle")
    if shift_cap is None:
        shift_cap = default_shift_cap(series, (re_lo, re_hi, im_lo, im_hi))
    sig = series.sigma
    base_poles = series.base.continuation.poles.poles_in(sig * im_lo, sig * im_hi)
    exp = series.expansion
    _, active_sigmas = exp.active(exp.J)
    shifts = semigroup_shifts(active_sigmas, shift_cap)
    out = {}
    for p, _ in base_poles:
        for sh in shifts:
            loc = (p - sh) / sig
            if loc.real < re_lo - DEDUP_TOL:
                break
            if loc.real > re_hi + DEDUP_TOL:
                continue
            if not im_lo - DEDUP_TOL <= loc.imag <= im_hi + DEDUP_TOL:
                continue
            key = (round(loc.real, 9), round(loc.imag, 9))
            if key not in out:
                out[key] = PoleCandidate(location=complex(loc), base_pole=p, shift=sh)
    return sorted(out.values(), key=lambda c: (-c.location.real, c.location.imag))


def _neighbours(series, center, reach):
    rect = (center.real - reach, center.real + reach,
            center.imag - reach, center.imag + reach)
    return [
        c for c in predicted_poles(series, rect)
        if abs(c.location - center) > DEDUP_TOL
    ]


def default_radius(series, center):
    """``min(0.1, half the distance to the nearest other candidate)``."""
    others = _neighbours(series, complex(center), 2 * MAX_RADIUS + 1e-9)
    if not others:
        return MAX_RADIUS
    d = min(abs(c.location - center) for c in others)
    return min(MAX_RADIUS, d / 2)


def contour_residue(f_many, center, radius, nodes=RESIDUE_NODES):
    """Trapezoid contour integral for a vectorised ``f_many``.

    Returns ``(residue, values, quadrature_error)``; the quadrature error is
    the difference from the same rule on every other node.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    units = np.exp(1j * theta)
    pts = complex(center) + radius * units
    vals = f_many(pts)
    weighted = np.asarray(vals) * units
    res = complex(radius * weighted.mean())
    half = complex(radius * weighted[::2].mean())
    return res, vals, abs(res - half)


def residue_at(series, center, radius=None, tol=1e-10, nodes=RESIDUE_NODES, N=None):
    """Contour estimate of the residue of the extension at ``center``.

    Returns ``(residue, budget, max_error_bound)`` where ``budget =
    radius * max_error_bound + quadrature_error`` bounds the contribution of
    evaluation and quadrature error to the residue.
    """
    center = complex(center)
    if radius is None:
        radius = default_radius(series, center)
    bounds = []

    def f_many(pts):
        ev = evaluate_many(series, pts, tol, N=N)
        bounds.extend(v.error_bound for v in ev)
        return np.array([v.value for v in ev])

    res, _, quad = contour_residue(f_many, center, radius, nodes)
    max_err = max(bounds)
    return res, radius * max_err + quad, max_err


def verify_pole(series, candidate, radius=None, tol=1e-10, nodes=RESIDUE_NODES):
    """Estimate the residue at a candidate and classify it.

    ``passed`` is ``|residue| > 10 * max error bound on the circle``; such
    candidates are ``"verified"``, the rest ``"inconclusive"`` (never
    "regular": a small residue proves nothing about a double pole).

    Raises
    ------
    NearPole
        If another candidate lies within twice the radius.
    """
    center = complex(candidate.location)
    if radius is None:
        radius = default_radius(series, center)
    others = _neighbours(series, center, 2 * radius)
    close = [c for c in others if abs(c.location - center) < 2 * radius]
    if close:
        raise NearPole(
            f"candidate {close[0].location!r} within {2 * radius:g} of {center!r}",
            location=close[0].location,
        )
    res, budget, max_err = residue_at(series, center, radius, tol, nodes)
    passed = abs(res) > VERIFY_FACTOR * max_err
    return replace(
        candidate,
        residue=res,
        passed=passed,
        budget=budget,
        radius=radius,
        status="verified" if passed else "inconclusive",
    )


def residue_match_flat(series_flat, base, p, radius=0.25, tol=1e-10, nodes=RESIDUE_NODES):
    """``|residue(extension at p) - residue(base continuation at p)|``.

    For a perturbation with no nonzero expansion terms the difference of the
    two functions is entire, so this should vanish up to the quadrature
    budget.  The base continuation is evaluated at ``sigma s`` so that both
    functions share the pole at ``p / sigma``.
    """
    p = complex(p)
    center = p / series_flat.sigma
    res_pert, _, _ = residue_at(series_flat, center, radius, tol, nodes)
    cont = base.continuation

    def base_many(pts):
        return np.array([cont.evaluate(series_flat.sigma * z) for z in pts])

    res_base, _, _ = contour_residue(base_many, center, radius, nodes)
    return abs(res_pert - res_base)


def difference_profile(series_flat, base, p, radii=(0.25, 0.5), tol=1e-10,
                       nodes=RESIDUE_NODES):
    """Max of ``|extension - base continuation|`` on circles around ``p``.

    Returns a list of maxima, one per radius, for the no-blow-up check.
    """
    p = complex(p) / series_flat.sigma
    cont = base.continuation
    theta = 2 * np.pi * np.arange(nodes) / nodes
    out = []
    for r in radii:
        pts = p + r * np.exp(1j * theta)
        ev = evaluate_many(series_flat, pts, tol)
        d = [v.value - cont.evaluate(series_flat.sigma * z) for v, z in zip(ev, pts)]
        out.append(float(np.max(np.abs(d))))
    return out
