import math
from functools import lru_cache

import pytest

from merocont.bases import (
    make_flat_weierstrass,
    make_geometric_plus_b,
    make_multi_geometric,
    make_poly_reciprocal,
    make_zeta_beta,
)
from merocont.boundary import CounterexampleSeries

FAMILY_NAMES = (
    "geometric_plus_b",
    "geometric_plus_b_complex",
    "zeta_beta",
    "zeta_beta_03",
    "poly_reciprocal",
    "poly_reciprocal_linear",
    "multi_geometric",
    "flat_weierstrass",
    "counterexample",
)


@lru_cache(maxsize=None)
def family(name):
    """Registered example series, built once per session."""
    if name == "geometric_plus_b":
        return make_geometric_plus_b(2.0, 1.0)
    if name == "geometric_plus_b_complex":
        return make_geometric_plus_b(3.0, 0.5 + 0.5j)
    if name == "zeta_beta":
        return make_zeta_beta(0.5)
    if name == "zeta_beta_03":
        return make_zeta_beta(0.3)
    if name == "poly_reciprocal":
        return make_poly_reciprocal([1, 0, 1])
    if name == "poly_reciprocal_linear":
        return make_poly_reciprocal([1, 3])
    if name == "multi_geometric":
        return make_multi_geometric([0.5, 1 / 3], [1.0, 1.0])
    if name == "flat_weierstrass":
        return make_flat_weierstrass(math.e)
    if name == "counterexample":
        return CounterexampleSeries(2).as_perturbed_series()
    raise KeyError(name)


@pytest.fixture(params=FAMILY_NAMES)
def any_family(request):
    return family(request.param)


@pytest.fixture
def gpb():
    return family("geometric_plus_b")


@pytest.fixture
def zeta_half():
    return family("zeta_beta")


def _criterion_key(label):
    digits = "".join(ch for ch in label if ch.isdigit())
    return int(digits), label


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, from the ``criterion`` user property."""
    outcomes = {"passed": "PASS", "failed": "FAIL", "xfailed": "FAIL (expected)",
                "xpassed": "PASS (unexpected)"}
    lines = []
    for key, word in outcomes.items():
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") != "call":
                continue
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props:
                lines.append((props["criterion"], word, props.get("detail", "")))
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for label, word, detail in sorted(lines, key=lambda t: _criterion_key(t[0])):
        terminalreporter.write_line(f"criterion {label:<4} {word:<16} {detail}")
