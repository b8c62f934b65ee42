import math

import numpy as np
import pytest

from conftest import FAMILY_NAMES, family
from merocont.bases import (
    GeometricBase,
    make_flat_weierstrass,
    make_geometric_plus_b,
    make_poly_reciprocal,
    make_zeta_beta,
)
from merocont.errors import CapacityExceeded, NearPole
from merocont.poles import (
    PoleCandidate,
    default_radius,
    default_shift_cap,
    difference_profile,
    predicted_poles,
    residue_at,
    residue_match_flat,
    semigroup_shifts,
    verify_pole,
)


def _locs(cands):
    return [c.location for c in cands]


class TestSemigroup:
    def test_integers(self):
        assert semigroup_shifts([1.0], 3) == [0, 1, 2, 3]

    def test_two_generators(self):
        assert semigroup_shifts([0.5, 1.0], 1.5) == pytest.approx([0, 0.5, 1.0, 1.5])

    def test_incommensurable(self):
        got = semigroup_shifts([1.0, math.sqrt(2)], 2.5)
        assert got == pytest.approx(sorted([0, 1, math.sqrt(2), 2, 1 + math.sqrt(2)]))

    def test_cap(self):
        with pytest.raises(CapacityExceeded):
            semigroup_shifts([1.0, math.sqrt(2), math.sqrt(3)], 200, limit=1000)


class TestPredicted:
    def test_geometric_plus_b(self):
        cands = predicted_poles(make_geometric_plus_b(2.0, 1.0), (-2.2, 0.2, -0.5, 0.5))
        assert _locs(cands) == pytest.approx([0, -1, -2])

    def test_zeta_beta(self):
        cands = predicted_poles(make_zeta_beta(0.5), (-1.2, 1.2, -0.1, 0.1))
        assert _locs(cands) == pytest.approx([1, 0.5, 0, -0.5, -1])

    def test_poly(self):
        cands = predicted_poles(make_poly_reciprocal([1, 0, 1]), (0, 1, -0.1, 0.1))
        assert _locs(cands) == pytest.approx([0.5])

    def test_provenance(self):
        series = make_geometric_plus_b(2.0, 1.0)
        for c in predicted_poles(series, (-3, 1, -10, 10)):
            assert c.location == pytest.approx((c.base_pole - c.shift) / series.sigma)

    def test_lattice_rows(self):
        period = 2 * math.pi / math.log(2)
        cands = predicted_poles(make_geometric_plus_b(2.0, 1.0), (-1.5, 0.5, -10, 10))
        assert _locs(cands) == pytest.approx(
            [-period * 1j, 0, period * 1j, -1 - period * 1j, -1, -1 + period * 1j]
        )

    def test_flat_has_only_base_poles(self):
        cands = predicted_poles(make_flat_weierstrass(), (-3, 1, -1, 1))
        assert _locs(cands) == [0]

    def test_sorted_and_deduplicated(self):
        cands = predicted_poles(make_zeta_beta(0.3), (-4, 1.5, -1, 1))
        keys = [(-c.location.real, c.location.imag) for c in cands]
        assert keys == sorted(keys)
        locs = _locs(cands)
        assert all(abs(a - b) > 1e-9 for i, a in enumerate(locs) for b in locs[i + 1:])

    @pytest.mark.parametrize("name", FAMILY_NAMES)
    def test_rect_monotone(self, name):
        series = family(name)
        small = predicted_poles(series, (-1, 0.5, -1, 1), shift_cap=6)
        big = predicted_poles(series, (-2, 1.5, -3, 3), shift_cap=6)
        big_locs = _locs(big)
        for c in small:
            assert min(abs(c.location - b) for b in big_locs) <= 1e-9

    def test_deterministic(self):
        series = make_zeta_beta(0.5)
        assert predicted_poles(series, (-3, 1, -1, 1)) == predicted_poles(series, (-3, 1, -1, 1))

    def test_empty_rect(self):
        with pytest.raises(ValueError):
            predicted_poles(make_zeta_beta(0.5), (1, 0, 0, 1))

    def test_default_shift_cap(self):
        series = make_geometric_plus_b(2.0, 1.0)
        exp = series.expansion
        expected = 2.4 + exp.sigma(exp.J + 1)
        assert default_shift_cap(series, (-2.2, 0.2, -0.5, 0.5)) == pytest.approx(expected)
        # Base poles on Re = 0 lie right of the rectangle and need shifts up to 3.
        assert default_shift_cap(make_flat_weierstrass(J=1), (-3, -2, 0, 0)) == pytest.approx(3)


class TestVerify:
    def test_unperturbed_residue(self):
        series = make_geometric_plus_b(2.0, 0.0)
        res, budget, _ = residue_at(series, 0.0, 0.1)
        assert abs(res - 1 / math.log(2)) <= 1e-9

    def test_simple_pole_survives(self):
        series = make_geometric_plus_b(2.0, 1.0)
        (c0,) = [c for c in predicted_poles(series, (-0.2, 0.2, -0.5, 0.5))]
        v = verify_pole(series, c0)
        assert v.status == "verified" and abs(v.residue) > 1e-3
        assert v.radius == pytest.approx(0.1)

    def test_geometric_plus_b_lattice(self):
        # Residues at -k are 1/log 2 times binom(-s, k) at s = -k, i.e. 1/log 2.
        series = make_geometric_plus_b(2.0, 1.0)
        for c in predicted_poles(series, (-2.2, 0.2, -0.5, 0.5)):
            v = verify_pole(series, c)
            assert v.residue == pytest.approx(1 / math.log(2), abs=1e-8)

    def test_zeta_beta_half_is_a_pole(self):
        # s = -1/2 is the lattice point 1 - 3/2; the residue is binom(1/2, 3) = 1/16.
        series = make_zeta_beta(0.5)
        cand = [c for c in predicted_poles(series, (-0.6, -0.4, -0.1, 0.1))][0]
        v = verify_pole(series, cand)
        assert v.status == "verified"
        assert v.residue == pytest.approx(0.0625, abs=1e-7)

    def test_radius_default(self):
        series = make_zeta_beta(0.5)
        assert default_radius(series, 0.5) == pytest.approx(0.1)
        assert default_radius(make_zeta_beta(0.95), 1.0) == pytest.approx(0.025)

    def test_near_pole(self):
        series = make_zeta_beta(0.5)
        with pytest.raises(NearPole):
            verify_pole(series, PoleCandidate(location=0.5 + 0j), radius=0.3)

    def test_as_dict(self):
        d = PoleCandidate(location=-1 + 0j, shift=1.0).as_dict()
        assert list(d) == ["re", "im", "shift", "residue_re", "residue_im", "status"]
        assert d["status"] == "candidate"

    @pytest.mark.parametrize("name", ["geometric_plus_b", "zeta_beta", "poly_reciprocal",
                                      "multi_geometric"])
    def test_lattice_free_points(self, name):
        series = family(name)
        rng = np.random.default_rng(17)
        found = 0
        while found < 5:
            z = complex(rng.uniform(-1.2, 2.5), rng.uniform(-2.5, 2.5))
            rect = (z.real - 0.3, z.real + 0.3, z.imag - 0.3, z.imag + 0.3)
            if predicted_poles(series, rect, shift_cap=8):
                continue
            res, budget, _ = residue_at(series, z, 0.1)
            assert abs(res) <= 1e-6 + budget
            found += 1


class TestFlat:
    def test_e_base(self):
        series = make_flat_weierstrass()
        assert residue_match_flat(series, series.base, 0.0) <= 1e-6

    def test_two_base(self):
        series = make_flat_weierstrass(a=2.0)
        p = 2j * math.pi / math.log(2)
        assert residue_match_flat(series, series.base, p) <= 1e-6

    def test_zero_perturbation(self):
        series = make_geometric_plus_b(2.0, 0.0)
        assert residue_match_flat(series, GeometricBase(2.0), 0.0) <= 1e-12

    def test_no_blow_up(self):
        series = make_flat_weierstrass()
        inner, outer = difference_profile(series, series.base, 0.0)
        assert inner <= 10 * outer
