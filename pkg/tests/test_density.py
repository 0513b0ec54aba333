"""Tests for the residue lower bound, the vector-field upper bound and the sandwich."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckannulus.annulus import AnnulusSpec, poincare_annulus, strip_point_from_plane
from ckannulus.density import (
    Quadrature,
    ResidueProblem,
    TwistFamily,
    band_field_bound,
    l1_norm,
    quadrature_nodes,
    residue_lower_bound,
    residue_lower_bounds,
    sandwich_report,
    vectorfield_upper_bound,
)
from ckannulus.errors import DomainError, QuadratureError, VerificationFailure

import oracles

E = AnnulusSpec(math.e)
E2 = AnnulusSpec(math.e**2)

families = st.builds(
    TwistFamily,
    st.floats(0.0, 0.95),
    st.floats(0.0, 2.0),
    st.floats(-0.95, 0.95),
)


@pytest.fixture(scope="module")
def bracket_e():
    return sandwich_report(E, 1.0, basis_size=10)


class TestQuadrature:
    def test_node_count_validation(self):
        with pytest.raises(ValueError):
            Quadrature(radial=2)

    def test_radial_scales_with_log_r(self):
        assert Quadrature.for_annulus(E).radial == 64
        assert Quadrature.for_annulus(E2).radial == 128

    @pytest.mark.parametrize("a", [E, E2])
    def test_area(self, a):
        # the smooth blend is integrated to quadrature accuracy, not exactly
        _, W = quadrature_nodes(a, 1.0, Quadrature.for_annulus(a))
        assert W.sum() == pytest.approx(math.pi * (a.r**2 - a.r**-2), rel=1e-5)

    @pytest.mark.parametrize("a", [E, E2])
    def test_simple_pole_norm_against_elliptic_oracle(self, a):
        got = l1_norm(ResidueProblem(a, 1.0, 0))
        assert got == pytest.approx(oracles.l1_norm_simple_pole(a.r), rel=1e-5)

    @pytest.mark.parametrize("a", [E, E2])
    def test_doubling_within_estimate(self, a):
        prob = ResidueProblem(a, 1.0, 10)
        res = residue_lower_bounds(prob, [10])[0]
        fine = l1_norm(prob, res.coeffs, prob.quadrature.scaled(2.0))
        assert abs(fine - res.norm) <= res.norm_quad_error
        assert res.quad_error <= 1e-3 * res.value


class TestResidueBound:
    def test_n0_value(self):
        res = residue_lower_bounds(ResidueProblem(E, 1.0, 0), [0])[0]
        assert res.value == pytest.approx(math.pi / oracles.l1_norm_simple_pole(math.e), rel=1e-5)
        assert res.value == pytest.approx(0.1957, abs=1e-4)

    def test_monotone_in_basis_size(self):
        vals = [r.value for r in residue_lower_bounds(ResidueProblem(E, 1.0, 0), [0, 2, 5, 10])]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[-1] > vals[0]

    @pytest.mark.parametrize("a", [E, E2])
    def test_below_poincare_density(self, a):
        res = residue_lower_bound(ResidueProblem(a, 1.0, 10))
        rho = poincare_annulus(a, strip_point_from_plane(1.0))
        assert res.value <= rho * (1 + 1e-3)

    def test_off_core_point(self):
        p = 1.4j
        res = residue_lower_bound(ResidueProblem(E, p, 8))
        rho = poincare_annulus(E, strip_point_from_plane(p)) / abs(p)
        assert 0 < res.value <= rho * (1 + 1e-3)

    def test_rotation_invariance(self):
        a = residue_lower_bound(ResidueProblem(E, 1.0, 4)).value
        b = residue_lower_bound(ResidueProblem(E, 1j, 4)).value
        assert a == pytest.approx(b, rel=1e-6)

    def test_exterior_point(self):
        with pytest.raises(DomainError):
            ResidueProblem(E, 3.0)
        with pytest.raises(DomainError):
            ResidueProblem(E, 0.3)

    def test_negative_basis(self):
        with pytest.raises(ValueError):
            ResidueProblem(E, 1.0, -1)

    def test_coarse_quadrature_rejected(self):
        q = Quadrature(4, 8, 4, 4)
        with pytest.raises(QuadratureError):
            residue_lower_bound(ResidueProblem(E, 1.0, 3, q))

    def test_float_conversion(self):
        res = residue_lower_bounds(ResidueProblem(E, 1.0, 0), [0])[0]
        assert float(res) == res.value


class TestTwistFamily:
    @settings(max_examples=50)
    @given(families, st.floats(0.0, 6.28))
    def test_admissible(self, fam, xi):
        p = strip_point_from_plane(1.0)
        assert fam.value(E, p, p.xi, p.eta) == pytest.approx(1.0, abs=1e-15)
        assert abs(fam.value(E, p, xi, E.log_r)) <= 1e-14
        assert abs(fam.value(E, p, xi, -E.log_r)) <= 1e-14

    @settings(max_examples=50)
    @given(families, st.floats(0.0, 6.28), st.floats(0.05, 0.95), st.booleans())
    def test_dbar_matches_finite_differences(self, fam, xi, frac, upper):
        p = strip_point_from_plane(1.2j)
        eta = p.eta + (1 if upper else -1) * frac * (E.log_r - (p.eta if upper else -p.eta))

        def V(x, y):
            return complex(fam.value(E, p, x, y))

        assert complex(fam.dbar(E, p, xi, eta)) == pytest.approx(oracles.fd_dbar(V, xi, eta), abs=1e-7)

    def test_box(self):
        with pytest.raises(DomainError):
            TwistFamily(s=1.0)
        with pytest.raises(DomainError):
            TwistFamily(c=math.nan)

    def test_band_field_closed_form(self):
        p = strip_point_from_plane(1.0)
        res = vectorfield_upper_bound(E, 1.0, optimize=False)
        assert res.upper == pytest.approx(band_field_bound(E, p), rel=1e-12)
        assert band_field_bound(E, p) == 0.5


class TestUpperBound:
    def test_optimised_beats_band_field(self, bracket_e):
        assert bracket_e.upper < 0.5

    def test_minimiser_interior(self):
        res = vectorfield_upper_bound(E)
        for name, (lo, hi) in TwistFamily.BOX.items():
            v = getattr(res.family, name)
            assert lo < v < hi
        assert res.trace[0][3] == pytest.approx(0.5)

    def test_degenerate_start_rejected(self):
        # every family in the box has V(p) = 1, so only an exterior p can fail
        with pytest.raises(DomainError):
            vectorfield_upper_bound(E, 5.0)


class TestSandwich:
    def test_passes(self, bracket_e):
        assert bracket_e.passed
        assert bracket_e.lower == pytest.approx(0.3927, abs=2e-3)
        assert bracket_e.upper == pytest.approx(0.4838, abs=2e-3)
        assert bracket_e.rho == pytest.approx(math.pi / 4)

    def test_doubled_normalization_floor_fails(self, bracket_e):
        assert not bracket_e.k1_floor_holds
        assert bracket_e.rho_k1 == pytest.approx(2 * bracket_e.rho)

    def test_wider_annulus(self):
        br = sandwich_report(E2, 1.0, basis_size=10)
        assert br.passed
        assert br.upper == pytest.approx(0.2398, abs=2e-3)

    def test_json_keys(self, bracket_e):
        data = json.loads(bracket_e.to_json())
        assert set(data) == {"r", "p", "N", "lower", "upper", "rho", "quad_error", "passed"}
        assert data["passed"] is True

    def test_failure_carries_numbers(self):
        # a nonsense tolerance makes the cap check fail
        with pytest.raises(VerificationFailure) as info:
            sandwich_report(E, 1.0, basis_size=2, tol=-0.9, grid=(64, 16))
        for key in ("lower", "upper", "rho"):
            assert key in info.value.numbers
