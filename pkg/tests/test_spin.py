"""Tests for the spin shear, its Beltrami coefficient and the r(t) bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckannulus.annulus import AnnulusSpec, StripPoint
from ckannulus.errors import DomainError
from ckannulus.spin import (
    BOUNDS_HEADER,
    BeltramiField,
    SpinParams,
    bound_pair,
    bounds_table,
    bounds_table_csv,
    rt_lower_bound,
    rt_lower_bound_refined,
    rt_upper_bound,
    spin_beltrami,
    spin_beltrami_fd,
    spin_beltrami_field,
    spin_beltrami_sup,
    spin_displacement,
    spin_map,
    spin_map_inverse,
)

E = AnnulusSpec(math.e)


class TestSpinMap:
    def test_core_moves_by_t(self):
        p = SpinParams(3.0, E)
        assert spin_map(p, StripPoint(0.0, 0.0)) == StripPoint(3.0, 0.0)

    @settings(max_examples=200)
    @given(st.floats(-50, 50), st.floats(-10, 10), st.sampled_from([-1.0, 1.0]))
    def test_boundary_fixed(self, t, xi, side):
        p = SpinParams(t, E)
        assert spin_map(p, StripPoint(xi, side * E.log_r)) == StripPoint(xi, side * E.log_r)

    @settings(max_examples=200)
    @given(st.floats(-50, 50), st.floats(-10, 10), st.floats(-1, 1))
    def test_commutes_with_deck(self, t, xi, frac):
        p = SpinParams(t, E)
        z = StripPoint(xi, frac * E.log_r)
        a = spin_map(p, StripPoint(xi + 2 * math.pi, z.eta))
        b = spin_map(p, z)
        assert a.xi == pytest.approx(b.xi + 2 * math.pi, abs=1e-12)

    @given(st.floats(-50, 50), st.floats(-10, 10), st.floats(-1, 1))
    def test_inverse(self, t, xi, frac):
        p = SpinParams(t, E)
        z = StripPoint(xi, frac * E.log_r)
        w = spin_map_inverse(p, spin_map(p, z))
        assert w.xi == pytest.approx(xi, abs=1e-10)

    def test_outside_rejected(self):
        with pytest.raises(DomainError):
            spin_map(SpinParams(1.0, E), StripPoint(0.0, 1.5))

    def test_nonfinite_t(self):
        with pytest.raises(DomainError):
            SpinParams(math.inf, E)

    def test_displacement_vectorised(self):
        d = spin_displacement(SpinParams(2.0, E), np.array([-1.0, 0.0, 0.5]))
        assert np.allclose(d, [0.0, 2.0, 1.0])


class TestBeltrami:
    def test_closed_form_example(self):
        # t = log r: s = 1, mu = -i/(2+i)
        assert spin_beltrami(SpinParams(1.0, E), 0.3) == pytest.approx(-1j / (2 + 1j))

    def test_conjugate_symmetry(self):
        p = SpinParams(7.0, E)
        assert spin_beltrami(p, -0.4) == pytest.approx(spin_beltrami(p, 0.4).conjugate())

    @settings(max_examples=300)
    @given(st.floats(1.2, 30.0), st.floats(-60, 60), st.floats(0.02, 0.98), st.booleans(), st.floats(0, 6.28))
    def test_matches_finite_differences(self, r, t, frac, upper, xi):
        a = AnnulusSpec(r)
        p = SpinParams(t, a)
        eta = frac * a.log_r * (1 if upper else -1)
        fd = spin_beltrami_fd(p, StripPoint(xi, eta), h=1e-3 * a.log_r)
        assert abs(spin_beltrami(p, eta) - fd) <= 1e-10

    @given(st.floats(-1e3, 1e3))
    def test_sup_below_one(self, t):
        p = SpinParams(t, E)
        s = spin_beltrami_sup(p)
        assert s < 1
        assert s == pytest.approx(abs(p.slope) / math.sqrt(4 + p.slope**2), abs=1e-15)

    def test_sup_matches_pointwise(self):
        p = SpinParams(4 * math.pi, E)
        assert abs(spin_beltrami(p, 0.5)) == pytest.approx(spin_beltrami_sup(p), abs=1e-12)

    @pytest.mark.parametrize("eta", [0.0, 1.0, -1.0])
    def test_crease_and_boundary_rejected(self, eta):
        with pytest.raises(DomainError):
            spin_beltrami(SpinParams(1.0, E), eta)

    def test_fd_stencil_guards(self):
        p = SpinParams(1.0, E)
        with pytest.raises(DomainError):
            spin_beltrami_fd(p, StripPoint(0.0, 1e-5), h=1e-4)
        with pytest.raises(DomainError):
            spin_beltrami_fd(p, StripPoint(0.0, 0.99995), h=1e-4)


class TestBeltramiField:
    def test_spin_field_halves(self):
        p = SpinParams(3.0, E)
        f = spin_beltrami_field(p, 16, 8)
        assert f.values[0, 0] == pytest.approx(spin_beltrami(p, -0.5))
        assert f.values[-1, 3] == pytest.approx(spin_beltrami(p, 0.5))
        assert f.sup == pytest.approx(spin_beltrami_sup(p))

    def test_odd_ny_rejected(self):
        with pytest.raises(ValueError):
            spin_beltrami_field(SpinParams(1.0, E), 8, 7)

    def test_sup_one_rejected(self):
        with pytest.raises(DomainError):
            BeltramiField.constant(E, 4, 4, 1.0)

    def test_resample(self):
        f = BeltramiField.constant(E, 4, 4, 0.2j)
        g = f.resample(8, 8)
        assert g.values.shape == (8, 8) and np.all(g.values == 0.2j)
        with pytest.raises(ValueError):
            f.resample(6, 6)

    def test_from_function_cell_centres(self):
        f = BeltramiField.from_function(E, 4, 2, lambda X, Y: 0.1 * Y)
        assert np.allclose(f.values[:, 0], [-0.05, 0.05])


class TestBounds:
    def test_upper_example(self):
        p = SpinParams(4 * math.pi, E)
        assert rt_upper_bound(p) == pytest.approx(math.sqrt(1 + 16 * math.pi**2))
        assert rt_upper_bound(p) == pytest.approx(12.606, abs=1e-3)

    def test_upper_small_t(self):
        assert rt_upper_bound(SpinParams(1e-9, E)) == pytest.approx(1.0)

    def test_lower_example(self):
        p = SpinParams(4 * math.pi, E)
        u = 1 / (4 * math.pi)
        want = 4 * math.pi * (0.25 + u * u) / math.sqrt(1 + u * u)
        assert rt_lower_bound(p) == pytest.approx(want, rel=1e-15)
        assert rt_lower_bound(p) == pytest.approx(3.21, abs=5e-3)

    def test_refined_equals_lower_at_unit_log(self):
        p = SpinParams(4 * math.pi, E)
        assert rt_lower_bound_refined(p) == pytest.approx(rt_lower_bound(p), rel=1e-14)

    @given(st.floats(1.1, 50.0), st.floats(6.3, 400.0))
    def test_refined_is_lower_over_log(self, r, t):
        p = SpinParams(t, AnnulusSpec(r))
        assert rt_lower_bound_refined(p) == pytest.approx(rt_lower_bound(p) / p.annulus.log_r, rel=1e-12)

    @given(st.floats(1.1, 50.0), st.floats(6.3, 400.0))
    def test_refined_below_upper(self, r, t):
        p = SpinParams(t, AnnulusSpec(r))
        assert rt_lower_bound_refined(p) <= rt_upper_bound(p)

    @given(st.floats(1.05, math.e), st.floats(6.3, 400.0))
    def test_lower_below_upper_when_log_r_at_most_one(self, r, t):
        p = SpinParams(t, AnnulusSpec(r))
        assert rt_lower_bound(p) <= rt_upper_bound(p)

    def test_printed_lower_exceeds_upper_for_r10(self):
        # the printed lower bound grows like t, the upper like t / log r
        p = SpinParams(20.0, AnnulusSpec(10.0))
        assert rt_lower_bound(p) > rt_upper_bound(p)

    def test_lower_asymptotically_linear(self):
        p = SpinParams(1e8, E)
        assert rt_lower_bound(p) / p.t == pytest.approx(1.0, rel=1e-6)

    @given(st.floats(0.1, 300.0), st.floats(0.1, 300.0))
    def test_upper_monotone(self, t1, t2):
        lo, hi = sorted((t1, t2))
        assert rt_upper_bound(SpinParams(lo, E)) <= rt_upper_bound(SpinParams(hi, E))

    @pytest.mark.parametrize("t", [2 * math.pi, 1.0, -7.0])
    def test_lower_needs_large_t(self, t):
        with pytest.raises(DomainError):
            rt_lower_bound(SpinParams(t, E))
        with pytest.raises(DomainError):
            rt_lower_bound_refined(SpinParams(t, E))

    def test_upper_needs_positive_t(self):
        with pytest.raises(DomainError):
            rt_upper_bound(SpinParams(0.0, E))

    def test_pair_and_table(self):
        p = SpinParams(4 * math.pi, E)
        pair = bound_pair(p)
        assert pair.lower < pair.upper
        rows = bounds_table([7.0, 8.0], [2.0, math.e])
        assert len(rows) == 4
        text = bounds_table_csv(rows)
        assert text.splitlines()[0] == ",".join(BOUNDS_HEADER) == "t,r,lower,refined_lower,upper"
