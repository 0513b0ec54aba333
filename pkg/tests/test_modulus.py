"""Tests for the modulus solver against closed forms and brute force."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckannulus.annulus import AnnulusSpec
from ckannulus.errors import DomainError
from ckannulus.modulus import (
    SolverProblem,
    beltrami_tensor,
    convergence_study,
    discrete_energy,
    modulus_flat,
    paper_bound_audit,
    pinned_flat_modulus,
    solve_modulus,
)
from ckannulus.modulus import _conjugate_free_modulus
from ckannulus.spin import BeltramiField, SpinParams, spin_beltrami_field

import oracles

E = AnnulusSpec(math.e)


def smooth_mu(a, amp=0.4):
    def f(X, Y):
        return amp * np.exp(1j * X) * np.cos(np.pi * Y / (2 * a.log_r))
    return f


class TestTensor:
    @given(st.complex_numbers(max_magnitude=0.95))
    def test_unit_determinant(self, mu):
        a11, a12, a22 = beltrami_tensor(mu)
        assert a11 * a22 - a12**2 == pytest.approx(1.0, rel=1e-9)
        assert a11 > 0

    def test_identity_for_zero(self):
        assert tuple(map(float, beltrami_tensor(0))) == (1.0, 0.0, 1.0)


class TestFlat:
    def test_modulus_flat(self):
        assert modulus_flat(2 * math.pi, 2.0) == pytest.approx(1 / math.pi)
        with pytest.raises(DomainError):
            modulus_flat(0.0, 1.0)

    def test_free_128(self):
        res = solve_modulus(SolverProblem(E, grid=(128, 128)))
        assert res.converged
        assert res.modulus == pytest.approx(math.log(math.e) / math.pi, rel=5e-3)

    @pytest.mark.parametrize("r", [1.5, math.e, 20.0])
    def test_free_exact_on_coarse_grid(self, r):
        a = AnnulusSpec(r)
        assert solve_modulus(SolverProblem(a, grid=(16, 16))).modulus == pytest.approx(a.modulus, rel=1e-12)

    def test_doubling_log_r_doubles_modulus(self):
        m1 = solve_modulus(SolverProblem(AnnulusSpec(2.0), grid=(32, 32))).modulus
        m2 = solve_modulus(SolverProblem(AnnulusSpec(4.0), grid=(32, 32))).modulus
        assert m2 / m1 == pytest.approx(2.0, rel=5e-3)

    @pytest.mark.parametrize("s", [0.0, 1.5, -4.0])
    def test_pinned_closed_form(self, s):
        res = solve_modulus(SolverProblem(E, bc_mode="pinned", shear=s, grid=(64, 64)))
        assert res.modulus == pytest.approx(pinned_flat_modulus(2 * math.pi, 2.0, s), rel=1e-2)

    def test_pinned_closed_form_brute_force(self):
        c, h, s = 2 * math.pi, 2.0, 1.5
        assert oracles.brute_force_pinned_flat(c, h, s) == pytest.approx(pinned_flat_modulus(c, h, s), rel=1e-9)


class TestBeltrami:
    @pytest.mark.parametrize("k", [0.3 + 0.2j, -0.5j, 0.7, -0.4 + 0.1j])
    def test_constant_mu_affine_oracle(self, k):
        mu = BeltramiField.constant(E, 32, 32, k)
        res = solve_modulus(SolverProblem(E, mu, grid=(32, 32)))
        assert res.modulus == pytest.approx(oracles.constant_mu_modulus(E.log_r, k), rel=1e-10)

    @pytest.mark.parametrize("t", [0.5, 3.0, -6.0])
    def test_spin_free_mode_is_flat(self, t):
        mu = spin_beltrami_field(SpinParams(t, E), 32, 32)
        res = solve_modulus(SolverProblem(E, mu, grid=(32, 32)))
        assert res.modulus == pytest.approx(E.modulus, rel=1e-10)

    @pytest.mark.parametrize("t", [0.5, 3.0])
    def test_spin_pinned_mode(self, t):
        mu = spin_beltrami_field(SpinParams(t, E), 32, 32)
        res = solve_modulus(SolverProblem(E, mu, "pinned", t, grid=(32, 32)))
        assert res.modulus / E.modulus == pytest.approx(1 + t * t / (4 * E.log_r**2), rel=1e-9)

    @pytest.mark.parametrize("mode", ["free", "pinned"])
    def test_symmetry_in_t(self, mode):
        out = []
        for t in (2.5, -2.5):
            mu = spin_beltrami_field(SpinParams(t, E), 32, 32)
            out.append(solve_modulus(SolverProblem(E, mu, mode, t, grid=(32, 32))).modulus)
        assert out[0] == pytest.approx(out[1], rel=1e-9)

    def test_small_t_modes_agree(self):
        t = 1e-4
        mu = spin_beltrami_field(SpinParams(t, E), 32, 32)
        free = solve_modulus(SolverProblem(E, mu, grid=(32, 32))).modulus
        pinned = solve_modulus(SolverProblem(E, mu, "pinned", t, grid=(32, 32))).modulus
        assert pinned == pytest.approx(free, rel=1e-6)

    def test_conjugate_bracket(self):
        f = smooth_mu(E)
        mu = BeltramiField.from_function(E, 32, 32, f)
        prob = SolverProblem(E, mu, grid=(32, 32))
        low = solve_modulus(prob).modulus
        high = _conjugate_free_modulus(prob)
        assert low < high
        assert high / low - 1 < 0.01


class TestSolver:
    def test_energy_monotone(self):
        mu = BeltramiField.from_function(E, 32, 32, smooth_mu(E))
        res = solve_modulus(SolverProblem(E, mu, grid=(32, 32), tol=1e-12))
        h = np.array(res.energy_history)
        assert np.all(np.diff(h) <= 1e-14 * h[0])
        assert res.residual <= 1e-12

    def test_discrete_energy_matches(self):
        mu = BeltramiField.from_function(E, 16, 16, smooth_mu(E))
        prob = SolverProblem(E, mu, grid=(16, 16))
        w = np.zeros(16 * 15)
        assert discrete_energy(prob, w) == pytest.approx(solve_modulus(prob).energy_history[0])

    @pytest.mark.parametrize("amp", [0.2, 0.6])
    def test_maximum_principle(self, amp):
        mu = BeltramiField.from_function(E, 32, 32, smooth_mu(E, amp))
        res = solve_modulus(SolverProblem(E, mu, grid=(32, 32)), keep_solution=True)
        assert res.solution.min() >= -1e-12
        assert res.solution.max() <= 1 + 1e-12

    def test_non_convergence_reported(self):
        mu = BeltramiField.from_function(E, 32, 32, smooth_mu(E))
        res = solve_modulus(SolverProblem(E, mu, grid=(32, 32), tol=1e-14, max_iters=1))
        assert not res.converged
        assert res.iterations == 1

    def test_json_report(self):
        prob = SolverProblem(E, grid=(16, 16))
        data = json.loads(solve_modulus(prob).to_json(prob, t=0.0))
        assert set(data) == {"modulus", "energy", "iterations", "residual", "grid", "mode", "t", "r"}
        assert data["grid"] == [16, 16] and data["mode"] == "free"


class TestValidation:
    def test_cap(self):
        mu = spin_beltrami_field(SpinParams(4 * math.pi, E), 16, 16)
        with pytest.raises(DomainError):
            SolverProblem(E, mu, grid=(16, 16))
        SolverProblem(E, mu, grid=(16, 16), mu_cap=0.99)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            SolverProblem(E, BeltramiField.zeros(E, 16, 16), grid=(32, 32))

    def test_other_annulus(self):
        with pytest.raises(ValueError):
            SolverProblem(E, BeltramiField.zeros(AnnulusSpec(2.0), 16, 16), grid=(16, 16))

    @pytest.mark.parametrize("grid", [(8, 16), (16, 17)])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            SolverProblem(E, grid=grid)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            SolverProblem(E, bc_mode="clamped")


class TestConvergence:
    def test_smooth_order(self):
        f = smooth_mu(E)
        mu = BeltramiField.from_function(E, 16, 16, f)
        table = convergence_study(SolverProblem(E, mu, grid=(16, 16)), 4, f)
        assert table.observed_order >= 1.8
        assert not table.exact_representation
        assert abs(table.extrapolated - table.modulus[-1]) < abs(table.modulus[-1] - table.modulus[-2])
        assert table.to_csv().splitlines()[0] == "h,modulus"

    def test_spin_exact(self):
        mu = spin_beltrami_field(SpinParams(3.0, E), 16, 16)
        table = convergence_study(SolverProblem(E, mu, "pinned", 3.0, grid=(16, 16)), 3)
        assert table.exact_representation
        assert table.observed_order == math.inf

    def test_needs_three_levels(self):
        with pytest.raises(ValueError):
            convergence_study(SolverProblem(E, grid=(16, 16)), 2)


class TestAudit:
    def test_audit_observation(self):
        rep = paper_bound_audit(4 * math.pi, E, grid=(32, 32), mu_cap=0.99)
        assert rep.free_ratio == pytest.approx(1.0, rel=1e-9)
        assert rep.pinned_ratio == pytest.approx(1 + 16 * math.pi**2 / 4, rel=1e-9)
        assert rep.lower == pytest.approx(3.211, abs=1e-3)
        assert rep.upper == pytest.approx(12.606, abs=1e-3)
        assert (rep.free_position, rep.pinned_position) == ("below", "above")
        assert set(rep.to_dict()) >= {"free_ratio", "pinned_ratio", "lower", "upper"}

    def test_audit_needs_cap(self):
        with pytest.raises(DomainError):
            paper_bound_audit(4 * math.pi, E, grid=(16, 16))

    def test_audit_needs_large_t(self):
        with pytest.raises(DomainError):
            paper_bound_audit(1.0, E, grid=(16, 16))
