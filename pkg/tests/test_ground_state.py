import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracgm import spectral as sp
from fracgm.errors import ConvergenceError, DomainError, InvalidParameterError
from fracgm.ground_state import (cached_ground_state, convolution_asymptotics, ground_state_residual,
                                 interaction_kernel, kernel_direction, linearized_operator,
                                 solve_ground_state)
from fracgm.spectral import Field, Grid1D, fit_power_law

from oracles import exact_half_profile, exact_half_profile_derivative


class TestHalfExact:
    def test_profile(self, gs_half):
        x = gs_half.grid.x
        inside = np.abs(x) <= 100
        err = np.max(np.abs(gs_half.field.values - exact_half_profile(x))[inside])
        assert err <= 1e-3

    def test_peak_and_masses(self, gs_half):
        assert gs_half.peak == pytest.approx(2.0, abs=1e-3)
        assert gs_half.mass_u2 == pytest.approx(2 * np.pi, abs=1e-2)
        assert gs_half.mass_u3 == pytest.approx(3 * np.pi, abs=1e-2)

    def test_kernel_direction_against_exact(self, gs_half):
        g = gs_half.grid
        du = kernel_direction(gs_half).values
        inside = np.abs(g.x) <= 100
        assert np.max(np.abs(du - exact_half_profile_derivative(g.x))[inside]) < 1e-3

    def test_kernel_residual(self, gs_half):
        resid = linearized_operator(gs_half, kernel_direction(gs_half)).values
        assert np.max(np.abs(resid)) <= 1e-8


class TestSolution:
    @pytest.mark.parametrize("fixture", ["gs_half", "gs_34"])
    def test_invariants(self, fixture, request):
        gs = request.getfixturevalue(fixture)
        u = gs.field.values
        g = gs.grid
        assert np.max(np.abs(u - u[g.mirror])) <= 1e-10
        assert np.all(u > 0)
        n = g.n_points
        half = u[n // 2: n // 2 + n // 4]
        assert np.all(np.diff(half) < 0)
        assert np.max(np.abs(ground_state_residual(u, g, gs.s))) <= 1e-10
        assert abs(gs.multiplier - 1.0) <= 1e-12
        assert int(np.argmax(u)) == n // 2

    def test_decay_exponent_34(self, gs_34):
        p, _ = sp.fit_decay_exponent(gs_34.field, (25, 50))
        assert abs(p - 2.5) <= 0.03 * 2.5

    def test_tail_coefficient(self, gs_34):
        x = np.array([30.0, 40.0, 50.0])
        ratio = gs_34.profile(x) * x ** 2.5 / gs_34.tail_coeff
        assert np.all(np.abs(ratio - 1) < 0.1)

    def test_profile_interpolant_matches_nodes(self, gs_34):
        g = gs_34.grid
        sel = np.abs(g.x) <= 50
        assert np.max(np.abs(gs_34.profile(g.x[sel]) - gs_34.field.values[sel])) < 1e-14
        du = kernel_direction(gs_34).values
        assert np.max(np.abs(gs_34.profile_derivative(g.x[sel]) - du[sel])) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-90, 90))
    def test_profile_between_nodes(self, r):
        gs = cached_ground_state(0.5, 2 ** 14, 200.0)
        # the interpolant honours the exact solution off the grid too
        assert abs(gs.profile(r) - exact_half_profile(r)) < 1e-3

    def test_orthogonality_of_kernel(self, gs_34):
        du = kernel_direction(gs_34)
        assert abs(sp.inner_product(du, gs_34.field)) < 1e-10
        assert du.values[gs_34.grid.n_points // 2] == pytest.approx(0.0, abs=1e-12)

    def test_scaling_identity(self):
        """L0 (x U'/s + 2U) = -2U, checked on a box big enough that the
        boundary value of x U' is below the tolerance."""
        gs = cached_ground_state(0.75, 2 ** 16, 800.0)
        g = gs.grid
        u = gs.field.values
        z = g.x * sp.derivative(u, g) / gs.s + 2 * u
        resid = linearized_operator(gs, Field(g, z)).values + 2 * u
        assert np.max(np.abs(resid)) <= 1e-6


class TestErrors:
    def test_small_box(self):
        with pytest.raises(InvalidParameterError):
            solve_ground_state(0.75, Grid1D(64, 4.0))

    @pytest.mark.parametrize("s", [0.0, 1.0, -0.3])
    def test_bad_s(self, s):
        with pytest.raises(InvalidParameterError):
            solve_ground_state(s, Grid1D(1024, 50.0))

    def test_iteration_budget(self):
        with pytest.raises(ConvergenceError) as info:
            solve_ground_state(0.75, Grid1D(1024, 50.0), max_iter=2)
        assert len(info.value.history) == 2


class TestConvolutions:
    @pytest.mark.parametrize("x", [40.0, 50.0, 60.0, 80.0])
    def test_u2_conv_u_half(self, gs_half, x):
        ratio = convolution_asymptotics(gs_half, "u2_conv_u", x) / gs_half.profile(x)
        assert ratio == pytest.approx(2 * np.pi, rel=0.1)

    def test_at_origin(self, gs_34):
        assert convolution_asymptotics(gs_34, "u2_conv_u", 0.0) == pytest.approx(gs_34.mass_u3, rel=1e-8)

    def test_power_kernel(self, gs_34):
        a = convolution_asymptotics(gs_34, "u2_conv_pow", 30.0) / 30.0 ** 0.5
        b = convolution_asymptotics(gs_34, "u2_conv_pow", 60.0) / 60.0 ** 0.5
        assert abs(a / b - 1) < 0.1

    def test_log_kernel(self, gs_half):
        val = convolution_asymptotics(gs_half, "u2_conv_log", 60.0)
        assert val / (gs_half.mass_u2 * np.log(60.0)) == pytest.approx(1.0, rel=0.05)

    def test_domain(self, gs_34):
        with pytest.raises(DomainError):
            convolution_asymptotics(gs_34, "u2_conv_u", 150.0)
        with pytest.raises(DomainError):
            convolution_asymptotics(gs_34, "bogus", 10.0)

    def test_interaction_decay(self, gs_34):
        z = np.linspace(20, 80, 13)
        p, _ = fit_power_law(z, interaction_kernel(gs_34, z))
        assert abs(p - 2.5) <= 0.1 * 2.5

    def test_interaction_at_zero(self, gs_34):
        assert interaction_kernel(gs_34, 0.0)[0] == pytest.approx(gs_34.mass_u2, rel=1e-8)
