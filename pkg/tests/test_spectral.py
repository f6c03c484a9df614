import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracgm import spectral as sp
from fracgm.errors import FitDomainError, IncompatibleGridError, InvalidFieldError, InvalidParameterError
from fracgm.spectral import Field, Grid1D

from oracles import exact_half_profile

SMALL = Grid1D(256, 20.0)


def smooth_field(grid, coeffs):
    """Sum of Gaussians with the given (amplitude, centre, width) triples."""
    x = grid.x
    vals = np.zeros_like(x)
    for a, c, w in coeffs:
        vals += a * np.exp(-((x - c) / w) ** 2)
    return Field(grid, vals)


gaussians = st.lists(
    st.tuples(st.floats(-2, 2), st.floats(-5, 5), st.floats(0.8, 3.0)), min_size=1, max_size=4)


class TestGrid:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(InvalidParameterError):
            Grid1D(100, 1.0)
        with pytest.raises(InvalidParameterError):
            Grid1D(4, 1.0)
        with pytest.raises(InvalidParameterError):
            Grid1D(64, -1.0)

    def test_wavenumbers(self):
        g = Grid1D(16, 3.0)
        j = np.fft.fftfreq(16, 1.0 / 16)
        assert np.allclose(g.xi, np.pi * j / 3.0)
        assert g.spacing == pytest.approx(6.0 / 16)

    def test_origin_and_mirror(self):
        g = Grid1D(64, 5.0)
        assert g.x[32] == 0.0
        assert np.allclose(g.x[g.mirror][1:], -g.x[1:])


class TestFractionalLaplacian:
    def test_zero_and_constant(self):
        assert np.all(sp.fractional_laplacian(Field(SMALL, np.zeros(256)), 0.7).values == 0)
        out = sp.fractional_laplacian(Field(SMALL, np.full(256, 3.0)), 0.7)
        assert np.max(np.abs(out.values)) < 1e-13

    def test_single_mode(self):
        L = SMALL.half_length
        f = Field.from_function(SMALL, lambda x: np.cos(np.pi * x / L))
        out = sp.fractional_laplacian(f, 0.5)
        assert np.max(np.abs(out.values - (np.pi / L) * f.values)) < 1e-13

    def test_rejects_nonfinite(self):
        bad = np.zeros(256)
        bad[3] = np.nan
        with pytest.raises(InvalidFieldError):
            Field(SMALL, bad)

    def test_rejects_bad_order(self):
        with pytest.raises(InvalidParameterError):
            sp.fractional_laplacian(Field(SMALL, np.zeros(256)), 1.2)

    @settings(max_examples=30, deadline=None)
    @given(gaussians, gaussians, st.floats(0.05, 0.95))
    def test_self_adjoint(self, c1, c2, s):
        f, g = smooth_field(SMALL, c1), smooth_field(SMALL, c2)
        lhs = sp.inner_product(sp.fractional_laplacian(f, s), g)
        rhs = sp.inner_product(f, sp.fractional_laplacian(g, s))
        scale = np.sqrt(sp.inner_product(f, f) * sp.inner_product(g, g)) + 1e-300
        assert abs(lhs - rhs) <= 1e-10 * max(scale, abs(lhs))

    @pytest.mark.parametrize("s", [0.3, 0.5, 0.75])
    def test_refinement(self, s):
        fine_grid = SMALL.refined(2)
        coarse = sp.fractional_laplacian(smooth_field(SMALL, [(1.0, 0.5, 1.2)]), s).values
        fine = sp.fractional_laplacian(smooth_field(fine_grid, [(1.0, 0.5, 1.2)]), s).values
        assert np.max(np.abs(fine[::2] - coarse)) < 1e-12


class TestResolvent:
    def test_constant(self):
        out = sp.resolvent(Field(SMALL, np.full(256, 2.5)), 0.6, 1.0)
        assert np.allclose(out.values, 2.5, atol=1e-13)

    def test_bad_mass(self):
        with pytest.raises(InvalidParameterError):
            sp.resolvent(Field(SMALL, np.zeros(256)), 0.6, 0.0)

    @settings(max_examples=30, deadline=None)
    @given(gaussians, st.floats(0.05, 0.95), st.floats(1e-3, 10.0))
    def test_round_trip(self, coeffs, s, m):
        f = smooth_field(SMALL, coeffs)
        r = sp.resolvent(f, s, m)
        back = sp.fractional_laplacian(r, s).values + m * r.values
        assert np.max(np.abs(back - f.values)) <= 1e-10 * max(1.0, f.sup())

    @settings(max_examples=20, deadline=None)
    @given(gaussians, st.floats(0.05, 0.95), st.floats(1e-2, 10.0))
    def test_positive_mean(self, coeffs, s, m):
        f = smooth_field(SMALL, [(abs(a) + 0.1, c, w) for a, c, w in coeffs])
        assert np.mean(sp.resolvent(f, s, m).values) > 0

    def test_linearity(self):
        f = smooth_field(SMALL, [(1, 0, 1)])
        g = smooth_field(SMALL, [(2, 3, 2)])
        lhs = sp.resolvent(Field(SMALL, 2 * f.values - 3 * g.values), 0.7, 0.5).values
        rhs = 2 * sp.resolvent(f, 0.7, 0.5).values - 3 * sp.resolvent(g, 0.7, 0.5).values
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_fixed_point_of_ground_state(self, gs_34):
        u = gs_34.field
        back = sp.resolvent(Field(u.grid, u.values ** 2), 0.75, 1.0)
        assert np.max(np.abs(back.values - u.values)) < 1e-10

    def test_eps_scaling(self):
        """G_eps(x) = eps^{1-2s} G_1(eps x), compared on two grids of matching geometry."""
        s, eps = 0.75, 0.5
        g1 = Grid1D(2 ** 14, 400.0)
        ge = Grid1D(2 ** 14, 400.0 / eps)
        # narrow Gaussians approximate deltas of equal mass on each grid
        d1 = np.exp(-(g1.x / 0.3) ** 2) / (0.3 * np.sqrt(np.pi))
        de = np.exp(-(ge.x / (0.3 / eps)) ** 2) / (0.3 / eps * np.sqrt(np.pi))
        G1 = sp.resolve(d1, g1, s, 1.0)
        Ge = sp.resolve(de, ge, s, eps ** (2 * s))
        i1 = g1.index_of(2.0)
        ie = ge.index_of(2.0 / eps)
        assert Ge[ie] == pytest.approx(eps ** (1 - 2 * s) * G1[i1], rel=1e-6)


class TestInnerProduct:
    def test_grid_mismatch(self):
        with pytest.raises(IncompatibleGridError):
            sp.inner_product(Field(SMALL, np.zeros(256)), Field(Grid1D(128, 20.0), np.zeros(128)))

    @settings(max_examples=30, deadline=None)
    @given(gaussians, gaussians, st.floats(-3, 3))
    def test_bilinear_symmetric(self, c1, c2, a):
        f, g = smooth_field(SMALL, c1), smooth_field(SMALL, c2)
        assert sp.inner_product(f, g) == pytest.approx(sp.inner_product(g, f), rel=1e-14, abs=1e-300)
        fa = Field(SMALL, a * f.values + g.values)
        assert sp.inner_product(fa, g) == pytest.approx(
            a * sp.inner_product(f, g) + sp.inner_product(g, g), rel=1e-10, abs=1e-12)
        assert sp.inner_product(f, f) >= 0

    def test_zero_norm_iff_zero(self):
        assert sp.inner_product(Field(SMALL, np.zeros(256)), Field(SMALL, np.zeros(256))) == 0

    def test_half_masses(self, gs_half):
        assert sp.inner_product(gs_half.field, gs_half.field) == pytest.approx(2 * np.pi, rel=1e-3)
        u2 = Field(gs_half.grid, gs_half.field.values ** 2)
        assert sp.inner_product(u2, gs_half.field) == pytest.approx(3 * np.pi, rel=1e-3)


class TestDecayFit:
    def test_exact_power(self):
        g = Grid1D(2 ** 12, 100.0)
        x = np.abs(g.x)
        f = Field(g, 1.0 / np.maximum(x, 1e-3) ** 2)
        p, c = sp.fit_decay_exponent(f, (10, 50))
        assert p == pytest.approx(2.0, abs=1e-10)
        assert c == pytest.approx(1.0, rel=1e-9)

    def test_exact_half_profile(self):
        g = Grid1D(2 ** 12, 200.0)
        p, _ = sp.fit_decay_exponent(Field(g, exact_half_profile(g.x)), (20, 100))
        assert abs(p - 2.0) < 0.04

    def test_computed_profile(self, gs_34):
        p, _ = sp.fit_decay_exponent(gs_34.field, (30, 60))
        assert abs(p - 2.5) < 0.03 * 2.5

    def test_bad_window(self):
        with pytest.raises(FitDomainError):
            sp.fit_decay_exponent(Field(SMALL, np.ones(256)), (5, 50))
        with pytest.raises(FitDomainError):
            sp.fit_decay_exponent(Field(SMALL, -np.ones(256)), (1, 5))


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        f = smooth_field(SMALL, [(1.3, 0.2, 1.1)])
        sp.write_csv(f, tmp_path / "f.csv")
        back = sp.read_csv(tmp_path / "f.csv")
        assert back.grid == f.grid
        assert np.array_equal(back.values, f.values)

    def test_binary_round_trip(self, tmp_path):
        f = smooth_field(SMALL, [(1.3, 0.2, 1.1), (-0.4, 3.0, 0.9)])
        sp.write_binary(f, tmp_path / "f.bin")
        back = sp.read_binary(tmp_path / "f.bin")
        assert back.grid == f.grid
        assert np.array_equal(back.values, f.values)
