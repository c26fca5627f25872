
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from hydrovar.constants import DEFAULT, DEFAULT_DERIVED
from hydrovar.hydrogen import (
    QuantumLevel,
    RadialGrid,
    bohr_level,
    cm_transform,
    ls_expectation,
    parse_level,
    proton_potential,
    radial_eigensolve,
    radial_moment,
    radial_wavefunction,
)
from hydrovar.verify import stationary_residual

A0 = DEFAULT_DERIVED.a0
RY = DEFAULT_DERIVED.rydberg
EIGEN_TOL = 1e-6  # relative accuracy of the 4000-node Coulomb mesh


@pytest.fixture(scope="module")
def coulomb_states():
    grid = RadialGrid.coulomb(2)
    return {l: radial_eigensolve(l, 2 - l, grid) for l in (0, 1)}


class TestCMTransform:
    def test_equal_masses(self):
        t = cm_transform(1.0, 1.0)
        assert np.array_equal(t.forward_matrix, [[0.5, 0.5], [1.0, -1.0]])
        assert t.reduced_mass == 0.5

    def test_heavy_partner(self):
        t = cm_transform(1.0, 1e15)
        x_cm, _ = t.to_relative(np.array([1.0, 2.0, 3.0]), np.array([-4.0, 5.0, 0.5]))
        assert np.allclose(x_cm, [-4.0, 5.0, 0.5], rtol=1e-14)
        assert t.kinetic_factors[1] == pytest.approx(0.5, rel=1e-14)

    def test_matrices_are_inverse(self):
        t = cm_transform(DEFAULT.m_e, DEFAULT.m_p)
        assert np.allclose(t.forward_matrix @ t.inverse_matrix, np.eye(2), rtol=0, atol=1e-15)

    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3),
           st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
           st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
    def test_round_trip(self, ma, mb, xa, xb):
        t = cm_transform(ma, mb)
        back_a, back_b = t.from_relative(*t.to_relative(xa, xb))
        scale = max(1.0, np.max(np.abs(xa)), np.max(np.abs(xb)))
        assert np.max(np.abs(back_a - np.asarray(xa))) <= 1e-14 * scale
        assert np.max(np.abs(back_b - np.asarray(xb))) <= 1e-14 * scale

    def test_rejects_bad_mass(self):
        with pytest.raises(ValueError):
            cm_transform(0.0, 1.0)


class TestRadialFunctions:
    def test_ground_state_normalised(self):
        val, _ = quad(lambda r: radial_wavefunction(1, 0, r, 1.0) ** 2 * r * r, 0, np.inf, epsabs=0, epsrel=1e-13)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_p_state_vanishes_at_origin(self):
        assert radial_wavefunction(2, 1, 0.0) == 0.0

    def test_2s_single_node(self):
        r = np.linspace(1e-3, 40, 40001) * A0
        signs = np.sign(radial_wavefunction(2, 0, r))
        crossings = np.flatnonzero(np.diff(signs))
        assert crossings.size == 1
        assert r[crossings[0]] == pytest.approx(2 * A0, rel=1e-3)

    @pytest.mark.parametrize("n,l", [(1, 1), (0, 0), (3, -1)])
    def test_inadmissible(self, n, l):
        with pytest.raises(ValueError):
            radial_wavefunction(n, l, 1.0)


class TestRadialMoments:
    def test_inverse_cube_2p(self):
        assert radial_moment(2, 1, -3, A0) == pytest.approx(1 / (24 * A0**3), rel=1e-8)

    def test_mean_radius_ground_state(self):
        assert radial_moment(1, 0, 1, A0) == pytest.approx(1.5 * A0, rel=1e-10)
        assert radial_moment(1, 0, 1, A0, method="closed") == 1.5 * A0

    @pytest.mark.parametrize("n,l", [(n, l) for n in range(1, 6) for l in range(n)])
    def test_normalisation(self, n, l):
        assert radial_moment(n, l, 0, 1.0) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("k", [-3, -2, -1, 1, 2])
    @pytest.mark.parametrize("n,l", [(2, 1), (3, 1), (3, 2), (4, 3), (5, 2)])
    def test_quadrature_matches_closed_form(self, n, l, k):
        assert radial_moment(n, l, k, 1.0) == pytest.approx(radial_moment(n, l, k, 1.0, method="closed"), rel=1e-10)

    def test_s_state_inverse_cube_diverges(self):
        with pytest.raises(ValueError):
            radial_moment(2, 0, -3)


class TestSpinOrbitAlgebra:
    def test_p_doublet_spacing(self):
        assert ls_expectation(1, 1.5) - ls_expectation(1, 0.5) == 1.5

    def test_s_state(self):
        assert ls_expectation(0, 0.5) == 0.0

    @pytest.mark.parametrize("l", range(1, 5))
    def test_weighted_trace_vanishes(self, l):
        assert sum((2 * j + 1) * ls_expectation(l, j) for j in (l - 0.5, l + 0.5)) == 0.0

    @pytest.mark.parametrize("l,j", [(0, 1.5), (1, 2.5), (2, 1.0)])
    def test_bad_j(self, l, j):
        with pytest.raises(ValueError):
            ls_expectation(l, j)


class TestBohrLevels:
    def test_ground_energy(self):
        assert bohr_level(1) == pytest.approx(-2.1787e-18, rel=1e-4)

    def test_scaling(self):
        e1 = bohr_level(1)
        for n in range(1, 11):
            assert bohr_level(n) * n * n == pytest.approx(e1, rel=1e-14)

    def test_lyman_alpha(self):
        lam = DEFAULT.h_planck * DEFAULT.c_light / (bohr_level(2) - bohr_level(1))
        assert lam == pytest.approx(1215.6699e-10, rel=2e-4)


class TestEigensolve:
    def test_ground_state(self, coulomb_states):
        assert coulomb_states[0][0][0] == pytest.approx(-RY, rel=5e-3)
        assert coulomb_states[0][0][0] == pytest.approx(-RY, rel=EIGEN_TOL)

    def test_first_p_state(self, coulomb_states):
        assert coulomb_states[1][0][0] == pytest.approx(-RY / 4, rel=5e-3)

    def test_l_degeneracy(self, coulomb_states):
        e2s, e2p = coulomb_states[0][1][0], coulomb_states[1][0][0]
        assert abs(e2s - e2p) <= 2 * EIGEN_TOL * abs(e2p)

    def test_eigenvectors_normalised(self, coulomb_states):
        for states in coulomb_states.values():
            for _, u in states:
                assert u.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_2p_is_stationary(self, coulomb_states):
        energy, u = coulomb_states[1][0]
        res = stationary_residual(u, energy / DEFAULT.hbar, lambda r: proton_potential(r))
        assert res <= 1e-8

    def test_small_box_detected(self):
        grid = RadialGrid.graded(400, 4 * A0, A0)
        with pytest.raises(RuntimeError):
            radial_eigensolve(0, 2, grid)


class TestQuantumLevel:
    def test_label(self):
        assert QuantumLevel(2, 1, 1.5).label == "2p_{3/2}"
        assert QuantumLevel(1, 0, 0.5).label == "1s_{1/2}"

    @pytest.mark.parametrize("kwargs", [dict(n=1, l=1, j=0.5), dict(n=2, l=1, j=2.5), dict(n=2, l=0, j=0.5, m_j=1.5),
                                        dict(n=2, l=1, j=1.5, m_l=2), dict(n=2, l=1, j=0.5, m_s=1.0),
                                        dict(n=2, l=1, j=1.5, m_j=0.5, m_l=1, m_s=0.5)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            QuantumLevel(**kwargs)

    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_projections_add_up(self, l):
        for j in (l - 0.5, l + 0.5):
            for k in range(int(2 * j) + 1):
                lv = QuantumLevel(l + 1, l, j, m_j=-j + k)
                assert lv.lz + lv.sz == pytest.approx(lv.m_j, abs=1e-15)

    def test_explicit_projections_win(self):
        lv = QuantumLevel(2, 1, 1.5, m_j=0.5, m_l=1, m_s=-0.5)
        assert (lv.lz, lv.sz) == (1.0, -0.5)

    @pytest.mark.parametrize("text,expected", [("2p3/2", (2, 1, 1.5)), ("2p_{1/2}", (2, 1, 0.5)), ("1s", (1, 0, None)),
                                               (" 3D5/2 ", (3, 2, 2.5))])
    def test_parse(self, text, expected):
        assert parse_level(text) == expected

    @pytest.mark.parametrize("text", ["2d", "2p5/2", "p3/2", "2x"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_level(text)
