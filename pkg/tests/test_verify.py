import json
import math
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from hydrovar import verify
from hydrovar.constants import DEFAULT
from hydrovar.fields import FieldBundle, uniform_electric_field, uniform_field_potential
from hydrovar.grid import (
    GridSpec,
    ScalarField,
    WaveField,
    apply_variation,
    evolve_free,
    hamiltonian_matrix,
    inner,
    norm_squared,
    sample,
)
from hydrovar.verify import (
    VerificationReport,
    antihermitian_residual,
    check_angular_momentum,
    check_energy_conservation,
    check_momentum_lorentz,
    check_position_velocity,
    fit_order,
    hamiltonian_form_residual,
    random_decayed_field,
    refinement_study,
    run_suite,
    stationary_residual,
)

HBAR, M, Q = DEFAULT.hbar, DEFAULT.m_e, DEFAULT.e_charge
L = 1e-9
TAU = M * L * L / HBAR


def packet(grid, centre=(0.0,), k=(0.0,)):
    c = list(centre) + [0.0] * (3 - len(centre))
    kk = list(k) + [0.0] * (3 - len(k))

    def f(*x):
        out = np.ones_like(x[0], dtype=complex)
        for d, xd in enumerate(x):
            out = out * np.exp(-((xd - c[d]) ** 2) / (2 * L * L) + 1j * kk[d] * xd)
        return out

    return sample(f, grid, M, Q).normalized()


def evolve(psi, dt, steps, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return evolve_free(psi, dt, steps, **kw)


def line(n, box=40.0):
    return GridSpec.centered(n, box * L / n, 1)


def uniform_e(grid):
    return uniform_electric_field([HBAR**2 / (M * L**3 * abs(Q)), 0, 0], grid)


@pytest.fixture(scope="module")
def quick_reports():
    return run_suite("quick", seed=0)


class TestEnergy:
    def test_free_packet_100_steps(self):
        traj = evolve(packet(line(512), k=(1 / L,)), 0.01 * TAU, 100)
        assert check_energy_conservation(traj).residual <= 1e-8

    def test_discrete_eigenstate(self):
        g = line(128)
        n = g.shape[0]
        # exact eigenvector of the box Laplacian; it fills the box, so <H> is tracked directly
        psi = WaveField(g, np.sin(2 * np.pi * np.arange(1, n + 1) / (n + 1)) + 0j, M, Q)
        traj = evolve(psi, 0.1 * TAU, 10)
        h = hamiltonian_matrix(g, M, Q)
        energies = [np.vdot(s.amplitudes, h @ s.amplitudes).real for s in traj.snapshots]
        assert np.ptp(energies) <= 1e-12 * abs(energies[0])

    def test_in_static_potential(self):
        g = line(512)
        field = uniform_e(g)
        traj = evolve(packet(g), 0.01 * TAU, 100, potential=field.V)
        report = check_energy_conservation(traj, field)
        assert report.passed, report.residual


class TestPositionVelocity:
    def test_moving_packet(self):
        k0 = 1 / L
        traj = evolve(packet(line(1024), k=(k0,)), 0.01 * TAU, 20)
        report = check_position_velocity(traj)
        assert report.passed
        assert np.allclose(report.rhs[:, 0], HBAR * k0 / M, rtol=1e-3)

    def test_symmetric_packet(self):
        traj = evolve(packet(line(512)), 0.01 * TAU, 10)
        report = check_position_velocity(traj)
        assert np.max(np.abs(report.lhs)) <= 1e-10 * HBAR / (M * L)
        assert np.max(np.abs(report.rhs)) <= 1e-10 * HBAR / (M * L)

    def test_needs_three_snapshots(self):
        traj = evolve(packet(line(64, 16.0)), 0.01 * TAU, 1)
        with pytest.raises(ValueError):
            check_position_velocity(traj)


class TestMomentum:
    def test_uniform_field_constant_force(self):
        g = line(1024)
        field = uniform_e(g)
        traj = evolve(packet(g, k=(0.5 / L,)), 0.01 * TAU, 40, potential=field.V)
        report = check_momentum_lorentz(traj, field)
        assert report.passed, report.residual
        assert np.allclose(report.rhs[:, 0], Q * field.E.values[0, 0], rtol=1e-10)

    def test_force_free(self):
        traj = evolve(packet(line(512), k=(1 / L,)), 0.01 * TAU, 10)
        report = check_momentum_lorentz(traj)
        assert not np.any(report.rhs)
        assert report.passed

    def test_cyclotron(self):
        b = [0, 0, M / (abs(Q) * TAU)]

        def run(k):
            n = 48 * 2**k
            g = GridSpec.centered([n, n], 16 * L / n, 2)
            traj = evolve(packet(g, (0.0, 0.0), (1 / L, 0.0)), 0.04 * TAU / 2**k, 10 * 2**k, b_field=b)
            return g.spacing[0], check_momentum_lorentz(traj, uniform_field_potential(b, g)).residual

        report = refinement_study("cyclotron", run, levels=3)
        assert report.passed, report.details
        assert report.order >= 1.8

    def test_sign_fault_is_detected(self, monkeypatch):
        g = line(1024)
        field = uniform_e(g)
        traj = evolve(packet(g, k=(0.5 / L,)), 0.01 * TAU, 40, potential=field.V)
        honest = verify.lorentz_force_density
        monkeypatch.setattr(verify, "lorentz_force_density", lambda *a: -honest(*a))
        assert not check_momentum_lorentz(traj, field).passed

    def test_bundle_must_match_evolution(self):
        g = line(256)
        traj = evolve(packet(g), 0.01 * TAU, 4)
        other = uniform_e(g)
        stale = evolve(packet(g), 0.01 * TAU, 4, potential=ScalarField(g, 2 * other.V.values))
        with pytest.raises(ValueError):
            check_momentum_lorentz(stale, other)
        assert check_momentum_lorentz(traj).passed


class TestAngularMomentum:
    def test_zero_fields(self):
        g = GridSpec.centered([64, 64], 16 * L / 64, 2)
        traj = evolve(packet(g, (L, 0.0), (0.0, 1 / L)), 0.02 * TAU, 10)
        report = check_angular_momentum(traj)
        assert not np.any(report.rhs)
        assert report.passed

    def test_uniform_field_torque(self):
        e = HBAR**2 / (M * L**3 * abs(Q))

        def run(k):
            n = 48 * 2**k
            g = GridSpec.centered([n, n], 16 * L / n, 2)
            field = uniform_electric_field([e, 0, 0], g)
            traj = evolve(packet(g, (0.0, 1.5 * L)), 0.04 * TAU / 2**k, 10 * 2**k, potential=field.V)
            report = check_angular_momentum(traj, field)
            # torque_z = -<rho y> E_x, by direct quadrature
            y = g.position()[1]
            expected = [-np.sum(Q * np.abs(s.amplitudes) ** 2 * y) * g.cell_volume * e for s in traj.snapshots[1:-1]]
            assert np.allclose(report.rhs[:, 2], expected, rtol=1e-12)
            return g.spacing[0], report.residual

        report = refinement_study("torque", run, levels=3)
        assert report.passed, report.details


@pytest.fixture(scope="module")
def pairs():
    rng = np.random.default_rng(7)
    g = GridSpec.centered([64, 64], 0.5 * L, 2)
    return [(random_decayed_field(g, rng), random_decayed_field(g, rng)) for _ in range(20)]


class TestAntiHermitian:
    @pytest.mark.parametrize("kind,vector,tol", [("displacement", [0.3, -1.1, 0], 1e-8),
                                                 ("rotation", [0, 0, 1], 1e-8),
                                                 ("position", [2 / L, 1 / L, 0], 1e-12)])
    def test_random_pairs(self, pairs, kind, vector, tol):
        for a, b in pairs:
            assert antihermitian_residual(kind, a, b, vector) <= tol

    def test_symmetric_in_arguments(self, pairs):
        a, b = pairs[0]
        assert antihermitian_residual("displacement", a, b, [1, 0, 0]) == pytest.approx(
            antihermitian_residual("displacement", b, a, [1, 0, 0]), rel=1e-12, abs=1e-30)

    def test_real_field_diagonal(self):
        g = GridSpec.centered([64, 64], 0.5 * L, 2)
        psi = sample(lambda x, y: (1 + x / L) * np.exp(-(x * x + y * y) / (2 * (3 * L) ** 2)), g, M, Q)
        mu = apply_variation(psi, "displacement", [1, 1, 0])
        ratio = abs(inner(psi, mu)) / math.sqrt(norm_squared(psi) * norm_squared(mu))
        assert ratio <= 1e-10

    def test_undecayed_rejected(self):
        g = GridSpec.centered([32, 32], 0.5 * L, 2)
        flat = WaveField(g, np.ones(g.shape), M, Q)
        with pytest.raises(ValueError):
            antihermitian_residual("displacement", flat, flat, [1, 0, 0])


class TestStationary:
    def plane_wave(self):
        # sin modes are exact eigenvectors of the zero-ghost Laplacian
        g = GridSpec.centered([40, 40], 0.2 * L, 2)
        i = np.arange(1, 41)
        mode = np.outer(np.sin(3 * np.pi * i / 41), np.sin(5 * np.pi * i / 41))
        psi = WaveField(g, mode + 0j, M, Q)
        lam = sum(-4 / h**2 * np.sin(k * np.pi / (2 * 41)) ** 2 for k, h in zip((3, 5), g.spacing))
        return psi, -(HBAR**2) / (2 * M) * lam / HBAR

    def test_discrete_eigenpair(self):
        psi, omega = self.plane_wave()
        assert stationary_residual(psi, omega) <= 1e-10

    def test_sensitivity(self):
        psi, omega = self.plane_wave()
        assert stationary_residual(psi, 1.01 * omega) == pytest.approx(0.01, rel=0.02)

    def test_radial_ground_state(self):
        energy, u, pot = verify._radial_ground()
        assert stationary_residual(u, energy / HBAR, pot) <= 1e-8

    def test_magnetic_eigenstate(self):
        # Landau-like check: any eigenvector of the discrete paramagnetic Hamiltonian is stationary
        g = GridSpec.centered([24, 24], 0.5 * L, 2)
        b = [0, 0, M / (abs(Q) * TAU)]
        h = hamiltonian_matrix(g, M, Q, None, b, diamagnetic=False).toarray()
        vals, vecs = np.linalg.eigh(h)
        psi = WaveField(g, vecs[:, 0].reshape(g.shape), M, Q)
        assert stationary_residual(psi, vals[0] / HBAR, None, b) <= 1e-10


class TestHamiltonianForm:
    def eigenstate(self, g, potential=None):
        h = hamiltonian_matrix(g, M, Q, potential)
        vals, vecs = sp.linalg.eigsh(h.real.tocsc(), k=1, sigma=-1e-30, which="LM")
        return WaveField(g, vecs[:, 0].reshape(g.shape) + 0j, M, Q)

    def test_time_kind_zero_fields(self):
        g = GridSpec.centered(256, 24 * L / 256, 1)
        psi = self.eigenstate(g)
        assert hamiltonian_form_residual(psi, "time") <= 1e-8

    def test_position_kind(self):
        g = GridSpec.centered(256, 24 * L / 256, 1)
        x = g.mesh()[0]
        v = ScalarField(g, 0.5 * M * x * x / (Q * TAU**2))
        psi = self.eigenstate(g, v)
        bundle = FieldBundle(g, V=v)
        assert hamiltonian_form_residual(psi, "position", bundle, [1 / L, 0, 0]) <= 1e-8

    def test_displacement_converges(self):
        hs, rs = [], []
        for n in (256, 512, 1024):
            g = line(n, 24.0)
            field = uniform_electric_field([1e6, 0, 0], g)
            hs.append(g.spacing[0])
            rs.append(hamiltonian_form_residual(packet(g, (0.5 * L,), (0.7 / L,)), "displacement", field, [1, 0, 0]))
        assert fit_order(hs, rs) == pytest.approx(2.0, abs=0.2)

    def test_magnetic_bundle_rejected(self):
        g = GridSpec.centered([16, 16], L, 2)
        with pytest.raises(ValueError):
            hamiltonian_form_residual(packet(g, (0, 0), (0, 0)), "time", uniform_field_potential([0, 0, 1], g))


class TestRefinement:
    def test_fit_order_exact(self):
        hs = [0.4, 0.2, 0.1]
        assert fit_order(hs, [3 * h**2 for h in hs]) == pytest.approx(2.0, rel=1e-12)

    def test_fit_order_needs_two_points(self):
        assert fit_order([1.0, 0.5], [0.0, 1.0]) is None

    def test_study_tolerance(self):
        r = refinement_study("toy", lambda k: (0.1 / 2**k, 0.01 / 4**k))
        assert r.passed and r.order == pytest.approx(2.0)
        assert r.tolerance == pytest.approx(3 * 0.0025 / 4)

    def test_study_catches_stalled_convergence(self):
        r = refinement_study("stall", lambda k: (0.1 / 2**k, 0.01 / 1.1**k))
        assert not r.passed


class TestSuite:
    def test_all_quick_checks_pass(self, quick_reports):
        failed = [(r.check, r.residual, r.tolerance) for r in quick_reports if not r.passed]
        assert not failed

    def test_measured_orders(self, quick_reports):
        for r in quick_reports:
            if r.order is not None:
                assert r.order >= 1.8, r.check
                res = np.asarray(r.details["residuals"])
                assert np.all(res[1:] <= 1.1 * res[:-1]), r.check

    def test_report_serialisable(self, quick_reports):
        json.dumps([r.as_dict() for r in quick_reports])

    def test_deterministic(self, quick_reports):
        again = run_suite("quick", seed=0)
        assert [r.as_dict() for r in again] == [r.as_dict() for r in quick_reports]

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_suite("huge")

    @pytest.mark.slow
    def test_full_suite(self):
        assert all(r.passed for r in run_suite("full", seed=0))


def test_report_pass_flag():
    r = VerificationReport("x", np.zeros(1), np.zeros(1), 1e-3, 1e-3)
    assert r.passed and r.as_dict()["passed"] is True
