"""Numerical checks of the variational conservation laws on grids.

Each check turns a continuum identity into a named residual with an explicit
tolerance and returns a :class:`VerificationReport`.  Residuals are relative:
the absolute mismatch is divided by the larger of the magnitude of the
reference side and a natural scale built from the state itself (so that a
law whose both sides vanish still yields a meaningful number).

PDE-derived checks are judged against a measured discretization floor: the
same scenario is run on three grids, halving h and dt together, and the
finest residual must stay within 3x the floor predicted from the previous
level by second-order scaling.  The fitted order is reported alongside.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constants import DEFAULT, DEFAULT_DERIVED, DerivedConstants
from .fields import (FieldBundle, bundle_from_sources, field_gradient, lagrangian_equivalence_residual,
                     uniform_electric_field)
from .grid import (VARIATION_KINDS, GridSpec, ScalarField, Trajectory, WaveField, _apply, charge_density,
                   continuity_residual, current_density, evolve_free, hamiltonian_matrix, inner,
                   is_boundary_decayed, kinetic_energy, laplacian_matrix, norm_squared, sample, apply_variation)
from .hydrogen import RadialGrid, RadialWaveField, proton_potential, radial_eigensolve, radial_operator

__all__ = [
    "VerificationReport",
    "lorentz_force_density",
    "check_energy_conservation",
    "check_position_velocity",
    "check_momentum_lorentz",
    "check_angular_momentum",
    "antihermitian_residual",
    "stationary_residual",
    "hamiltonian_form_residual",
    "refinement_study",
    "fit_order",
    "random_decayed_field",
    "run_suite",
    "SUITES",
]

HBAR = DEFAULT.hbar
ENERGY_TOL = 1e-8
PDE_TOL = 1e-3  # default for single-grid PDE checks; suites use the measured floor
ALGEBRAIC_TOL = 1e-8
POSITION_TOL = 1e-12
DECAY_TOL = 1e-6
SUITES = ("quick", "full")


@dataclass(frozen=True)
class VerificationReport:
    check: str
    lhs: np.ndarray
    rhs: np.ndarray
    residual: float
    tolerance: float
    order: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "order": None if self.order is None else float(self.order),
            "passed": self.passed,
        }


# -- helpers -----------------------------------------------------------------

def _require_decayed(fields: Sequence[WaveField], tol: float = DECAY_TOL):
    for i, psi in enumerate(fields):
        if not is_boundary_decayed(psi, tol):
            raise ValueError(f"field {i} does not decay at the grid boundary")


def _trajectory_fields(traj: Trajectory, bundle: FieldBundle | None):
    """(V values or None, E values, uniform B or None) consistent with how
    the trajectory was evolved."""
    grid = traj[0].grid
    v = None if traj.potential is None else traj.potential.values
    b = traj.b_field
    e = None
    if bundle is not None:
        if bundle.grid != grid:
            raise ValueError("bundle and trajectory live on different grids")
        if bundle.V is not None:
            if v is not None and not np.allclose(v, bundle.V.values, rtol=1e-12, atol=0):
                raise ValueError("trajectory was not evolved in the bundle's potential")
            v = bundle.V.values
        if bundle.E is not None:
            e = bundle.E.values
        if bundle.b_uniform is not None:
            if b is not None and not np.allclose(b, bundle.b_uniform):
                raise ValueError("trajectory was not evolved in the bundle's magnetic field")
            b = bundle.b_uniform
    if e is None:
        e = np.zeros((3,) + grid.shape) if v is None else -field_gradient(v, grid)
    if b is not None and not np.any(b):
        b = None
    return v, e, b


def lorentz_force_density(rho: np.ndarray, j: np.ndarray, e: np.ndarray, b) -> np.ndarray:
    """rho E + j x B at every node."""
    f = rho[None] * e
    if b is not None:
        bb = np.broadcast_to(np.asarray(b, dtype=float).reshape(3, *([1] * rho.ndim)), j.shape)
        f = f + np.cross(j, bb, axis=0)
    return f


def _integral(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    axes = tuple(range(values.ndim - grid.dim, values.ndim))
    return np.sum(values, axis=axes) * grid.cell_volume


def _central(series: np.ndarray, dt: float) -> np.ndarray:
    return (series[2:] - series[:-2]) / (2.0 * dt)


def _scales(psi: WaveField, b, diamagnetic: bool) -> tuple[float, float, float, float]:
    """(norm, velocity, width, lever arm) of a state."""
    n = norm_squared(psi)
    t = max(kinetic_energy(psi, b, diamagnetic), 0.0)
    v = math.sqrt(2.0 * t / (psi.mass * n))
    pos = psi.grid.position()
    dens = np.abs(psi.amplitudes) ** 2 * psi.grid.cell_volume / n
    mean = np.array([np.sum(dens * pos[k]) for k in range(3)])
    var = sum(float(np.sum(dens * (pos[k] - mean[k]) ** 2)) for k in range(3))
    width = math.sqrt(var)
    return n, v, width, float(np.linalg.norm(mean)) + width


def _relative(lhs: np.ndarray, rhs: np.ndarray, natural: float) -> float:
    diff = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
    scale = max(float(np.max(np.abs(rhs))) if rhs.size else 0.0, natural)
    return 0.0 if scale == 0 else diff / scale


def _need_snapshots(traj: Trajectory, k: int = 3):
    if len(traj) < k:
        raise ValueError(f"need at least {k} snapshots")


# -- the conservation laws ---------------------------------------------------

def check_energy_conservation(traj: Trajectory, bundle: FieldBundle | None = None,
                              tolerance: float = ENERGY_TOL) -> VerificationReport:
    """Kinetic energy plus interaction with the static external potential,
    per snapshot; residual is the largest drift relative to the initial
    energy scale."""
    _need_snapshots(traj)
    _require_decayed(traj.snapshots)
    v, _, b = _trajectory_fields(traj, bundle)
    kin, pot = [], []
    for psi in traj.snapshots:
        kin.append(kinetic_energy(psi, b, traj.diamagnetic))
        pot.append(0.0 if v is None else float(np.sum(charge_density(psi).values * v) * psi.grid.cell_volume))
    total = np.array(kin) + np.array(pot)
    scale = abs(kin[0]) + abs(pot[0])
    drift = np.abs(total - total[0])
    residual = 0.0 if scale == 0 else float(np.max(drift)) / scale
    return VerificationReport("energy-conservation", total, np.full_like(total, total[0]), residual, tolerance,
                              details={"kinetic": kin, "interaction": pot})


def check_position_velocity(traj: Trajectory, tolerance: float = PDE_TOL) -> VerificationReport:
    """d<x>/dt by centred differences against <j>/q at the same snapshot."""
    _need_snapshots(traj)
    _require_decayed(traj.snapshots)
    b = traj.b_field
    x = np.array([_integral(np.conj(p.amplitudes) * p.grid.position() * p.amplitudes, p.grid).real
                  for p in traj.snapshots])
    j = np.array([_integral(current_density(p, b).values, p.grid) / p.charge for p in traj.snapshots])
    lhs, rhs = _central(x, traj.dt), j[1:-1]
    n, vel, _, _ = _scales(traj[0], b, traj.diamagnetic)
    residual = _relative(lhs, rhs, n * vel)
    return VerificationReport("position-velocity", lhs, rhs, residual, tolerance)


def check_momentum_lorentz(traj: Trajectory, bundle: FieldBundle | None = None,
                           tolerance: float = PDE_TOL) -> VerificationReport:
    """(m/q) d<j>/dt against <j x B + rho E>."""
    _need_snapshots(traj)
    _require_decayed(traj.snapshots)
    _, e, b = _trajectory_fields(traj, bundle)
    mom, force = [], []
    for p in traj.snapshots:
        j = current_density(p, b).values
        mom.append((p.mass / p.charge) * _integral(j, p.grid))
        force.append(_integral(lorentz_force_density(charge_density(p).values, j, e, b), p.grid))
    lhs, rhs = _central(np.array(mom), traj.dt), np.array(force)[1:-1]
    n, vel, width, _ = _scales(traj[0], b, traj.diamagnetic)
    natural = n * traj[0].mass * vel**2 / width if width > 0 else 0.0
    residual = _relative(lhs, rhs, natural)
    return VerificationReport("momentum-lorentz", lhs, rhs, residual, tolerance)


def check_angular_momentum(traj: Trajectory, bundle: FieldBundle | None = None,
                           tolerance: float = PDE_TOL) -> VerificationReport:
    """(m/q) d<x cross j>/dt against <x cross (rho E + j x B)>."""
    _need_snapshots(traj)
    _require_decayed(traj.snapshots)
    _, e, b = _trajectory_fields(traj, bundle)
    ang, torque = [], []
    for p in traj.snapshots:
        pos = p.grid.position()
        j = current_density(p, b).values
        ang.append((p.mass / p.charge) * _integral(np.cross(pos, j, axis=0), p.grid))
        f = lorentz_force_density(charge_density(p).values, j, e, b)
        torque.append(_integral(np.cross(pos, f, axis=0), p.grid))
    lhs, rhs = _central(np.array(ang), traj.dt), np.array(torque)[1:-1]
    n, vel, width, lever = _scales(traj[0], b, traj.diamagnetic)
    natural = n * traj[0].mass * vel**2 * lever / width if width > 0 else 0.0
    residual = _relative(lhs, rhs, natural)
    return VerificationReport("angular-momentum", lhs, rhs, residual, tolerance)


# -- operator identities -----------------------------------------------------

def _generator(kind: str, psi: WaveField, vector, hamiltonian) -> np.ndarray:
    return apply_variation(psi, kind, vector, hamiltonian).amplitudes


def antihermitian_residual(kind: str, psi_a: WaveField, psi_b: WaveField, vector=None,
                           hamiltonian=None) -> float:
    """|<a, O b> + <O a, b>| / (|a| |b| scale(O)),
    scale(O) = max(|O a|/|a|, |O b|/|b|)."""
    if kind not in VARIATION_KINDS:
        raise ValueError(f"unknown variation kind {kind!r}")
    if psi_a.grid != psi_b.grid:
        raise ValueError("fields live on different grids")
    _require_decayed([psi_a, psi_b])
    oa = _generator(kind, psi_a, vector, hamiltonian)
    ob = _generator(kind, psi_b, vector, hamiltonian)
    g = psi_a.grid
    na, nb = math.sqrt(norm_squared(psi_a)), math.sqrt(norm_squared(psi_b))
    if na == 0 or nb == 0:
        return 0.0
    s = max(math.sqrt(abs(inner(oa, oa, g))) / na, math.sqrt(abs(inner(ob, ob, g))) / nb)
    if s == 0:
        return 0.0
    total = inner(psi_a.amplitudes, ob, g) + inner(oa, psi_b.amplitudes, g)
    return abs(total) / (na * nb * s)


def stationary_residual(psi: WaveField | RadialWaveField, omega: float, potential=None, b_uniform=None,
                        hbar: float = HBAR) -> float:
    """|hbar omega psi - H psi| / max(|hbar omega| |psi|, |H psi|) with
    H = -hbar^2 Lap/2m + qV - (q/2m) B.L (no diamagnetic term).

    For a :class:`RadialWaveField` the potential is a callable or an array
    on the radial nodes, and B must be absent.
    """
    e = hbar * omega
    if isinstance(psi, RadialWaveField):
        if b_uniform is not None and np.any(b_uniform):
            raise ValueError("radial fields do not support a magnetic field")
        g = psi.grid
        if potential is None:
            u_pot = np.zeros(g.size)
        else:
            u_pot = psi.charge * (potential(g.r) if callable(potential) else np.asarray(potential, dtype=float))
        diag, off = radial_operator(g, psi.l, psi.mass, u_pot, hbar)
        v = np.sqrt(g.weights) * psi.u
        hv = diag * v
        hv[:-1] += off * v[1:]
        hv[1:] += off * v[:-1]
        num = float(np.linalg.norm(e * v - hv))
        den = max(abs(e) * float(np.linalg.norm(v)), float(np.linalg.norm(hv)))
        return 0.0 if den == 0 else num / den
    if isinstance(potential, ScalarField):
        potential = potential.values
    h = hamiltonian_matrix(psi.grid, psi.mass, psi.charge, potential, b_uniform, diamagnetic=False, hbar=hbar)
    hpsi = _apply(h, psi)
    a = psi.amplitudes
    num = math.sqrt(abs(inner(e * a - hpsi, e * a - hpsi, psi.grid)))
    den = max(abs(e) * math.sqrt(norm_squared(psi)), math.sqrt(abs(inner(hpsi, hpsi, psi.grid))))
    return 0.0 if den == 0 else num / den


def hamiltonian_form_residual(psi: WaveField, kind: str, bundle: FieldBundle | None = None, vector=None,
                              hbar: float = HBAR) -> float:
    """Residual of the Hamiltonian-form identity for one variation family.

    With i hbar psi_t = H psi the quantum bracket is
    2 Re<mu, H psi> + (hbar^2/2m) 2 Re<mu, Lap psi>, and it is compared with
    <eps0 E . varied E> built from the external static field E:
    time -> 0 (static), position -> 0, displacement -> r . <rho E>,
    rotation -> Omega . <rho x cross E>.  Normalised by the Cauchy-Schwarz
    bounds of the three terms.
    """
    if kind not in VARIATION_KINDS:
        raise ValueError(f"unsupported variation kind {kind!r}")
    g = psi.grid
    v = e = None
    if bundle is not None:
        if bundle.grid != g:
            raise ValueError("bundle and field live on different grids")
        if bundle.b_uniform is not None and np.any(bundle.b_uniform) or (bundle.B is not None and np.any(bundle.B.values)):
            raise ValueError("magnetic variations are not supported by the Hamiltonian-form check")
        v = None if bundle.V is None else bundle.V.values
        e = bundle.electric()
    if e is None:
        e = np.zeros((3,) + g.shape)
    h = hamiltonian_matrix(g, psi.mass, psi.charge, v, None, hbar=hbar)
    hpsi = _apply(h, psi)
    lap = _apply(laplacian_matrix(g), psi)
    mu = _generator(kind, psi, vector, h)
    c_lap = hbar**2 / (2.0 * psi.mass)
    t1 = 2.0 * inner(mu, hpsi, g).real
    t2 = c_lap * 2.0 * inner(mu, lap, g).real
    rho = charge_density(psi).values
    nmu = math.sqrt(abs(inner(mu, mu, g)))
    bound = [nmu * math.sqrt(abs(inner(hpsi, hpsi, g))), c_lap * nmu * math.sqrt(abs(inner(lap, lap, g)))]
    em = 0.0
    if kind in ("displacement", "rotation"):
        w = np.asarray(vector, dtype=float).reshape(3)
        if kind == "displacement":
            dens = rho[None] * e
        else:
            dens = np.cross(g.position(), rho[None] * e, axis=0)
        em = float(w @ _integral(dens, g))
        bound.append(float(np.linalg.norm(w)) * float(np.sum(np.linalg.norm(dens, axis=0))) * g.cell_volume)
    scale = max(abs(t1), abs(t2), abs(em), *bound)
    return 0.0 if scale == 0 else abs(t1 + t2 - em) / scale


# -- refinement --------------------------------------------------------------

def fit_order(spacings: Sequence[float], residuals: Sequence[float]) -> float | None:
    """Least-squares slope of log(residual) against log(h)."""
    h = np.asarray(spacings, dtype=float)
    r = np.asarray(residuals, dtype=float)
    ok = r > 0
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(h[ok]), np.log(r[ok]), 1)[0])


def refinement_study(name: str, run: Callable[[int], tuple[float, float]], levels: int = 3,
                     expected_order: float = 2.0, floor_factor: float = 3.0,
                     absolute_floor: float = 1e-12) -> VerificationReport:
    """Run ``run(level) -> (h, residual)`` on successively halved grids.

    Tolerance for the finest level is ``floor_factor`` times the floor
    predicted from the previous level by ``expected_order`` scaling.
    """
    if levels < 2:
        raise ValueError("need at least two levels")
    hs, rs = zip(*(run(k) for k in range(levels)))
    predicted = rs[-2] * (hs[-1] / hs[-2]) ** expected_order
    tol = max(floor_factor * predicted, absolute_floor)
    return VerificationReport(name, np.asarray(hs), np.asarray(rs), float(rs[-1]), tol, fit_order(hs, rs),
                              details={"spacings": list(hs), "residuals": list(rs)})


# -- random test fields ------------------------------------------------------

def random_decayed_field(grid: GridSpec, rng: np.random.Generator, mass: float = DEFAULT.m_e,
                         charge: float = DEFAULT.e_charge) -> WaveField:
    """Gaussian envelope times a random low-order polynomial and plane-wave phase."""
    ext = np.array(grid.extent[:grid.dim])
    width = ext / rng.uniform(18.0, 22.0, grid.dim)
    centre = rng.uniform(-0.05, 0.05, grid.dim) * ext
    k = rng.uniform(-1.5, 1.5, grid.dim) / width
    coef = rng.normal(size=(grid.dim, 3)) + 1j * rng.normal(size=(grid.dim, 3))

    def f(*x):
        out = np.ones_like(x[0], dtype=complex)
        for d, xd in enumerate(x):
            s = (xd - centre[d]) / width[d]
            out = out * np.exp(-0.5 * s * s + 1j * k[d] * xd) * (coef[d, 0] + coef[d, 1] * s + coef[d, 2] * s * s)
        return out

    return sample(f, grid, mass, charge)


# -- scenarios ---------------------------------------------------------------

_M, _Q = DEFAULT.m_e, DEFAULT.e_charge
_L = 1e-9  # m, packet width
_TAU = _M * _L**2 / HBAR  # s


def _gaussian(grid: GridSpec, centre, k0, width=_L) -> WaveField:
    c = np.zeros(3)
    c[:len(centre)] = centre
    kk = np.zeros(3)
    kk[:len(k0)] = k0

    def f(*x):
        out = np.ones_like(x[0], dtype=complex)
        for d, xd in enumerate(x):
            out = out * np.exp(-((xd - c[d]) ** 2) / (2 * width**2) + 1j * kk[d] * xd)
        return out

    return sample(f, grid, _M, _Q).normalized()


def _harmonic(grid: GridSpec, omega: float) -> ScalarField:
    r2 = sum(x * x for x in grid.mesh())
    return ScalarField(grid, 0.5 * _M * omega**2 * r2 / _Q)


def _evolve(psi, dt, steps, **kw) -> Trajectory:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return evolve_free(psi, dt, steps, **kw)


def _continuity_run(n: int, steps: int, box: float = 40.0) -> tuple[float, float]:
    g = GridSpec.centered(n, box * _L / n, 1)
    psi = _gaussian(g, [-4 * _L], [1.0 / _L])
    dt = 0.5 * _TAU / steps
    traj = _evolve(psi, dt, steps)
    worst = 0.0
    for a, b in zip(traj.snapshots[:-1], traj.snapshots[1:]):
        rho_dot = (charge_density(b).values - charge_density(a).values) / dt
        worst = max(worst, continuity_residual(a, b, dt) / float(np.max(np.abs(rho_dot))))
    return g.spacing[0], worst


def _position_run(n: int, steps: int, box: float = 24.0) -> tuple[float, float]:
    g = GridSpec.centered(n, box * _L / n, 1)
    omega = 1.0 / _TAU
    traj = _evolve(_gaussian(g, [2 * _L], [0.5 / _L]), 1.0 * _TAU / steps, steps, potential=_harmonic(g, omega))
    return g.spacing[0], check_position_velocity(traj).residual


def _uniform_e_run(n: int, steps: int, box: float = 40.0) -> tuple[float, float]:
    g = GridSpec.centered(n, box * _L / n, 1)
    field = uniform_electric_field([HBAR**2 / (_M * _L**3 * abs(_Q)), 0, 0], g)
    psi = _gaussian(g, [0.0], [0.5 / _L])
    traj = _evolve(psi, 1.0 * _TAU / steps, steps, potential=field.V)
    return g.spacing[0], check_momentum_lorentz(traj, field).residual


def _uniform_b_run(n: int, steps: int, box: float = 16.0) -> tuple[float, float]:
    g = GridSpec.centered([n, n], box * _L / n, 2)
    b = np.array([0.0, 0.0, _M / (abs(_Q) * _TAU)])  # cyclotron frequency 1/tau
    traj = _evolve(_gaussian(g, [0.0, 0.0], [1.0 / _L, 0.0]), 1.0 * _TAU / steps, steps, b_field=b)
    return g.spacing[0], check_momentum_lorentz(traj).residual


def _central_run(n: int, steps: int, box: float = 16.0) -> tuple[float, float]:
    g = GridSpec.centered([n, n], box * _L / n, 2)
    omega = 1.0 / _TAU
    traj = _evolve(_gaussian(g, [1.5 * _L, 0.0], [0.0, 1.0 / _L]), 1.0 * _TAU / steps, steps,
                   potential=_harmonic(g, omega))
    return g.spacing[0], check_angular_momentum(traj).residual


def _hamiltonian_displacement_run(n: int) -> tuple[float, float]:
    g = GridSpec.centered(n, 24.0 * _L / n, 1)
    field = uniform_electric_field([1e6, 0, 0], g)
    psi = _gaussian(g, [0.5 * _L], [0.7 / _L])
    return g.spacing[0], hamiltonian_form_residual(psi, "displacement", field, vector=[1, 0, 0])


def _lagrangian(n: int) -> float:
    sigma = _L
    g = GridSpec.centered([n] * 3, 12.0 * sigma / n, 3)
    r2 = sum(x * x for x in g.mesh())
    rho = ScalarField(g, _Q * np.exp(-r2 / (2 * sigma**2)) / ((2 * math.pi) ** 1.5 * sigma**3))
    return lagrangian_equivalence_residual(bundle_from_sources(rho=rho), rho, None)


def _radial_ground(d: DerivedConstants = DEFAULT_DERIVED):
    energy, u = radial_eigensolve(0, 1, RadialGrid.coulomb(1, d), d)[0]
    return energy, u, lambda r: proton_potential(r, d.base)


SCALES = {
    "quick": {"n1": (256, 512, 1024), "steps1": (40, 80, 160), "n2": (48, 96, 192), "steps2": (20, 40, 80),
              "n3": 32},
    "full": {"n1": (512, 1024, 2048), "steps1": (80, 160, 320), "n2": (64, 128, 256), "steps2": (30, 60, 120),
             "n3": 64},
}

LAGRANGIAN_TOL_64 = 1e-3


def run_suite(suite: str = "quick", seed: int = 0, dump_dir=None) -> list[VerificationReport]:
    """All conservation-law and identity checks at the preset grid scales."""
    if suite not in SCALES:
        raise ValueError(f"suite must be one of {SUITES}")
    s = SCALES[suite]
    rng = np.random.default_rng(seed)
    reports: list[VerificationReport] = []

    def study(name, fn, ns, steps):
        return refinement_study(name, lambda k: fn(ns[k], steps[k]), levels=len(ns))

    reports.append(study("continuity", _continuity_run, s["n1"], s["steps1"]))

    g = GridSpec.centered(s["n1"][0], 60.0 * _L / s["n1"][0], 1)
    free = _evolve(_gaussian(g, [0.0], [1.0 / _L]), 0.01 * _TAU, 100)
    if dump_dir is not None:
        from pathlib import Path

        from .grid import write_trajectory
        Path(dump_dir).mkdir(parents=True, exist_ok=True)
        write_trajectory(free, Path(dump_dir) / "free_packet.csv")
    reports.append(check_energy_conservation(free))

    reports.append(study("position-velocity", _position_run, s["n1"], s["steps1"]))
    reports.append(study("momentum-lorentz-uniform-e", _uniform_e_run, s["n1"], s["steps1"]))
    reports.append(study("momentum-lorentz-uniform-b", _uniform_b_run, s["n2"], s["steps2"]))
    reports.append(study("angular-momentum-central", _central_run, s["n2"], s["steps2"]))

    g2 = GridSpec.centered([64, 64], 0.5 * _L, 2)
    pairs = [(random_decayed_field(g2, rng), random_decayed_field(g2, rng)) for _ in range(20)]
    for kind, tol in (("displacement", ALGEBRAIC_TOL), ("rotation", ALGEBRAIC_TOL), ("position", POSITION_TOL)):
        res = []
        for a, b in pairs:
            if kind == "rotation":
                vec = np.array([0.0, 0.0, 1.0])
            else:
                vec = np.append(rng.normal(size=2), 0.0)
                if kind == "position":
                    vec = vec / _L
            res.append(antihermitian_residual(kind, a, b, vec))
        reports.append(VerificationReport(f"antihermitian-{kind}", np.asarray(res), np.zeros(len(res)),
                                          float(max(res)), tol))

    energy, u, pot = _radial_ground()
    reports.append(VerificationReport("stationary-radial-ground", np.array([energy]), np.array([energy]),
                                      stationary_residual(u, energy / HBAR, pot), ALGEBRAIC_TOL))

    hs, rs = [], []
    for n in s["n1"]:
        h, r = _hamiltonian_displacement_run(n)
        hs.append(h)
        rs.append(r)
    reports.append(refinement_study("hamiltonian-form-displacement", lambda k: (hs[k], rs[k]), levels=len(hs)))

    n3 = s["n3"]
    lag = _lagrangian(n3)
    reports.append(VerificationReport("lagrangian-equivalence", np.array([lag]), np.array([0.0]), lag,
                                      LAGRANGIAN_TOL_64 * (64.0 / n3) ** 2, details={"n": n3}))
    return reports
