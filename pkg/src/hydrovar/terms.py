"""Interaction-energy terms of the hydrogen atom and per-level breakdowns.

All energies are in joules.  The electron charge is carried with its sign
(``e_charge < 0``) in every formula below.

Length scale: the Bohr radius entering radial moments is built on the
electron mass by default (``mass_scale="paper"``); ``mass_scale="reduced"``
uses the reduced-mass radius throughout.  The Bohr term and the Coulomb
expectation always use the reduced mass.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .constants import DEFAULT, DEFAULT_DERIVED, ConstantsSet, DerivedConstants
from .hydrogen import QuantumLevel, bohr_level, ls_expectation, radial_moment, _radial_unit
from scipy.integrate import quad

__all__ = [
    "MASS_SCALES",
    "EnergyBreakdown",
    "Environment",
    "length_scale",
    "coulomb_expectation",
    "zeeman_orbital",
    "zeeman_spin",
    "stern_gerlach_force",
    "spin_orbit_shift",
    "fine_structure_splitting",
    "fine_structure_compact",
    "experimental_splitting",
    "spin_spin_contact",
    "spin_product",
    "dipole_matrix_element",
    "stark_matrix",
    "stark_energy",
    "level_breakdown",
]

MASS_SCALES = ("paper", "reduced")
STARK_MAX_N = 3


def length_scale(d: DerivedConstants, mass_scale: str = "paper") -> float:
    if mass_scale == "paper":
        return d.a0
    if mass_scale == "reduced":
        return d.a0_reduced
    raise ValueError(f"mass_scale must be one of {MASS_SCALES}")


def _coulomb_constant(c: ConstantsSet) -> float:
    return c.e_charge**2 / (4.0 * math.pi * c.eps0)


def coulomb_expectation(level: QuantumLevel, d: DerivedConstants = DEFAULT_DERIVED) -> float:
    """<-e^2 / (4 pi eps0 r)> with the reduced-mass Bohr radius."""
    return -_coulomb_constant(d.base) * radial_moment(level.n, level.l, -1, d.a0_reduced)


def zeeman_orbital(level: QuantumLevel, b_field: float, c: ConstantsSet = DEFAULT) -> float:
    """-(e / 2 m_r) ((m_p - m_e)/(m_p + m_e)) B <L_z> for B along z."""
    m_r = c.m_e * c.m_p / (c.m_e + c.m_p)
    ratio = (c.m_p - c.m_e) / (c.m_p + c.m_e)
    return -(c.e_charge / (2.0 * m_r)) * ratio * b_field * level.lz * c.hbar


def zeeman_spin(level: QuantumLevel, b_field: float, c: ConstantsSet = DEFAULT) -> float:
    """e B (<S_ez>/m_e - <S_pz>/m_p) for B along z; the proton enters only
    when ``level.m_sp`` is set."""
    sp = 0.0 if level.m_sp is None else level.m_sp
    return c.e_charge * b_field * c.hbar * (level.sz / c.m_e - sp / c.m_p)


def stern_gerlach_force(m_s: float, grad_b, c: ConstantsSet = DEFAULT, axis=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Force on the electron spin in B(x) = B0 + G x, with G[i, j] = dB_i/dx_j.

    F = grad((e/m_e) B . S) with S = m_s hbar along ``axis``.
    """
    if m_s not in (0.5, -0.5):
        raise ValueError("m_s must be +1/2 or -1/2")
    g = np.asarray(grad_b, dtype=float).reshape(3, 3)
    s_dir = np.asarray(axis, dtype=float).reshape(3)
    s_dir = s_dir / np.linalg.norm(s_dir)
    return (c.e_charge / c.m_e) * m_s * c.hbar * (g.T @ s_dir)


def _so_prefactor(c: ConstantsSet) -> float:
    # kappa (mu0 e^2 / 4 pi) with kappa = 1/2
    return 0.5 * c.mu0 * c.e_charge**2 / (4.0 * math.pi)


def spin_orbit_shift(level: QuantumLevel, d: DerivedConstants = DEFAULT_DERIVED, mass_scale: str = "paper",
                     proton_spin: bool = False) -> float:
    """(1/2)(mu0 e^2/4 pi) <(S_e/m_e + S_p/m_p) . L> <r^-3> / m_r.

    The electron part uses <L.S> of the (l, j) level.  The proton part is
    only added with ``proton_spin=True`` and a proton projection ``m_sp``; it
    is evaluated as <L_z> m_sp hbar^2 (proton spin quantised along z).
    l = 0 gives exactly 0.
    """
    if level.l == 0:
        return 0.0
    c = d.base
    a = length_scale(d, mass_scale)
    r3 = radial_moment(level.n, level.l, -3, a, method="closed")
    spin = ls_expectation(level.l, level.j) / c.m_e
    if proton_spin and level.m_sp is not None:
        spin += level.lz * level.m_sp / c.m_p
    return _so_prefactor(c) * c.hbar**2 * spin * r3 / d.m_r


def fine_structure_splitting(n: int, l: int, d: DerivedConstants = DEFAULT_DERIVED, mass_scale: str = "paper") -> float:
    """E_SO(j = l + 1/2) - E_SO(j = l - 1/2)."""
    if l < 1:
        raise ValueError("fine-structure splitting needs l >= 1")
    up = spin_orbit_shift(QuantumLevel(n, l, l + 0.5), d, mass_scale)
    down = spin_orbit_shift(QuantumLevel(n, l, l - 0.5), d, mass_scale)
    return up - down


def fine_structure_compact(d: DerivedConstants = DEFAULT_DERIVED) -> float:
    """(3/96)(m_e/m_r) alpha^4 m_e c^2, the n = 2, l = 1 interval in closed form."""
    c = d.base
    return (3.0 / 96.0) * (c.m_e / d.m_r) * d.alpha**4 * c.m_e * c.c_light**2


def experimental_splitting(lambda1: float, lambda2: float, c: ConstantsSet = DEFAULT) -> float:
    """2 pi hbar c (1/lambda1 - 1/lambda2) for 0 < lambda1 <= lambda2."""
    if not (0 < lambda1 <= lambda2) or not math.isfinite(lambda2):
        raise ValueError("need 0 < lambda1 <= lambda2")
    return c.h_planck * c.c_light * (1.0 / lambda1 - 1.0 / lambda2)


def spin_product(total_spin: int) -> float:
    """<S_e . S_p> in units of hbar^2 for total spin F."""
    if total_spin == 1:
        return 0.25
    if total_spin == 0:
        return -0.75
    raise ValueError("total spin must be 0 or 1")


def spin_spin_contact(n: int, total_spin: int, d: DerivedConstants = DEFAULT_DERIVED, l: int = 0,
                      mass_scale: str = "paper") -> float:
    """Contact part of (e^2/(m_e m_p))(mu0/4 pi) <[(S_e.S_p) Lap - (S_e.grad)(S_p.grad)] 1/r>
    for an s state:  -(2/3)(e^2 mu0/(m_e m_p)) <S_e.S_p> |psi_n0(0)|^2."""
    if l != 0:
        raise ValueError("the contact term is defined for s states (l = 0) only")
    if int(n) != n or n < 1:
        raise ValueError("n must be an integer >= 1")
    c = d.base
    a = length_scale(d, mass_scale)
    density0 = 1.0 / (math.pi * n**3 * a**3)
    k = c.e_charge**2 * c.mu0 / (c.m_e * c.m_p)
    return -(2.0 / 3.0) * k * spin_product(total_spin) * c.hbar**2 * density0


# -- linear Stark effect -----------------------------------------------------

def dipole_matrix_element(n: int, l1: int, l2: int, m: int, a0: float) -> float:
    """<n l1 m| z |n l2 m> from radial quadrature and the cos(theta) coupling."""
    if abs(l1 - l2) != 1 or abs(m) > min(l1, l2):
        return 0.0
    lo = min(l1, l2)
    ang = math.sqrt(((lo + 1) ** 2 - m * m) / ((2 * lo + 1) * (2 * lo + 3)))
    f = lambda x: _radial_unit(n, l1, x) * _radial_unit(n, l2, x) * x**3
    edges = [0.0, 0.5 * n * n, 2.0 * n * n, 6.0 * n * n, 20.0 * n * n, 120.0 * n * n]
    rad = sum(quad(f, lo_, hi_, epsabs=0.0, epsrel=1e-12, limit=200)[0] for lo_, hi_ in zip(edges[:-1], edges[1:]))
    return rad * ang * a0


def stark_basis(n: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(n) for m in range(-l, l + 1)]


def stark_matrix(n: int, e_field: float, d: DerivedConstants = DEFAULT_DERIVED, mass_scale: str = "paper") -> np.ndarray:
    """W = -e E z_r within the n manifold, basis ordered as ``stark_basis(n)``."""
    if int(n) != n or n < 1:
        raise ValueError("n must be an integer >= 1")
    if n > STARK_MAX_N:
        raise ValueError(f"Stark matrices are tabulated for n <= {STARK_MAX_N}")
    a = length_scale(d, mass_scale)
    basis = stark_basis(n)
    w = np.zeros((len(basis), len(basis)))
    for i, (l1, m1) in enumerate(basis):
        for k, (l2, m2) in enumerate(basis):
            if m1 == m2:
                w[i, k] = dipole_matrix_element(n, l1, l2, m1, a)
    return -d.base.e_charge * e_field * w


def stark_energy(n: int, e_field: float, d: DerivedConstants = DEFAULT_DERIVED, mass_scale: str = "paper") -> list[float]:
    """First-order shifts of the degenerate n manifold, ascending."""
    vals = np.linalg.eigvalsh(stark_matrix(n, e_field, d, mass_scale))
    return [float(v) for v in vals]


def _stark_diagonal(level: QuantumLevel, e_field: float, d: DerivedConstants, mass_scale: str) -> float:
    if e_field == 0 or level.n == 1:
        return 0.0
    basis = stark_basis(level.n)
    m = 0 if level.m_l is None else int(level.m_l)
    w = stark_matrix(level.n, e_field, d, mass_scale)
    i = basis.index((level.l, m))
    return float(w[i, i])


# -- per-level assembly ------------------------------------------------------

@dataclass(frozen=True)
class Environment:
    b_field: float = 0.0  # T, along z
    e_field: float = 0.0  # V/m, along z
    proton_spin: bool = False
    spin_spin: bool = False  # include the contact term for s states
    total_spin: int = 1
    mass_scale: str = "paper"

    def __post_init__(self):
        for name in ("b_field", "e_field"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.mass_scale not in MASS_SCALES:
            raise ValueError(f"mass_scale must be one of {MASS_SCALES}")
        spin_product(self.total_spin)


@dataclass(frozen=True)
class EnergyBreakdown:
    level: QuantumLevel
    bohr: float
    coulomb_expectation: float
    spin_orbit: float
    zeeman_orbital: float
    zeeman_spin: float
    spin_spin: float
    stark: float
    total: float

    TERMS = ("bohr", "spin_orbit", "zeeman_orbital", "zeeman_spin", "spin_spin", "stark")

    def as_dict(self) -> dict:
        out = asdict(self)
        out["level"] = asdict(self.level)
        return out


def level_breakdown(level: QuantumLevel, env: Environment = Environment(),
                    d: DerivedConstants = DEFAULT_DERIVED) -> EnergyBreakdown:
    """All terms for one level.  ``stark`` is the diagonal first-order element
    of the dipole coupling in the (l, m_l) basis; the full degenerate
    treatment is ``stark_energy``."""
    c = d.base
    terms = {
        "bohr": bohr_level(level.n, d),
        "spin_orbit": spin_orbit_shift(level, d, env.mass_scale, env.proton_spin),
        "zeeman_orbital": zeeman_orbital(level, env.b_field, c),
        "zeeman_spin": zeeman_spin(level if env.proton_spin else _without_proton(level), env.b_field, c),
        "spin_spin": (spin_spin_contact(level.n, env.total_spin, d, level.l, env.mass_scale)
                      if env.spin_spin and level.l == 0 else 0.0),
        "stark": _stark_diagonal(level, env.e_field, d, env.mass_scale),
    }
    total = math.fsum(terms[k] for k in EnergyBreakdown.TERMS)
    return EnergyBreakdown(level=level, coulomb_expectation=coulomb_expectation(level, d), total=total, **terms)


def _without_proton(level: QuantumLevel) -> QuantumLevel:
    if level.m_sp is None:
        return level
    return QuantumLevel(level.n, level.l, level.j, level.m_j, level.m_l, level.m_s, None)
