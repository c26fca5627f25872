"""Analytic hydrogen machinery and a radial finite-difference eigensolver.

Lengths are in metres and energies in joules.  Radial functions use the
standard normalisation  integral R_nl(r)^2 r^2 dr = 1  with a caller-chosen
Bohr radius, so the same code serves the electron-mass and the reduced-mass
length scales.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_genlaguerre

from .constants import DEFAULT, DEFAULT_DERIVED, ConstantsSet, DerivedConstants

__all__ = [
    "QuantumLevel",
    "CMTransform",
    "cm_transform",
    "radial_wavefunction",
    "radial_moment",
    "ls_expectation",
    "bohr_level",
    "RadialGrid",
    "RadialWaveField",
    "radial_operator",
    "radial_eigensolve",
    "proton_potential",
    "parse_level",
]


def _half_integer(x) -> Fraction:
    f = Fraction(x).limit_denominator(4)
    if f.denominator not in (1, 2) or abs(float(f) - float(x)) > 1e-12:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return f


@dataclass(frozen=True)
class QuantumLevel:
    """Hydrogen level (n, l, j) with optional projections.

    ``m_l``/``m_s`` give an uncoupled basis state; ``m_j`` a coupled one.
    ``m_sp`` is the proton spin projection (None leaves the proton out).
    """

    n: int
    l: int
    j: float
    m_j: float | None = None
    m_l: int | None = None
    m_s: float | None = None
    m_sp: float | None = None

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not isinstance(self.l, (int, np.integer)) or not 0 <= self.l < self.n:
            raise ValueError(f"l must satisfy 0 <= l < n, got l={self.l!r} for n={self.n}")
        j = _half_integer(self.j)
        if j.denominator != 2 or j not in {self.l - Fraction(1, 2), self.l + Fraction(1, 2)} or j <= 0:
            raise ValueError(f"j={self.j} is not admissible for l={self.l}")
        object.__setattr__(self, "j", float(j))
        if self.m_j is not None:
            mj = _half_integer(self.m_j)
            if mj.denominator != 2 or abs(mj) > j:
                raise ValueError(f"m_j={self.m_j} is not admissible for j={self.j}")
            object.__setattr__(self, "m_j", float(mj))
        if self.m_l is not None and (int(self.m_l) != self.m_l or abs(self.m_l) > self.l):
            raise ValueError(f"|m_l| must not exceed l={self.l}, got {self.m_l}")
        for name in ("m_s", "m_sp"):
            v = getattr(self, name)
            if v is not None and v not in (0.5, -0.5):
                raise ValueError(f"{name} must be +1/2 or -1/2, got {v!r}")
        if self.m_j is not None and self.m_l is not None and self.m_s is not None:
            if not math.isclose(self.m_l + self.m_s, self.m_j):
                raise ValueError("m_j must equal m_l + m_s")

    @property
    def s(self) -> float:
        return 0.5

    @property
    def label(self) -> str:
        """Spectroscopic label such as 2p_{3/2}."""
        return f"{self.n}{'spdfghiklmnoq'[self.l]}_{{{int(2 * self.j)}/2}}"

    def _spin_projection_factor(self) -> float:
        # <S_z>/(m_j hbar) within a |l s j m_j> state
        j, l = self.j, self.l
        return (j * (j + 1) - l * (l + 1) + 0.75) / (2 * j * (j + 1))

    @property
    def lz(self) -> float:
        """<L_z>/hbar: m_l when given, else the projection within |j m_j>, else 0."""
        if self.m_l is not None:
            return float(self.m_l)
        if self.m_j is not None:
            return self.m_j * (1.0 - self._spin_projection_factor())
        return 0.0

    @property
    def sz(self) -> float:
        """<S_z>/hbar of the electron, defined like ``lz``."""
        if self.m_s is not None:
            return float(self.m_s)
        if self.m_j is not None:
            return self.m_j * self._spin_projection_factor()
        return 0.0


_LABEL = re.compile(r"^\s*(\d+)\s*([spdfghik])\s*(?:_?\{?\s*(\d+)\s*/\s*2\s*\}?)?\s*$", re.I)


def parse_level(text: str) -> tuple[int, int, float | None]:
    """'2p3/2', '2p_{3/2}' or '2p' -> (n, l, j or None)."""
    m = _LABEL.match(text)
    if not m:
        raise ValueError(f"cannot parse level label {text!r}")
    n, l = int(m.group(1)), "spdfghik".index(m.group(2).lower())
    j = None if m.group(3) is None else int(m.group(3)) / 2
    if l >= n:
        raise ValueError(f"{text!r}: l must be below n")
    if j is not None:
        QuantumLevel(n, l, j)
    return n, l, j


# -- centre of mass / relative split -----------------------------------------

@dataclass(frozen=True)
class CMTransform:
    m_a: float
    m_b: float

    @property
    def total_mass(self) -> float:
        return self.m_a + self.m_b

    @property
    def reduced_mass(self) -> float:
        return self.m_a * self.m_b / (self.m_a + self.m_b)

    @property
    def forward_matrix(self) -> np.ndarray:
        """(x_cm, x_r) = F @ (x_a, x_b)."""
        M = self.total_mass
        return np.array([[self.m_a / M, self.m_b / M], [1.0, -1.0]])

    @property
    def inverse_matrix(self) -> np.ndarray:
        """(x_a, x_b) = F^-1 @ (x_cm, x_r)."""
        M = self.total_mass
        return np.array([[1.0, self.m_b / M], [1.0, -self.m_a / M]])

    @property
    def gradient_matrix(self) -> np.ndarray:
        """(grad_cm, grad_r) in terms of (grad_a, grad_b)."""
        M = self.total_mass
        return np.array([[1.0, 1.0], [self.m_b / M, -self.m_a / M]])

    @property
    def kinetic_factors(self) -> tuple[float, float]:
        """Prefactors of -hbar^2 Lap in T_cm and T_r: 1/(2M), 1/(2 m_r)."""
        return 1.0 / (2.0 * self.total_mass), 1.0 / (2.0 * self.reduced_mass)

    def to_relative(self, x_a, x_b):
        x_a, x_b = np.asarray(x_a, dtype=float), np.asarray(x_b, dtype=float)
        M = self.total_mass
        return (self.m_a * x_a + self.m_b * x_b) / M, x_a - x_b

    def from_relative(self, x_cm, x_r):
        x_cm, x_r = np.asarray(x_cm, dtype=float), np.asarray(x_r, dtype=float)
        M = self.total_mass
        return x_cm + (self.m_b / M) * x_r, x_cm - (self.m_a / M) * x_r


def cm_transform(m_a: float, m_b: float) -> CMTransform:
    if not (m_a > 0 and m_b > 0) or not (math.isfinite(m_a) and math.isfinite(m_b)):
        raise ValueError("masses must be positive and finite")
    return CMTransform(float(m_a), float(m_b))


# -- analytic radial functions -----------------------------------------------

def _check_nl(n: int, l: int):
    if int(n) != n or int(l) != l or n < 1 or not 0 <= l < n:
        raise ValueError(f"(n, l) = ({n}, {l}) is not admissible")


def _radial_unit(n: int, l: int, x):
    """R_nl for a0 = 1 at x = r/a0."""
    rho = 2.0 * np.asarray(x, dtype=float) / n
    norm = math.sqrt((2.0 / n) ** 3 * math.factorial(n - l - 1) / (2 * n * math.factorial(n + l)))
    return norm * np.exp(-rho / 2) * rho**l * eval_genlaguerre(n - l - 1, 2 * l + 1, rho)


def radial_wavefunction(n: int, l: int, r, a0: float = DEFAULT_DERIVED.a0):
    _check_nl(n, l)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be non-negative")
    out = _radial_unit(n, l, r / a0) / a0**1.5
    return float(out) if out.ndim == 0 else out


def _closed_moment(n: int, l: int, k: int) -> float | None:
    """<r^k> in units of a0^k (Kramers-type closed forms)."""
    ll = l * (l + 1)
    if k == 0:
        return 1.0
    if k == 1:
        return 0.5 * (3 * n * n - ll)
    if k == 2:
        return 0.5 * n * n * (5 * n * n + 1 - 3 * ll)
    if k == -1:
        return 1.0 / n**2
    if k == -2:
        return 1.0 / (n**3 * (l + 0.5))
    if k == -3:
        return 1.0 / (n**3 * l * (l + 0.5) * (l + 1))
    return None


def radial_moment(n: int, l: int, k: int, a0: float = DEFAULT_DERIVED.a0, method: str = "quadrature") -> float:
    """<R_nl| r^k |R_nl> = integral R_nl^2 r^(2+k) dr.

    ``method="quadrature"`` integrates adaptively (relative tolerance 1e-10);
    ``method="closed"`` uses the closed forms available for -3 <= k <= 2.
    """
    _check_nl(n, l)
    if int(k) != k or k < -3:
        raise ValueError("k must be an integer >= -3")
    if k == -3 and l == 0:
        raise ValueError("<r^-3> diverges for l = 0")
    if method == "closed":
        val = _closed_moment(n, l, k)
        if val is None:
            raise ValueError(f"no closed form for k={k}")
        return val * a0**k
    if method != "quadrature":
        raise ValueError("method must be 'quadrature' or 'closed'")

    def f(x):
        return _radial_unit(n, l, x) ** 2 * x ** (2 + k)

    # the density peaks near n^2 and has decayed below 1e-30 well before 100 n^2
    edges = [0.0, 0.5 * n * n, 2.0 * n * n, 6.0 * n * n, 20.0 * n * n, 120.0 * n * n]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total * a0**k


def ls_expectation(l: int, j: float) -> float:
    """<L.S> in units of hbar^2 for spin 1/2: [j(j+1) - l(l+1) - 3/4] / 2."""
    if int(l) != l or l < 0:
        raise ValueError("l must be a non-negative integer")
    jf = _half_integer(j)
    if jf.denominator != 2 or jf not in {l - Fraction(1, 2), l + Fraction(1, 2)} or jf <= 0:
        raise ValueError(f"j={j} is not admissible for l={l}")
    j = float(jf)
    return 0.5 * (j * (j + 1) - l * (l + 1) - 0.75)


def bohr_level(n: int, d: DerivedConstants = DEFAULT_DERIVED) -> float:
    """E_n = -rydberg / n^2 with rydberg = alpha^2 m_r c^2 / 2."""
    if int(n) != n or n < 1:
        raise ValueError("n must be an integer >= 1")
    return -d.rydberg / n**2


# -- radial eigensolver ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Interior nodes of a radial mesh on (0, r_max); u vanishes at both ends."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size < 8 or r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise ValueError("radial nodes must be positive, increasing and at least 8")
        object.__setattr__(self, "r", r)

    @classmethod
    def graded(cls, n_nodes: int, r_max: float, r_scale: float) -> "RadialGrid":
        """r = r_scale (e^s - 1) on a uniform s mesh with n_nodes interior nodes."""
        if n_nodes < 8 or not (r_max > 0 and r_scale > 0):
            raise ValueError("need n_nodes >= 8 and positive lengths")
        s = np.linspace(0.0, math.log1p(r_max / r_scale), n_nodes + 2)
        return cls(r_scale * np.expm1(s[1:-1]))

    @classmethod
    def coulomb(cls, n_max: int, d: DerivedConstants = DEFAULT_DERIVED, n_nodes: int = 4000) -> "RadialGrid":
        """Graded mesh reaching 40 a0 n_max^2, first spacing about 1e-3 a0 at 4000 nodes."""
        a = d.a0_reduced
        return cls.graded(n_nodes, 40.0 * a * n_max**2, a)

    @property
    def r_max(self) -> float:
        # outer Dirichlet node extrapolated from the mesh ratio
        return float(self.r[-1] ** 2 / self.r[-2]) if self.r.size > 1 else float(self.r[-1])

    @property
    def edges(self) -> np.ndarray:
        """Node list including the two Dirichlet end points."""
        return np.concatenate(([0.0], self.r, [self.r_max]))

    @property
    def weights(self) -> np.ndarray:
        """Box (dual-cell) widths used as quadrature weights."""
        e = self.edges
        return 0.5 * (e[2:] - e[:-2])

    @property
    def size(self) -> int:
        return self.r.size


@dataclass(frozen=True, eq=False)
class RadialWaveField:
    """u(r) = r R(r) on a radial grid, for angular momentum l."""

    grid: RadialGrid
    u: np.ndarray
    l: int
    mass: float
    charge: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.shape != self.grid.r.shape:
            raise ValueError("u must live on the grid nodes")
        object.__setattr__(self, "u", u)

    def norm_squared(self) -> float:
        return float(np.sum(self.grid.weights * self.u**2))


def radial_operator(grid: RadialGrid, l: int, mass: float, potential_energy,
                    hbar: float = DEFAULT.hbar) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of  W^-1/2 K W^-1/2  where K u = E W u is the
    box-scheme discretisation of -(hbar^2/2m)(u'' - l(l+1)u/r^2) + U(r) u."""
    e = grid.edges
    h = np.diff(e)  # h[i] = e[i+1] - e[i]
    w = grid.weights
    r = grid.r
    k = hbar**2 / (2.0 * mass)
    u_pot = potential_energy(r) if callable(potential_energy) else np.asarray(potential_energy, dtype=float)
    diag = k * (1.0 / h[:-1] + 1.0 / h[1:]) + w * (k * l * (l + 1) / r**2 + u_pot)
    off = -k / h[1:-1]
    sw = np.sqrt(w)
    return diag / w, off / (sw[:-1] * sw[1:])


def proton_potential(r, c: ConstantsSet = DEFAULT):
    """Electrostatic potential (volts) of the proton, -e/(4 pi eps0 r) with e < 0."""
    return -c.e_charge / (4.0 * math.pi * c.eps0 * np.asarray(r, dtype=float))


def radial_eigensolve(l: int, count: int, grid: RadialGrid, d: DerivedConstants = DEFAULT_DERIVED,
                      boundary_tol: float = 1e-6) -> list[tuple[float, RadialWaveField]]:
    """Lowest ``count`` bound states of the relative-coordinate Coulomb problem.

    The eigenvectors are returned as u = rR, normalised so that
    sum(weights * u^2) = 1.
    """
    if int(l) != l or l < 0 or count < 1:
        raise ValueError("need l >= 0 and count >= 1")
    c = d.base
    diag, off = radial_operator(grid, l, d.m_r, c.e_charge * proton_potential(grid.r, c), c.hbar)
    try:
        vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"radial eigensolve did not converge: {exc}") from exc
    sw = np.sqrt(grid.weights)
    out = []
    tail = grid.r > 0.9 * grid.r[-1]
    for i in range(count):
        u = vecs[:, i] / sw
        u = u / math.sqrt(np.sum(grid.weights * u**2))
        if u[np.argmax(np.abs(u))] < 0:
            u = -u
        mass_near_edge = float(np.sum((grid.weights * u**2)[tail]))
        if mass_near_edge > boundary_tol:
            raise RuntimeError(f"state {i} has {mass_near_edge:.2e} of its norm near r_max; enlarge the mesh")
        out.append((float(vals[i]), RadialWaveField(grid, u, int(l), d.m_r, c.e_charge)))
    return out
