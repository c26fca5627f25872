"""Wave-functions sampled on rectangular grids.

Derivatives are second-order central differences with zero ghost values
outside the grid (homogeneous Dirichlet boundary).  With that convention the
first-derivative operator is exactly skew-symmetric and the Laplacian exactly
symmetric for the midpoint inner product ``sum(conj(a) * b) * dV``, so the
discrete Hamiltonian is Hermitian and Crank-Nicolson stepping is unitary.

Vector quantities are always stored with three Cartesian components; axes
the grid does not have are treated as zero coordinates with zero derivative.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .constants import DEFAULT

__all__ = [
    "GridSpec",
    "WaveField",
    "ScalarField",
    "VectorField",
    "Trajectory",
    "sample",
    "inner",
    "norm_squared",
    "boundary_decay_ratio",
    "is_boundary_decayed",
    "gradient",
    "divergence",
    "charge_density",
    "current_density",
    "integrated_value",
    "kinetic_energy",
    "derivative_matrix",
    "laplacian_matrix",
    "hamiltonian_matrix",
    "evolve_free",
    "apply_variation",
    "continuity_residual",
    "write_trajectory",
    "read_trajectory",
]

HBAR = DEFAULT.hbar
MIN_POINTS = 8


@dataclass(frozen=True)
class GridSpec:
    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    origin: tuple[float, ...]

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        spacing = tuple(float(h) for h in self.spacing)
        origin = tuple(float(o) for o in self.origin)
        if not 1 <= len(shape) <= 3:
            raise ValueError("grids are 1, 2 or 3 dimensional")
        if not (len(shape) == len(spacing) == len(origin)):
            raise ValueError("shape, spacing and origin must have equal length")
        if min(shape) < MIN_POINTS:
            raise ValueError(f"need at least {MIN_POINTS} points per axis")
        if not all(h > 0 and math.isfinite(h) for h in spacing):
            raise ValueError("spacing must be positive and finite")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def centered(cls, n: int | Sequence[int], h: float | Sequence[float], dim: int = 1) -> "GridSpec":
        """Grid of ``n`` nodes per axis placed symmetrically about the origin."""
        ns = (n,) * dim if np.isscalar(n) else tuple(n)
        hs = (h,) * len(ns) if np.isscalar(h) else tuple(h)
        return cls(ns, hs, tuple(-(k - 1) * s / 2 for k, s in zip(ns, hs)))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(n * h for n, h in zip(self.shape, self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(n) for n, h, o in zip(self.shape, self.spacing, self.origin)]

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def position(self) -> np.ndarray:
        """Cartesian position of every node, shape ``(3, *shape)``."""
        pos = np.zeros((3,) + self.shape)
        for k, x in enumerate(self.mesh()):
            pos[k] = x
        return pos

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same physical box sampled ``factor`` times more finely."""
        ns = tuple(n * factor for n in self.shape)
        hs = tuple(n * h / m for n, h, m in zip(self.shape, self.spacing, ns))
        centre = tuple(o + (n - 1) * h / 2 for o, n, h in zip(self.origin, self.shape, self.spacing))
        return GridSpec(ns, hs, tuple(c - (m - 1) * s / 2 for c, m, s in zip(centre, ns, hs)))

    def as_dict(self) -> dict:
        return {"shape": list(self.shape), "spacing": list(self.spacing), "origin": list(self.origin)}


@dataclass(frozen=True, eq=False)
class WaveField:
    grid: GridSpec
    amplitudes: np.ndarray
    mass: float
    charge: float

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != self.grid.shape:
            raise ValueError(f"amplitudes shape {a.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", a)

    def with_amplitudes(self, amplitudes: np.ndarray) -> "WaveField":
        return WaveField(self.grid, amplitudes, self.mass, self.charge)

    def normalized(self) -> "WaveField":
        return self.with_amplitudes(self.amplitudes / math.sqrt(norm_squared(self)))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError("values shape does not match grid")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: GridSpec
    values: np.ndarray  # (3, *shape)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (3,) + self.grid.shape:
            raise ValueError("vector values must have shape (3, *grid.shape)")
        object.__setattr__(self, "values", v)


@dataclass(eq=False)
class Trajectory:
    snapshots: list[WaveField]
    times: np.ndarray
    potential: ScalarField | None = None
    b_field: np.ndarray | None = None
    diamagnetic: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        """Time between consecutive snapshots."""
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return len(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]


def sample(f: Callable[..., np.ndarray], grid: GridSpec, m: float, q: float) -> WaveField:
    """Sample ``f(x[, y[, z]])`` (vectorised over mesh arrays) at the grid nodes."""
    values = np.broadcast_to(np.asarray(f(*grid.mesh()), dtype=complex), grid.shape)
    if not np.all(np.isfinite(values)):
        raise ValueError("sampled function is not finite on the grid")
    return WaveField(grid, values.copy(), m, q)


def inner(a: WaveField | np.ndarray, b: WaveField | np.ndarray, grid: GridSpec | None = None) -> complex:
    """Midpoint-rule inner product <a, b>, conjugate-linear in ``a``."""
    if isinstance(a, WaveField):
        grid = a.grid
        a = a.amplitudes
    if isinstance(b, WaveField):
        grid = grid or b.grid
        b = b.amplitudes
    return complex(np.vdot(a, b) * grid.cell_volume)


def norm_squared(psi: WaveField) -> float:
    return float(np.sum(np.abs(psi.amplitudes) ** 2) * psi.grid.cell_volume)


def _boundary_max(a: np.ndarray) -> float:
    out = 0.0
    for axis in range(a.ndim):
        for idx in (0, -1):
            out = max(out, float(np.max(np.abs(np.take(a, idx, axis=axis)))))
    return out


def boundary_decay_ratio(psi: WaveField) -> float:
    """max |psi| on the outermost node layer divided by max |psi|."""
    peak = float(np.max(np.abs(psi.amplitudes)))
    return 0.0 if peak == 0 else _boundary_max(psi.amplitudes) / peak


def is_boundary_decayed(psi: WaveField, tol: float = 1e-6) -> bool:
    return boundary_decay_ratio(psi) <= tol


# -- finite differences ------------------------------------------------------

def _diff(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.zeros_like(a)
    a = np.moveaxis(a, axis, 0)
    o = np.moveaxis(out, axis, 0)
    o[1:-1] = a[2:] - a[:-2]
    o[0] = a[1]
    o[-1] = -a[-2]
    return out / (2.0 * h)


def _lap(a: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    out = np.zeros_like(a)
    for axis, h in enumerate(spacing):
        src = np.moveaxis(a, axis, 0)
        o = np.moveaxis(out, axis, 0)
        o += -2.0 * src / h**2
        o[1:] += src[:-1] / h**2
        o[:-1] += src[1:] / h**2
    return out


def gradient(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Central-difference gradient with zero ghosts, shape ``(3, *shape)``."""
    dtype = complex if np.iscomplexobj(values) else float
    g = np.zeros((3,) + grid.shape, dtype=dtype)
    for axis, h in enumerate(grid.spacing):
        g[axis] = _diff(values, axis, h)
    return g


def divergence(vec: VectorField | np.ndarray, grid: GridSpec | None = None) -> np.ndarray:
    if isinstance(vec, VectorField):
        grid, vec = vec.grid, vec.values
    return sum(_diff(vec[axis], axis, h) for axis, h in enumerate(grid.spacing))


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.cross(a, b, axis=0)


def _check_b(grid: GridSpec, b_field) -> np.ndarray | None:
    if b_field is None:
        return None
    b = np.asarray(b_field, dtype=float).reshape(3)
    if not np.all(np.isfinite(b)):
        raise ValueError("magnetic field must be finite")
    for k in range(3):
        others = [a for a in range(3) if a != k]
        if b[k] != 0 and any(a >= grid.dim for a in others):
            raise ValueError(f"B component {'xyz'[k]} is not representable on a {grid.dim}D grid")
    return b if np.any(b) else None


def uniform_vector_potential(grid: GridSpec, b_field) -> np.ndarray:
    """Symmetric-gauge A = 1/2 B cross x at every node (curl A = B)."""
    b = np.asarray(b_field, dtype=float).reshape(3, *([1] * grid.dim))
    return 0.5 * _cross(np.broadcast_to(b, (3,) + grid.shape), grid.position())


def charge_density(psi: WaveField) -> ScalarField:
    return ScalarField(psi.grid, psi.charge * np.abs(psi.amplitudes) ** 2)


def current_density(psi: WaveField, b_field=None, hbar: float = HBAR) -> VectorField:
    """j = (hbar q / m) Im(psi* grad psi), minus (q^2/m) A |psi|^2 when a uniform B is given."""
    grad = gradient(psi.amplitudes, psi.grid)
    j = (hbar * psi.charge / psi.mass) * np.imag(np.conj(psi.amplitudes) * grad)
    b = _check_b(psi.grid, b_field)
    if b is not None:
        a = uniform_vector_potential(psi.grid, b)
        j = j - (psi.charge**2 / psi.mass) * a * np.abs(psi.amplitudes) ** 2
    return VectorField(psi.grid, j)


# -- operators as sparse matrices --------------------------------------------

@lru_cache(maxsize=64)
def _d1(n: int, h: float) -> sp.csr_matrix:
    off = np.full(n - 1, 1.0 / (2.0 * h))
    return sp.diags([-off, off], [-1, 1], format="csr")


@lru_cache(maxsize=64)
def _d2(n: int, h: float) -> sp.csr_matrix:
    return sp.diags([np.full(n - 1, 1 / h**2), np.full(n, -2 / h**2), np.full(n - 1, 1 / h**2)],
                    [-1, 0, 1], format="csr")


def _embed(op: sp.spmatrix, axis: int, shape: tuple[int, ...]) -> sp.csr_matrix:
    mats = [sp.identity(n, format="csr") for n in shape]
    mats[axis] = op
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def derivative_matrix(grid: GridSpec, axis: int) -> sp.csr_matrix:
    """d/dx_axis on the flattened (C-order) grid; zero matrix for absent axes."""
    if axis >= grid.dim:
        return sp.csr_matrix((grid.size, grid.size))
    return _embed(_d1(grid.shape[axis], grid.spacing[axis]), axis, grid.shape)


def laplacian_matrix(grid: GridSpec) -> sp.csr_matrix:
    out = sp.csr_matrix((grid.size, grid.size))
    for axis in range(grid.dim):
        out = out + _embed(_d2(grid.shape[axis], grid.spacing[axis]), axis, grid.shape)
    return out


def angular_operator(grid: GridSpec, omega) -> sp.csr_matrix:
    """Omega . (x cross grad) as a sparse matrix (real, skew-symmetric)."""
    w = np.asarray(omega, dtype=float).reshape(3)
    pos = grid.position().reshape(3, -1)
    d = [derivative_matrix(grid, k) for k in range(3)]
    out = sp.csr_matrix((grid.size, grid.size))
    for k in range(3):
        if w[k] == 0:
            continue
        i, j = (k + 1) % 3, (k + 2) % 3
        # (x cross grad)_k = x_i d_j - x_j d_i
        out = out + w[k] * (sp.diags(pos[i]) @ d[j] - sp.diags(pos[j]) @ d[i])
    return out.tocsr()


def hamiltonian_matrix(grid: GridSpec, mass: float, charge: float, potential: ScalarField | np.ndarray | None = None,
                       b_field=None, diamagnetic: bool = True, hbar: float = HBAR) -> sp.csr_matrix:
    """-hbar^2/(2m) Laplacian + qV - (q/2m) B.L [+ q^2 |B x x|^2 / 8m]."""
    h = (-(hbar**2) / (2.0 * mass)) * laplacian_matrix(grid).astype(complex)
    if potential is not None:
        v = potential.values if isinstance(potential, ScalarField) else np.asarray(potential, dtype=float)
        h = h + sp.diags(charge * v.ravel())
    b = _check_b(grid, b_field)
    if b is not None:
        # B.L = -i hbar B.(x cross grad)
        h = h - (charge / (2.0 * mass)) * (-1j * hbar) * angular_operator(grid, b)
        if diamagnetic:
            bx = _cross(np.broadcast_to(b.reshape(3, *([1] * grid.dim)), (3,) + grid.shape), grid.position())
            h = h + sp.diags((charge**2 / (8.0 * mass)) * np.sum(bx**2, axis=0).ravel())
    return h.tocsr()


def _apply(op: sp.spmatrix, psi: WaveField) -> np.ndarray:
    return (op @ psi.amplitudes.ravel()).reshape(psi.grid.shape)


def kinetic_energy(psi: WaveField, b_field=None, diamagnetic: bool = True, hbar: float = HBAR) -> float:
    """<psi, (p - qA)^2/2m psi>; reduces to <-hbar^2 Lap/2m> without a field."""
    h = hamiltonian_matrix(psi.grid, psi.mass, psi.charge, None, b_field, diamagnetic, hbar)
    return float(np.real(inner(psi, _apply(h, psi))))


def _hermitian_result(value: complex | np.ndarray, bound: float, what: str):
    value = np.asarray(value)
    scale = max(float(np.max(np.abs(value))), bound)
    if np.max(np.abs(value.imag)) > 1e-10 * scale:
        raise ValueError(f"integrated {what} has a significant imaginary part; check boundary decay")
    return value.real if value.ndim else float(value.real)


def integrated_value(psi: WaveField, op: str, func=None, hbar: float = HBAR):
    """Quadrature of psi* (O psi) over the grid.

    ``op`` is one of ``position``, ``momentum``, ``kinetic``, ``angular_momentum``
    or ``function`` (multiply by ``func``, an array or a callable of the mesh).
    Vector results have three Cartesian components.  Hermitian operators
    return real values.
    """
    a, g = psi.amplitudes, psi.grid
    dv = g.cell_volume
    nrm = math.sqrt(norm_squared(psi))
    if op == "position":
        pos = g.position()
        vals = np.array([np.vdot(a, pos[k] * a) * dv for k in range(3)])
        bound = nrm * max(math.sqrt(float(np.sum(np.abs(pos[k] * a) ** 2) * dv)) for k in range(3))
        return _hermitian_result(vals, bound, op)
    if op == "momentum":
        grad = gradient(a, g)
        ops = -1j * hbar * grad
        vals = np.array([np.vdot(a, ops[k]) * dv for k in range(3)])
        bound = nrm * hbar * math.sqrt(float(np.sum(np.abs(grad) ** 2) * dv))
        return _hermitian_result(vals, bound, op)
    if op == "kinetic":
        t = -(hbar**2) / (2 * psi.mass) * _lap(a, g.spacing)
        val = np.vdot(a, t) * dv
        return _hermitian_result(val, nrm * math.sqrt(float(np.sum(np.abs(t) ** 2) * dv)), op)
    if op == "angular_momentum":
        lz = -1j * hbar * _cross(g.position(), gradient(a, g))
        vals = np.array([np.vdot(a, lz[k]) * dv for k in range(3)])
        bound = nrm * math.sqrt(float(np.sum(np.abs(lz) ** 2) * dv))
        return _hermitian_result(vals, bound, op)
    if op == "function":
        if func is None:
            raise ValueError("op='function' needs func")
        f = func(*g.mesh()) if callable(func) else np.asarray(func)
        val = complex(np.vdot(a, f * a) * dv)
        if np.isrealobj(f):
            return _hermitian_result(val, nrm * math.sqrt(float(np.sum(np.abs(f * a) ** 2) * dv)), op)
        return val
    raise ValueError(f"unknown operator {op!r}")


# -- time evolution ----------------------------------------------------------

def evolve_free(psi: WaveField, dt: float, steps: int, potential: ScalarField | None = None, b_field=None,
                snapshot_every: int = 1, diamagnetic: bool = True, hbar: float = HBAR) -> Trajectory:
    """Crank-Nicolson evolution; returns snapshots every ``snapshot_every`` steps.

    (1 + i dt H / 2hbar) psi_{n+1} = (1 - i dt H / 2hbar) psi_n
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 0 or snapshot_every < 1:
        raise ValueError("steps must be >= 0 and snapshot_every >= 1")
    hmin = min(psi.grid.spacing)
    if dt > hmin**2 * psi.mass / hbar:
        warnings.warn("dt exceeds h^2 m / hbar; Crank-Nicolson stays stable but phase accuracy suffers",
                      RuntimeWarning, stacklevel=2)
    h = hamiltonian_matrix(psi.grid, psi.mass, psi.charge, potential, b_field, diamagnetic, hbar)
    eye = sp.identity(psi.grid.size, dtype=complex, format="csc")
    half = (0.5j * dt / hbar) * h
    try:
        lu = splu((eye + half).tocsc())
    except RuntimeError as exc:
        raise RuntimeError(f"Crank-Nicolson factorisation failed: {exc}") from exc
    explicit = (eye - half).tocsr()

    state = psi.amplitudes.ravel().copy()
    snaps, times = [psi], [0.0]
    for n in range(1, steps + 1):
        state = lu.solve(explicit @ state)
        if not np.all(np.isfinite(state)):
            raise FloatingPointError(f"non-finite amplitudes at step {n}")
        if n % snapshot_every == 0:
            snaps.append(psi.with_amplitudes(state.reshape(psi.grid.shape)))
            times.append(n * dt)
    b = None if b_field is None else np.asarray(b_field, dtype=float).reshape(3)
    return Trajectory(snaps, np.asarray(times), potential, b, diamagnetic)


# -- variations --------------------------------------------------------------

VARIATION_KINDS = ("time", "position", "displacement", "rotation")


def apply_variation(psi: WaveField, kind: str, vector=None, hamiltonian: sp.spmatrix | None = None,
                    hbar: float = HBAR) -> WaveField:
    """The generator mu of delta psi = eps * mu (eps not applied).

    time: H psi / (i hbar), position: i (k.x) psi, displacement: r.grad psi,
    rotation: Omega.(x cross grad psi).
    """
    a, g = psi.amplitudes, psi.grid
    if kind == "time":
        if hamiltonian is None:
            raise ValueError("the time variation needs a Hamiltonian")
        return psi.with_amplitudes(_apply(hamiltonian, psi) / (1j * hbar))
    if vector is None:
        raise ValueError(f"the {kind} variation needs a direction vector")
    v = np.asarray(vector, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError("direction must be finite")
    if kind == "position":
        kx = np.tensordot(v, g.position(), axes=1)
        return psi.with_amplitudes(1j * kx * a)
    if kind == "displacement":
        return psi.with_amplitudes(np.tensordot(v, gradient(a, g), axes=1))
    if kind == "rotation":
        return psi.with_amplitudes(np.tensordot(v, _cross(g.position(), gradient(a, g)), axes=1))
    raise ValueError(f"unknown variation kind {kind!r}")


def continuity_residual(psi_a: WaveField, psi_b: WaveField, dt: float, b_field=None, hbar: float = HBAR) -> float:
    """max |(rho_b - rho_a)/dt + div j(mid)| over interior nodes.

    ``j`` is evaluated on the midpoint field (psi_a + psi_b) / 2.
    """
    if psi_a.grid != psi_b.grid:
        raise ValueError("snapshots live on different grids")
    rho_dot = (charge_density(psi_b).values - charge_density(psi_a).values) / dt
    mid = psi_a.with_amplitudes(0.5 * (psi_a.amplitudes + psi_b.amplitudes))
    res = rho_dot + divergence(current_density(mid, b_field, hbar))
    interior = tuple(slice(1, -1) for _ in range(psi_a.grid.dim))
    return float(np.max(np.abs(res[interior])))


# -- text dumps --------------------------------------------------------------

TRAJECTORY_COLUMNS = ("snapshot", "time", "index", "re", "im")


def write_trajectory(traj: Trajectory, path: str | Path) -> tuple[Path, Path]:
    """Write ``path`` (CSV, columns snapshot,time,index,re,im; index is the
    C-order flat node index) plus a JSON sidecar with the grid description."""
    path = Path(path)
    first = traj.snapshots[0]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for s, (snap, t) in enumerate(zip(traj.snapshots, traj.times)):
            flat = snap.amplitudes.ravel()
            for i, z in enumerate(flat):
                w.writerow([s, repr(float(t)), i, repr(float(z.real)), repr(float(z.imag))])
    sidecar = path.with_suffix(".json")
    meta = {
        "grid": first.grid.as_dict(),
        "mass": first.mass,
        "charge": first.charge,
        "times": [float(t) for t in traj.times],
        "b_field": None if traj.b_field is None else [float(x) for x in traj.b_field],
        "columns": list(TRAJECTORY_COLUMNS),
    }
    sidecar.write_text(json.dumps(meta, indent=2))
    return path, sidecar


def read_trajectory(path: str | Path) -> Trajectory:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    g = meta["grid"]
    grid = GridSpec(tuple(g["shape"]), tuple(g["spacing"]), tuple(g["origin"]))
    n_snap = len(meta["times"])
    data = np.zeros((n_snap, grid.size), dtype=complex)
    with path.open() as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            data[int(row["snapshot"]), int(row["index"])] = complex(float(row["re"]), float(row["im"]))
    snaps = [WaveField(grid, d.reshape(grid.shape), meta["mass"], meta["charge"]) for d in data]
    b = meta.get("b_field")
    return Trajectory(snaps, np.asarray(meta["times"]), None, None if b is None else np.asarray(b))
