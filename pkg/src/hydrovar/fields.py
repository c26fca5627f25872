"""Static electromagnetic potentials and fields on rectangular grids.

Potentials of grid sources are free-space Green-function convolutions done
with zero-padded FFTs, so there are no periodic images.  The singular node of
the 1/r kernel gets a finite self term: by default the lattice-regularised
value 2.8372974794806/h, which makes the punctured midpoint sum accurate to
high order for smooth sources; the mean of 1/r over one cell (2.3800773/h) is
available as ``self_term="cell-average"``.

Field derivatives (E = -grad V, B = curl A) use fourth-order central
differences in the interior and second-order one-sided differences on the two
outermost node layers.  Derivatives along different axes commute, so the
discrete divergence of a discrete curl vanishes to rounding.

Energies between two distinct bundles are Maxwell field integrals.  Fields of
localized sources are not confined to the grid box, so the part of the
integral outside the box is added back through Gauss's theorem as a surface
term on the box faces.  A source is never combined with its own fields.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .constants import DEFAULT, ConstantsSet
from .grid import GridSpec, ScalarField, VectorField, uniform_vector_potential

__all__ = [
    "FieldBundle",
    "CUBE_INVERSE_DISTANCE",
    "LATTICE_SELF_TERM",
    "field_gradient",
    "field_curl",
    "field_divergence",
    "scalar_potential",
    "vector_potential_current",
    "vector_potential_magnetization",
    "bundle_from_sources",
    "uniform_field_potential",
    "uniform_electric_field",
    "external_potential",
    "interaction_energy",
    "lagrangian_equivalence_residual",
]

# mean of 1/r over the unit cube centred on the origin: 3 ln(2 + sqrt 3) - pi/2
CUBE_INVERSE_DISTANCE = 3.0 * math.log(2.0 + math.sqrt(3.0)) - math.pi / 2.0
# minus the regularised simple-cubic lattice sum of 1/|n|
LATTICE_SELF_TERM = 2.8372974794806
SELF_TERMS = {"lattice": LATTICE_SELF_TERM, "cell-average": CUBE_INVERSE_DISTANCE}

SOURCE_TAGS = ("charge", "current", "magnetization", "external-uniform", "external")

_ids = itertools.count(1)


@dataclass(eq=False)
class FieldBundle:
    grid: GridSpec
    V: ScalarField | None = None
    A: VectorField | None = None
    E: VectorField | None = None
    B: VectorField | None = None
    source: str = "external"
    b_uniform: np.ndarray | None = None  # set when B is a uniform applied field
    rho: ScalarField | None = None
    j: VectorField | None = None
    source_id: int = field(default_factory=lambda: next(_ids))

    def __post_init__(self):
        if self.source not in SOURCE_TAGS:
            raise ValueError(f"unknown source tag {self.source!r}")
        for name in ("V", "A", "E", "B", "rho", "j"):
            f = getattr(self, name)
            if f is not None and f.grid != self.grid:
                raise ValueError(f"{name} lives on a different grid")

    @property
    def is_localized(self) -> bool:
        return self.source in ("charge", "current", "magnetization")

    def electric(self) -> np.ndarray:
        return np.zeros((3,) + self.grid.shape) if self.E is None else self.E.values

    def magnetic(self) -> np.ndarray:
        return np.zeros((3,) + self.grid.shape) if self.B is None else self.B.values

    def potential(self) -> np.ndarray:
        return np.zeros(self.grid.shape) if self.V is None else self.V.values

    def __add__(self, other: "FieldBundle") -> "FieldBundle":
        """Superpose two external bundles (fields and potentials add)."""
        if other.grid != self.grid:
            raise ValueError("bundles live on different grids")
        if self.is_localized or other.is_localized:
            raise ValueError("only external bundles are superposed; keep sources separate")

        def add(a, b, cls):
            if a is None:
                return b
            if b is None:
                return a
            return cls(self.grid, a.values + b.values)

        bu = None
        if self.b_uniform is not None or other.b_uniform is not None:
            bu = sum(x for x in (self.b_uniform, other.b_uniform) if x is not None)
        return FieldBundle(self.grid, add(self.V, other.V, ScalarField), add(self.A, other.A, VectorField),
                           add(self.E, other.E, VectorField), add(self.B, other.B, VectorField),
                           source="external", b_uniform=bu)


# -- differential operators for fields ----------------------------------------

def _partial(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    if axis >= grid.dim:
        return np.zeros(grid.shape)
    h = grid.spacing[axis]
    out = np.gradient(values, h, axis=axis, edge_order=2)
    v = np.moveaxis(values, axis, 0)
    o = np.moveaxis(out, axis, 0)
    o[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    return out


def field_gradient(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.array([_partial(values, grid, k) for k in range(3)])


def field_curl(vec: np.ndarray, grid: GridSpec) -> np.ndarray:
    d = lambda comp, axis: _partial(vec[comp], grid, axis)
    return np.array([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)])


def field_divergence(vec: np.ndarray, grid: GridSpec) -> np.ndarray:
    return sum(_partial(vec[k], grid, k) for k in range(3))


# -- Green-function convolution ----------------------------------------------

def _require_cubic_3d(grid: GridSpec):
    if grid.dim != 3:
        raise ValueError("free-space potentials need a 3D grid")
    h = grid.spacing
    if not (math.isclose(h[0], h[1], rel_tol=1e-12) and math.isclose(h[0], h[2], rel_tol=1e-12)):
        raise ValueError("free-space potentials need equal spacing on all axes")


def _inverse_distance_kernel(grid: GridSpec, self_term: str = "lattice") -> np.ndarray:
    h = grid.spacing[0]
    axes = [h * np.arange(-(n - 1), n) for n in grid.shape]
    x, y, z = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(x * x + y * y + z * z)
    centre = tuple(n - 1 for n in grid.shape)
    r[centre] = 1.0
    kernel = 1.0 / r
    try:
        kernel[centre] = SELF_TERMS[self_term] / h
    except KeyError:
        raise ValueError(f"self_term must be one of {sorted(SELF_TERMS)}") from None
    return kernel


def _convolve_inverse_distance(values: np.ndarray, grid: GridSpec, self_term: str = "lattice") -> np.ndarray:
    """integral of values(y) / |x - y| d^3y at every node."""
    if not np.any(values):
        return np.zeros(grid.shape)
    out = fftconvolve(values, _inverse_distance_kernel(grid, self_term), mode="same")
    return out * grid.cell_volume


def scalar_potential(rho: ScalarField, c: ConstantsSet = DEFAULT, self_term: str = "lattice") -> ScalarField:
    """V = (1/4 pi eps0) integral rho(y)/|x - y| (static, free space)."""
    _require_cubic_3d(rho.grid)
    v = _convolve_inverse_distance(rho.values, rho.grid, self_term)
    return ScalarField(rho.grid, v / (4 * math.pi * c.eps0))


def vector_potential_current(j: VectorField, c: ConstantsSet = DEFAULT) -> VectorField:
    """A = (mu0/4 pi) integral j(y)/|x - y|, componentwise."""
    _require_cubic_3d(j.grid)
    vals = np.array([_convolve_inverse_distance(j.values[k], j.grid) for k in range(3)])
    return VectorField(j.grid, vals * c.mu0 / (4 * math.pi))


def vector_potential_magnetization(m: VectorField, c: ConstantsSet = DEFAULT) -> VectorField:
    """A = (mu0/4 pi) curl integral M(y)/|x - y|."""
    _require_cubic_3d(m.grid)
    conv = np.array([_convolve_inverse_distance(m.values[k], m.grid) for k in range(3)])
    return VectorField(m.grid, field_curl(conv, m.grid) * c.mu0 / (4 * math.pi))


def bundle_from_sources(rho: ScalarField | None = None, j: VectorField | None = None,
                        magnetization: VectorField | None = None, c: ConstantsSet = DEFAULT) -> FieldBundle:
    """Static potentials and fields of a localized charge/current/magnetization."""
    present = [s for s in (rho, j, magnetization) if s is not None]
    if not present:
        raise ValueError("need at least one source")
    grid = present[0].grid
    V = E = A = B = None
    if rho is not None:
        V = scalar_potential(rho, c)
        E = VectorField(grid, -field_gradient(V.values, grid))
    a_vals = np.zeros((3,) + grid.shape)
    if j is not None:
        a_vals += vector_potential_current(j, c).values
    if magnetization is not None:
        a_vals += vector_potential_magnetization(magnetization, c).values
    if j is not None or magnetization is not None:
        A = VectorField(grid, a_vals)
        B = VectorField(grid, field_curl(a_vals, grid))
    tag = "charge" if rho is not None else ("current" if j is not None else "magnetization")
    return FieldBundle(grid, V=V, A=A, E=E, B=B, source=tag, rho=rho, j=j)


# -- external fields ---------------------------------------------------------

def uniform_field_potential(b_field, grid: GridSpec) -> FieldBundle:
    """A = 1/2 B cross x; B is recovered as the discrete curl of A."""
    b = np.asarray(b_field, dtype=float).reshape(3)
    if not np.all(np.isfinite(b)):
        raise ValueError("B must be finite")
    a = uniform_vector_potential(grid, b)
    return FieldBundle(grid, A=VectorField(grid, a), B=VectorField(grid, field_curl(a, grid)),
                       source="external-uniform", b_uniform=b.copy())


def uniform_electric_field(e_field, grid: GridSpec) -> FieldBundle:
    """Uniform E with the potential V = -E.x."""
    e = np.asarray(e_field, dtype=float).reshape(3)
    v = -np.tensordot(e, grid.position(), axes=1)
    ev = np.broadcast_to(e.reshape(3, *([1] * grid.dim)), (3,) + grid.shape).copy()
    return FieldBundle(grid, V=ScalarField(grid, v), E=VectorField(grid, ev), source="external-uniform")


def external_potential(grid: GridSpec, potential, e_field=None) -> FieldBundle:
    """Static external scalar potential (array or callable of the mesh).

    ``e_field`` may supply the exact field; otherwise E = -grad V by finite
    differences.
    """
    v = potential(*grid.mesh()) if callable(potential) else np.asarray(potential, dtype=float)
    v = np.broadcast_to(v, grid.shape).astype(float)
    if e_field is None:
        e = -field_gradient(v, grid)
    else:
        e = e_field(*grid.mesh()) if callable(e_field) else e_field
        e = np.asarray(e, dtype=float)
    return FieldBundle(grid, V=ScalarField(grid, v), E=VectorField(grid, e), source="external")


# -- energies ----------------------------------------------------------------

def _face_values(a: np.ndarray, axis: int, side: int) -> np.ndarray:
    """Linear extrapolation of a (component-last-axes) array to the cell face
    half a spacing beyond the outermost node layer."""
    outer = np.take(a, 0 if side < 0 else -1, axis=axis)
    inner = np.take(a, 1 if side < 0 else -2, axis=axis)
    return 1.5 * outer - 0.5 * inner


def _surface_flux(vec: np.ndarray, grid: GridSpec) -> float:
    """Closed-surface integral of vec . n over the faces of the grid box."""
    total = 0.0
    for axis in range(grid.dim):
        area = grid.cell_volume / grid.spacing[axis]
        for side in (-1, 1):
            total += side * float(np.sum(_face_values(vec[axis], axis, side))) * area
    return total


def _check_distinct(b1: FieldBundle, b2: FieldBundle):
    if b1.grid != b2.grid:
        raise ValueError("bundles live on different grids")
    if b1 is b2 or b1.source_id == b2.source_id:
        raise ValueError("self-interaction requested: combine distinct sources only")


def interaction_energy(b1: FieldBundle, b2: FieldBundle, c: ConstantsSet = DEFAULT) -> float:
    """integral [eps0 E1.E2 + B1.B2/mu0] over all space.

    Inside the box this is a midpoint sum.  When both bundles come from
    localized sources the exterior is added as surface terms
    (eps0 V E.n and -(A x B).n / mu0, symmetrised over the pair).
    """
    _check_distinct(b1, b2)
    grid = b1.grid
    dv = grid.cell_volume
    e1, e2 = b1.electric(), b2.electric()
    m1, m2 = b1.magnetic(), b2.magnetic()
    energy = c.eps0 * float(np.sum(e1 * e2)) * dv + float(np.sum(m1 * m2)) * dv / c.mu0
    if b1.is_localized and b2.is_localized:
        if b1.V is not None and b2.V is not None:
            flux = 0.5 * (b1.V.values * e2 + b2.V.values * e1)
            energy += c.eps0 * _surface_flux(flux, grid)
        if b1.A is not None and b2.A is not None:
            flux = 0.5 * (np.cross(b1.A.values, m2, axis=0) + np.cross(b2.A.values, m1, axis=0))
            energy -= _surface_flux(flux, grid) / c.mu0
    return energy


def _decayed(values: np.ndarray, tol: float = 1e-6) -> bool:
    peak = float(np.max(np.abs(values)))
    if peak == 0:
        return True
    edge = 0.0
    for axis in range(values.ndim):
        for idx in (0, -1):
            edge = max(edge, float(np.max(np.abs(np.take(values, idx, axis=axis)))))
    return edge <= tol * peak


def lagrangian_equivalence_residual(bundle: FieldBundle, rho: ScalarField | None, j: VectorField | None,
                                    c: ConstantsSet = DEFAULT) -> float:
    """Relative mismatch between the field and potential forms of the
    electromagnetic Lagrangian density, integrated over all space:
    integral [B^2/mu0 - eps0 E^2]  versus  integral [A.j - rho V].
    """
    grid = bundle.grid
    for s in (rho, j):
        if s is not None and not _decayed(s.values):
            raise ValueError("sources do not decay at the grid boundary")
    dv = grid.cell_volume
    e, b = bundle.electric(), bundle.magnetic()
    field_form = (float(np.sum(b * b)) / c.mu0 - c.eps0 * float(np.sum(e * e))) * dv
    if bundle.V is not None:
        field_form -= c.eps0 * _surface_flux(bundle.V.values * e, grid)
    if bundle.A is not None:
        field_form -= _surface_flux(np.cross(bundle.A.values, b, axis=0), grid) / c.mu0
    potential_form = 0.0
    if j is not None and bundle.A is not None:
        potential_form += float(np.sum(bundle.A.values * j.values)) * dv
    if rho is not None and bundle.V is not None:
        potential_form -= float(np.sum(rho.values * bundle.V.values)) * dv
    scale = max(abs(field_form), abs(potential_form))
    return 0.0 if scale == 0 else abs(field_form - potential_form) / scale
