"""Physical constants (SI, CODATA-2018) and the derived atomic scales.

Every other module takes its numbers from here.  A plain-text override file
(``key = value`` lines, ``#`` comments) can replace any of the base constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

__all__ = [
    "ConstantsSet",
    "DerivedConstants",
    "CODATA_2018",
    "ConstantsError",
    "load_constants",
    "parse_overrides",
    "derive",
    "reduced_mass",
]


class ConstantsError(ValueError):
    """Raised for malformed or non-physical constant definitions."""


@dataclass(frozen=True)
class ConstantsSet:
    hbar: float  # J s
    e_charge: float  # C, electron charge (negative)
    m_e: float  # kg
    m_p: float  # kg
    eps0: float  # F/m
    mu0: float  # H/m
    c_light: float  # m/s

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConstantsError(f"{f.name} must be a finite number, got {v!r}")
            if f.name == "e_charge":
                if v >= 0:
                    raise ConstantsError("e_charge is the electron charge and must be negative")
            elif v <= 0:
                raise ConstantsError(f"{f.name} must be positive, got {v!r}")

    @property
    def e_abs(self) -> float:
        return -self.e_charge

    @property
    def h_planck(self) -> float:
        return 2.0 * math.pi * self.hbar

    def as_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


@dataclass(frozen=True)
class DerivedConstants:
    alpha: float
    a0: float  # Bohr radius built on m_e
    m_r: float  # electron-proton reduced mass
    rydberg: float  # alpha^2 m_r c^2 / 2, in J
    base: ConstantsSet

    @property
    def a0_reduced(self) -> float:
        """Bohr radius built on the reduced mass, hbar/(alpha m_r c)."""
        return self.a0 * self.base.m_e / self.m_r

    def as_dict(self) -> dict[str, float]:
        return {
            "alpha": self.alpha,
            "a0": self.a0,
            "a0_reduced": self.a0_reduced,
            "m_r": self.m_r,
            "rydberg": self.rydberg,
        }


CODATA_2018 = ConstantsSet(
    hbar=1.054571817e-34,
    e_charge=-1.602176634e-19,
    m_e=9.1093837015e-31,
    m_p=1.67262192369e-27,
    eps0=8.8541878128e-12,
    mu0=1.25663706212e-6,
    c_light=299792458.0,
)

_KEYS = frozenset(f.name for f in fields(ConstantsSet))


def reduced_mass(m_a: float, m_b: float) -> float:
    if m_a <= 0 or m_b <= 0:
        raise ConstantsError("masses must be positive")
    return m_a * m_b / (m_a + m_b)


def parse_overrides(text: str) -> dict[str, float]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConstantsError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConstantsError(f"line {lineno}: unknown constant {key!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ConstantsError(f"line {lineno}: {key} value {value!r} is not numeric") from None
    return out


def load_constants(source: str | Path | dict | None = None) -> ConstantsSet:
    """Return the CODATA-2018 set, optionally with overrides applied.

    ``source`` may be a path to an override file or a mapping of overrides.
    """
    if source is None:
        return CODATA_2018
    if isinstance(source, dict):
        overrides = dict(source)
        unknown = set(overrides) - _KEYS
        if unknown:
            raise ConstantsError(f"unknown constant(s): {sorted(unknown)}")
        try:
            overrides = {k: float(v) for k, v in overrides.items()}
        except (TypeError, ValueError):
            raise ConstantsError("override values must be numeric") from None
    else:
        overrides = parse_overrides(Path(source).read_text())
    return replace(CODATA_2018, **overrides)


def derive(c: ConstantsSet) -> DerivedConstants:
    alpha = c.mu0 * c.e_charge**2 * c.c_light / (4.0 * math.pi * c.hbar)
    a0 = c.hbar / (alpha * c.m_e * c.c_light)
    m_r = reduced_mass(c.m_e, c.m_p)
    rydberg = 0.5 * alpha**2 * m_r * c.c_light**2
    return DerivedConstants(alpha=alpha, a0=a0, m_r=m_r, rydberg=rydberg, base=c)


DEFAULT = CODATA_2018
DEFAULT_DERIVED = derive(CODATA_2018)
