"""Command-line front end: term tables, transitions, verification, constants.

Exit codes: 0 success, 1 failed check or invalid input, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .constants import CODATA_2018, ConstantsError, ConstantsSet, DerivedConstants, derive, load_constants
from .hydrogen import QuantumLevel, parse_level
from .terms import MASS_SCALES, EnergyBreakdown, Environment, level_breakdown, stark_energy, STARK_MAX_N

NMAX_LIMIT = 10
OUTPUTS = ("json", "csv", "plain")
LEVEL_COLUMNS = ("n", "l", "j", "m_j", "label", "E_total_J", "E_total_eV", "bohr", "coulomb_expectation",
                 "spin_orbit", "zeeman_orbital", "zeeman_spin", "spin_spin", "stark")
TRANSITION_COLUMNS = ("upper", "lower", "delta_E_J", "delta_E_eV", "wavelength_m", "wavelength_angstrom",
                      "frequency_Hz")
CHECK_COLUMNS = ("check", "residual", "tolerance", "order", "passed")


class CliError(Exception):
    """Invalid input detected after argument parsing (exit code 1)."""


@dataclass(frozen=True)
class CliConfig:
    command: str
    nmax: int = 2
    bfield: float = 0.0
    efield: float = 0.0
    proton_spin: bool = False
    mass_scale: str = "paper"
    output: str = "json"
    constants: str | None = None
    suite: str = "quick"
    seed: int = 0

    def __post_init__(self):
        if self.command not in ("levels", "transition", "verify", "constants"):
            raise CliError(f"unknown command {self.command!r}")
        if not 1 <= self.nmax <= NMAX_LIMIT:
            raise CliError(f"--nmax must be between 1 and {NMAX_LIMIT}")
        for name in ("bfield", "efield"):
            if not math.isfinite(getattr(self, name)):
                raise CliError(f"--{name} must be finite")
        if self.mass_scale not in MASS_SCALES:
            raise CliError(f"--mass-scale must be one of {MASS_SCALES}")
        if self.output not in OUTPUTS:
            raise CliError(f"--output must be one of {OUTPUTS}")
        if self.seed < 0:
            raise CliError("--seed must be non-negative")

    def echo(self) -> dict:
        return {k: getattr(self, k) for k in ("nmax", "bfield", "efield", "proton_spin", "mass_scale", "output",
                                              "constants", "suite", "seed")}


# -- serialisation -----------------------------------------------------------

_FLOAT_TAG = "\x00f:"


def fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in output")
    return format(x + 0.0, ".17g")  # + 0.0 folds -0.0 into 0.0


def _tag_floats(obj):
    # adding 0.0 folds -0.0 into 0.0 so zero terms print unsigned
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return _FLOAT_TAG + fmt(obj + 0.0)
    if isinstance(obj, dict):
        return {k: _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """JSON with every float written at 17 significant digits."""
    text = json.dumps(_tag_floats(obj), indent=2, ensure_ascii=True)
    return re.sub(r'"\\u0000f:([^"]*)"', r"\1", text)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt(v + 0.0)
    return str(v)


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def to_plain(rows: list[dict], columns) -> str:
    def short(v):
        return format(v + 0.0, ".10g") if isinstance(v, float) else _cell(v)

    table = [list(columns)] + [[short(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(columns))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table) + "\n"


def fingerprint(c: ConstantsSet) -> str:
    canon = ";".join(f"{k}={fmt(v)}" for k, v in sorted(c.as_dict().items()))
    return hashlib.sha256(canon.encode("ascii")).hexdigest()


# -- commands ----------------------------------------------------------------

def _environment(cfg: CliConfig) -> Environment:
    return Environment(b_field=cfg.bfield, e_field=cfg.efield, proton_spin=cfg.proton_spin,
                       spin_spin=cfg.proton_spin, total_spin=1, mass_scale=cfg.mass_scale)


def _levels_for(n: int, l: int, j: float | None, cfg: CliConfig) -> list[QuantumLevel]:
    js = [j] if j is not None else [x for x in (l - 0.5, l + 0.5) if x > 0]
    sp = 0.5 if cfg.proton_spin else None
    out = []
    for jj in js:
        if cfg.bfield != 0:
            m = -jj
            while m <= jj + 1e-9:
                out.append(QuantumLevel(n, l, jj, m_j=m, m_sp=sp))
                m += 1.0
        else:
            out.append(QuantumLevel(n, l, jj, m_sp=sp))
    return out


def _row(b: EnergyBreakdown, d: DerivedConstants) -> dict:
    lv = b.level
    return {
        "n": lv.n, "l": lv.l, "j": lv.j, "m_j": lv.m_j, "label": lv.label,
        "E_total_J": b.total, "E_total_eV": b.total / d.base.e_abs,
        "bohr": b.bohr, "coulomb_expectation": b.coulomb_expectation, "spin_orbit": b.spin_orbit,
        "zeeman_orbital": b.zeeman_orbital, "zeeman_spin": b.zeeman_spin, "spin_spin": b.spin_spin,
        "stark": b.stark,
    }


def cmd_levels(cfg: CliConfig, d: DerivedConstants) -> dict:
    env = _environment(cfg)
    rows = []
    for n in range(1, cfg.nmax + 1):
        for l in range(n):
            for lv in _levels_for(n, l, None, cfg):
                rows.append(_row(level_breakdown(lv, env, d), d))
    rows.sort(key=lambda r: (r["n"], r["l"], r["j"], -99 if r["m_j"] is None else r["m_j"]))
    out = {"rows": rows}
    if cfg.efield != 0:
        out["stark_manifolds"] = [{"n": n, "shifts_J": stark_energy(n, cfg.efield, d, cfg.mass_scale)}
                                  for n in range(1, min(cfg.nmax, STARK_MAX_N) + 1)]
    return out


def cmd_transition(upper: str, lower: str, cfg: CliConfig, d: DerivedConstants) -> dict:
    try:
        na, la, ja = parse_level(upper)
        nb, lb, jb = parse_level(lower)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if (na, la, ja) == (nb, lb, jb):
        raise CliError("the two levels are identical")
    env = _environment(cfg)
    c = d.base
    rows = []
    for a in _levels_for(na, la, ja, cfg):
        for b in _levels_for(nb, lb, jb, cfg):
            if a == b:
                continue
            de = level_breakdown(a, env, d).total - level_breakdown(b, env, d).total
            if de == 0:
                raise CliError(f"{a.label} and {b.label} are degenerate; no line")
            lam = c.h_planck * c.c_light / abs(de)
            rows.append({"upper": a.label + ("" if a.m_j is None else f" m_j={a.m_j:+g}"),
                         "lower": b.label + ("" if b.m_j is None else f" m_j={b.m_j:+g}"),
                         "delta_E_J": de, "delta_E_eV": de / c.e_abs, "wavelength_m": lam,
                         "wavelength_angstrom": lam * 1e10, "frequency_Hz": abs(de) / c.h_planck})
    if not rows:
        raise CliError("no distinct level pairs")
    mean = math.fsum(r["wavelength_m"] for r in rows) / len(rows)
    return {"rows": rows, "mean_wavelength_m": mean, "mean_wavelength_angstrom": mean * 1e10}


def cmd_verify(cfg: CliConfig, dump: str | None = None) -> tuple[dict, bool]:
    from .verify import run_suite

    reports = run_suite(cfg.suite, cfg.seed, dump_dir=dump)
    checks = [r.as_dict() for r in reports]
    return {"checks": checks}, all(r.passed for r in reports)


def cmd_constants(cfg: CliConfig, c: ConstantsSet, d: DerivedConstants) -> dict:
    base = {}
    for k, v in c.as_dict().items():
        default = getattr(CODATA_2018, k)
        base[k] = {"value": v, "source": "default" if v == default else "override"}
    derived_default = derive(CODATA_2018).as_dict()
    derived = {k: {"value": v, "source": "default" if v == derived_default[k] else "derived-from-override"}
               for k, v in d.as_dict().items()}
    return {"constants": base, "derived": derived}


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nmax", type=int, default=2, help="highest principal quantum number (levels)")
    common.add_argument("--bfield", type=float, default=0.0, help="uniform magnetic field along z, tesla")
    common.add_argument("--efield", type=float, default=0.0, help="uniform electric field along z, V/m")
    common.add_argument("--proton-spin", action="store_true", help="include proton spin terms (projection +1/2)")
    common.add_argument("--mass-scale", choices=MASS_SCALES, default="paper",
                        help="Bohr radius in radial moments: built on the electron mass (paper) or the reduced mass (reduced)")
    common.add_argument("--output", choices=OUTPUTS, default="json")
    common.add_argument("--constants", metavar="PATH", help="key=value constants override file")
    common.add_argument("--suite", choices=("quick", "full"), default="quick")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="hydrovar", description="Hydrogen term tables and variational checks.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("levels", parents=[common], help="term table up to --nmax")
    t = sub.add_parser("transition", parents=[common], help="line between two levels, e.g. 2p3/2 1s")
    t.add_argument("upper")
    t.add_argument("lower")
    v = sub.add_parser("verify", parents=[common], help="run the verification suite")
    v.add_argument("--dump", metavar="DIR", help="write the suite's free-packet trajectory here")
    sub.add_parser("constants", parents=[common], help="echo the effective constants")
    return p


def _emit(payload: dict, table_key: str, columns, cfg: CliConfig, out) -> None:
    if cfg.output == "json":
        out.write(dumps(payload) + "\n")
    elif cfg.output == "csv":
        out.write(to_csv(payload[table_key], columns))
    else:
        out.write(to_plain(payload[table_key], columns))
        for k, v in payload.items():
            if k not in (table_key, "command", "config_echo", "constants_fingerprint"):
                out.write(f"{k}: {v}\n")


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    try:
        cfg = CliConfig(command=args.command, nmax=args.nmax, bfield=args.bfield, efield=args.efield,
                        proton_spin=args.proton_spin, mass_scale=args.mass_scale, output=args.output,
                        constants=args.constants, suite=args.suite, seed=args.seed)
        try:
            c = load_constants(Path(cfg.constants) if cfg.constants else None)
        except OSError as exc:
            raise CliError(f"cannot read constants file: {exc}") from None
        d = derive(c)
        head = {"command": cfg.command, "config_echo": cfg.echo()}
        tail = {"constants_fingerprint": fingerprint(c)}
        ok = True
        if cfg.command == "levels":
            payload = {**head, **cmd_levels(cfg, d), **tail}
            _emit(payload, "rows", LEVEL_COLUMNS, cfg, out)
        elif cfg.command == "transition":
            payload = {**head, **cmd_transition(args.upper, args.lower, cfg, d), **tail}
            _emit(payload, "rows", TRANSITION_COLUMNS, cfg, out)
        elif cfg.command == "verify":
            body, ok = cmd_verify(cfg, args.dump)
            payload = {**head, **body, **tail}
            _emit(payload, "checks", CHECK_COLUMNS, cfg, out)
            if not ok:
                failed = [ch["check"] for ch in body["checks"] if not ch["passed"]]
                err.write(f"failed checks: {', '.join(failed)}\n")
        else:
            payload = {**head, **cmd_constants(cfg, c, d), **tail}
            if cfg.output == "json":
                out.write(dumps(payload) + "\n")
            else:
                rows = [{"name": k, "value": v["value"], "source": v["source"]}
                        for k, v in {**payload["constants"], **payload["derived"]}.items()]
                (_emit({"rows": rows}, "rows", ("name", "value", "source"), cfg, out))
        return 0 if ok else 1
    except (CliError, ConstantsError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
