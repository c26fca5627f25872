import csv
import io
import json
import subprocess
import sys

import pytest

from hydrovar.cli import LEVEL_COLUMNS, dumps, fmt, main
from hydrovar.constants import CODATA_2018, DEFAULT_DERIVED
from hydrovar.hydrogen import bohr_level


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, text, err = run(*argv)
    assert code == 0, err
    return json.loads(text)


class TestLevels:
    def test_two_shells(self):
        payload = run_json("levels", "--nmax", "2")
        assert set(payload) == {"command", "config_echo", "rows", "constants_fingerprint"}
        rows = payload["rows"]
        assert [r["label"] for r in rows] == ["1s_{1/2}", "2s_{1/2}", "2p_{1/2}", "2p_{3/2}"]
        by = {r["label"]: r for r in rows}
        split = by["2p_{3/2}"]["E_total_J"] - by["2p_{1/2}"]["E_total_J"]
        assert split == pytest.approx(7.259023470408092e-24, rel=1e-6)

    def test_single_shell(self):
        rows = run_json("levels", "--nmax", "1")["rows"]
        assert len(rows) == 1 and rows[0]["E_total_J"] == bohr_level(1)

    def test_csv_matches_json(self):
        rows = run_json("levels", "--nmax", "3", "--bfield", "0.5")["rows"]
        code, text, _ = run("levels", "--nmax", "3", "--bfield", "0.5", "--output", "csv")
        assert code == 0
        parsed = list(csv.DictReader(io.StringIO(text)))
        assert list(parsed[0]) == list(LEVEL_COLUMNS)
        assert len(parsed) == len(rows)
        for a, b in zip(rows, parsed):
            for col in LEVEL_COLUMNS:
                if isinstance(a[col], float):
                    assert float(b[col]) == a[col]
                elif a[col] is None:
                    assert b[col] == ""
                else:
                    assert b[col] == str(a[col])

    def test_field_resolves_sublevels(self):
        rows = run_json("levels", "--nmax", "2", "--bfield", "1.0")["rows"]
        assert len(rows) == 2 + 2 + 2 + 4
        p32 = [r for r in rows if r["label"] == "2p_{3/2}"]
        assert [r["m_j"] for r in p32] == [-1.5, -0.5, 0.5, 1.5]
        assert len({r["E_total_J"] for r in p32}) == 4

    def test_electric_field_adds_manifolds(self):
        payload = run_json("levels", "--nmax", "2", "--efield", "1e7")
        shifts = payload["stark_manifolds"][1]["shifts_J"]
        unit = CODATA_2018.e_abs * DEFAULT_DERIVED.a0 * 1e7
        assert shifts[0] == pytest.approx(-3 * unit, rel=1e-8) and shifts[-1] == pytest.approx(3 * unit, rel=1e-8)

    def test_proton_spin_adds_contact_term(self):
        rows = run_json("levels", "--nmax", "1", "--proton-spin")["rows"]
        assert rows[0]["spin_spin"] < 0

    def test_mass_scale_switch(self):
        paper = run_json("levels", "--nmax", "2")["rows"][3]["spin_orbit"]
        reduced = run_json("levels", "--nmax", "2", "--mass-scale=reduced")["rows"][3]["spin_orbit"]
        assert reduced < paper

    def test_plain_output(self):
        code, text, _ = run("levels", "--output", "plain")
        assert code == 0 and text.splitlines()[0].split()[:3] == ["n", "l", "j"]


class TestTransition:
    def test_lyman_alpha_mean(self):
        payload = run_json("transition", "2p", "1s")
        assert payload["mean_wavelength_angstrom"] == pytest.approx(1215.6699, rel=2e-4)
        assert len(payload["rows"]) == 2

    def test_doublet_spacing(self):
        hi = run_json("transition", "2p3/2", "1s")["rows"][0]["wavelength_angstrom"]
        lo = run_json("transition", "2p1/2", "1s")["rows"][0]["wavelength_angstrom"]
        assert lo - hi == pytest.approx(1215.673644608 - 1215.668237310, rel=2e-2)

    def test_frequency_consistent(self):
        row = run_json("transition", "2p_{3/2}", "1s_{1/2}")["rows"][0]
        assert row["frequency_Hz"] * row["wavelength_m"] == pytest.approx(CODATA_2018.c_light, rel=1e-14)

    @pytest.mark.parametrize("a,b", [("2p3/2", "2p3/2"), ("2x", "1s"), ("2p5/2", "1s")])
    def test_bad_levels(self, a, b):
        code, _, err = run("transition", a, b)
        assert code == 1 and err.startswith("error:")


class TestConstants:
    def test_alpha_echo(self):
        payload = run_json("constants")
        assert payload["derived"]["alpha"]["value"] == pytest.approx(7.2973525693e-3, rel=1e-9)
        assert payload["constants"]["m_e"]["source"] == "default"

    def test_override_file(self, tmp_path):
        p = tmp_path / "over.txt"
        p.write_text(f"m_p = {CODATA_2018.m_e!r}\n")
        payload = run_json("constants", "--constants", str(p))
        assert payload["derived"]["m_r"]["value"] == pytest.approx(CODATA_2018.m_e / 2, rel=1e-15)
        assert payload["constants"]["m_p"]["source"] == "override"
        assert payload["derived"]["m_r"]["source"] == "derived-from-override"
        assert payload["constants_fingerprint"] != run_json("constants")["constants_fingerprint"]

    @pytest.mark.parametrize("text", ["m_p == 1", "mass = 1", "m_e = x"])
    def test_malformed_file(self, tmp_path, text):
        p = tmp_path / "bad.txt"
        p.write_text(text)
        assert run("constants", "--constants", str(p))[0] == 1

    def test_missing_file(self, tmp_path):
        assert run("levels", "--constants", str(tmp_path / "nope.txt"))[0] == 1


class TestExitCodes:
    @pytest.mark.parametrize("argv", [("levels", "--nmax", "11"), ("levels", "--nmax", "0"),
                                      ("levels", "--bfield", "nan"), ("verify", "--seed", "-1")])
    def test_validation_failures(self, argv):
        assert run(*argv)[0] == 1

    @pytest.mark.parametrize("argv", [("levels", "--bogus"), ("frobnicate",), (), ("levels", "--output", "xml")])
    def test_usage_errors(self, argv, capsys):
        assert run(*argv)[0] == 2


class TestVerify:
    def test_quick_suite_and_dump(self, tmp_path):
        code, text, err = run("verify", "--seed", "3", "--dump", str(tmp_path))
        assert code == 0, err
        payload = json.loads(text)
        assert payload["command"] == "verify" and payload["config_echo"]["seed"] == 3
        assert all(c["passed"] for c in payload["checks"])
        assert (tmp_path / "free_packet.csv").exists() and (tmp_path / "free_packet.json").exists()

    def test_failing_check_sets_exit_code(self, monkeypatch):
        from hydrovar import verify

        honest = verify.lorentz_force_density
        monkeypatch.setattr(verify, "lorentz_force_density", lambda *a: -honest(*a))
        code, text, err = run("verify", "--output", "csv")
        assert code == 1
        assert "momentum-lorentz" in err
        rows = {r["check"]: r for r in csv.DictReader(io.StringIO(text))}
        assert rows["momentum-lorentz-uniform-e"]["passed"] == "false"


class TestFormatting:
    def test_seventeen_digits(self):
        assert fmt(0.1) == "0.10000000000000001"
        assert fmt(-0.0) == "0"

    def test_dumps_round_trips(self):
        obj = {"a": [0.1, 1e-300, 2.5], "b": None, "c": True, "d": "x"}
        assert json.loads(dumps(obj)) == obj

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            fmt(float("inf"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hydrovar", "levels", "--nmax", "1", "--output", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("n,l,j,m_j,label")
