import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from oaiflex.cli import EXIT_CODES, main, normalize_input_deltas
from oaiflex.errors import RightAngle
from oaiflex.planar import PolyhedronSpec, shift_spec, xys_to_deltas

DELTAS_ARG = "1.36292,1.41009,1.80327,1.70691"


@pytest.fixture(scope="module")
def spec_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("cli") / "spec.json"
    assert main(["construct", "--deltas", DELTAS_ARG, "--tan-tau", "-60", "--out", str(p)]) == 0
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestConstruct:
    def test_writes_spec(self, spec_file):
        data = json.loads(spec_file.read_text())
        assert data["tau"] == pytest.approx(-np.arctan(60.0))
        assert len(data["vertices"]) == 4
        assert sum(data["deltas"]) == pytest.approx(2 * np.pi, abs=1e-12)

    def test_stdout(self, capsys):
        assert main(["construct", "--deltas", DELTAS_ARG, "--tau", "-1.55413"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["zetas"][0] > 1

    def test_scan(self, capsys):
        assert main(["construct", "--deltas", DELTAS_ARG, "--scan-tau"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert 0 <= data["tau"] < 2 * np.pi

    def test_right_angle_exit(self, capsys):
        code = main(["construct", "--deltas", "1.5707963,1.41009,1.80327,1.4990284", "--tau", "-1.5"])
        assert code == EXIT_CODES["RIGHT_ANGLE"] == 10
        assert "right" in capsys.readouterr().err

    def test_tau_out_of_range_exit(self, capsys):
        code = main(["construct", "--deltas", DELTAS_ARG, "--tau", "0.0"])
        assert code in (EXIT_CODES["RC_RANGE"], EXIT_CODES["BETA"], EXIT_CODES["ELLIPTIC"], EXIT_CODES["PATTERN"])
        assert capsys.readouterr().err

    def test_scan_failure_exit(self):
        # no tau on the default grid passes the r, c range check, so the scan reports failure
        d = ",".join(repr(float(v)) for v in xys_to_deltas(0.16, -0.91, -0.01))
        assert main(["construct", "--deltas", d, "--scan-tau"]) == EXIT_CODES["TAU"]

    def test_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["construct", "--deltas", DELTAS_ARG])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == 2

    def test_input_normalization(self):
        d = normalize_input_deltas([1.36292, 1.41009, 1.80327, 1.70691], 1e-5)
        assert d.sum() == pytest.approx(2 * np.pi, abs=1e-15)
        with pytest.raises(RightAngle):
            normalize_input_deltas([1.0, 1.0, 1.0, 1.0], 1e-5)


class TestFlex:
    def test_csv(self, spec_file, tmp_path, capsys):
        out = tmp_path / "flex.csv"
        assert main(["flex", "--spec", str(spec_file), "--branch", "+,-", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 720
        assert list(rows[0]) == ["t", "phi", "psi1", "theta", "psi2", "branch_sigma", "branch_rho"]
        assert rows[0]["branch_rho"] == "-1"
        assert "max residual" in capsys.readouterr().err

    def test_elliptic_columns(self, spec_file, tmp_path, capsys):
        out = tmp_path / "flex.csv"
        assert main(["flex", "--spec", str(spec_file), "--samples", "90", "--elliptic", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert "t_elliptic" in rows[0] and "diff_theta" in rows[0]
        assert "elliptic shift" in capsys.readouterr().err

    def test_bad_branch(self, spec_file):
        with pytest.raises(SystemExit):
            main(["flex", "--spec", str(spec_file), "--branch", "x"])


class TestVerify:
    def test_pass(self, spec_file, capsys):
        assert main(["verify", "--spec", str(spec_file), "--samples", "90", "--frames", "24"]) == 0
        assert capsys.readouterr().out.strip().endswith("ALL PASS")

    def test_rotated_enumeration(self, spec_file, tmp_path, capsys):
        p = tmp_path / "rot.json"
        shift_spec(PolyhedronSpec.from_json(spec_file), 3).to_json(p)
        assert main(["verify", "--spec", str(p), "--samples", "90", "--frames", "24"]) == 0
        assert "shift" in capsys.readouterr().out

    def test_perturbed_fails(self, spec_file, tmp_path, capsys):
        data = json.loads(spec_file.read_text())
        data["vertices"][0]["nu"] *= 1 + 1e-3
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(data))
        assert main(["verify", "--spec", str(p), "--samples", "90", "--frames", "24"]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        assert main(["verify", "--spec", str(tmp_path / "none.json")]) == 3


class TestMesh:
    def test_single(self, spec_file, tmp_path):
        assert main(["mesh", "--spec", str(spec_file), "--t", str(3 * np.pi / 4), "--outdir", str(tmp_path)]) == 0
        assert (tmp_path / "frame_0001.obj").exists()
        assert "passed True" in (tmp_path / "isometry.txt").read_text()

    def test_animate(self, spec_file, tmp_path):
        assert main(["mesh", "--spec", str(spec_file), "--animate", "12", "--branch=-,+", "--outdir", str(tmp_path)]) == 0
        assert len(list(tmp_path.glob("frame_*.obj"))) == 12
        assert len(read_csv(tmp_path / "manifest.csv")) == 12


class TestScreenAndResultant:
    def test_screen_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["screen", "--resolution", "4", "--out", str(a), "--dump-deltas", str(tmp_path / "d")]) == 0
        assert main(["screen", "--resolution", "4", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "d_convex.csv").exists() and (tmp_path / "d_nonconvex.csv").exists()

    def test_resultant(self, spec_file, capsys):
        assert main(["resultant", "--spec", str(spec_file)]) == 0
        out = capsys.readouterr().out
        assert "factor +" in out and "branch sets coincide" in out


def test_console_entry_point(spec_file):
    res = subprocess.run(
        [sys.executable, "-m", "oaiflex", "resultant", "--spec", str(spec_file)], capture_output=True, text=True
    )
    assert res.returncode == 0
    assert "zeta1" in res.stdout
