import csv
import hashlib
import json
import math
import os

import numpy as np
import pytest

from spinphase.cli import main


def run_cli(args):
    return main(args)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def file_sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


PHASELINE_ARGS = ["phaseline", "--model", "ti", "--n", "6", "--param-start", "0",
                  "--param-stop", "0.4", "--param-step", "0.1", "--labels", "1,tot"]


class TestPhaseline:
    def test_writes_expected_files(self, tmp_path):
        out = tmp_path / "run"
        assert run_cli(PHASELINE_ARGS + ["--out", str(out)]) == 0
        for name in ("phaseline.csv", "derivative.csv", "criticalpoints.json",
                     "manifest.json"):
            assert (out / name).exists()

    def test_phaseline_content(self, tmp_path):
        out = tmp_path / "run"
        run_cli(PHASELINE_ARGS + ["--out", str(out)])
        rows = read_csv(out / "phaseline.csv")
        assert len(rows) == 5 * 2  # five parameters, two labels
        first = rows[0]
        assert first["label"] == "1"
        assert float(first["param"]) == 0.0
        hi = 0.5 * (1 + math.sqrt(3.0))
        assert float(first["value"]) == pytest.approx(hi, abs=1e-10)
        assert float(first["energy"]) == pytest.approx(-6.0, abs=1e-10)
        assert int(first["degeneracy"]) == 1
        assert int(first["parity"]) == 1
        tot0 = [r for r in rows if r["label"] == "tot" and float(r["param"]) == 0.0]
        assert float(tot0[0]["value"]) == pytest.approx(hi**6, abs=1e-10)

    def test_manifest_checksums_match(self, tmp_path):
        out = tmp_path / "run"
        run_cli(PHASELINE_ARGS + ["--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["tool"] == "spinphase"
        for name, digest in manifest["files"].items():
            assert file_sha(out / name) == digest
        assert manifest["config"]["model"] == "ti"
        assert manifest["config"]["param-stop"] == 0.4

    def test_critical_points_inside_range_with_known_labels(self, tmp_path):
        out = tmp_path / "xy"
        args = ["phaseline", "--model", "xy", "--gamma", "0.5", "--param-start", "1.0",
                "--param-stop", "1.3", "--param-step", "0.01", "--labels", "1,tot",
                "--out", str(out)]
        assert run_cli(args) == 0
        payload = json.loads((out / "criticalpoints.json").read_text())
        points = payload["critical_points"]
        assert points
        for p in points:
            assert 1.0 <= p["location"] <= 1.3
            assert p["label"] in ("1", "tot", "global")
        crossings = [p for p in points if p["kind"] == "parity_crossing"]
        assert crossings and abs(crossings[0]["location"] - 2 / math.sqrt(3)) < 1e-6

    def test_rerun_is_byte_identical(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_cli(PHASELINE_ARGS + ["--out", str(out_a)])
        run_cli(PHASELINE_ARGS + ["--out", str(out_b)])
        for name in ("phaseline.csv", "derivative.csv", "criticalpoints.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


class TestSphere:
    def test_xxz_isotropic_fields_are_constant(self, tmp_path):
        out = tmp_path / "sphere"
        args = ["sphere", "--model", "xxz", "--param-value", "1.0", "--labels", "12,135",
                "--grid-theta", "7", "--grid-phi", "8", "--out", str(out)]
        assert run_cli(args) == 0
        rows12 = read_csv(out / "sphere_12.csv")
        assert len(rows12) == 7 * 8
        vals = np.array([float(r["value"]) for r in rows12])
        assert np.max(np.abs(vals - (1 - math.sqrt(13.0)) / 12)) < 1e-10
        rows135 = read_csv(out / "sphere_135.csv")
        vals = np.array([float(r["value"]) for r in rows135])
        assert np.max(np.abs(vals - 0.437)) < 1e-3

    def test_ti_polar_maximum_and_theta_major_order(self, tmp_path):
        out = tmp_path / "sphere"
        args = ["sphere", "--model", "ti", "--param-value", "0.0", "--labels", "1",
                "--grid-theta", "5", "--grid-phi", "6", "--out", str(out)]
        run_cli(args)
        rows = read_csv(out / "sphere_1.csv")
        thetas = [float(r["theta"]) for r in rows]
        assert thetas == sorted(thetas)  # theta-major ordering
        assert float(rows[0]["value"]) == pytest.approx(0.5 * (1 + math.sqrt(3.0)), abs=1e-10)

    def test_missing_param_value_is_config_error(self, tmp_path):
        args = ["sphere", "--model", "ti", "--out", str(tmp_path / "x")]
        assert run_cli(args) == 2


class TestAnimate:
    def test_frames_and_monotone_index(self, tmp_path):
        out = tmp_path / "anim"
        args = ["animate", "--model", "xy", "--gamma", "0.5", "--param-start", "1.10",
                "--param-stop", "1.20", "--param-step", "0.025", "--labels", "1",
                "--grid-theta", "3", "--grid-phi", "4", "--out", str(out)]
        assert run_cli(args) == 0
        frames = sorted(p for p in os.listdir(out) if p.startswith("frame_"))
        assert len(frames) == 5
        for frame in frames:
            assert (out / frame / "sphere_1.csv").exists()
        index = read_csv(out / "frames.csv")
        params = [float(r["param"]) for r in index]
        assert params == sorted(params)
        assert params[0] == pytest.approx(1.10)
        assert params[-1] == pytest.approx(1.20)

    def test_rerun_has_identical_checksums(self, tmp_path):
        args = ["animate", "--model", "ti", "--param-start", "0.0", "--param-stop", "0.2",
                "--param-step", "0.1", "--labels", "1", "--grid-theta", "3",
                "--grid-phi", "4"]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_cli(args + ["--out", str(out_a)])
        run_cli(args + ["--out", str(out_b)])
        man_a = json.loads((out_a / "manifest.json").read_text())["files"]
        man_b = json.loads((out_b / "manifest.json").read_text())["files"]
        assert man_a == man_b

    def test_pole_value_flips_sign_across_factorization(self, tmp_path):
        out = tmp_path / "anim"
        args = ["animate", "--model", "xy", "--gamma", "0.5", "--param-start", "1.10",
                "--param-stop", "1.20", "--param-step", "0.025", "--labels", "tot",
                "--grid-theta", "3", "--grid-phi", "4", "--out", str(out)]
        assert run_cli(args) == 0
        index = read_csv(out / "frames.csv")
        pole = {}
        for row in index:
            frame = f"frame_{int(row['frame']):04d}"
            first = read_csv(out / frame / "sphere_tot.csv")[0]
            assert float(first["theta"]) == 0.0 and float(first["phi"]) == 0.0
            pole[float(row["param"])] = float(first["value"])
        lam_f = 1.0 / math.sqrt(0.75)
        before = max(p for p in pole if p < lam_f)
        after = min(p for p in pole if p > lam_f)
        assert pole[before] > 0 > pole[after]


class TestFormulas:
    def test_ti_reference_values(self, tmp_path, capsys):
        out = tmp_path / "f"
        args = ["formulas", "--model", "ti", "--values", "1,2", "--out", str(out)]
        assert run_cli(args) == 0
        rows = read_csv(out / "formulas.csv")
        at1 = rows[0]
        assert float(at1["energy_thermo"]) == pytest.approx(-4 / math.pi, abs=1e-8)
        assert float(at1["mz_thermo"]) == pytest.approx(1 / math.pi, abs=1e-8)
        assert float(at1["energy_classical"]) == -1.25
        at2 = rows[1]
        assert float(at2["mx_thermo"]) == pytest.approx(0.4823393149801547, abs=1e-12)
        stdout = capsys.readouterr().out
        assert "energy_thermo" in stdout

    def test_xy_factorization_table(self, tmp_path):
        out = tmp_path / "f"
        args = ["formulas", "--model", "xy", "--values", "0.3,0.5,0.8", "--out", str(out)]
        assert run_cli(args) == 0
        rows = read_csv(out / "formulas.csv")
        got = [float(r["factorization_lambda"]) for r in rows]
        assert got == pytest.approx([1.0482848367219182, 1.1547005383792517,
                                     1.6666666666666667], abs=1e-10)

    def test_xy_ising_limit_marker(self, tmp_path):
        out = tmp_path / "f"
        assert run_cli(["formulas", "--model", "xy", "--values", "1.0",
                        "--out", str(out)]) == 0
        rows = read_csv(out / "formulas.csv")
        assert rows[0]["factorization_lambda"] == "inf"

    def test_xxz_formulas_rejected(self, tmp_path):
        args = ["formulas", "--model", "xxz", "--values", "1", "--out", str(tmp_path / "f")]
        assert run_cli(args) == 2


class TestConfigHandling:
    def test_config_file_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = ti\nparam-start = 0\nparam-stop = 0.2\n"
                       "param-step = 0.1\nlabels = 1\n")
        out = tmp_path / "out"
        # flag overrides the config file's stop value
        args = ["phaseline", "--config", str(cfg), "--param-stop", "0.1",
                "--out", str(out)]
        assert run_cli(args) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["param-stop"] == 0.1
        rows = read_csv(out / "phaseline.csv")
        assert {float(r["param"]) for r in rows} == {0.0, 0.1}

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("frobnicate = 1\n")
        assert run_cli(["phaseline", "--config", str(cfg)]) == 2

    def test_missing_model_is_config_error(self, tmp_path):
        args = ["phaseline", "--param-start", "0", "--param-stop", "1",
                "--out", str(tmp_path / "x")]
        assert run_cli(args) == 2

    def test_bad_label_is_config_error(self, tmp_path):
        args = PHASELINE_ARGS[:-2] + ["--labels", "19", "--out", str(tmp_path / "x")]
        assert run_cli(args) == 2

    def test_missing_config_file(self, tmp_path):
        args = ["phaseline", "--config", str(tmp_path / "nope.cfg")]
        assert run_cli(args) == 2


class TestPlotStubs:
    def test_phaseline_stub_emitted_and_compiles(self, tmp_path):
        out = tmp_path / "run"
        run_cli(PHASELINE_ARGS + ["--out", str(out)])
        stub = out / "plot_phaseline.py"
        source = stub.read_text()
        compile(source, str(stub), "exec")
        for column in ("param", "label", "value", "energy", "degeneracy", "parity", "gap"):
            assert column in source
        manifest = json.loads((out / "manifest.json").read_text())
        assert "plot_phaseline.py" in manifest["files"]

    def test_sphere_stub_emitted_and_compiles(self, tmp_path):
        out = tmp_path / "sphere"
        run_cli(["sphere", "--model", "ti", "--param-value", "0.0", "--labels", "1",
                 "--grid-theta", "3", "--grid-phi", "4", "--out", str(out)])
        stub = out / "plot_sphere.py"
        source = stub.read_text()
        compile(source, str(stub), "exec")
        for column in ("theta", "phi", "value"):
            assert column in source


class TestSerialization:
    def test_seventeen_digit_round_trip(self):
        from spinphase.cli import fmt

        rng = np.random.default_rng(23)
        for _ in range(200):
            x = float(rng.normal() * 10.0 ** rng.integers(-12, 12))
            assert float(fmt(x)) == x

    def test_csv_files_are_utf8_with_header(self, tmp_path):
        out = tmp_path / "run"
        run_cli(PHASELINE_ARGS + ["--out", str(out)])
        for name in ("phaseline.csv", "derivative.csv"):
            text = (out / name).read_bytes().decode("utf-8")
            header = text.splitlines()[0]
            assert header[0].isalpha()
