import json

import numpy as np
import pytest

from lutherfilter import cli
from lutherfilter.data_io import load_sidecar, write_spectral_csv
from lutherfilter.datasets import data_path
from lutherfilter.spectral import CANONICAL_GRID

CMF = str(data_path("cmf"))
CAMERA = str(data_path("camera"))
LIGHTS = str(data_path("illuminants"))
SURFACES = str(data_path("reflectances"))


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_table(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return {
        row.split(",")[0]: dict(zip(header[1:], map(float, row.split(",")[1:])))
        for row in lines[1:]
    }


def colour_args():
    return ["--illuminants", LIGHTS, "--reflectances", SURFACES]


def test_camera_equal_to_cmf(tmp_path, capsys):
    code = run("optimize", "--camera", CMF, *colour_args(), "--out", tmp_path)
    assert code == cli.EXIT_OK
    table = read_table(tmp_path / "evaluation.csv")
    assert set(table) == {"Linear", "LUTH_8cos"}
    for row in table.values():
        assert row["nrmse"] < 1e-10
        assert row["de_mean"] < 1e-8
    assert "NRMSE 0.000 -> 0.000" in capsys.readouterr().out


def test_optimize_artifacts_and_provenance(tmp_path):
    code = run("optimize", "--camera", CAMERA, *colour_args(), "--with-luth", "--out", tmp_path)
    assert code == cli.EXIT_OK
    assert list(read_table(tmp_path / "evaluation.csv")) == ["Linear", "LUTH", "LUTH_8cos"]
    side = load_sidecar(tmp_path / "filter.json")
    cfg = side["report"]["run_config"]
    # defaults are echoed too
    assert cfg["basis_m"] == 8 and cfg["fmin"] == 0.2 and cfg["seed"] == 0
    assert side["config"]["basis_m"] == 8


def test_missing_reflectance_file(tmp_path, capsys):
    missing = tmp_path / "gone.csv"
    code = run("optimize", "--camera", CAMERA, "--illuminants", LIGHTS,
               "--reflectances", missing, "--out", tmp_path / "o")
    assert code == cli.EXIT_DATA
    assert str(missing) in capsys.readouterr().err


def test_malformed_camera_is_data_error(tmp_path, capsys):
    bad = tmp_path / "cam.csv"
    bad.write_text("wavelength_nm,r,g\n400,1,2\n")
    assert run("evaluate", "--camera", bad, "--out", tmp_path) == cli.EXIT_DATA
    assert "cam.csv" in capsys.readouterr().err


@pytest.mark.parametrize(
    "extra",
    [["--fmin", "0.9", "--fmax", "0.5"], ["--basis-m", "40"], ["--epsilon", "-1"]],
)
def test_bad_config(tmp_path, extra):
    assert run("optimize", "--camera", CAMERA, *extra, "--out", tmp_path) == cli.EXIT_CONFIG


def test_unpaired_colour_inputs(tmp_path):
    code = run("evaluate", "--camera", CAMERA, "--illuminants", LIGHTS, "--out", tmp_path)
    assert code == cli.EXIT_CONFIG


def test_nonconvergence_status(tmp_path):
    code = run("optimize", "--camera", CAMERA, "--max-iters", "1", "--epsilon", "1e-30",
               "--out", tmp_path)
    assert code == cli.EXIT_NONCONVERGED
    assert load_sidecar(tmp_path / "filter.json")["converged"] is False


def test_flat_filter_same_as_none(tmp_path):
    flat = tmp_path / "flat.csv"
    write_spectral_csv(flat, CANONICAL_GRID, {"transmittance": np.ones(31)})
    assert run("evaluate", "--camera", CAMERA, *colour_args(), "--out", tmp_path / "a") == 0
    assert run("evaluate", "--camera", CAMERA, *colour_args(), "--filter", flat,
               "--out", tmp_path / "b") == 0
    a = json.loads((tmp_path / "a" / "evaluation.json").read_text())
    b = json.loads((tmp_path / "b" / "evaluation.json").read_text())
    for key in ("nrmse", "delta_e_mean", "delta_e_median", "delta_e_p95", "delta_e_max"):
        assert a[key] == pytest.approx(b[key], abs=1e-12)


def test_evaluate_saved_solution_reproduces_sidecar(tmp_path):
    assert run("optimize", "--camera", CAMERA, *colour_args(), "--out", tmp_path / "opt") == 0
    recorded = load_sidecar(tmp_path / "opt" / "filter.json")["report"]["nrmse"]
    assert run("evaluate", "--camera", CAMERA, *colour_args(),
               "--filter", tmp_path / "opt" / "filter.csv", "--out", tmp_path / "ev") == 0
    again = json.loads((tmp_path / "ev" / "evaluation.json").read_text())["nrmse"]
    assert again == pytest.approx(recorded, abs=1e-9)


def test_pooled_and_per_light_p95_differ(tmp_path):
    run("evaluate", "--camera", CAMERA, *colour_args(), "--out", tmp_path / "a")
    run("evaluate", "--camera", CAMERA, *colour_args(), "--pooled-p95", "--out", tmp_path / "b")
    a = json.loads((tmp_path / "a" / "evaluation.json").read_text())
    b = json.loads((tmp_path / "b" / "evaluation.json").read_text())
    assert a["p95_mode"] == "per_illuminant" and b["p95_mode"] == "pooled"
    assert a["delta_e_p95"] != b["delta_e_p95"]


def test_repeat_runs_byte_identical(tmp_path):
    out = tmp_path / "run"
    args = ("optimize", "--camera", CAMERA, *colour_args(), "--multi-start", "2",
            "--seed", "11", "--out", out)
    assert run(*args) == 0
    first = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    assert run(*args) == 0
    second = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    assert set(first) == {"filter.csv", "filter.json", "evaluation.csv"}
    assert first == second


def test_luth_subcommand(tmp_path):
    assert run("luth", "--camera", CAMERA, "--out", tmp_path) == 0
    side = load_sidecar(tmp_path / "luth_filter.json")
    assert side["config"]["mode"] == "luth_unconstrained"
    assert side["config"]["f_max"] is None


def test_report_table(tmp_path, capsys):
    assert run("report", "--camera", CAMERA, *colour_args(), "--out", tmp_path) == 0
    table = read_table(tmp_path / "table.csv")
    assert list(table) == [
        "Linear", "LUTH", "LUTH_6cos", "LUTH_8cos", "LUTH_10cos", "f>=20%", "f>=30%", "f>=40%",
    ]
    assert table["LUTH"]["nrmse"] < table["Linear"]["nrmse"]
    assert "LUTH_10cos" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "lutherfilter", "evaluate", "--camera", CMF, "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "Linear" in proc.stdout
