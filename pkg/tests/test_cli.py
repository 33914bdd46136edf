import csv
import io
import json

import numpy as np
import pytest

from hkwave.cli import cmd_dispatch, fmt_number, main


def run(capsys, *argv):
    code = cmd_dispatch(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_space_describe(capsys):
    code, out, _ = run(capsys, "space", "describe", "--preset", "s5")
    d = json.loads(out)
    assert code == 0
    assert d["rank"] == 1 and d["m"] == 2 and d["dim"] == 5
    assert d["rho_alpha"] == [2] or d["rho_alpha"] == 2


def test_specfunc_eval_single_angle(capsys):
    code, out, _ = run(capsys, "specfunc", "eval", "--preset", "s3", "--mu", "1",
                       "--theta", "1.0471975512")
    r = rows(out)
    assert code == 0 and len(r) == 1
    assert float(r[0]["psi_re"]) == pytest.approx(0.5, abs=1e-9)


def test_specfunc_eval_grid_columns(capsys):
    code, out, _ = run(capsys, "specfunc", "eval", "--preset", "s5", "--mu", "3",
                       "--theta-grid", "64")
    r = rows(out)
    assert code == 0 and len(r) == 64
    assert list(r[0]) == ["theta", "psi_re", "psi_im", "oracle_re", "oracle_im", "abs_err"]
    assert max(float(x["abs_err"]) for x in r) < 1e-10


def test_specfunc_dim_su3(capsys):
    code, out, _ = run(capsys, "specfunc", "dim", "--preset", "su3", "--cutoff", "8")
    r = rows(out)
    assert code == 0
    for x in r:
        a, b = int(x["mu_1"]), int(x["mu_2"])
        assert float(x["d"]) == pytest.approx(((a + 1) * (b + 1) * (a + b + 2) / 2) ** 2)


def test_specfunc_cfun_marks_poles(capsys):
    code, out, _ = run(capsys, "specfunc", "cfun", "--preset", "s3", "--lambda", "1;0;2+1j")
    r = rows(out)
    assert code == 0 and len(r) == 3
    assert float(r[0]["c_re"]) == pytest.approx(1.0)
    assert r[1]["pole"] in ("1", "True", "true")


def test_fourier_forward_json_and_inverse(capsys, tmp_path):
    path = tmp_path / "coeffs.json"
    code, _, _ = run(capsys, "fourier", "forward", "--preset", "s3", "--grid", "256",
                     "--format", "json", "--out", str(path))
    assert code == 0
    recs = json.loads(path.read_text())
    assert set(recs[0]) == {"mu", "re", "im"}
    assert (tmp_path / "coeffs.json.manifest.json").exists()
    code, out, _ = run(capsys, "fourier", "inverse", "--preset", "s3", "--grid", "256",
                       "--coeffs", str(path))
    assert code == 0
    assert len(rows(out)) == 256


def test_fourier_extend_and_type(capsys):
    code, out, _ = run(capsys, "fourier", "extend", "--preset", "s3", "--grid", "1024",
                       "--lambda", "2;1.5+0.5j")
    r = rows(out)
    assert code == 0 and len(r) == 2
    assert "fhat_re" in r[0]
    code, out, _ = run(capsys, "fourier", "type", "--preset", "s3", "--grid", "8192",
                       "--epsilon", "0.3")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and 0.24 <= rep["R_est"] <= 0.36


def test_fourier_synth_support(capsys):
    code, out, err = run(capsys, "fourier", "synth", "--preset", "s3", "--grid", "8192",
                         "--cutoff", "2000", "--epsilon", "0.2")
    assert code == 0
    assert json.loads(err.strip().splitlines()[-1])["support_ok"]


def test_wave_run_csv(capsys):
    code, out, _ = run(capsys, "wave", "run", "--preset", "s3", "--grid", "512",
                       "--epsilon", "0.2", "--t-max", "0.6", "--t-steps", "3")
    r = rows(out)
    assert code == 0
    assert list(r[0]) == ["t", "theta", "dist", "u"]
    assert len(r) == 4 * 512


def test_wave_huygens_odd(capsys):
    code, out, _ = run(capsys, "wave", "huygens", "--preset", "s5", "--epsilon", "0.2",
                       "--t-max", "0.6", "--t-steps", "6")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert {"t", "L_cone", "L_shell", "pass"} <= set(rep)


def test_wave_huygens_even_negative_control(capsys):
    code, out, _ = run(capsys, "wave", "huygens", "--preset", "su3", "--epsilon", "0.2",
                       "--t-steps", "3")
    rep = json.loads(out)
    assert code == 0
    assert rep["pass"] is False and max(rep["L_shell"]) > 1e-3


def test_wave_expcheck(capsys):
    code, out, _ = run(capsys, "wave", "expcheck", "--preset", "s3", "--grid", "4096",
                       "--epsilon", "0.2", "--t-max", "0.6", "--t", "0.6")
    rep = json.loads(out)
    assert code == 0 and rep["ratio"] <= 10


def test_determinism(capsys, tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"run{k}.csv"
        assert cmd_dispatch(["wave", "run", "--preset", "s3", "--grid", "256", "--t-steps", "2",
                             "--t-max", "0.4", "--method", "contour", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    man = json.loads((tmp_path / "run0.csv.manifest.json").read_text())
    assert man["command"] == "wave run" and man["preset"] == "s3"
    assert man["outputs"] == [str(tmp_path / "run0.csv")]
    assert man["parameters"]["grid"] == 256


def test_seventeen_digit_floats():
    x = 0.1 + 0.2
    assert float(fmt_number(x)) == x
    assert fmt_number(1 / 3) == repr(1 / 3) or float(fmt_number(1 / 3)) == 1 / 3


@pytest.mark.parametrize("argv", [
    ["space", "describe", "--preset", "nosuch"],
    ["space", "describe"],
    ["specfunc", "eval", "--preset", "s3", "--mu", "1,2"],
    ["fourier", "forward", "--preset", "s3", "--grid", "64", "--cutoff", "500"],
    ["wave", "run", "--preset", "s3", "--epsilon", "3"],
    ["wave", "run", "--preset", "s3", "--method", "leapfrog"],
    ["selftest", "--only", "NOPE"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.strip()


def test_malformed_config(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "space", "describe", "--config", str(bad))
    assert code == 2 and "bad.json" in err or code == 2


def test_threads_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("HK_THREADS", "2")
    code, out, _ = run(capsys, "wave", "run", "--preset", "s3", "--grid", "128", "--t-steps", "2")
    assert code == 0
    monkeypatch.setenv("HK_THREADS", "many")
    code, _, err = run(capsys, "wave", "run", "--preset", "s3", "--grid", "128", "--t-steps", "2")
    assert code == 2 and "HK_THREADS" in err


def test_selftest_only(capsys):
    code, out, _ = run(capsys, "selftest", "--only", "DIM-INT,CLOSED-FORM-S3")
    assert code == 0
    assert "DIM-INT" in out and "CLOSED-FORM-S3" in out and "PW-TYPE" not in out


def test_selftest_fault_injection(capsys):
    code, out, err = run(capsys, "selftest", "--only", "SPH-ORACLE", "--inject-fault", "normalization")
    assert code == 1
    assert "SPH-ORACLE" in err
    # the fault does not leak into later runs
    code, _, _ = run(capsys, "selftest", "--only", "SPH-ORACLE")
    assert code == 0


def test_main_is_dispatch(capsys):
    assert main(["space", "describe", "--preset", "s3"]) == 0
    capsys.readouterr()
