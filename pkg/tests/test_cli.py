import json
import subprocess
import sys

import pytest

from fraccount import cli

REF_PROCESS = {"lambdas": [1, 1], "alpha": 0.5, "theta": 1, "mu": 2, "rho": 1}
MODEL = {
    "lambda0": 0.5, "lambda1": 0.75, "lambda2": 0.75, "alpha": 0.5, "theta": 1, "mu": 2, "rho": 1,
    "claims": [{"kind": "exponential", "mean": 1}, {"kind": "exponential", "mean": 1},
               {"kind": "exponential", "mean": 0.5}, {"kind": "exponential", "mean": 0.5}],
    "omega": 1.2,
}


def write(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_pmf_reference_config(tmp_path, capsys):
    cfg = write(tmp_path, "pmf.json", {"process": REF_PROCESS, "t": 1, "k": [[0, 0], [1, 0]]})
    code, rep = run_json(capsys, ["pmf", cfg])
    assert code == 0
    assert rep["schema"] == "frac-count/1"
    assert rep["results"]["pmf"][0]["value"] == pytest.approx(0.732051, abs=1e-6)
    assert rep["config"]["process"] == REF_PROCESS
    for method in ("inversion", "quadrature"):
        code, other = run_json(capsys, ["pmf", cfg, "--method", method])
        assert code == 0
        assert other["results"]["pmf"][1]["value"] == pytest.approx(rep["results"]["pmf"][1]["value"],
                                                                    abs=1e-9)


def test_report_files_and_determinism(tmp_path, capsys):
    cfg = write(tmp_path, "pmf.json", {"process": REF_PROCESS, "t": 1, "k": [[0, 0]]})
    assert cli.main(["pmf", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["pmf", cfg, "--out", str(tmp_path / "b")]) == 0
    out = capsys.readouterr().out
    assert "P(0, 0) = 0.732050807569" in out
    a = (tmp_path / "a" / "pmf.json").read_bytes()
    assert a == (tmp_path / "b" / "pmf.json").read_bytes()
    assert (tmp_path / "a" / "pmf.pmf.csv").read_text().splitlines()[0] == "k,value,abs_error_bound,method"
    meta = json.loads((tmp_path / "a" / "pmf.meta.json").read_text())
    assert "written_at" in meta and "written_at" not in a.decode()


@pytest.mark.parametrize("cfg", [
    {"process": {"lambdas": [1], "alpha": 2.0, "theta": 1}, "t": 1, "k": [[0]]},
    {"process": {"lambdas": [1], "alpha": 0.5, "theta": 1}, "t": 1, "k": [[0]], "extra": 1},
    {"process": {"lambdas": [1], "alpha": 0.5}, "t": 1, "k": [[0]]},
    {"process": {"lambdas": [1], "alpha": 0.5, "theta": 1}, "t": 1, "k": [[0, 0]]},
    {"process": {"lambdas": [1], "alpha": 0.5, "theta": 1, "mu": 2}, "t": 1, "k": [[0]]},
])
def test_malformed_config_exits_2(tmp_path, capsys, cfg):
    assert cli.main(["pmf", write(tmp_path, "bad.json", cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_json_reports_line(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{\n  "t": 1,\n  oops\n}')
    assert cli.main(["pmf", str(p)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_missing_file_exits_4(tmp_path, capsys):
    assert cli.main(["pmf", str(tmp_path / "nope.json")]) == 4


def test_bad_flag_exits_2(capsys):
    assert cli.main(["pmf"]) == 2
    assert cli.main(["pmf", "x.json", "--method", "bogus"]) == 2


def test_pgf_and_levy(tmp_path, capsys):
    cfg = write(tmp_path, "pgf.json", {"process": REF_PROCESS, "t": 1, "u": [[0, 0], [1, 1]]})
    code, rep = run_json(capsys, ["pgf", cfg])
    assert code == 0
    assert rep["results"]["pgf"][1]["re"] == pytest.approx(1.0)
    proc = {**REF_PROCESS, "mu": 4}
    cfg = write(tmp_path, "levy.json", {"process": proc, "k": [[1, 0], [1, 1]]})
    code, rep = run_json(capsys, ["levy", cfg, "--method", "series", "--method", "inversion"])
    assert code == 0
    assert rep["checks"][0]["passed"]


def test_simulate_seeded(tmp_path, capsys):
    cfg = write(tmp_path, "sim.json", {"process": REF_PROCESS, "t": 1, "paths": 500})
    _, a = run_json(capsys, ["simulate", cfg, "--seed", "7"])
    _, b = run_json(capsys, ["simulate", cfg, "--seed", "7"])
    _, c = run_json(capsys, ["simulate", cfg, "--seed", "8"])
    assert a == b
    assert a["results"]["mean"] != c["results"]["mean"]


def test_ruin_reports_both_methods_and_gap(tmp_path, capsys):
    cfg = write(tmp_path, "ruin.json", {"model": MODEL, "u_max": 5, "paths": 5000})
    code, rep = run_json(capsys, ["ruin", cfg, "--method", "mc", "--method", "ode", "--seed", "1"])
    assert code == 0
    res = rep["results"]
    assert res["ode"]["p0"] == pytest.approx(0.259921, abs=1e-6)
    assert "ruin_prob" in res["mc"]
    assert res["gap"]["mc_minus_ode"] == pytest.approx(res["mc"]["ruin_prob"] - res["ode"]["at_nu"])
    assert res["composed_exponent"]["corrected_log_mu"] == pytest.approx(0.311905, abs=1e-6)


def test_lrd_command(tmp_path, capsys):
    cfg = write(tmp_path, "lrd.json", {"model": MODEL, "s": 1, "t_list": [1, 10, 100]})
    code, rep = run_json(capsys, ["lrd", cfg])
    assert code == 0
    assert rep["results"]["formula"]["slope"] == pytest.approx(-0.5)
    cfg = write(tmp_path, "lrd2.json", {"model": MODEL, "s": 1, "t_list": [1, 10]})
    assert cli.main(["lrd", cfg]) == 2


def test_specfun_eval(capsys):
    code, rep = run_json(capsys, ["specfun", "eval", "mittag_leffler", "1", "1", "1", "1"])
    assert code == 0 and rep["results"]["value"] == pytest.approx(2.718281828459045)
    code, rep = run_json(capsys, ["specfun", "eval", "wright", '{"upper":[[1,1]],"lower":[[1,1]]}', "-1"])
    assert rep["results"]["value"] == pytest.approx(0.36787944117144233)
    assert cli.main(["specfun", "eval", "digamma", "abc"]) == 2


def test_verify_specfun_matrix(capsys, tmp_path):
    assert cli.main(["verify", "specfun", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "specfun.ml_exp" in out and "PASS" in out
    rep = json.loads((tmp_path / "verify-specfun.json").read_text())
    assert rep["status"] == "ok" and rep["results"]["n_failed"] == 0


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "fraccount.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "frac-count" in r.stdout
