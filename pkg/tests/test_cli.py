"""CLI dispatch, config handling, exit codes, file outputs."""

import json
import math
import os

import pytest

from randfun.cli import run


def test_growth_values_and_files(tmp_path):
    rc = run(["growth", "--seq", "gef", "--r", "2", "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "growth_summary.json").read_text())
    assert summary["summary"]["S"][0] == pytest.approx(13.7471, abs=5e-4)
    rows = (tmp_path / "growth_rows.csv").read_text().splitlines()
    assert rows[0].startswith("# experiment=growth")
    header = rows[1].split(",")
    assert {"r", "sigma", "s", "S", "n", "m"} <= set(header)
    row = dict(zip(header, rows[2].split(",")))
    assert int(row["n"]) == 9 and int(row["m"]) == 144


GROWTH_GOLDEN_TAIL = """\
r,sigma,s,S,n,m,delta,hayman_ok,lower_ok,growth_ok,scaling_gap
1.0,1.414213562373095,0.5,0.0,2,4,0.7071067811865476,False,False,True,1.3862943611198906
10.0,10.049875621120892,0.9900990099009901,4.605170185988092,2,4,0.7071067811865476,True,True,True,1.3862943611198908
"""


def test_growth_golden_file(tmp_path):
    # growth output is backend-independent: full byte comparison against a
    # frozen run whose values check out by hand (sigma(1) = sqrt 2 within one
    # ulp of the exp/log path, s(1) = 1/2, S(10) = 2 log 10, delta = 4^{-1/4})
    rc = run(["growth", "--seq", "explicit", "--values", "1,1", "--r-grid",
              "1,10", "--out", str(tmp_path)])
    assert rc == 0
    text = (tmp_path / "growth_rows.csv").read_text()
    meta, rest = text.split("\n", 1)
    assert meta.startswith("# experiment=growth seed=0 config_hash=")
    assert rest == GROWTH_GOLDEN_TAIL
    assert 2 * math.log(10.0) == 4.605170185988092


def test_usage_error_exit_code(tmp_path):
    assert run(["growth", "--seq", "gef", "--r", "-1",
                "--out", str(tmp_path)]) == 1
    assert run(["growth", "--seq", "nope", "--r", "2",
                "--out", str(tmp_path)]) == 1
    assert run(["bogus-command"]) == 1


def test_zeros_csv_schema_and_cross_check(tmp_path):
    rc = run(["zeros", "--seq", "gef", "--ensemble", "gaussian", "--r", "2",
              "--trials", "1", "--seed", "7", "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "zeros.csv").read_text().splitlines()
    assert lines[0].startswith("# experiment=zeros seed=7")
    assert lines[1] == "trial_id,re,im,modulus,multiplicity,method"
    summary = json.loads((tmp_path / "zeros_summary.json").read_text())
    assert summary["summary"]["method_mismatches"] == 0


def test_seed_reruns_byte_identical(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    for d in (a_dir, b_dir):
        rc = run(["zeros", "--seq", "gef", "--ensemble", "gaussian",
                  "--r", "1.5", "--trials", "3", "--seed", "99",
                  "--out", str(d)])
        assert rc == 0
    assert (a_dir / "zeros.csv").read_bytes() == (b_dir / "zeros.csv").read_bytes()


def test_config_file_merging_and_flag_priority(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[growth]\nseq = gef\nr = 4\n")
    out1 = tmp_path / "o1"
    rc = run(["growth", "--config", str(cfg), "--out", str(out1)])
    assert rc == 0
    s1 = json.loads((out1 / "growth_summary.json").read_text())
    assert s1["config"]["radii"] == [4.0]
    # flags win over the config file
    out2 = tmp_path / "o2"
    rc = run(["growth", "--config", str(cfg), "--r", "2", "--out", str(out2)])
    assert rc == 0
    s2 = json.loads((out2 / "growth_summary.json").read_text())
    assert s2["config"]["radii"] == [2.0]


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[growth]\nfrobnicate = 1\n")
    assert run(["growth", "--config", str(cfg), "--r", "2",
                "--out", str(tmp_path)]) == 1


def test_env_out_override(tmp_path, monkeypatch):
    env_dir = tmp_path / "env_out"
    monkeypatch.setenv("RANDFUN_OUT", str(env_dir))
    rc = run(["gn", "--n-list", "1,2"])
    assert rc == 0
    assert (env_dir / "gN_sharpness_summary.json").exists()


def test_sample_serialization(tmp_path):
    rc = run(["sample", "--seq", "gef", "--r", "2", "--seed", "5",
              "--tol-tail", "1e-10", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "sample.json").read_text())
    assert payload["ensemble"] == "gaussian"
    assert 30 <= payload["degree"] <= 70
    assert len(payload["scaled_coeffs"]) == payload["degree"] + 1


def test_covariance_report(tmp_path):
    rc = run(["covariance", "--seq", "gef", "--r", "2", "--out",
              str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "covariance.json").read_text())
    assert set(payload) >= {"rho", "n", "angles", "log_det", "S_r", "ok"}
    assert payload["ok"] is True
    assert payload["n"] == 9


def test_hole_subcommand_small(tmp_path):
    rc = run(["hole", "--seq", "gef", "--r-grid", "0.5,1.0", "--trials",
              "300", "--seed", "3", "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "hole_mc_summary.json").read_text())
    assert summary["summary"]["neg_log_p_strictly_increasing"] is True


def test_emit_plots_svg(tmp_path):
    rc = run(["growth", "--seq", "gef", "--r-grid", "2,3,4", "--emit-plots",
              "--out", str(tmp_path)])
    assert rc == 0
    svg = (tmp_path / "growth.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_asymptotics_exit(tmp_path):
    assert run(["asymptotics", "--beta", "1", "--out", str(tmp_path)]) == 0
    assert run(["asymptotics", "--beta", "0", "--out", str(tmp_path)]) == 0
