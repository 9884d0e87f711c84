import csv
import io
import json
import os
import subprocess
import sys

import pytest

from iwalab.cli import main

M_T3 = {"p": 3, "kappa": 0, "summands": [{"f": [-3, 1], "k": 1}]}


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), buf)
    return code, buf.getvalue()


def test_omega():
    code, out = run("omega", "--p", "3", "--kappa", "0", "--n", "1")
    assert code == 0 and json.loads(out)["result"]["coefficients"] == [0, 3, 3, 1]


def test_fukuda_csv(tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps(M_T3))
    code, out = run("fukuda", "--module", str(m), "--levels", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [int(r["n"]) for r in rows] == [0, 1, 2, 3]
    assert [int(r["v_p_order"]) for r in rows] == [1, 2, 3, 4]
    assert all(r["p_rank"] == "1" for r in rows)


def test_lemma_ab_kraft_schoof_fixture():
    code, out = run("lemma-ab", "--fixture", "kraft-schoof.json")
    assert code == 0
    assert "hypothesis ι-rank-preserving: FAIL" in json.loads(out)["result"]["report"]


def test_lemma_ab_counterexample_sets_exit_1(tmp_path):
    f = tmp_path / "ce.json"
    f.write_text(json.dumps({"p": 3, "A": [2, 1], "B": [3, 2], "N": [[1, 1], [1, 2]], "iota": [[18, 18], [3, 0]]}))
    code, out = run("lemma-ab", "--fixture", str(f))
    rec = json.loads(out)
    assert code == 1 and not rec["ok"] and rec["failures"]


def test_input_errors_exit_2(tmp_path):
    assert run("omega", "--p", "4", "--kappa", "0", "--n", "1")[0] == 2
    assert run("lemma-ab", "--fixture", str(tmp_path / "missing.json"))[0] == 2
    assert run("omega", "--config", str(tmp_path / "missing.json"))[0] == 2
    assert run("no-such-command")[0] == 2
    assert run("omega", "--p", "3", "--kappa", "2", "--n", "1")[0] == 2


def test_config_file_and_flag_override(tmp_path):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"command": "omega", "p": 3, "kappa": 0, "n": 1}))
    code, out = run("--config", str(c))
    assert code == 0 and json.loads(out)["result"]["coefficients"] == [0, 3, 3, 1]
    code, out = run("omega", "--config", str(c), "--p", "2")
    assert code == 0 and json.loads(out)["result"]["coefficients"] == [0, 2, 1]


def test_pairing_command(tmp_path):
    from iwalab import pairing as pl
    t = tmp_path / "t.json"
    t.write_text(json.dumps(pl.c2_fixture(3, 0, matched=True).to_json()))
    assert run("pairing", "--table", str(t), "--check", "covar")[0] == 0
    t.write_text(json.dumps(pl.c2_fixture(3, 0, matched=False).to_json()))
    code, out = run("pairing", "--table", str(t), "--check", "covar")
    assert code == 1 and json.loads(out)["failures"][0]["witness"]


def test_deterministic_output(tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps(M_T3))
    for argv in (["fukuda", "--module", str(m), "--seed", "3"], ["lemma-ab", "--fixture", "kraft-schoof.json"],
                 ["growth", "--module", str(m)]):
        assert run(*argv) == run(*argv)


def test_suite_quick():
    code, out = run("suite", "--quick", "--seed", "0")
    checks = json.loads(out)["result"]["checks"]
    assert code == 0 and checks
    assert all(c["ok"] for c in checks if c["asserted"])


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "iwalab", "omega", "--p", "5", "--kappa", "0", "--n", "1"],
                       capture_output=True, text=True, env=dict(os.environ))
    assert r.returncode == 0 and json.loads(r.stdout)["result"]["coefficients"][-1] == 1
