import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from benini import Benini
from benini.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def table(payload):
    t = payload["results"]["table"]
    return [dict(zip(t["columns"], r)) for r in t["rows"]]


class TestDist:
    def test_cdf_at_e(self, capsys):
        rows = table(run_json(capsys, "dist", "benini", "--beta", "1", "cdf", "--x", "e"))
        assert rows[0]["cdf"] == pytest.approx(1 - math.exp(-1), abs=1e-15)

    def test_figure_grid_csv(self, capsys):
        code, out, _ = run(capsys, "dist", "benini", "--beta", "1", "--grid", "1:8:200", "pdf", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["x", "pdf"] and len(rows) == 201
        x = np.array([float(r[0]) for r in rows[1:]])
        f = np.array([float(r[1]) for r in rows[1:]])
        assert x[0] == 1.0 and x[-1] == 8.0
        assert np.allclose(f, Benini(1.0).pdf(x), rtol=1e-15, atol=0)
        assert "," not in rows[1][0].replace(".", "")

    def test_sample_deterministic(self, capsys):
        a = run(capsys, "dist", "benini", "--beta", "1", "sample", "--n", "5", "--seed", "42")
        b = run(capsys, "dist", "benini", "--beta", "1", "sample", "--n", "5", "--seed", "42")
        assert a == b and a[0] == 0
        assert len(json.loads(a[1])["results"]["table"]["rows"]) == 5

    def test_log_grid(self, capsys):
        rows = table(run_json(capsys, "dist", "pareto", "--alpha", "2", "--grid", "1:1e6:7", "--log-grid", "sf"))
        assert [r["x"] for r in rows] == pytest.approx([10.0**i for i in range(7)], rel=1e-12)

    def test_quantile(self, capsys):
        rows = table(run_json(capsys, "dist", "genbenini", "--coeffs", "1,1", "quantile", "--x", "0.5"))
        assert rows[0]["quantile"] == pytest.approx(float(np.exp((math.sqrt(1 + 4 * math.log(2)) - 1) / 2)), rel=1e-12)

    @pytest.mark.parametrize("argv", [
        ("dist", "benini", "--beta", "-1", "cdf", "--x", "2"),
        ("dist", "benini", "cdf", "--x", "2"),
        ("dist", "benini", "--beta", "1", "quantile", "--x", "1"),
        ("dist", "benini", "--beta", "1", "cdf"),
        ("dist", "benini", "--beta", "1", "cdf", "--grid", "1:2"),
    ])
    def test_validation_exit(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == "" and err

    def test_argparse_error_exit(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["dist", "nosuchfamily", "cdf"])
        assert e.value.code == 2


class TestMoments:
    def test_table(self, capsys):
        rows = table(run_json(capsys, "moments", "--betas", "2,1,0.5", "--kmax", "4"))
        got = [r["rounded"] for r in rows]
        assert got == [1.98, 4.48, 11.81, 37.2, 2.73, 9.88, 50.59, 387.19, 4.48, 37.2, 677.0, 29888.67]

    def test_single(self, capsys):
        rows = table(run_json(capsys, "moments", "--betas", "1", "--kmax", "1"))
        assert len(rows) == 1 and rows[0]["rounded"] == 2.73

    def test_empty(self, capsys):
        payload = run_json(capsys, "moments", "--betas", "", "--kmax", "3")
        assert payload["results"]["table"]["rows"] == []

    def test_compare(self, capsys):
        rows = table(run_json(capsys, "moments", "--betas", "0.5,1,2", "--kmax", "6", "--compare"))
        assert all(r["dm1_rel_diff"] <= 1e-10 and r["rel_discrepancy"] <= 1e-8 for r in rows)

    def test_overflow_row(self, capsys):
        payload = run_json(capsys, "moments", "--betas", "1", "--kmax", "60")
        last = table(payload)[-1]
        assert last["overflow"] is True and last["moment"] is None and last["log_moment"] > 700
        assert payload["diagnostics"]

    def test_table_format(self, capsys):
        code, out, _ = run(capsys, "moments", "--betas", "1", "--kmax", "2", "--format", "table")
        assert code == 0 and "2.73" in out and "9.88" in out


class TestStieltjes:
    def test_all_match(self, capsys):
        r = run_json(capsys, "stieltjes", "--beta", "1", "--epsilon", "1", "--kmax", "6", "--points", "1000")["results"]
        assert r["all_moments_match"] is True
        assert r["nonnegativity"]["negative_count"] == 0
        assert all(c["ok"] for c in r["oscillatory_zero_checks"])
        assert r["log_C"] == pytest.approx(268.86, abs=0.01)

    def test_eps_zero_baseline(self, capsys):
        r0 = table(run_json(capsys, "stieltjes", "--beta", "1", "--epsilon", "0", "--kmax", "4", "--points", "10"))
        rows = table(run_json(capsys, "moments", "--betas", "1", "--kmax", "4", "--compare"))
        for a, b in zip(r0[1:], rows):
            assert a["discrepancy"] <= a["tolerance"] and b["discrepancy"] <= a["tolerance"]

    def test_overflowing_C_is_null(self, capsys):
        payload = run_json(capsys, "stieltjes", "--beta", "2", "--kmax", "2", "--points", "10")
        assert payload["results"]["C"] is None and payload["diagnostics"]

    def test_bad_epsilon(self, capsys):
        assert run(capsys, "stieltjes", "--epsilon", "1.5")[0] == 2


class TestCriteria:
    def test_benini(self, capsys):
        r = run_json(capsys, "criteria", "benini", "--beta", "1")["results"]
        assert r["indeterminate"] is True and r["verdict"] == "indeterminate"
        assert r["krein_converged"] and r["convexity_analytic_ok"]

    def test_logweibull_vacuous(self, capsys):
        r = run_json(capsys, "criteria", "logweibull", "--a", "0.5")["results"]
        assert r["verdict"] == "moment problem vacuous"

    def test_genbenini_linear_only(self, capsys):
        payload = run_json(capsys, "criteria", "genbenini", "--coeffs", "1,0")
        assert payload["results"]["verdict"] == "moment problem vacuous"
        assert any("not all moments exist" in d for d in payload["diagnostics"])


class TestFit:
    @pytest.fixture
    def benini_csv(self, tmp_path):
        p = tmp_path / "incomes.csv"
        x = Benini(1.0).sample(10_000, seed=99)
        p.write_text("income\n" + "\n".join(repr(float(v)) for v in x) + "\n")
        return p

    def test_recovery(self, capsys, benini_csv):
        r = run_json(capsys, "fit", "--input", str(benini_csv), "--model", "benini3", "--mle")["results"]
        assert r["fit"]["coefficients"][2] == pytest.approx(1.0, abs=0.15)
        assert r["mle_benini2"]["beta"] == pytest.approx(1.0, abs=0.05)
        rss = {row[0]: row[2] for row in r["table"]["rows"]}
        assert rss[2] < 0.5 * rss[1]

    def test_empty_file(self, capsys, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("")
        assert run(capsys, "fit", "--input", str(p))[0] == 3

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "fit", "--input", str(tmp_path / "missing.csv"))[0] == 3

    def test_bad_row(self, capsys, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("income\n1\n2\n-5\n")
        code, _, err = run(capsys, "fit", "--input", str(p))
        assert code == 3 and "line 4" in err


class TestOutput:
    def test_deterministic_bytes_and_out(self, capsys, tmp_path):
        argv = ["moments", "--betas", "0.5,1", "--kmax", "3", "--compare"]
        a = run(capsys, *argv)[1]
        b = run(capsys, *argv)[1]
        assert a == b
        out = tmp_path / "m.json"
        assert run(capsys, *argv, "--out", str(out))[0] == 0
        assert out.read_text() == a

    def test_json_17_digits(self, capsys):
        payload = run_json(capsys, "dist", "benini", "--beta", "1", "pdf", "--x", "2")
        assert table(payload)[0]["pdf"] == float(Benini(1.0).pdf(2.0))

    def test_envelope(self, capsys):
        payload = run_json(capsys, "moments", "--betas", "1", "--kmax", "1")
        assert set(payload) == {"command", "parameters", "results", "diagnostics"}
        assert payload["command"] == "moments"

    def test_tolerance_env(self, capsys, monkeypatch):
        monkeypatch.setenv("BENINI_RTOL", "1e-9")
        payload = run_json(capsys, "stieltjes", "--kmax", "1", "--points", "10")
        assert payload["parameters"]["rtol"] == 1e-9
        monkeypatch.setenv("BENINI_RTOL", "banana")
        assert run(capsys, "stieltjes", "--kmax", "1", "--points", "10")[0] == 2

    def test_console_entry(self):
        r = subprocess.run([sys.executable, "-m", "benini", "moments", "--betas", "1", "--kmax", "1", "--format", "csv"],
                           capture_output=True, text=True, check=True)
        assert r.stdout.splitlines()[0].startswith("beta,k,moment")
