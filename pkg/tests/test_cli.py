import csv
import io
import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfcheck import cli
from mfcheck.exact import Poly
from mfcheck.report import ReportDocument, exact_value
from mfcheck.special import perturbed


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def plain_values(out):
    return [line.split("\t")[1:] for line in out.splitlines()]


# --- table ---------------------------------------------------------------------

def test_table_derange(capsys):
    code, out, _ = run(capsys, "table", "--family", "derange", "--n-max", "4")
    assert code == 0
    assert [v[0] for v in plain_values(out)] == ["1", "0", "1", "2", "9"]


def test_table_bern2(capsys):
    code, out, _ = run(capsys, "table", "--family", "bern2", "--n-max", "3")
    assert code == 0
    assert [v[0] for v in plain_values(out)] == ["1", "1/2", "-1/6", "1/4"]


def test_table_s2deg_at_zero_matches_s2(capsys):
    _, deg, _ = run(capsys, "table", "--family", "s2deg", "--n-max", "6", "--lambda", "0")
    _, plain, _ = run(capsys, "table", "--family", "s2", "--n-max", "6")
    assert deg == plain


def test_table_json_serializes_polynomials(capsys):
    code, out, _ = run(capsys, "table", "--family", "s2deg", "--n-max", "3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    row = next(r for r in doc["results"] if r["n"] == 3 and r["k"] == 1)
    assert row["value"] == ["1", "-3", "2"]
    assert doc["overall"] == "N/A" and doc["tool"] == "mfcheck"


def test_table_csv_quotes_polynomials(capsys):
    _, out, _ = run(capsys, "table", "--family", "s2deg", "--n-max", "3", "--format", "csv")
    assert '3,1,"1 - 3*l + 2*l^2"' in out.splitlines()
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "k", "value"]
    _, out, _ = run(capsys, "table", "--family", "bern2", "--n-max", "2", "--format", "csv")
    assert out.splitlines()[1:] == ["0,1", '1,"1/2"', '2,"-1/6"']


def test_table_bern_higher_and_derangement_poly(capsys):
    _, out, _ = run(capsys, "table", "--family", "bern-higher:2", "--n-max", "2")
    assert [v[0] for v in plain_values(out)] == ["1", "-1", "5/6"]
    _, out, _ = run(capsys, "table", "--family", "derange", "--n-max", "2", "--x", "2")
    assert [v[0] for v in plain_values(out)] == ["1", "1", "5"]


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "--family", "s3", "--n-max", "3"],
        ["table", "--family", "bern-higher:x", "--n-max", "3"],
        ["table", "--family", "s2", "--n-max", "3", "--lambda", "1/2"],
        ["table", "--family", "s2", "--n-max", "-1"],
        ["table", "--family", "s2deg", "--n-max", "3", "--lambda", "1/0"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == "" and err


# --- moment --------------------------------------------------------------------

@pytest.mark.parametrize("expr, n, value", [("U1+U2", 2, "7/6"), ("M1", 2, "5/6"), ("5", 3, "125")])
def test_moment_examples(capsys, expr, n, value):
    code, out, _ = run(capsys, "moment", "--expr", expr, "--n", str(n))
    assert (code, out) == (0, value + "\n")


def test_moment_errors(capsys):
    code, _, err = run(capsys, "moment", "--expr", "U1*X1 + U1*X2", "--n", "2")
    assert code == 2 and "U1" in err
    code, _, err = run(capsys, "moment", "--expr", "U1 +* U2", "--n", "2")
    assert code == 2 and "position" in err


# --- verify --------------------------------------------------------------------

def test_verify_examples(capsys):
    code, out, _ = run(capsys, "verify", "--identity", "thm9", "--n-max", "8", "--k-max", "4")
    assert code == 0 and "overall: PASS" in out
    code, out, _ = run(capsys, "verify", "--identity", "all", "--n-max", "0", "--k-max", "0")
    assert code == 0 and "overall: PASS" in out
    code, _, _ = run(capsys, "verify", "--identity", "thm4", "--n-max", "10", "--k-max", "5", "--lambda-mode", "symbolic")
    assert code == 0


def test_verify_unknown_identity(capsys):
    code, _, err = run(capsys, "verify", "--identity", "thm7")
    assert code == 2 and "thm7" in err


def test_verify_failure_exits_1(capsys):
    with perturbed("s2", (4, 2)):
        code, out, _ = run(capsys, "verify", "--identity", "pfrac", "--n-max", "4", "--k-max", "2")
    assert code == 1
    assert "overall: FAIL" in out and "FAIL pfrac(k=2" in out


def test_verify_report_round_trips(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, _, _ = run(
        capsys, "verify", "--identity", "thm6", "--n-max", "4", "--k-max", "2", "--lambda-mode", "sampled", "--report", str(path)
    )
    assert code == 0
    text = path.read_text()
    assert ReportDocument.from_json(text).to_json() == text
    doc = json.loads(text)
    assert doc["overall"] == "PASS"
    assert {r["params"]["lambda"] for r in doc["results"]} == {"0", "1", "1/2", "-1/3"}


def test_verify_lambda_needs_sampled_mode(capsys):
    code, _, _ = run(capsys, "verify", "--identity", "thm4", "--lambda", "1/2")
    assert code == 2
    code, _, _ = run(capsys, "verify", "--identity", "thm4", "--n-max", "4", "--lambda-mode", "sampled", "--lambda", "1/2")
    assert code == 0


# --- mc ------------------------------------------------------------------------

def test_mc_example(capsys):
    code, out, _ = run(capsys, "mc", "--expr", "X1+2*X2-2", "--n", "2", "--samples", "1000000", "--seed", "42", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    (r,) = doc["results"]
    assert r["exact"] == "6" and abs(r["z_score"]) <= 5 and r["seed"] == 42
    assert ReportDocument.from_json(out).to_json() == out


def test_mc_constant_and_uniform(capsys):
    code, out, _ = run(capsys, "mc", "--expr", "7", "--n", "1", "--samples", "1000", "--format", "json")
    r = json.loads(out)["results"][0]
    assert code == 0 and r["estimate"] == 7.0 and r["std_error"] == 0.0
    code, out, _ = run(capsys, "mc", "--expr", "U1", "--n", "4", "--samples", "1000000", "--seed", "1", "--format", "json")
    r = json.loads(out)["results"][0]
    assert code == 0 and r["exact"] == "1/5" and abs(r["estimate"] - 0.2) < 0.002


def test_mc_outlier_exits_1(capsys, monkeypatch):
    # a wrong exact reference must push |z| far past the limit
    monkeypatch.setattr("mfcheck.montecarlo.moment", lambda expr, n: 1)
    code, out, _ = run(capsys, "mc", "--expr", "U1", "--n", "1", "--samples", "100000", "--seed", "3")
    assert code == 1 and "OUTLIER" in out


def test_mc_usage_errors(capsys):
    assert run(capsys, "mc", "--expr", "U1", "--n", "1", "--samples", "999")[0] == 2
    assert run(capsys, "mc", "--expr", "U1", "--n", "9", "--samples", "1000")[0] == 2
    assert run(capsys, "mc", "--n", "1")[0] == 2
    assert run(capsys, "mc", "--expr", "U1 U2", "--n", "1")[0] == 2


def test_mc_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("MF_SEED", "123")
    _, out, _ = run(capsys, "mc", "--expr", "U1", "--n", "1", "--samples", "1000", "--format", "json")
    assert json.loads(out)["results"][0]["seed"] == 123


def test_threads_env_default(monkeypatch):
    monkeypatch.setenv("MF_THREADS", "3")
    args = cli.build_parser().parse_args(["verify"])
    assert args.threads == 3


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mfcheck", "moment", "--expr", "X1-1", "--n", "3"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout == "2\n"


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.fractions(min_value=-50, max_value=50, max_denominator=30), max_size=6),
    st.lists(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6), max_size=4), max_size=4),
)
def test_json_round_trip_is_byte_identical(scalars, polys):
    results = [{"n": i, "value": exact_value(v)} for i, v in enumerate(scalars)]
    results += [{"n": i, "k": 0, "value": exact_value(Poly(cs))} for i, cs in enumerate(polys)]
    text = ReportDocument(command=["table"], results=results).to_json()
    assert ReportDocument.from_json(text).to_json() == text
    assert all(isinstance(r["value"], (str, list)) for r in json.loads(text)["results"])
