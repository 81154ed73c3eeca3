import csv
import io
import json
import math
import subprocess
import sys

import pytest

from haartraces import __version__
from haartraces.cli import emit_convergence_series, main, parse_int


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _csv_rows(text):
    lines = text.splitlines()
    assert lines[0].startswith(f"# haartraces {__version__} config=")
    return list(csv.reader(io.StringIO("\n".join(lines[1:]))))


@pytest.mark.parametrize(
    "text, value",
    [("123", 123), ("10^19", 10**19), ("1000**4", 1000**4), ("1e19", 10**19), (" 7 ", 7)],
)
def test_parse_int(text, value):
    assert parse_int(text) == value


@pytest.mark.parametrize("text", ["1.5", "abc", "-3", "2^x"])
def test_parse_int_rejects(text):
    with pytest.raises(Exception):
        parse_int(text)


def test_verify_moments_sp2(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "moments", "--group", "sp", "--n", "2", "--max-weight", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["haartraces_version"] == __version__
    assert doc["config"]["suite"] == "moments"
    res = doc["result"]["moments"]
    assert res["violations"] == 0
    in_range = [e for e in res["entries"] if e["in_range"]]
    assert in_range and all(e["pass"] for e in in_range)


def test_report_big_c(capsys):
    code, out, _ = _run(capsys, "report", "--table", "big-c")
    assert code == 0
    rows = _csv_rows(out)
    assert rows[0] == ["m", "computed", "tabulated", "pass"]
    body = rows[1:]
    assert [int(r[0]) for r in body] == [7, 8, 9, 10, 20, 30, 40, 50, 100, 500, 1000]
    assert all(float(r[1]) >= float(r[2]) for r in body)
    assert (body[0][2], body[-1][2]) == ("0.052", "0.131")


def test_report_gates(capsys):
    code, out, _ = _run(capsys, "report", "--table", "gates")
    assert code == 0
    body = _csv_rows(out)[1:]
    assert len(body) == 7
    assert all(r[2] == "True" and float(r[4]) <= 0 for r in body)


def test_charfn_at_origin(capsys):
    code, out, _ = _run(capsys, "charfn", "--group", "o-even-plus", "--n", "4", "--m", "2", "--xi", "0,0")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["value"] == 1.0
    assert res["abs_diff"] < 1e-12


def test_charfn_anchor(capsys):
    code, out, _ = _run(capsys, "charfn", "--group", "sp", "--n", "1", "--xi", "1")
    res = json.loads(out)["result"]
    assert abs(res["value"] - 0.5767248077568734) < 1e-9


def test_bounds_json_huge_scale(capsys):
    code, out, _ = _run(capsys, "bounds", "--m", "10^19", "--n", "1e76")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["m"] == str(10**19)  # too large for an exact JSON double
    a1 = doc["result"]["corollaries"]["approx1_l2"]
    assert a1["applicable"] and math.isfinite(a1["log"])
    assert doc["result"]["remarks"]["tv_envelope_sqrt"]["applicable"]
    assert doc["result"]["remarks"]["tv_envelope_power"]["applicable"]


def test_bounds_csv(capsys):
    code, out, _ = _run(capsys, "bounds", "--m", "3", "--n", "26", "--format", "csv")
    assert code == 0
    rows = _csv_rows(out)
    total = next(r for r in rows if r[0] == "l2_total")
    assert total[1] == "False" and total[2] == ""


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bounds", "--m", "3"],
        ["charfn", "--group", "u", "--xi", "0"],
        ["charfn", "--xi", "0,0", "--m", "3"],
        ["report", "--table", "nope"],
        ["sample", "--m", "1", "--count", "0"],
        ["verify", "--suite", "moments", "--n", "0"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = _run(capsys, *argv)
    assert code == 2


def test_identical_runs_byte_identical(capsys):
    argv = ["verify", "--suite", "pointwise", "--group", "sp", "--n", "8", "--count", "50", "--seed", "4"]
    a = _run(capsys, *argv)
    b = _run(capsys, *argv)
    assert a == b
    assert a[0] == 0


def test_sample_worker_count_invariant(tmp_path):
    paths = []
    for workers in (1, 3):
        p = tmp_path / f"w{workers}.csv"
        code = main(["sample", "--group", "o-odd-minus", "--n", "3", "--m", "2", "--count", "257",
                     "--seed", "11", "--workers", str(workers), "--out", str(p)])
        assert code == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    side = [json.loads((tmp_path / f"w{w}.csv.json").read_text()) for w in (1, 3)]
    assert side[0] == side[1]
    rows = _csv_rows(paths[0].read_text())
    assert rows[0] == ["X1", "X2"] and len(rows) == 258


def test_sample_stdout_matches_file(tmp_path, capsys):
    p = tmp_path / "s.csv"
    argv = ["sample", "--group", "sp", "--n", "2", "--m", "1", "--count", "20", "--seed", "5"]
    main(argv + ["--out", str(p)])
    _, out, _ = _run(capsys, *argv)
    assert _csv_rows(out) == _csv_rows(p.read_text())


def test_convergence_series_empty_and_duplicates():
    empty = emit_convergence_series("sp", [], m=1)
    assert empty == "n,delta\n"
    text = emit_convergence_series("sp", [4, 2, 4, 2], m=1)
    rows = list(csv.reader(io.StringIO(text)))
    assert [r[0] for r in rows] == ["n", "2", "4"]
    assert float(rows[1][1]) > float(rows[2][1])
    with pytest.raises(ValueError):
        emit_convergence_series("sp", [2], m=3)


def test_report_convergence_m1(capsys):
    code, out, _ = _run(capsys, "report", "--table", "convergence", "--m", "1", "--n", "8,2,4,2")
    assert code == 0
    body = _csv_rows(out)[1:]
    ns = [int(r[0]) for r in body]
    vals = [float(r[1]) for r in body]
    assert ns == [2, 4, 8]
    assert vals[0] > vals[1] > vals[2]


def test_verify_big_c_and_basor_ehrhardt(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "big-c")
    assert code == 0 and json.loads(out)["result"]["violations"] == 0
    code, out, _ = _run(capsys, "verify", "--suite", "basor-ehrhardt", "--n", "3", "--count", "3")
    res = json.loads(out)["result"]["basor-ehrhardt"]
    assert code == 0 and res["trials"] == 12 and res["max_residual"] <= 1e-9


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "haartraces", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == __version__
