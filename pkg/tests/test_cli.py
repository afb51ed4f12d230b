"""End-to-end runs of the command line interface through main(argv).

Covers every exit code, csv/json agreement, byte determinism, atomic
output, and the jobs knob."""

import json
import os
import re

import pytest

from dlcusp import __version__
from dlcusp.cli import CSV_COLUMNS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def mask_wall(text):
    return re.sub(r'"wall_ms": [0-9.]+', '"wall_ms": 0', text)


def csv_rows(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    assert header == list(CSV_COLUMNS)
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == __version__


# -- exit 0 -------------------------------------------------------------------


def test_table_csv_gl2_q3(capsys):
    code, out, _ = run_cli(
        capsys, "table", "--group", "gl2", "--q", "3", "--format", "csv"
    )
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 9  # 3 seeds x 3 general position exponents
    seeds = [r["involution_seed"] for r in rows]
    assert seeds == sorted(seeds)
    for r in rows:
        assert r["lhs"] == r["rhs"]
        expected = "1" if r["lambda_exponent"] == "2" else "0"
        assert r["lhs"] == expected
        assert r["m_values"] == ("1" if expected == "1" else "")
        assert float(r["wall_ms"]) >= 0


def test_theorem_exponent_filter(capsys):
    code, out, _ = run_cli(
        capsys,
        "verify", "theorem", "--group", "gl2", "--q", "3",
        "--exponent", "2", "--format", "csv",
    )
    assert code == 0
    rows = csv_rows(out)
    assert [r["lambda_exponent"] for r in rows] == ["2", "2", "2"]
    assert all(r["lhs"] == "1" for r in rows)


def test_verify_sigma_json(capsys):
    code, out, _ = run_cli(capsys, "verify", "sigma")
    assert code == 0
    report = json.loads(out)
    assert report["version"] == __version__
    assert report["failures"] == []
    by_name = {r["datum"]: r for r in report["results"]}
    assert len(by_name) == 8
    assert by_name["gl2_split"]["fixed_rank"] == 2
    assert by_name["gl2_elliptic"]["sigma_product"] == -1
    assert by_name["sl2_anisotropic"]["sigma_group"] == -1
    assert by_name["gl2xgl2_twisted4"]["sigma_product"] == -1


def test_verify_sigma_with_twists(capsys):
    code, out, _ = run_cli(
        capsys, "verify", "sigma", "--data", "gl2_split", "--twists", "5"
    )
    assert code == 0
    assert json.loads(out)["failures"] == []


def test_verify_centralizer_sigma(capsys):
    code, out, _ = run_cli(capsys, "verify", "centralizer-sigma")
    assert code == 0
    report = json.loads(out)
    assert report["failures"] == []
    for row in report["results"]:
        assert ("sign" in row) != ("skipped" in row)
    skipped = [r for r in report["results"] if "skipped" in r]
    assert skipped  # the identity keep always fixes a root


def test_verify_phi_theta_q3(capsys):
    code, out, _ = run_cli(
        capsys, "verify", "phi-theta", "--group", "gl2", "--q", "3"
    )
    assert code == 0
    report = json.loads(out)
    assert report["failures"] == []
    killed = {
        (r["torus"], r["seed"], json.dumps(r["witness"])): r["killed_roots"]
        for r in report["results"]
    }
    assert len(killed) == len(report["results"])
    sizes = {len(v) for v in killed.values()}
    assert sizes <= {0, 2}  # either nothing or a full opposite pair dies


def test_verify_epsilon_elliptic_only(capsys):
    code, out, _ = run_cli(
        capsys,
        "verify", "epsilon", "--group", "gl2", "--q", "3", "--torus", "elliptic",
    )
    assert code == 0
    report = json.loads(out)
    assert report["failures"] == []
    assert all(r["signs"] == [1] for r in report["results"])


# -- exit 1: the honest failure ----------------------------------------------


def test_verify_epsilon_red_cell(capsys):
    code, out, _ = run_cli(capsys, "verify", "epsilon", "--group", "gl2", "--q", "3")
    assert code == 1
    report = json.loads(out)  # a single document on stdout
    assert report["failures"]
    failure = report["failures"][0]
    assert failure["torus"] == "split"
    assert failure["seed"] == "transpose-inverse"
    assert failure["detail"]["det_sign"] == -1
    assert failure["detail"]["product_sign"] == 1


def test_failure_with_out_writes_both(tmp_path, capsys):
    target = tmp_path / "eps.json"
    code, out, _ = run_cli(
        capsys,
        "verify", "epsilon", "--group", "gl2", "--q", "3", "--out", str(target),
    )
    assert code == 1
    on_disk = json.loads(target.read_text())
    assert on_disk["failures"]
    stdout_doc = json.loads(out)
    assert stdout_doc["failures"]  # counterexample echoed to stdout


# -- exit 2: configuration errors --------------------------------------------


@pytest.mark.parametrize(
    "argv",
    (
        ("verify", "epsilon", "--group", "gl2", "--q", "4"),
        ("verify", "epsilon", "--group", "gl2", "--q", "3", "--involution", "bogus"),
        ("verify", "epsilon", "--group", "gl2", "--q", "3", "--format", "csv"),
        ("verify", "theorem", "--group", "gl2", "--q", "3", "--jobs", "0"),
        ("verify", "theorem", "--group", "gl2", "--q", "3", "--exponent", "x"),
        ("verify", "theorem", "--q", "3"),
        ("verify", "sigma", "--data", "no_such_datum"),
    ),
)
def test_config_errors(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 2
    assert "configuration error" in err
    assert out == ""


# -- exit 3: resource bounds --------------------------------------------------


def test_resource_bound(monkeypatch, capsys):
    monkeypatch.setenv("DL_DISTINCT_BOUND", "4")
    code, out, err = run_cli(
        capsys,
        "verify", "epsilon", "--group", "gl2", "--q", "3", "--torus", "elliptic",
    )
    assert code == 3
    assert "required 5" in err


def test_oversized_q_is_a_resource_refusal(capsys):
    code, _, err = run_cli(capsys, "table", "--group", "gl2", "--q", "17")
    assert code == 3
    assert "78336" in err


# -- output contracts ---------------------------------------------------------


def test_csv_json_rows_agree(capsys):
    argv = ("table", "--group", "gl2_x_gl2", "--q", "3")
    code, csv_text, _ = run_cli(capsys, *argv, "--format", "csv")
    assert code == 0
    code2, json_text, _ = run_cli(capsys, *argv, "--format", "json")
    assert code2 == 0
    from_csv = csv_rows(csv_text)
    from_json = json.loads(json_text)["results"]
    assert len(from_csv) == len(from_json) == 9
    for c_row, j_row in zip(from_csv, from_json):
        for col in CSV_COLUMNS:
            if col == "wall_ms":
                continue
            assert c_row[col] == str(j_row[col])


def test_byte_determinism(capsys):
    argv = ("verify", "theorem", "--group", "gl2", "--q", "3", "--involution", "diag")
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert mask_wall(first) == mask_wall(second)
    assert json.loads(first)["config"]["involutions"] == ["diag"]


def test_jobs_parity(capsys):
    argv = ("table", "--group", "gl2", "--q", "3", "--format", "json")
    _, serial, _ = run_cli(capsys, *argv, "--jobs", "1")
    _, threaded, _ = run_cli(capsys, *argv, "--jobs", "2")

    def rows(text):
        out = json.loads(text)["results"]
        for r in out:
            r.pop("wall_ms")
        return out

    assert rows(serial) == rows(threaded)


def test_atomic_out_leaves_no_temp_files(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys,
        "table", "--group", "gl2", "--q", "3", "--format", "json",
        "--out", str(target),
    )
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["results"]
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".dlcusp-")]
    assert leftovers == []


def test_out_csv(tmp_path, capsys):
    target = tmp_path / "table.csv"
    code, out, _ = run_cli(
        capsys,
        "table", "--group", "gl2", "--q", "3", "5", "--out", str(target),
    )
    assert code == 0 and out == ""
    rows = csv_rows(target.read_text())
    assert len(rows) == 9 + 30  # q=3 and q=5 grids
    assert [r["q"] for r in rows] == ["3"] * 9 + ["5"] * 30
