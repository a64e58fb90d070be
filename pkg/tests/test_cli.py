import csv
import io
import json
import subprocess
import sys

import pytest

from subrk.cli import build_parser, main, read_config

SUBCOMMANDS = [
    ["kernel"],
    ["kernel", "riemannian"],
    ["kernel", "subelliptic"],
    ["kernel", "heisenberg"],
    ["hermite"],
    ["converge"],
    ["verify-lemmas"],
    ["verify-properties"],
]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# documented examples


def test_heisenberg_origin(capsys):
    code, out, _ = run(capsys, "kernel", "heisenberg", "--d", "1", "--t", "1", "--r", "0", "--z", "0")
    assert code == 0
    assert float(out) == pytest.approx(1 / 32, rel=1e-12)


def test_empty_word_hermite(capsys):
    code, out, _ = run(capsys, "hermite", "--space", "su2", "--word", "", "--t", "0.5", "--point", "0.5,0,0.3")
    assert code == 0
    assert float(out) == 1.0


def test_converge_csv(capsys):
    code, out, _ = run(capsys, "converge", "--space", "su2", "--word", "X", "--point", "1,0,0.5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["t", "scaled_value", "target", "abs_err", "rel_err"]
    rel = [float(r["rel_err"]) for r in rows]
    assert all(b < a for a, b in zip(rel[-4:], rel[-3:]))
    assert rel[-1] < 0.05


# formats and round-trips


def test_subelliptic_json_fields(capsys):
    code, out, _ = run(
        capsys, "kernel", "subelliptic", "--space", "su2", "--t", "0.5", "--r", "0.4", "--z", "0.2",
        "--dr", "1", "--dz", "1", "--format", "json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    for key in ("value", "err_estimate", "branch_split_lambda", "imag_residual"):
        assert key in doc
    assert len(doc["rows"]) == 4
    assert doc["rows"][0]["value"] == doc["value"]


def test_csv_is_round_trip_exact(capsys):
    args = ["kernel", "heisenberg", "--d", "2", "--t", "0.7", "--r", "0.3", "--z", "0.4", "--nr", "2"]
    _, out_csv, _ = run(capsys, *args, "--format", "csv")
    _, out_json, _ = run(capsys, *args, "--format", "json")
    rows = list(csv.DictReader(io.StringIO(out_csv)))
    doc = json.loads(out_json)
    assert [float(r["value"]) for r in rows] == [r["value"] for r in doc["rows"]]


def test_complex_hermite_json(capsys):
    code, out, _ = run(
        capsys, "hermite", "--space", "sphere", "--d", "1", "--word", "T1", "--t", "0.3",
        "--point", "0.5+0.2j,0.3", "--format", "json",
    )
    assert code == 0
    val = json.loads(out)["rows"][0]["value"]
    assert isinstance(val, dict) and set(val) == {"re", "im"}


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "converge", "--space", "su2", "--word", "Z", "--point", "1,0,0.5",
                       "--format", "json", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["passed"] is True


def test_config_merge_flags_win(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# experiment\nd = 1\nt = 5\nr = 0\nz = 0\nformat = json\n")
    _, out, _ = run(capsys, "kernel", "heisenberg", "--config", str(conf), "--t", "1")
    doc = json.loads(out)
    assert doc["t"] == 1.0
    assert doc["value"] == pytest.approx(1 / 32, rel=1e-12)


def test_read_config_dashes(tmp_path):
    conf = tmp_path / "c"
    conf.write_text("max-panels = 50\n\n  rel-tol=1e-9  # tighter\n")
    assert read_config(conf) == {"max_panels": "50", "rel_tol": "1e-9"}


# exit codes


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["kernel"],
        ["kernel", "heisenberg", "--t", "1", "--r", "0", "--z", "0"],  # --d missing
        ["hermite", "--space", "su2", "--word", "Q", "--t", "1", "--point", "1,0,0"],
        ["hermite", "--space", "su2", "--word", "X", "--t", "1", "--point", "1,0"],
        ["hermite", "--space", "su2", "--d", "2", "--word", "X", "--t", "1", "--point", "1,0,0"],
        ["kernel", "heisenberg", "--d", "1", "--t", "oops", "--r", "0", "--z", "0"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "usage" in err


def test_bad_config_key(tmp_path, capsys):
    conf = tmp_path / "c"
    conf.write_text("colour = red\n")
    code, _, err = run(capsys, "verify-lemmas", "--config", str(conf))
    assert code == 1 and "colour" in err


def test_domain_error(capsys):
    code, _, err = run(capsys, "kernel", "heisenberg", "--d", "1", "--t", "-1", "--r", "0", "--z", "0")
    assert code == 2
    assert "domain error" in err
    code, _, _ = run(capsys, "converge", "--space", "su2", "--word", "X", "--point", "4,0,0")
    assert code == 2


def test_numerical_error(capsys):
    code, out, err = run(capsys, "kernel", "subelliptic", "--space", "su2", "--t", "0.1", "--r", "0", "--z", "3")
    assert code == 3
    assert out == ""
    assert "cancellation" in err


def test_suite_failure_exit(capsys):
    # stopping at t = 0.02 leaves the relative error near 16%, above the 5% bar
    code, _, _ = run(capsys, "converge", "--space", "su2", "--word", "X,Y", "--point", "1,0,0.5",
                     "--t-grid", "0.2,0.1,0.05,0.02")
    assert code == 4


def test_verify_lemmas(capsys):
    code, out, _ = run(capsys, "verify-lemmas", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["status"] for r in rows} <= {"pass", "xfail"}


@pytest.mark.parametrize("argv", SUBCOMMANDS, ids=" ".join)
def test_help(argv, capsys):
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(argv + ["--help"])
    assert info.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "subrk", "kernel", "heisenberg", "--d", "1", "--t", "1", "--r", "0", "--z", "0"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert float(proc.stdout) == 0.03125
