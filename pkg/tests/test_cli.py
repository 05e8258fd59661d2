import io
import subprocess
import sys

import pytest

from conftest import PRINTED_ROWS
from leafrate import cli


def run(*argv):
    out = io.StringIO()
    status = cli.main(list(argv), out=out)
    return status, out.getvalue()


def test_counts_single_row():
    assert run("counts", "--n", "1") == (0, "1 1 1\n")


def test_counts_seven_matches_printed_rows():
    status, text = run("counts", "-n", "7")
    assert status == 0
    got = {}
    for line in text.splitlines():
        n, k, c = map(int, line.split())
        got.setdefault(n, {})[k] = c
    for n, row in PRINTED_ROWS.items():
        assert got[n] == {k: c for k, c in enumerate(row) if c}


def test_counts_csv():
    status, text = run("counts", "--n", "3", "--format", "csv")
    assert status == 0
    assert text.splitlines()[0] == "n,k,count"
    assert "3,2,1" in text.splitlines()


def test_cache_reuse_is_byte_identical(tmp_path):
    path = tmp_path / "table.txt"
    before = cli.recompute_count
    first = run("counts", "--n", "12", "--cache", str(path))
    assert cli.recompute_count == before + 1 and path.exists()
    second = run("counts", "--n", "12", "--cache", str(path))
    assert second == first
    assert cli.recompute_count == before + 1
    # a shorter request is served from the longer cache too
    run("counts", "--n", "5", "--cache", str(path))
    assert cli.recompute_count == before + 1


def test_cache_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "env.txt"
    monkeypatch.setenv(cli.CACHE_ENV, str(path))
    assert run("counts", "--n", "4")[0] == 0
    assert path.exists()


def test_corrupt_cache_fails_naming_line(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("leafcount-table v1 N=2\n1 1 1\n2 one 1\n")
    status, _ = run("counts", "--n", "2", "--cache", str(path))
    assert status != 0
    assert ":3:" in capsys.readouterr().err


def test_unwritable_cache_fails(tmp_path, capsys):
    status, _ = run("counts", "--n", "2", "--cache", str(tmp_path / "missing" / "t.txt"))
    assert status != 0
    assert "cannot write cache" in capsys.readouterr().err


def test_constants_lines():
    status, text = run("constants", "--digits", "10")
    assert status == 0
    lines = text.splitlines()
    assert "alpha = 0.3383218569" in lines
    assert "C2 = 2.918333013" in lines
    assert [l.split(" = ")[0] for l in lines] == ["alpha", "z0", "x0", "C1", "m", "sigma2", "C2"]


def test_constants_25_digits():
    status, text = run("constants", "--digits", "25")
    assert "C1 = 2.919380017448416911265033" in text.splitlines()


def test_rate_values():
    status, text = run("rate", "--lambda", "0,0.5", "--digits", "12")
    assert status == 0
    assert text.splitlines() == ["C(0) = 2.95576528565", "C(0.5) = 2.91938001745"]


def test_rate_csv():
    status, text = run("rate", "--lambda", "0.55", "--digits", "8", "--format", "csv")
    assert text.splitlines()[0] == "lambda,C,z_crit"
    assert text.splitlines()[1].startswith("0.55,2.84062")


def test_arnold_csv():
    status, text = run("arnold", "--degrees", "4,5,6")
    assert status == 0
    rows = [l.split(",") for l in text.splitlines()[1:]]
    assert rows[0][3] == "1" and rows[0][5] == "5"
    assert rows[1][3] == "20"


def test_arnold_budget_exhaustion():
    status, text = run("arnold", "--degrees", "6,8", "--budget", "10000")
    assert status != 0
    lines = text.splitlines()
    assert lines[-1].startswith("# incomplete")
    assert lines[1].startswith("6,12,9,76,302,232")


def test_arnold_with_threads_matches_serial():
    assert run("arnold", "--degrees", "6", "--threads", "2") == run("arnold", "--degrees", "6")


@pytest.mark.parametrize(
    "argv",
    [
        ["counts", "--n", "0"],
        ["constants", "--digits", "0"],
        ["arnold", "--degrees", "2"],
        ["counts", "--threads", "0"],
    ],
)
def test_invalid_configuration_exits_nonzero(argv):
    assert run(*argv)[0] != 0


def test_bad_list_is_usage_error():
    with pytest.raises(SystemExit) as info:
        run("rate", "--lambda", "a,b")
    assert info.value.code == 2


def test_module_entry_point_and_determinism():
    cmd = [sys.executable, "-m", "leafrate", "counts", "--n", "6"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True)
    b = subprocess.run(cmd, capture_output=True, text=True, check=True)
    assert a.stdout == b.stdout and a.stdout.endswith("6 5 1\n")


def test_help_documents_flags():
    text = subprocess.run(
        [sys.executable, "-m", "leafrate", "counts", "--help"], capture_output=True, text=True
    ).stdout
    for flag in ("--n", "--digits", "--order", "--cache", "--threads", "--format"):
        assert flag in text
