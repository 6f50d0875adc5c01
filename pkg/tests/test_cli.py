import json
import subprocess
import sys

import numpy as np
import pytest

from tmwkb.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main

FAST = ["--epoints", "5", "--nsteps", "2000", "--de-steps", "4000"]


def test_tc_to_stdout(capsys):
    assert main(["tc", "--method", "exact", "--epoints", "3"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "energy_J,method,n_steps,tc"
    assert out[2] == "0.0000000000000000e+00,exact,0,5.0000000000000000e-01"


def test_tc_to_file_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["tc", "--potential", "sech2", "--method", "tm-wkb3", *FAST, "--out", str(p)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 6


def test_error_subcommand(tmp_path, capsys):
    out = tmp_path / "e.csv"
    rc = main(["error", "--method", "tm-pw,tm-wkb1,de-wkb", *FAST, "--out", str(out)])
    assert rc == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "energy_J,method,n_steps,tc,tc_exact,rel_error"
    assert len(lines) == 16
    summary = capsys.readouterr().out
    assert "tm-pw/tm-wkb1" in summary and "de-wkb" in summary


def test_error_json(tmp_path):
    out = tmp_path / "e.json"
    assert main(["error", "--method", "tm-wkb1", "--average", "geomean", *FAST, "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["summary"]["average"] == "geomean" and len(data["rows"]) == 5


def test_nsweep(tmp_path):
    out = tmp_path / "n.csv"
    assert main(["nsweep", "--method", "tm-pw", "--nlist", "500,1000", *FAST, "--out", str(out)]) == EXIT_OK
    methods = [line.split(",")[1:3] for line in out.read_text().splitlines()[1:]]
    assert ["tm-pw", "500"] in methods and ["de-wkb", "4000"] in methods
    assert main(["nsweep", "--nlist", "800", "--no-de", *FAST, "--out", str(out)]) == EXIT_OK
    assert len(out.read_text().splitlines()) == 6


def test_table_potential(tmp_path):
    x = np.linspace(-2e-9, 2e-9, 201)
    table = tmp_path / "v.txt"
    table.write_text("# parabola\n" + "\n".join(f"{a:.17e}, {-a * a:.17e}" for a in x))
    out = tmp_path / "t.csv"
    assert main(["tc", "--potential", f"table:{table}", "--method", "tm-wkb1", *FAST, "--out", str(out)]) == 0
    tc = [float(line.split(",")[3]) for line in out.read_text().splitlines()[1:]]
    assert tc[2] == pytest.approx(0.5, rel=1e-2)
    # no exact reference for tabulated input
    assert main(["error", "--potential", f"table:{table}", *FAST]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "argv",
    [
        ["tc", "--potential", "gauss"],
        ["tc", "--potential", "table:/nonexistent/file"],
        ["tc", "--epoints", "1"],
        ["tc", "--emin", "1e-19", "--emax=-1e-19"],
        ["tc", "--alpha", "-1"],
        ["tc", "--nsteps", "0"],
        ["tc", "--workers", "0"],
        ["error", "--method", "tm-pw,bogus"],
        ["nsweep", "--nlist", "1000,500"],
        ["nsweep", "--nlist", "1e3"],
        ["tc", "--method", "exact", "--out", "/nonexistent/dir/out.csv"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["tc", "--method", "magic"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main([])


def test_numerical_failure_exit_3(capsys):
    assert main(["tc", "--method", "wkb-formula", "--epoints", "3"]) == EXIT_NUMERICAL
    captured = capsys.readouterr()
    assert "1 energies failed" in captured.err
    assert captured.out.splitlines()[-1].endswith(",nan")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tmwkb", "tc", "--method", "exact", "--epoints", "2"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("energy_J,")
