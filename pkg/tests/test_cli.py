import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from reslab import cli

WELL = ["--potential", "doublewell", "--ell", "1", "--delta", "0.5", "--lambda", "20",
        "--kmin", "0.5", "--kmax", "3", "--max-im", "0.5"]


def run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=object)


def test_free_scatter_is_transparent(capsys):
    code, out, _ = run(["scatter", "--potential", "free", "--nk", "25"], capsys)
    assert code == 0
    head, rows = table(out)
    assert head == ["k", "re_a", "im_a", "re_b_plus", "im_b_plus", "T", "R_plus"]
    assert np.allclose(rows[:, 5].astype(float), 1.0, atol=1e-15)
    assert np.allclose(rows[:, 6].astype(float), 0.0, atol=1e-15)


def test_scatter_extended_precision_agrees(capsys):
    args = ["scatter", "--potential", "doublewell", "--ell", "1", "--delta", "2", "--lambda", "436",
            "--kmin", "1", "--kmax", "5", "--nk", "4"]
    _, dbl = table(run(args, capsys)[1])
    _, ext = table(run(args + ["--digits", "30"], capsys)[1])
    assert np.allclose(dbl[:, 5].astype(float), ext[:, 5].astype(float), rtol=1e-10, atol=1e-300)


def test_u234_reports_decay_rate(capsys):
    code, out, _ = run(["u234"], capsys)
    assert code == 0
    values = dict(csv.reader(io.StringIO(out)))
    assert float(values["rel_dev_Gamma_SI"]) < 1e-3
    assert float(values["Gamma_SI"]) == pytest.approx(1.3361e-13, rel=1e-3)


def test_resonances_listed_in_order(capsys):
    code, out, _ = run(["resonances", "--potential", "doublewell", "--ell", "1", "--delta", "0.5",
                        "--lambda", "30", "--kmin", "1", "--kmax", "6", "--max-im", "1", "--verify"], capsys)
    assert code == 0
    head, rows = table(out)
    assert head[-1] == "channel"
    assert list(rows[:, -1]) == ["even", "odd", "even", "odd"]
    gammas = rows[:, 3].astype(float)
    assert np.all(np.diff(gammas) > 0)


def test_transform_tracks_pole(capsys):
    code, out, _ = run(["transform", "--potential", "doublewell", "--ell", "1", "--delta", "2",
                        "--lambda", "436", "--kmin", "7", "--kmax", "8", "--max-im", "1e-3",
                        "--digits", "50", "--nk", "11", "--half-widths", "3"], capsys)
    assert code == 0
    _, rows = table(out)
    exact, eta = rows[:, 1].astype(float), rows[:, 2].astype(float)
    assert np.max(np.abs(exact / eta - 1)) < 0.05


def test_gamow_profile_normalized(capsys):
    code, out, _ = run(["gamow", *WELL, "--xmin", "-1", "--xmax", "1", "--nx", "201"], capsys)
    assert code == 0
    _, rows = table(out)
    assert np.max(rows[:, 3].astype(float)) == pytest.approx(1.0, abs=1e-6)


def test_output_is_byte_identical(tmp_path, capsys):
    args = ["survival", *WELL, "--nt", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.run(args + ["-o", str(a)]) == 0
    assert cli.run(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    head, rows = table(a.read_text())
    assert head == ["t", "P", "window_mass", "pole_P"]
    assert np.allclose(rows[:, 1].astype(float), rows[:, 3].astype(float), rtol=0.05)


def test_thread_count_does_not_change_output(tmp_path):
    args = ["evolve", *WELL, "--times", "0,1.5", "--nx", "5"]
    one, two = tmp_path / "1.csv", tmp_path / "2.csv"
    assert cli.run(args + ["--threads", "1", "-o", str(one)]) == 0
    assert cli.run(args + ["--threads", "2", "-o", str(two)]) == 0
    assert one.read_bytes() == two.read_bytes()


def test_oracle_compare_columns(capsys):
    code, out, _ = run(["oracle-compare", *WELL, "--state", "smooth", "--times", "0,2"], capsys)
    assert code == 0
    head, rows = table(out)
    assert head == ["t", "l2_diff", "flag"]
    assert np.all(rows[:, 1].astype(float) < 1e-3)
    assert list(rows[:, 2]) == ["0", "0"]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# double well\npotential = doublewell\nell = 1\ndelta = 0.5\nlambda = 30\n"
                   "kmin = 1\nkmax = 3\nmax_im = 1\n")
    _, out_file, _ = run(["resonances", "--config", str(cfg)], capsys)
    _, out_flag, _ = run(["resonances", "--config", str(cfg), "--kmax", "6"], capsys)
    assert len(table(out_file)[1]) == 2
    assert len(table(out_flag)[1]) == 4


@pytest.mark.parametrize("argv,code", [
    (["scatter", "--bogus"], 2),
    (["nonsense"], 2),
    (["scatter", "--potential", "doublewell", "--ell", "-1", "--delta", "1", "--lambda", "3"], 2),
    (["scatter", "--potential", "free", "--kmin", "0"], 2),
    (["gamow", *WELL, "--index", "9"], 3),
    (["evolve", *WELL, "--times", "1,x"], 2),
    (["scatter", "--potential", "free", "-o", "/nonexistent/dir/out.csv"], 2),
])
def test_error_exit_codes(argv, code, capsys):
    got, out, err = run(argv, capsys)
    assert got == code
    lines = err.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("error ")
    assert lines[0].split()[1].count(".") == 1  # module-qualified code


@pytest.mark.parametrize("name", sorted(cli.COMMANDS))
def test_help_names_what_is_reproduced(name, capsys):
    assert cli.run([name, "--help"]) == 0
    out = capsys.readouterr().out
    assert "Reproduces" in out and "usage" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "reslab.cli", "u234"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("quantity,value\n")
