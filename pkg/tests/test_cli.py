import pandas as pd
import pytest

from fputwaves import __version__
from fputwaves.main import dispatch, read_config
from fputwaves.services import dispersion
from fputwaves.utils.errors import InvalidInputError


def read_table(path):
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def test_dispersion_writes_the_critical_frequency(tmp_path):
    out = tmp_path / "run"
    assert dispatch(["--out", str(out), "dispersion", "--c", "1.5", "--mu", "0.01"]) == 0
    frame = read_table(out / "dispersion.csv")
    lo, hi = dispersion.omega_bracket(0.01, 1.5)
    assert len(frame) == 1
    assert lo < frame["omega_mu"][0] < hi


def test_dispersion_over_a_grid(tmp_path):
    assert dispatch(["--out", str(tmp_path), "dispersion", "--c", "1.5", "--mu-grid", "list:0.01,0.02"]) == 0
    assert read_table(tmp_path / "dispersion.csv")["mu"].tolist() == [0.01, 0.02]


def test_output_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert dispatch(["--out", str(tmp_path / name), "dispersion", "--c", "1.6", "--mu-grid", "log:1e-3:1e-2:4"]) == 0
    assert (tmp_path / "a" / "dispersion.csv").read_bytes() == (tmp_path / "b" / "dispersion.csv").read_bytes()


@pytest.mark.parametrize("argv", [
    ["dispersion", "--mu", "0.01"],
    ["dispersion", "--c", "1.5", "--mu-grid", "log:0.5:0.1:3"],
    ["dispersion", "--c", "1.5", "--bogus", "1"],
    ["dispersion", "--c", "1.3", "--mu", "0.01"],
    ["no-such-command"],
])
def test_invalid_input_exits_2(tmp_path, argv):
    assert dispatch(["--out", str(tmp_path)] + argv) == 2
    assert not (tmp_path / "dispersion.csv").exists()


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("# speed from file\nc = 1.3\nmu=0.02\n")
    assert dispatch(["--config", str(config), "--out", str(tmp_path), "dispersion"]) == 2
    assert dispatch(["--config", str(config), "--out", str(tmp_path), "dispersion", "--c", "1.5"]) == 0
    assert read_table(tmp_path / "dispersion.csv")["mu"].tolist() == [0.02]


def test_read_config_normalizes_keys(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("--mu-grid = list:0.1\nn-jobs=2  # workers\n")
    assert read_config(str(config)) == {"mu_grid": "list:0.1", "n_jobs": "2"}
    config.write_text("just a line\n")
    with pytest.raises(InvalidInputError):
        read_config(str(config))
    with pytest.raises(InvalidInputError):
        read_config(str(tmp_path / "missing.cfg"))


def test_verify_all_prints_the_table(tmp_path, capsys):
    assert dispatch(["--out", str(tmp_path), "verify-all", "--check", "1"]) == 0
    printed = capsys.readouterr().out
    assert "pass" in printed
    assert (tmp_path / "verify.json").exists()


def test_version(capsys):
    assert dispatch(["--version"]) == 0
    assert __version__ in capsys.readouterr().out
