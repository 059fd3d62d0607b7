import subprocess
import sys

import pytest

from bowts.cli import COMMANDS, build_parser, main
from bowts.dataio import read_csv

CAPS = ["--max-train-segments", "3000", "--max-iter", "20"]


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "data"
    assert main(["gen-data", "--out", str(out), "--per-class", "10", "--length", "600", "--seed", "1"]) == 0
    return out


def test_evaluate_happy_path(corpus, tmp_path):
    out = tmp_path / "report.csv"
    argv = ["evaluate", "--data", str(corpus), "--distance", "chi2", "--k", "1000", "--window", "128",
            "--folds", "10", "--seed", "7", "--out", str(out), *CAPS]
    assert main(argv) == 0
    config, header, rows = read_csv(out)
    assert header == ["fold", "n_test", "correct", "accuracy"]
    assert len(rows) == 11 and rows[-1][0] == "mean"
    assert [r[0] for r in rows[:10]] == [str(i) for i in range(10)]
    assert config["bow"]["codebook_size"] == 1000 and config["bow"]["window_len"] == 128
    assert config["distance"] == "chi_squared" and config["k_folds"] == 10


def test_unknown_flag(capsys):
    assert main(["evaluate", "--fooo"]) == 2
    assert "usage" in capsys.readouterr().err


def test_missing_subcommand():
    assert main([]) == 2


def test_nonexistent_data():
    proc = subprocess.run([sys.executable, "-m", "bowts", "evaluate", "--data", "/nonexistent"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert "/nonexistent" in proc.stderr and proc.stdout == ""


def test_bad_config_is_runtime_error(corpus, caplog):
    assert main(["evaluate", "--data", str(corpus), "--k", "1"]) == 1
    assert "codebook_size" in caplog.text


@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_help_on_every_subcommand(command, capsys):
    assert main([command, "--help"]) == 0
    text = capsys.readouterr().out
    assert "--out" in text
    if command in ("evaluate", "sweep", "noise"):
        for flag, default in [("--window", "128"), ("--k", "1000"), ("--distance", "chi2"), ("--folds", "10")]:
            assert flag in text and f"default: {default}" in text


def test_parser_defaults():
    args = build_parser().parse_args(["evaluate", "--data", "x"])
    assert (args.window, args.k, args.distance, args.folds, args.stride) == (128, 1000, "chi2", 10, 2)


def test_codebook_and_transform(corpus, tmp_path, capsys):
    cb = tmp_path / "cb.txt"
    assert main(["train-codebook", "--data", str(corpus), "--k", "16", "--window", "64", "--out", str(cb), *CAPS]) == 0
    capsys.readouterr()
    assert main(["transform", "--data", str(corpus), "--codebook", str(cb)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1].split(",")[:4] == ["id", "label", "total", "c0"]
    assert len(lines) == 2 + 30
    # (600 - 64) // 2 + 1 windows per series
    assert all(line.split(",")[2] == "269" for line in lines[2:])


def test_sweep_records_skipped_values(corpus, tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--data", str(corpus), "--axis", "window_len", "--values", "2,64",
            "--k", "10", "--folds", "3", "--out", str(out), *CAPS]
    assert main(argv) == 0
    _, header, rows = read_csv(out)
    assert header == ["window_len", "mean_accuracy", "status"]
    assert rows[0][0] == "64" and rows[0][2] == "ok"
    assert rows[1][0] == "2" and rows[1][2].startswith("skipped")


def test_sweep_bad_values(corpus):
    assert main(["sweep", "--data", str(corpus), "--axis", "codebook_size", "--values", "ten"]) == 1


@pytest.mark.parametrize("method, extra", [
    ("dwt", []), ("dft", ["--resize", "512"]), ("dtw", ["--dtw-len", "60"]),
    ("bop", ["--bop-windows", "32:64:32"]),
])
def test_baselines(corpus, tmp_path, method, extra):
    out = tmp_path / f"{method}.csv"
    assert main(["baseline", "--data", str(corpus), "--method", method, "--folds", "3", "--out", str(out), *extra]) == 0
    config, _, rows = read_csv(out)
    assert config["method"] == method and rows
