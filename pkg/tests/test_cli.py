import numpy as np
import pytest

from spinsvm.cli import main

CHAIN = ["--n", "3", "--mu0", "1.3", "--kj", "1", "--kd", "2", "--gamma", "0.35"]


def _gen(tmp_path, name, m=40, seed=11):
    path = tmp_path / name
    rc = main(["gen", *CHAIN, "--m", str(m), "--seed", str(seed), "--out", str(path)])
    assert rc == 0
    return path


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["gen", "--bogus"]) == 1
    err = capsys.readouterr().err
    assert "usage error" in err


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_gen_writes_csv(tmp_path, capsys):
    path = _gen(tmp_path, "d.csv")
    assert "wrote 40 samples" in capsys.readouterr().err
    lines = path.read_text().splitlines()
    assert lines[0] == "J,Delta,label"
    assert len(lines) == 41


def test_gen_rejects_bad_m(tmp_path, capsys):
    assert main(["gen", *CHAIN, "--m", "0", "--out", str(tmp_path / "x.csv")]) == 1
    assert "positive" in capsys.readouterr().err
    assert main(["gen", *CHAIN, "--m", "100000", "--out", str(tmp_path / "x.csv")]) == 1
    assert "out of scope" in capsys.readouterr().err


def test_gen_rejects_bad_chain(tmp_path, capsys):
    rc = main(["gen", "--n", "0", "--m", "5", "--out", str(tmp_path / "x.csv")])
    assert rc == 1
    assert "--n" in capsys.readouterr().err


def test_train_requires_out(tmp_path, capsys):
    data = _gen(tmp_path, "d.csv")
    capsys.readouterr()
    assert main(["train", *CHAIN, "--data", str(data)]) == 1
    assert "--out" in capsys.readouterr().err


def test_train_missing_data_is_runtime_error(tmp_path, capsys):
    rc = main(["train", *CHAIN, "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.txt")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_train_validates_ranges(tmp_path, capsys):
    data = _gen(tmp_path, "d.csv")
    capsys.readouterr()
    base = ["train", *CHAIN, "--data", str(data), "--out", str(tmp_path / "m.txt")]
    assert main([*base, "--C", "-1"]) == 1
    assert main([*base, "--delta", "1.5"]) == 1
    assert main([*base, "--tmax", "0"]) == 1


def test_full_pipeline(tmp_path, capsys):
    train_csv = _gen(tmp_path, "train.csv", m=50, seed=11)
    test_csv = _gen(tmp_path, "test.csv", m=25, seed=12)
    model = tmp_path / "model.txt"
    rc = main(["train", *CHAIN, "--data", str(train_csv), "--C", "50", "--eps", "0.05",
               "--tmax", "60", "--oracle", "gaussian", "--seed", "4", "--out", str(model)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "iterations" in captured.out
    assert "wrote model" in captured.err
    preds = tmp_path / "preds.txt"
    rc = main(["predict", *CHAIN, "--model", str(model), "--train-data", str(train_csv),
               "--data", str(test_csv), "--out", str(preds)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "accuracy" in out
    values = [int(v) for v in preds.read_text().split()]
    assert len(values) == 25
    assert set(values) <= {-1, 1}


def test_model_file_round_trips_through_cli(tmp_path, capsys):
    train_csv = _gen(tmp_path, "train.csv", m=30, seed=13)
    m1, m2 = tmp_path / "a.txt", tmp_path / "b.txt"
    argv = ["train", *CHAIN, "--data", str(train_csv), "--C", "20", "--eps", "0.1",
            "--tmax", "30", "--oracle", "gaussian", "--seed", "6"]
    assert main([*argv, "--out", str(m1)]) == 0
    assert main([*argv, "--out", str(m2)]) == 0
    assert m1.read_bytes() == m2.read_bytes()


def test_table1_stdout_and_file_agree(tmp_path, capsys):
    args = ["table1", "--m", "60", "--seed", "5", "--no-rbf"]
    assert main(args) == 0
    stdout_payload = capsys.readouterr().out
    out = tmp_path / "t.tsv"
    assert main([*args, "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.read_text() == stdout_payload
    header = stdout_payload.splitlines()[0]
    assert header == "m\tpsi_min\titerations\taccuracy\trbf_accuracy"


def test_table2_runs_small(tmp_path, capsys):
    out = tmp_path / "t2.tsv"
    rc = main(["table2", "--n", "3", "--instances", "2", "--m", "50", "--seed", "3",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n\tpsi_min_mean\tpsi_min_min\tpsi_min_sd\tmean_iterations\tinstances"
    assert len(lines) == 2


def test_table2_rejects_tiny_n(capsys):
    assert main(["table2", "--n", "1", "--instances", "1", "--m", "40"]) == 1


def test_threads_flag(tmp_path, capsys):
    path = tmp_path / "d.csv"
    rc = main(["--threads", "1", "gen", *CHAIN, "--m", "10", "--seed", "1", "--out", str(path)])
    assert rc == 0
    assert path.exists()
    assert main(["--threads", "0", "gen", *CHAIN, "--m", "10", "--seed", "1",
                 "--out", str(path)]) == 1


def test_summary_goes_to_stderr_not_stdout(capsys):
    assert main(["table1", "--m", "40", "--seed", "8", "--no-rbf"]) == 0
    captured = capsys.readouterr()
    assert "[" not in captured.out  # timing brackets live on stderr
    assert "seed" in captured.err
