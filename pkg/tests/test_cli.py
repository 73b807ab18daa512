import json

import pytest

from qpurify import cli
from qpurify.cli import main
from qpurify.errors import EnsembleExhaustedError
from qpurify.serializer import SWEEP_COLUMNS, TRACE_COLUMNS, read_csv_rows

FAST = ["--grid-size", "64", "--workers", "1", "--quiet"]


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def _exit_code(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


def _single_error_line(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("qpurify: error:")


def test_stats_json_for_fully_mixed_pair(capsys):
    main(["stats", "--n", "2", "--c1", "0.5", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["rows"] == [{"M": 0, "p_M": 0.25, "f_M": 0.5}, {"M": 2, "p_M": 0.75, "f_M": 0.5}]
    assert payload["sum_p"] == 1.0


def test_stats_hides_impossible_outcomes(capsys):
    main(["stats", "--n", "6", "--c1", "1.0", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["rows"] == [{"M": 6, "p_M": 1.0, "f_M": 1.0}]


def test_stats_table(capsys):
    main(["stats", "--n", "4", "--c1", "0.75"])
    out = capsys.readouterr().out
    assert "0.47265625" in out
    assert "purification holds" in out


def test_odd_n_is_a_usage_error(capsys):
    assert _exit_code(["stats", "--n", "5"]) == 2
    _single_error_line(capsys)


def test_zero_trials_is_a_usage_error(capsys):
    assert _exit_code(["run", "--trials", "0", *FAST]) == 2
    _single_error_line(capsys)


def test_unknown_strategy_is_a_usage_error(capsys):
    assert _exit_code(["run", "--strategy", "greedy"]) == 2
    _single_error_line(capsys)


def test_missing_config_file_is_a_usage_error(capsys):
    assert _exit_code(["run", "--config", "nowhere.toml", *FAST]) == 2
    _single_error_line(capsys)


def test_run_writes_a_reproducible_record(capsys):
    argv = ["run", "--n", "2", "--trials", "4", "--seed", "11", *FAST]
    main(argv)
    first = json.loads(capsys.readouterr().out)
    main(argv)
    second = json.loads(capsys.readouterr().out)

    assert first["schemaVersion"] == "1"
    assert first["config"]["seed"] == 11
    assert "workers" not in first["config"]
    assert set(first["rows"]) == {"meanFidelity", "stdError", "trials", "seed", "stepCurve", "stepStdError"}
    assert len(first["rows"]["stepCurve"]) == 2
    assert first["rows"] == second["rows"]
    assert first["config"] == second["config"]


def test_run_to_file(tmp_path, capsys):
    out = tmp_path / "run.json"
    main(["run", "--n", "2", "--trials", "2", *FAST, "--out", str(out)])
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text(encoding="utf-8"))["rows"]["trials"] == 2


def test_sweep_csv_and_sidecar(tmp_path):
    out = tmp_path / "sweep.csv"
    main([
        "sweep", "--n", "2", "--trials", "2", "--c1-min", "0.6", "--c1-max", "0.9", "--c1-steps", "2",
        *FAST, "--out", str(out),
    ])
    text = out.read_text(encoding="utf-8")
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    rows = read_csv_rows(text)
    assert [(r["c1"], r["purify"]) for r in rows] == [
        ("0.6", "true"), ("0.6", "false"), ("0.9", "true"), ("0.9", "false"),
    ]

    meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text(encoding="utf-8"))
    assert meta["rows"]["columns"] == SWEEP_COLUMNS
    assert meta["config"]["c1_steps"] == 2


def test_sweep_strategy_comparison(capsys):
    main(["sweep", "--n", "2", "--trials", "2", "--c1-steps", "1", "--c1-min", "0.8", "--compare", "strategy", *FAST])
    rows = read_csv_rows(capsys.readouterr().out)
    assert [r["strategy"] for r in rows] == ["adaptive", "random"]


def test_trace_csv(capsys):
    main(["trace", "--n", "4", "--trials", "2", *FAST])
    text = capsys.readouterr().out
    assert text.splitlines()[0] == ",".join(TRACE_COLUMNS)
    rows = read_csv_rows(text)
    assert len(rows) == 8
    assert rows[0]["pipeline"] == "purified"
    assert rows[-1]["pipeline"] == "unpurified"


def test_sweep_is_deterministic(capsys):
    argv = ["sweep", "--n", "2", "--trials", "3", "--c1-steps", "2", "--c1-min", "0.7", "--c1-max", "0.8", *FAST]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_local_config_file_is_picked_up(tmp_path, capsys):
    (tmp_path / ".qpurify.toml").write_text("[qpurify]\nn = 4\nc1 = 0.5\n", encoding="utf-8")
    main(["stats", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["n"] == 4
    assert [r["M"] for r in payload["rows"]] == [0, 2, 4]


def test_config_init(tmp_path, capsys):
    main(["config", "init", "--path", str(tmp_path)])
    target = tmp_path / ".qpurify.toml"
    assert target.exists()
    assert "[qpurify]" in target.read_text(encoding="utf-8")

    main(["config", "init", "--path", str(tmp_path)])
    assert "already exists" in capsys.readouterr().out


def test_version(capsys):
    assert _exit_code(["--version"]) == 0
    assert "qpurify" in capsys.readouterr().out


def test_stdout_csv_gets_its_envelope_on_stderr(capsys):
    main(["trace", "--n", "2", "--trials", "2", "--seed", "777", "--weighting", "sampled", *FAST])
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == ",".join(TRACE_COLUMNS)

    meta = json.loads(captured.err)
    assert meta["config"]["seed"] == 777
    assert meta["config"]["weighting"] == "sampled"
    assert meta["rows"]["columns"] == TRACE_COLUMNS


def test_sweep_to_stdout_keeps_the_csv_clean(tmp_path, capsys):
    main(["sweep", "--n", "2", "--trials", "2", "--c1-steps", "1", "--c1-min", "0.8", "--compare", "none", *FAST])
    captured = capsys.readouterr()
    assert len(read_csv_rows(captured.out)) == 1
    assert json.loads(captured.err)["config"]["c1_min"] == 0.8
    assert not list(tmp_path.glob("*.meta.json"))


def test_simulation_failure_is_a_single_line(monkeypatch, capsys):
    def exhausted(*args, **kwargs):
        raise EnsembleExhaustedError("no unmeasured qubits left in the ensemble")

    monkeypatch.setattr(cli, "run_scenario", exhausted)
    assert _exit_code(["run", "--n", "2", "--trials", "1", *FAST]) == 1
    _single_error_line(capsys)
