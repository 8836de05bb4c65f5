import json

import pytest

from qlab import config
from qlab.cli import SUBCOMMANDS, canonical_json, main, to_csv


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_every_subcommand_has_a_schema(capsys):
    for name in list(SUBCOMMANDS) + ["sweep"]:
        code, out, _ = run(capsys, name, "--schema")
        assert code == 0, name
        schema = json.loads(out)
        assert schema["subcommand"] == name
        assert "parameters" in schema


def test_grover_single_trial(capsys):
    code, out, _ = run(capsys, "grover", "--n", "64", "--marked", "3",
                       "--seed", "1")
    assert code == 0
    res = json.loads(out)
    assert res["subcommand"] == "grover" and res["seed"] == 1
    assert "cost" not in res or res["cost"]["queries_mean"] > 0


def test_replay_is_byte_identical(capsys):
    argv = ["minsearch", "--n", "128", "--seed", "7", "--trials", "12"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_parallel_matches_serial(capsys):
    base = ["grover", "--n", "64", "--marked", "5", "--seed", "3",
            "--trials", "8"]
    _, serial, _ = run(capsys, *base, "--parallel", "1")
    _, fanned, _ = run(capsys, *base, "--parallel", "4")
    assert serial == fanned


def test_aggregate_fields(capsys):
    code, out, _ = run(capsys, "grover", "--n", "64", "--marked", "2",
                       "--seed", "0", "--trials", "10")
    res = json.loads(out)
    assert res["trials"] == 10
    assert "aggregate" in res and "first" in res
    assert set(res["cost"]) == {"queries_mean", "queries_median", "queries_p95"}
    assert res["config"]["NAND_TSTAR"]["8"] == config.NAND_TSTAR[8]


def test_missing_seed_is_a_validation_error(capsys):
    code, _, err = run(capsys, "grover", "--n", "64", "--marked", "3")
    assert code == 2
    assert "--seed" in err or "seed" in err


def test_missing_required_argument(capsys):
    code, _, err = run(capsys, "grover", "--seed", "1")
    assert code == 2 and "--n" in err


def test_resource_guard_exit_code(capsys):
    code, _, err = run(capsys, "subsetsum", "--n", "28", "--k", "3",
                       "--variant", "grover", "--seed", "0")
    assert code == 3
    assert "resource guard" in err


def test_bad_value_exit_code(capsys):
    code, _, _ = run(capsys, "walkcircle", "--size", "2", "--steps", "4")
    assert code == 2


def test_csv_output(capsys):
    code, out, _ = run(capsys, "mnrscost", "--S", "4", "--U", "1", "--C", "1",
                       "--eps", "0.25", "--delta", "0.25", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "key,value"
    assert any(ln.startswith("cost_value,") or "cost" in ln for ln in lines)


def test_out_file(tmp_path, capsys):
    path = tmp_path / "res.json"
    code, out, _ = run(capsys, "walk1d", "--steps", "4", "--out", str(path))
    assert code == 0 and out == ""
    res = json.loads(path.read_text())
    assert res["subcommand"] == "walk1d"


def test_config_override(tmp_path, capsys):
    cfg = tmp_path / "qlab.cfg"
    cfg.write_text("MINSEARCH_CONFIRM = 5\n")
    old = config.MINSEARCH_CONFIRM
    try:
        code, out, _ = run(capsys, "minsearch", "--n", "32", "--seed", "0",
                           "--config", str(cfg))
        assert code == 0
        assert json.loads(out)["config"]["MINSEARCH_CONFIRM"] == 5
    finally:
        config.MINSEARCH_CONFIRM = old
    bad = tmp_path / "bad.cfg"
    bad.write_text("NO_SUCH_KEY = 1\n")
    code, _, _ = run(capsys, "minsearch", "--n", "32", "--seed", "0",
                     "--config", str(bad))
    assert code == 2


def test_graph_subcommand_with_inline_edges(capsys):
    code, out, _ = run(capsys, "bfs", "--edges", "0-1,1-2,2-3", "--seed", "0")
    assert code == 0
    res = json.loads(out)
    assert res["dist"] == [0, 1, 2, 3]


def test_sweep_output_shape(capsys):
    code, out, _ = run(capsys, "sweep", "--sub", "minsearch", "--axis", "n",
                       "--values", "64,128,256", "--seed", "0",
                       "--trials", "6")
    assert code == 0
    res = json.loads(out)
    assert res["sub"] == "minsearch" and len(res["rows"]) == 3
    assert 0.2 <= res["exponent"] <= 0.8
    code, _, _ = run(capsys, "sweep", "--sub", "sweep", "--axis", "n",
                     "--values", "4", "--seed", "0")
    assert code == 2


def test_sweep_csv_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--sub", "minsearch", "--axis", "n",
                       "--values", "32,64", "--seed", "1", "--trials", "4",
                       "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split(",")[0] == "n"
    assert len(lines) == 3


def test_canonical_json_is_stable():
    text = canonical_json({"b": 0.1234567890123456789, "a": [1, 2.0]})
    assert '"a"' in text.splitlines()[1]
    assert "0.123456789012" in text
    csv_text = to_csv({"rows": [{"x": 1, "y": 2}, {"x": 3, "y": 4}]})
    assert csv_text.splitlines()[0] == "x,y"
