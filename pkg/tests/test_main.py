import json

import pytest

from config import EXIT_MISMATCH, EXIT_OK, EXIT_USAGE
import main as cli
from main import main, parse_pairs


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "g.txt"
    assert main(["gen", "path", "5", "--n-off", "1", "--seed", "0", "-o", str(path)]) == EXIT_OK
    return path


def _json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def test_gen_writes_a_loadable_file(graph_file):
    lines = graph_file.read_text().splitlines()
    assert lines[0] == "5 4"
    assert lines[1].startswith("on:")


def test_gen_to_stdout(capsys):
    assert main(["gen", "star", "4"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("4 3\n")


def test_query_with_pairs(tmp_path, capsys):
    path = tmp_path / "p.txt"
    path.write_text("3 2\non: 0 1 2\n0 1\n1 2\n")
    assert main(["query", str(path), "--d-star", "1", "--D", "1", "--pairs", "0,2 0,0"]) == EXIT_OK
    results = _json_lines(capsys.readouterr().out)
    assert [r["connected"] for r in results] == [False, True]


def test_query_workload_mismatch_exits_one(tmp_path, capsys):
    path = tmp_path / "p.txt"
    path.write_text("3 2\non: 0 1 2\n0 1\n1 2\n")
    workload = tmp_path / "w.json"
    workload.write_text(json.dumps({"trials": [{"D": [1], "queries": [[0, 2]], "expected": [True]}]}))
    assert main(["query", str(path), "--d-star", "1", "--workload", str(workload)]) == EXIT_MISMATCH

    workload.write_text(json.dumps({"trials": [{"D": [1], "queries": [[0, 2]], "expected": [False]}]}))
    assert main(["query", str(path), "--d-star", "1", "--workload", str(workload)]) == EXIT_OK


def test_preprocess_and_update_print_json(graph_file, capsys):
    assert main(["preprocess", str(graph_file), "--d-star", "2"]) == EXIT_OK
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["n"] == 5 and metrics["d_star"] == 2

    assert main(["update", str(graph_file), "--d-star", "2", "--D", "0,1"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["d_on"] + summary["d_off"] == 2


def test_verify_exit_codes(graph_file, capsys):
    assert main(["verify", str(graph_file), "--d-star", "2", "--trials", "5", "--queries", "10"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["mismatches"] == 0
    args = ["verify", str(graph_file), "--d-star", "2", "--trials", "5", "--queries", "10", "--inject-fault"]
    assert main(args) == EXIT_MISMATCH


def test_verify_can_save_reports(graph_file, tmp_path, monkeypatch):
    saved = []
    monkeypatch.setattr(cli, "clean_old_reports", lambda hours: 0)
    monkeypatch.setattr(cli, "create_report_path", lambda prefix: tmp_path / f"{prefix}_x.json")
    monkeypatch.setattr(cli.StorageService, "save_report", staticmethod(lambda name, report: saved.append(name) or True))
    assert main(["verify", str(graph_file), "--d-star", "1", "--trials", "2", "--save"]) == EXIT_OK
    assert saved == ["verify_x"]


def test_bench_writes_csv(graph_file, tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", str(graph_file), "--d-values", "1,2", "--reps", "2", "-o", str(out)]) == EXIT_OK
    assert out.read_text().startswith("d,")


def test_bench_reports_the_slope_on_stdout(graph_file, tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", str(graph_file), "--d-values", "1,2", "--reps", "2", "-o", str(out)]) == EXIT_OK
    summary = _json_lines(capsys.readouterr().out)[-1]
    assert summary["rows"] == 2
    assert "loglog_slope" in summary


def test_inspect_dumps_levels(graph_file, capsys):
    assert main(["inspect", str(graph_file)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "level 1" in out and "fingerprint" in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["gen", "torus", "5"],
        ["preprocess", "missing.txt", "--d-star", "1"],
        ["preprocess", "graph.csv", "--d-star", "1"],
    ],
)
def test_usage_errors_exit_two(argv):
    assert main(argv) == EXIT_USAGE


def test_oversized_update_exits_two(graph_file):
    assert main(["update", str(graph_file), "--d-star", "1", "--D", "0,1"]) == EXIT_USAGE


def test_malformed_graph_exits_two(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 1\non: 0 1 2\n1 1\n")
    assert main(["preprocess", str(path), "--d-star", "1"]) == EXIT_USAGE


def test_parse_pairs():
    assert parse_pairs("0,2 3,4") == [(0, 2), (3, 4)]
    with pytest.raises(ValueError):
        parse_pairs("1,2,3")


def test_unexpected_errors_exit_two(graph_file, monkeypatch, caplog):
    def explode(args):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "cmd_inspect", explode)
    assert main(["inspect", str(graph_file)]) == EXIT_USAGE
    assert "boom" in caplog.text
