import pytest

from interlacements import cli


def test_parse_config_flat():
    cfg = cli.parse_config("# comment\nop = test\n\nsamples = 10  # trailing\n")
    assert cfg == {"op": "test", "samples": "10"}
    with pytest.raises(cli.UsageError):
        cli.parse_config("no equals sign\n")


def test_unknown_op_exit_two(tmp_path, capsys):
    p = tmp_path / "c.txt"
    p.write_text("op = nonsense\n")
    assert cli.main(["run", str(p)]) == 2


def test_bad_vertex_set_exit_two(tmp_path):
    assert cli.main(["potential", "--family", "biased_z", "--K", "ids:99", "--out", str(tmp_path)]) == 2


def test_config_run_writes_report(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("op = test\ntest = vacancy\nfamily = tree\nparam.depth = 3\nK = ball:0\n"
                 "samples = 2000\nseed = 4\n")
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o")]) == 0
    text = (tmp_path / "o" / "vacancy.txt").read_text()
    assert "passed = True" in text and "seed = 4" in text


def test_criteria_expectation_sets_exit(tmp_path):
    args = ["criteria", "--family", "biased_z", "--levels", "2,3,4", "--kind", "strong", "--eps", "0.3",
            "--out", str(tmp_path)]
    assert cli.main(args + ["--expect", "bounded-below"]) == 0
    assert cli.main(args + ["--expect", "vanishing-trend"]) == 1


def test_graph_and_potential_files(tmp_path):
    assert cli.main(["graph", "--family", "biased_z", "--param", "radius=3", "--out", str(tmp_path)]) == 0
    g = tmp_path / "graph.txt"
    assert cli.main(["potential", "--graph-file", str(g), "--K", "ids:3", "--out", str(tmp_path / "p")]) == 0
    assert "capacity = 1" in (tmp_path / "p" / "summary.txt").read_text()


def test_sample_deterministic(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["sample", "--family", "lattice", "--param", "radius=2", "--K", "ball:0",
                         "--samples", "5", "--seed", "3", "--out", str(tmp_path / d)]) == 0
    for f in ("trajectories.txt", "fields.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
