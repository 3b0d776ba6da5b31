"""Command-line interface: pipelines, exit codes, report determinism."""

import json

from biunitary.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_builtin_writes_document(tmp_path, capsys):
    path = tmp_path / "a3.json"
    code, _, _ = run(capsys, "builtin", "dynkin", "A3", "--out", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    assert doc["format"] == "connection-interchange"
    assert doc["version"] == 1


def test_check_passes_on_builtin_file(tmp_path, capsys):
    path = tmp_path / "a3.json"
    run(capsys, "builtin", "dynkin", "A3", "--out", str(path))
    code, out, _ = run(capsys, "check", str(path))
    assert code == 0
    assert "PASS" in out


def test_check_fails_on_broken_file(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"format": "connection-interchange", "version": 1,')
    code, _, err = run(capsys, "check", str(path))
    assert code == 2
    assert "error" in err


def test_missing_file_is_input_error(capsys):
    code, _, _ = run(capsys, "check", "/nonexistent/conn.json")
    assert code == 2


def test_verify_theorem_a3(capsys):
    code, out, _ = run(capsys, "verify-theorem", "--builtin", "dynkin A3", "-k", "3")
    assert code == 0
    assert "k=3: rank 4  flat 4" in out
    assert "overall PASS" in out


def test_decompose_cyclic_two(capsys):
    code, out, _ = run(capsys, "decompose", "--builtin", "cyclic 2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["labels"] == ["a0", "a1"]
    assert float(doc["w"]) == 2.0
    assert all(float(v) == 1.0 for v in doc["d"].values())


def test_pmpo_and_relcomm_agree(capsys):
    code, out, _ = run(capsys, "pmpo", "--builtin", "dynkin A4", "-k", "3",
                       "--format", "json")
    assert code == 0
    rank = json.loads(out)["rank"]
    code, out, _ = run(capsys, "relcomm", "--builtin", "dynkin A4", "-k", "3",
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["flat_dimension"] == rank == 5


def test_stats_runs(capsys):
    code, out, _ = run(capsys, "stats", "--builtin", "dynkin A4", "-n", "3",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["levels"]) == 3


def test_reports_deterministic_across_seeds(capsys):
    texts = []
    for seed in ("0", "1", "2"):
        code, out, _ = run(capsys, "decompose", "--builtin", "dynkin A4",
                           "--format", "json", "--seed", seed)
        assert code == 0
        doc = json.loads(out)
        doc.pop("seed")
        texts.append(json.dumps(doc, sort_keys=True))
    assert texts[0] == texts[1] == texts[2]


def test_same_seed_byte_identical(capsys):
    outs = set()
    for _ in range(2):
        code, out, _ = run(capsys, "verify-theorem", "--builtin", "cyclic 3",
                           "-k", "2", "--format", "json", "--seed", "7")
        assert code == 0
        outs.add(out)
    assert len(outs) == 1


def test_unknown_builtin_is_input_error(capsys):
    code, _, _ = run(capsys, "check", "--builtin", "octonion 3")
    assert code == 2


def test_invalid_tolerance_is_input_error(capsys):
    code, _, _ = run(capsys, "check", "--builtin", "dynkin A3", "--tol", "0.5")
    assert code == 2


def test_invalid_k_is_input_error(capsys):
    code, _, _ = run(capsys, "pmpo", "--builtin", "dynkin A3", "-k", "0")
    assert code == 2


def test_depth_cap_is_numeric_failure(capsys):
    code, _, err = run(capsys, "decompose", "--builtin", "dynkin A7",
                       "--max-depth", "1")
    assert code == 1
    assert "max_depth" in err or "depth" in err


def test_pmpo_dump_includes_legend(capsys):
    code, out, _ = run(capsys, "pmpo", "--builtin", "dynkin A3", "-k", "1",
                       "--dump", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["basis_legend"]) == doc["dim"]
    assert len(doc["matrix"]) == doc["dim"]
