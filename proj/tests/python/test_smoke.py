import json
import math
import os
import pathlib

import pytest

import agreebench

ROOT = pathlib.Path(__file__).resolve().parents[2]
GRAMMARS = ROOT / "grammars"
STUB = os.environ.get("AGREEBENCH_STUB")


@pytest.fixture(scope="module")
def pair_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("pairs") / "pairs.jsonl"
    manifest = agreebench.generate(GRAMMARS, path)
    assert manifest["total"] == 13002
    return path


def test_manifest_matches_shipped(pair_file):
    shipped = json.loads((GRAMMARS / "manifest.json").read_text())
    written = json.loads(pathlib.Path(str(pair_file) + ".manifest.json").read_text())
    assert written == shipped


def test_pairs_differ_at_locus():
    pairs = agreebench.pairs(GRAMMARS)
    assert len(pairs) == 13002
    for p in pairs[::97]:
        g, u = p["grammatical"].split(" "), p["ungrammatical"].split(" ")
        assert len(g) == len(u)
        assert [i for i in range(len(g)) if g[i] != u[i]] == [p["locus_index"]]


def test_oracle_is_perfect(pair_file):
    report = agreebench.evaluate(pair_file, "oracle", timestamp="T")
    assert report["backend"] == "oracle"
    assert len(report["coarse"]) == 14
    assert all(row["accuracy"] == 1.0 for row in report["coarse"] + report["fine"])


def test_uniform_only_ties(pair_file):
    report = agreebench.evaluate(pair_file, "uniform", uniform_vocab=171)
    assert all(row["n_tie"] == row["n_total"] for row in report["coarse"])


def test_report_formats(pair_file):
    report = agreebench.evaluate(pair_file, "random", seed=3, timestamp="T")
    md = agreebench.report(report, "markdown")
    assert "| Simple Sentence |" in md
    tsv = agreebench.report(report, "tsv")
    assert json.loads(agreebench.report(tsv, "json")) == report


def test_stats(pair_file):
    s = agreebench.stats(pair_file, GRAMMARS)
    assert s["total_pairs"] == 13002
    assert s["mean_tokens"] > 0


def test_cross_entropy_against_direct_softmax():
    logits = [[0.5, -1.0, 2.0], [3.0, 0.0, 0.0]]
    targets = [2, 1]
    n, mean, total = agreebench.cross_entropy(logits, targets)
    expected = 0.0
    for row, y in zip(logits, targets):
        expected -= math.log(math.exp(row[y]) / sum(math.exp(x) for x in row))
    assert n == 2
    assert math.isclose(total, expected, rel_tol=1e-12)
    assert math.isclose(mean, expected / 2, rel_tol=1e-12)


def test_errors_surface_as_exceptions(tmp_path):
    with pytest.raises(agreebench.AgreebenchError):
        agreebench.cross_entropy([[0.0]], [4])
    with pytest.raises(ValueError):
        agreebench.evaluate(tmp_path / "missing.jsonl")


@pytest.mark.skipif(not STUB, reason="stub scorer not built")
def test_extern_backend_through_stub(pair_file):
    native = agreebench.evaluate(pair_file, "random", seed=9, timestamp="T")
    remote = agreebench.evaluate(
        pair_file, "extern", extern_cmd=f"'{STUB}' --backend random --seed 9 --threads 2",
        timestamp="T")
    assert remote["coarse"] == native["coarse"]
    partial = agreebench.evaluate(pair_file, "extern", extern_cmd=f"'{STUB}' --die-after 5")
    assert partial["incomplete"]
    assert sum(row["n_total"] for row in partial["coarse"]) == 2
    with pytest.raises(agreebench.TransportError):
        agreebench.evaluate(pair_file, "extern", extern_cmd=f"'{STUB}' --fail-hello")
