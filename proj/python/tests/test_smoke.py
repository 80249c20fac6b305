import json
import math
from pathlib import Path

import pytest

import portfolio_pruner as pp

FIXTURES = Path(__file__).resolve().parents[2] / "fixtures"


def test_formulas():
    assert pp.rejection_score(1, 1, 1) == pytest.approx(1.8)
    assert pp.cagr(100, 121, 2) == pytest.approx(0.1)
    assert pp.demand_snr(100, 1) == pytest.approx(20.0)
    assert pp.remaining_life_years("2030-01-01", "2025-01-01") == pytest.approx(1826 / 365.25)


def test_ndcg():
    assert pp.ndcg([3, 2, 1, 0], 10) == pytest.approx(1.0)
    assert pp.dcg([1], 1) == pytest.approx(1.0)
    assert pp.ndcg([0, 1], 2) == pytest.approx(1 / math.log2(3))


def test_errors_carry_codes():
    with pytest.raises(pp.PpError, match="NonPositiveStart"):
        pp.cagr(0, 1, 1)
    with pytest.raises(pp.PpError, match="ZeroNoiseFloor"):
        pp.demand_snr(1, 0)


def test_fixture_run(tmp_path):
    run = pp.Run.create(tmp_path, FIXTURES / "run.json")
    assert run.advance() == "GatePostRanking"
    assert len(run.gate("PostRanking")["versions"][0]["payload"]["items"]) == 30
    run.review("PostRanking", {"reviewer": "pytest"})
    assert run.advance(auto_approve=True) == "Complete"
    planted = json.loads((FIXTURES / "planted.json").read_text())["planted_patents"]
    pruned = json.loads((run.dir / "pruned.json").read_text())["patents"]
    assert sorted(pruned) == sorted(planted)
    assert pp.list_runs(tmp_path) == [run.id]
    again = pp.Run.open(tmp_path, run.id)
    assert again.phase == "Complete"
    with pytest.raises(pp.PpError, match="NotFound"):
        pp.Run.open(tmp_path, "run-nothere")


def test_train(tmp_path):
    run = pp.Run.create(tmp_path / "runs", FIXTURES / "run.json")
    run.advance()
    out = tmp_path / "model.json"
    ndcg = pp.train([str(FIXTURES / "labels.jsonl")], str(run.dir / "vectors.jsonl"), str(out), n_trees=5)
    assert 0.0 <= ndcg <= 1.0
    assert json.loads(out.read_text())["trees"]
