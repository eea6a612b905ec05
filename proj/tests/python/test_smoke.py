import os
from pathlib import Path

import pytest

import bridging_dictionary as bd

SRC = Path(os.environ.get("BD_SOURCE_DIR", Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="module")
def index():
    lexicon = bd.Lexicon.load(SRC / "data/valence.tsv")
    return bd.Index.build(SRC / "data/fixture/corpus.jsonl", lexicon, n_max=3)


def test_normalize_and_tokenize():
    assert bd.normalize("@potus #ClimateChange https://t.co/x") == "<user> climatechange <url>"
    assert bd.analyze("Don't stop!") == ["don't", "stop"]
    assert bd.ngrams(["a", "b", "c"], 2) == ["a", "b", "c", "a b", "b c"]


def test_log_odds_golden():
    assert bd.log_odds_z(30, 1000, 10, 1000, 0.5) == pytest.approx(3.0372619240608354515, abs=1e-12)
    assert bd.log_odds_z(25, 500, 25, 500) == 0.0
    with pytest.raises(ValueError):
        bd.log_odds_z(5, 3, 1, 10)


def test_stats(index):
    s = index.stats("filibuster")
    assert s["doc_count"] == (3, 0)
    assert s["rate_per_k"] == (1.5, 0.0)
    assert index.totals == [2000, 2000]
    with pytest.raises(ValueError):
        index.stats("...")


def test_curate_planted_terms(index):
    terms = {t["term"] for t in index.curate()}
    assert terms == {"climate crisis", "illegal aliens", "police"}
    assert {t["term"] for t in index.curate(freq_z_threshold=50.0, sent_gap_threshold=2.0)} <= terms
    with pytest.raises(ValueError):
        index.curate(freq_z_threshold=0.0)
    with pytest.raises(TypeError):
        index.curate(bogus=1)


def test_sample_is_deterministic(index):
    ids, texts = index.sample("economy", 1, cap=50, seed=9)
    assert len(ids) == 50 and len(texts) == 50
    assert index.sample("economy", 1, cap=50, seed=9) == (ids, texts)
    with pytest.raises(ValueError):
        index.sample("economy", 3)


def test_snapshot_round_trip(index, tmp_path):
    path = tmp_path / "index.bdsnap"
    index.save(path)
    loaded = bd.Index.load(path)
    assert loaded.stats("climate crisis") == index.stats("climate crisis")
    with pytest.raises(FileNotFoundError):
        bd.Index.load(tmp_path / "missing.bdsnap")
    path.write_bytes(b"garbage")
    with pytest.raises(RuntimeError):
        bd.Index.load(path)


def test_scatter_primitives():
    vectors = bd.embed(["tax relief now", "storm relief fund", "tax cut relief", "flood relief aid"], dim=64)
    points = bd.project_2d(vectors)
    assert len(points) == 4
    labels = bd.cluster([(0.0, 0.0), (0.05, 0.0), (0.0, 0.05), (0.05, 0.05), (0.9, 0.9)], eps=0.1, min_pts=4)
    assert labels == [0, 0, 0, 0, -1]
