import json
import math
from pathlib import Path

import numpy as np
import pytest

import arsjoint

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


@pytest.fixture(scope="module")
def corpus():
    return arsjoint.load_corpus(DATA / "corpus.jsonl")


@pytest.fixture(scope="module")
def train_claims():
    return arsjoint.load_claims(DATA / "claims_train.jsonl")


def test_loaders(corpus, train_claims):
    assert len(corpus) == 12
    assert corpus[0].doc_id == 4983
    claim = train_claims[0]
    groups, label = claim.evidence[4983]
    assert groups == [[2, 3]]
    assert label == "SUPPORT"


def test_parse_errors_name_the_line():
    with pytest.raises(ValueError, match="line 2"):
        arsjoint.parse_corpus('{"doc_id": 1, "title": "t", "abstract": ["a"]}\n{broken\n')


def test_retrieve_ranks_the_matching_abstract_first(corpus):
    ranked = arsjoint.retrieve(corpus, "aspirin colorectal cancer", 3)
    assert ranked[0][0] == 10145
    assert len(ranked) == 3
    assert ranked[0][1] >= ranked[1][1] >= ranked[2][1]


def test_rr_loss_values():
    assert arsjoint.rr_divergence(np.array([0.5]), np.array([0.5])) == pytest.approx(math.log(2))
    hand = 2 * (-0.9 * math.log(0.1) - 0.1 * math.log(0.9))
    assert arsjoint.rr_loss(np.array([0.9]), np.array([0.1])) == pytest.approx(hand, abs=1e-9)
    with pytest.raises(ValueError):
        arsjoint.rr_loss(np.array([0.5]), np.array([0.5, 0.5]))


def test_schedule_and_weights():
    assert arsjoint.sample_probability(1, 5) == 0.0
    assert arsjoint.sample_probability(5, 5) == 1.0
    assert arsjoint.sample_probability(3, 5) == pytest.approx(math.sin(math.pi / 4))
    assert arsjoint.joint_loss(1, 1, 1, 1) == pytest.approx(15.2)


def test_train_predict_evaluate(corpus, train_claims, tmp_path):
    model, history = arsjoint.train(corpus, train_claims, epochs=2, dim=8, seed=3)
    assert [h["epoch"] for h in history] == [1, 2]
    assert all(math.isfinite(h["L_total"]) for h in history)
    path = tmp_path / "model.ckpt"
    model.save(path)
    again = arsjoint.Model.load(path)
    assert json.loads(again.config_json)["dim"] == 8
    dev = arsjoint.load_claims(DATA / "claims_dev.jsonl")
    preds = arsjoint.predict(again, dev, corpus)
    assert preds == arsjoint.predict(model, dev, corpus)
    report = arsjoint.evaluate(preds, dev)
    for level in ("sentence_level", "abstract_level"):
        for metrics in report[level].values():
            assert 0.0 <= metrics["f1"] <= 1.0


def test_unknown_config_key(corpus, train_claims):
    with pytest.raises(ValueError, match="unknown config key"):
        arsjoint.train(corpus, train_claims, epoch=2)


def test_cli_exit_codes():
    code, _, err = arsjoint.run_cli(["train"])
    assert code == 2
    assert "--corpus" in err
    code, out, _ = arsjoint.run_cli(
        ["evaluate", "--gold", str(DATA / "claims_dev.jsonl"), "--pred", str(DATA / "claims_dev.jsonl")]
    )
    assert code == 1
