"""Python bindings for the arsjoint C++ core."""

import json

from ._arsjoint import (
    Claim,
    ContractViolation,
    Document,
    Model,
    TrainingError,
    ValidationError,
    joint_loss,
    load_claims,
    load_corpus,
    parse_claims,
    parse_corpus,
    retrieve,
    rr_divergence,
    rr_loss,
    run_cli,
    sample_probability,
    tokenize,
)
from . import _arsjoint

__all__ = [
    "Claim",
    "ContractViolation",
    "Document",
    "Model",
    "TrainingError",
    "ValidationError",
    "evaluate",
    "joint_loss",
    "load_claims",
    "load_corpus",
    "parse_claims",
    "parse_corpus",
    "predict",
    "retrieve",
    "rr_divergence",
    "rr_loss",
    "run_cli",
    "sample_probability",
    "tokenize",
    "train",
]


def train(documents, claims, **config):
    """Train on in-memory documents and claims.

    Keyword arguments override the training config (epochs, dim, seed, lr1,
    lr2, k_tra, lambda1..3, gamma, ...). Returns (model, epoch_logs).
    """
    model, history = _arsjoint.train(documents, claims, json.dumps(config) if config else "")
    return model, [json.loads(line) for line in history]


def predict(model, claims, documents, k_ret=30):
    """Predictions as a list of {id, evidence} records."""
    text = model.predict_jsonl(claims, documents, k_ret)
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def evaluate(predictions, gold):
    """Four-mode metrics for prediction records against gold claims."""
    text = "".join(json.dumps(p) + "\n" for p in predictions)
    return json.loads(_arsjoint.evaluate_jsonl(text, gold))
