"""Service configuration.

In stub mode no model is ever loaded; the deterministic stubs answer every
endpoint, which is what the cross-component contract tests run against.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

DEFAULT_MODELS = {
    "embed": "sentence-transformers/all-MiniLM-L6-v2",
    "sentiment": "cardiffnlp/twitter-roberta-base-sentiment",
    "acceptability": "textattack/distilbert-base-uncased-CoLA",
    "verbalize": "t5-base",
    "fill_mask": "roberta-base",
}

# How a sentiment model's raw labels map onto the wire labels.
DEFAULT_SENTIMENT_LABELS = {
    "LABEL_0": "NEG",
    "LABEL_1": "NEU",
    "LABEL_2": "POS",
    "negative": "NEG",
    "neutral": "NEU",
    "positive": "POS",
}

# Label of the grammatical class in the acceptability classifier.
DEFAULT_ACCEPTABLE_LABEL = "LABEL_1"


@dataclass
class ServiceConfig:
    port: int = 8750
    stub_mode: bool = True
    seed: int = 13
    max_batch: int = 32
    device: str = "cpu"
    models: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_MODELS))
    sentiment_labels: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_SENTIMENT_LABELS)
    )
    acceptable_label: str = DEFAULT_ACCEPTABLE_LABEL
    verbalize_template: str = "translate triple to text: {s} | {p} | {o}"

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        cfg = cls(
            port=int(os.environ.get("SCORER_PORT", 8750)),
            stub_mode=os.environ.get("SCORER_STUB", "1") not in ("0", "false", "no"),
            seed=int(os.environ.get("SCORER_SEED", 13)),
            max_batch=int(os.environ.get("SCORER_MAX_BATCH", 32)),
            device=os.environ.get("SCORER_DEVICE", "cpu"),
        )
        for capability in cfg.models:
            override = os.environ.get(f"SCORER_MODEL_{capability.upper()}")
            if override:
                cfg.models[capability] = override
        return cfg
