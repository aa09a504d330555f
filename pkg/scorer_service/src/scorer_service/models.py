"""Lazy pretrained-model registry for real (non-stub) serving.

Models load on first use, one at a time behind a lock; inference is also
serialized per process since CPU-bound transformer calls gain nothing from
concurrent execution. A capability whose model cannot be loaded stays
unavailable and keeps its error message for /health consumers.
"""

from __future__ import annotations

import threading

from .config import ServiceConfig


class CapabilityUnavailable(Exception):
    def __init__(self, capability: str, reason: str):
        super().__init__(f"{capability}: {reason}")
        self.capability = capability
        self.reason = reason


class ModelRegistry:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self._lock = threading.Lock()
        self._loaded: dict[str, object] = {}
        self._errors: dict[str, str] = {}

    def ready(self, capability: str) -> bool:
        return capability in self._loaded

    def error(self, capability: str) -> str | None:
        return self._errors.get(capability)

    def _get(self, capability: str):
        with self._lock:
            if capability in self._loaded:
                return self._loaded[capability]
            if capability in self._errors:
                raise CapabilityUnavailable(capability, self._errors[capability])
            try:
                model = self._load(capability)
            except Exception as exc:  # model hub, torch, or checkpoint errors
                self._errors[capability] = str(exc)
                raise CapabilityUnavailable(capability, str(exc)) from exc
            self._loaded[capability] = model
            return model

    def _load(self, capability: str):
        name = self.config.models[capability]
        device = self.config.device
        if capability == "embed":
            from sentence_transformers import SentenceTransformer

            return SentenceTransformer(name, device=device)
        from transformers import pipeline

        if capability == "sentiment":
            return pipeline("text-classification", model=name, device=device, top_k=1)
        if capability == "acceptability":
            return pipeline("text-classification", model=name, device=device, top_k=None)
        if capability == "verbalize":
            return pipeline("text2text-generation", model=name, device=device)
        if capability == "fill_mask":
            return pipeline("fill-mask", model=name, device=device)
        raise ValueError(f"unknown capability {capability}")

    # --- inference ------------------------------------------------------------

    def embed(self, texts: list[str]) -> list[list[float]]:
        model = self._get("embed")
        with self._lock:
            vectors = model.encode(texts, normalize_embeddings=True)
        return [[float(v) for v in vec] for vec in vectors]

    def sentiment(self, texts: list[str]) -> list[str]:
        model = self._get("sentiment")
        mapping = self.config.sentiment_labels
        with self._lock:
            raw = model(texts)
        labels = []
        for result in raw:
            best = result[0] if isinstance(result, list) else result
            labels.append(mapping.get(best["label"], "NEU"))
        return labels

    def acceptability(self, texts: list[str]) -> list[float]:
        model = self._get("acceptability")
        accept = self.config.acceptable_label
        with self._lock:
            raw = model(texts)
        scores = []
        for result in raw:
            candidates = result if isinstance(result, list) else [result]
            score = 0.0  # unknown label layouts score as non-grammatical
            for c in candidates:
                if c["label"] == accept:
                    score = float(c["score"])
            scores.append(min(max(score, 0.0), 1.0))
        return scores

    def verbalize(self, triples: list[tuple[str, str, str]]) -> list[str]:
        model = self._get("verbalize")
        prompts = [
            self.config.verbalize_template.format(s=s, p=p, o=o) for s, p, o in triples
        ]
        with self._lock:
            raw = model(prompts, max_length=64)
        sentences = []
        for result in raw:
            text = result["generated_text"].strip()
            if text and text[-1] not in ".!?":
                text += "."
            sentences.append(text[0].upper() + text[1:] if text else text)
        return sentences

    def fill_mask(self, texts: list[str], k: int) -> list[list[str]]:
        model = self._get("fill_mask")
        mask_token = model.tokenizer.mask_token
        out = []
        with self._lock:
            for text in texts:
                prepared = text.replace("<mask>", mask_token)
                results = model(prepared, top_k=k)
                out.append([r["token_str"].strip() for r in results])
        return out
