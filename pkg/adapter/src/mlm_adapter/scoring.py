"""Candidate scorers.

Every scorer maps a filled-in sentence (the candidate substituted at the
placeholder) to a log-score; the worker picks the argmax, breaking ties
toward index 0, and reports the score gap.  The masked-LM scorer is the
real thing; the lexical stub is a deterministic content-sensitive stand-in
so the protocol and the equivariance properties are testable without
model weights.
"""

from __future__ import annotations

import hashlib
import re
from typing import Callable, Sequence

Answerer = Callable[[str, str, Sequence[str]], tuple[int, float | None]]


def _fill(sentence: str, placeholder: str, candidate: str) -> str:
    pattern = re.compile(rf"(?<![\w]){re.escape(placeholder)}(?![\w])")
    if not pattern.search(sentence):
        raise ValueError(f"sentence has no {placeholder!r} placeholder: {sentence!r}")
    return pattern.sub(candidate.replace("\\", "\\\\"), sentence, count=1)


def normalize(token_log_probs: Sequence[float], mode: str) -> float:
    """Aggregate per-token log-probabilities: "sum" or length-normalized
    "mean" (comparable across candidates of different token counts)."""
    if not token_log_probs:
        raise ValueError("no scored tokens")
    total = float(sum(token_log_probs))
    if mode == "sum":
        return total
    if mode == "mean":
        return total / len(token_log_probs)
    raise ValueError(f"unknown normalization {mode!r}")


class LexicalStubScorer:
    """Deterministic pseudo-score from the filled sentence's content.

    Equivariant by construction: swapping the candidates swaps the filled
    sentences and hence the scores.
    """

    def score(self, filled_sentence: str) -> float:
        digest = hashlib.sha256(filled_sentence.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") / 2**64


class MaskedLMScorer:
    """Score a candidate by masking its tokens in the filled sentence and
    accumulating the model's log-probabilities of the true tokens."""

    def __init__(self, model_name: str, normalize_mode: str = "mean"):
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self.torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForMaskedLM.from_pretrained(model_name)
        self.model.eval()
        self.normalize_mode = normalize_mode
        if self.tokenizer.mask_token_id is None:
            raise ValueError(f"{model_name!r} has no mask token")

    def score_candidate(self, left: str, candidate: str, right: str) -> float:
        torch = self.torch
        full = left + candidate + right
        encoding = self.tokenizer(full, return_offsets_mapping=True, return_tensors="pt")
        offsets = encoding.pop("offset_mapping")[0].tolist()
        span = (len(left), len(left) + len(candidate))
        positions = [
            i
            for i, (start, end) in enumerate(offsets)
            if start < span[1] and end > span[0] and end > start
        ]
        if not positions:
            raise ValueError(f"could not locate candidate {candidate!r} in tokens")
        input_ids = encoding["input_ids"].clone()
        true_ids = [int(input_ids[0, i]) for i in positions]
        for i in positions:
            input_ids[0, i] = self.tokenizer.mask_token_id
        with torch.no_grad():
            logits = self.model(input_ids=input_ids, attention_mask=encoding["attention_mask"]).logits
        log_probs = torch.log_softmax(logits[0], dim=-1)
        token_scores = [float(log_probs[i, tid]) for i, tid in zip(positions, true_ids)]
        return normalize(token_scores, self.normalize_mode)


def constant_answerer(choice: int) -> Answerer:
    if choice not in (0, 1):
        raise ValueError(f"constant stub choice must be 0 or 1, got {choice}")

    def answer(sentence: str, placeholder: str, candidates: Sequence[str]):
        return choice, None

    return answer


def scorer_answerer(scorer: LexicalStubScorer) -> Answerer:
    def answer(sentence: str, placeholder: str, candidates: Sequence[str]):
        scores = [scorer.score(_fill(sentence, placeholder, c)) for c in candidates]
        choice = 0 if scores[0] >= scores[1] else 1  # ties go to index 0
        return choice, scores[choice] - scores[1 - choice]

    return answer


def masked_lm_answerer(scorer: MaskedLMScorer) -> Answerer:
    def answer(sentence: str, placeholder: str, candidates: Sequence[str]):
        pattern = re.compile(rf"(?<![\w]){re.escape(placeholder)}(?![\w])")
        match = pattern.search(sentence)
        if match is None:
            raise ValueError(f"sentence has no {placeholder!r} placeholder")
        left, right = sentence[: match.start()], sentence[match.end() :]
        scores = [scorer.score_candidate(left, c, right) for c in candidates]
        choice = 0 if scores[0] >= scores[1] else 1
        return choice, scores[choice] - scores[1 - choice]

    return answer
