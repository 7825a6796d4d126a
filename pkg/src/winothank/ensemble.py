"""Combine the symbolic resolver with a pluggable statistical predictor.

The flow is purely categorical: a single symbolic answer is final, and
only "no answer" / "multiple answers" fall through to the predictor.
Predictors speak one request shape, which doubles as the line format of
the subprocess wire protocol (newline-delimited JSON over stdin/stdout).
"""

from __future__ import annotations

import hashlib
import json
import subprocess
from dataclasses import dataclass
from typing import IO, Iterable

from .corpus import PLACEHOLDER, SchemaItem
from .resolver import Multiple, NoAnswer, ResolutionOutcome, Single


class PredictorError(RuntimeError):
    """A predictor could not produce a prediction."""


class ProtocolError(PredictorError):
    """A subprocess worker violated the wire protocol."""


@dataclass(frozen=True)
class Prediction:
    choice: int
    score: float | None = None

    def __post_init__(self):
        if self.choice not in (0, 1):
            raise PredictorError(f"prediction choice must be 0 or 1, got {self.choice}")


@dataclass(frozen=True)
class PredictionRequest:
    id: str
    variant: str
    sentence: str
    candidates: tuple[str, str]
    placeholder: str = PLACEHOLDER

    @classmethod
    def from_item(cls, item: SchemaItem, variant: str = "original", parent_id: str | None = None):
        return cls(
            id=parent_id if parent_id is not None else item.id,
            variant=variant,
            sentence=item.sentence,
            candidates=item.candidates,
        )

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "variant": self.variant,
            "sentence": self.sentence,
            "placeholder": self.placeholder,
            "candidates": list(self.candidates),
        }


class Predictor:
    """Anything that maps a request to a Prediction; deterministic given its
    own configuration, and loud on failure."""

    def predict(self, request: PredictionRequest) -> Prediction:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class RecordedPredictor(Predictor):
    """Lookup table keyed by (item id, variant kind)."""

    def __init__(self, table: dict[tuple[str, str], int]):
        self.table = dict(table)

    def predict(self, request: PredictionRequest) -> Prediction:
        key = (request.id, request.variant)
        if key not in self.table:
            raise PredictorError(f"no recorded prediction for {key!r}")
        return Prediction(self.table[key])


def recorded_predictor_load(stream: IO[str] | Iterable[str]) -> RecordedPredictor:
    """Read JSON Lines of {itemId, variant, choice}; duplicates are errors."""
    table: dict[tuple[str, str], int] = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
            key = (str(raw["itemId"]), str(raw["variant"]))
            choice = int(raw["choice"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise PredictorError(f"line {lineno}: bad recorded prediction ({exc})") from exc
        if key in table:
            raise PredictorError(f"line {lineno}: duplicate recorded prediction for {key!r}")
        if choice not in (0, 1):
            raise PredictorError(f"line {lineno}: choice must be 0 or 1")
        table[key] = choice
    return RecordedPredictor(table)


class BaselinePredictor(Predictor):
    """Constant or seeded pseudo-random choices; no model anywhere."""

    def __init__(self, constant: int | None = None, seed: int = 0):
        self.constant = constant
        self.seed = seed

    def predict(self, request: PredictionRequest) -> Prediction:
        if self.constant is not None:
            return Prediction(self.constant)
        digest = hashlib.blake2s(
            f"{self.seed}:{request.id}:{request.variant}".encode()
        ).digest()
        return Prediction(digest[0] & 1)


class SubprocessPredictor(Predictor):
    """Drives a worker process over the line protocol; one request in
    flight at a time."""

    def __init__(self, argv: list[str]):
        self.argv = list(argv)
        self.process = subprocess.Popen(
            self.argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def predict(self, request: PredictionRequest) -> Prediction:
        if self.process.poll() is not None:
            raise ProtocolError(f"worker {self.argv} exited with {self.process.returncode}")
        assert self.process.stdin is not None and self.process.stdout is not None
        self.process.stdin.write(json.dumps(request.to_wire()) + "\n")
        self.process.stdin.flush()
        line = self.process.stdout.readline()
        if not line:
            raise ProtocolError(f"worker {self.argv} closed its output stream")
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"worker sent a non-JSON line: {line!r}") from exc
        if not isinstance(raw, dict) or "choice" not in raw or "id" not in raw:
            raise ProtocolError(f"worker response lacks id/choice: {line!r}")
        if raw["id"] != request.id:
            raise ProtocolError(
                f"worker answered out of order: sent {request.id!r}, got {raw['id']!r}"
            )
        if raw["choice"] not in (0, 1):
            raise ProtocolError(f"worker choice must be 0 or 1: {line!r}")
        score = raw.get("score")
        return Prediction(int(raw["choice"]), None if score is None else float(score))

    def close(self) -> None:
        if self.process.poll() is None:
            if self.process.stdin is not None:
                self.process.stdin.close()
            try:
                self.process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.process.kill()
                self.process.wait()


def combine(
    kb_outcome: ResolutionOutcome, predictor: Predictor, item: SchemaItem
) -> Prediction:
    """A single symbolic answer wins outright; otherwise defer to the
    predictor (its failures propagate only on this branch)."""
    if isinstance(kb_outcome, Single):
        return Prediction(kb_outcome.choice)
    return predictor.predict(PredictionRequest.from_item(item))
