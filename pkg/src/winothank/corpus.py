"""WinoGrande-format corpus ingestion, keyword domain extraction, pair
detection and domain statistics."""

from __future__ import annotations

import difflib
import json
import logging
import re
from dataclasses import dataclass, replace
from typing import IO, Iterable, Mapping

from .lexicon import NamesLexicon

log = logging.getLogger(__name__)

PLACEHOLDER = "_"
_PLACEHOLDER_RE = re.compile(r"(?<![\w])_(?![\w])")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class SchemaItem:
    """One Winograd-style question: a sentence with a pronoun placeholder,
    two candidates and the index of the correct one."""

    id: str
    sentence: str
    candidates: tuple[str, str]
    answer: int
    pair_id: str | None = None
    source: str = ""

    def __post_init__(self):
        count = len(_PLACEHOLDER_RE.findall(self.sentence))
        if count != 1:
            raise CorpusError(
                f"item {self.id!r}: expected exactly one {PLACEHOLDER!r} placeholder,"
                f" found {count}"
            )
        if not self.candidates[0] or not self.candidates[1]:
            raise CorpusError(f"item {self.id!r}: candidates must be non-empty")
        if self.candidates[0] == self.candidates[1]:
            raise CorpusError(f"item {self.id!r}: candidates must differ")
        if self.answer not in (0, 1):
            raise CorpusError(f"item {self.id!r}: answer must be 0 or 1, got {self.answer}")

    @property
    def answer_text(self) -> str:
        return self.candidates[self.answer]

    def to_winogrande(self) -> dict:
        return {
            "qID": self.id,
            "sentence": self.sentence,
            "option1": self.candidates[0],
            "option2": self.candidates[1],
            "answer": str(self.answer + 1),
        }


@dataclass(frozen=True)
class DomainSpec:
    name: str
    include_keywords: tuple[str, ...]
    exclude_phrases: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.include_keywords:
            raise CorpusError("domain spec needs at least one keyword")
        for word in self.include_keywords + self.exclude_phrases:
            if word != word.lower():
                raise CorpusError(f"domain keywords must be lowercase: {word!r}")


THANKING_DOMAIN = DomainSpec(
    name="thanking",
    include_keywords=("thank", "grateful"),
    exclude_phrases=("thanks to", "thanks in no small part to"),
)


@dataclass(frozen=True)
class DomainStats:
    total: int
    name_candidate_count: int
    paired_count: int

    def __post_init__(self):
        if self.name_candidate_count > self.total or self.paired_count > self.total:
            raise CorpusError("stats counts cannot exceed the total")
        if self.paired_count % 2:
            raise CorpusError("paired count must be even")

    @property
    def name_candidate_fraction(self) -> float:
        return self.name_candidate_count / self.total if self.total else 0.0

    @property
    def paired_fraction(self) -> float:
        return self.paired_count / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "name_candidate_count": self.name_candidate_count,
            "name_candidate_fraction": self.name_candidate_fraction,
            "paired_count": self.paired_count,
            "paired_fraction": self.paired_fraction,
        }


_ANSWER_MAP = {"1": 0, "2": 1}


def load_corpus(stream: IO[str] | Iterable[str], source: str = "") -> list[SchemaItem]:
    """Read WinoGrande-format JSON Lines into SchemaItems.

    Malformed JSON or an invalid answer aborts with the line number; a line
    whose sentence lacks the placeholder is rejected with a logged
    diagnostic and loading continues.
    """
    items: list[SchemaItem] = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
        try:
            fields = {k: raw[k] for k in ("qID", "sentence", "option1", "option2", "answer")}
        except KeyError as exc:
            raise CorpusError(f"line {lineno}: missing field {exc.args[0]!r}") from exc
        if fields["answer"] not in _ANSWER_MAP:
            raise CorpusError(
                f"line {lineno}: answer must be \"1\" or \"2\", got {fields['answer']!r}"
            )
        try:
            items.append(
                SchemaItem(
                    id=str(fields["qID"]),
                    sentence=str(fields["sentence"]),
                    candidates=(str(fields["option1"]), str(fields["option2"])),
                    answer=_ANSWER_MAP[fields["answer"]],
                    source=source,
                )
            )
        except CorpusError as exc:
            log.warning("line %d rejected: %s", lineno, exc)
    return items


def dump_corpus(items: Iterable[SchemaItem], stream: IO[str]) -> None:
    for item in items:
        stream.write(json.dumps(item.to_winogrande()) + "\n")


def extract_domain(items: Iterable[SchemaItem], spec: DomainSpec = THANKING_DOMAIN) -> list[SchemaItem]:
    """Keep items whose sentence contains a domain keyword and none of the
    exclusion phrases.  Exclusion wins; matching is case-insensitive."""
    kept = []
    for item in items:
        lowered = item.sentence.lower()
        if not any(k in lowered for k in spec.include_keywords):
            continue
        if any(p in lowered for p in spec.exclude_phrases):
            continue
        kept.append(item)
    return kept


def _token_diff_spans(a: str, b: str) -> int:
    """Number of contiguous differing spans between two token sequences
    (0 = identical, 1 = a single edited span, ...)."""
    matcher = difflib.SequenceMatcher(a=a.split(), b=b.split(), autojunk=False)
    return sum(1 for op, *_ in matcher.get_opcodes() if op != "equal")


def pairable(a: SchemaItem, b: SchemaItem) -> bool:
    """Two items form a schema pair when their candidate sets match and the
    sentences differ in exactly one contiguous token span."""
    if frozenset(a.candidates) != frozenset(b.candidates):
        return False
    return _token_diff_spans(a.sentence, b.sentence) == 1


def detect_pairs(items: Iterable[SchemaItem]) -> dict[str, str | None]:
    """Greedy first-fit pairing over the item order; each item joins at most
    one pair and the result maps item id -> pair id (or None)."""
    items = list(items)
    pairing: dict[str, str | None] = {item.id: None for item in items}
    counter = 0
    for i, item in enumerate(items):
        if pairing[item.id] is not None:
            continue
        for other in items[i + 1 :]:
            if pairing[other.id] is not None or other.id == item.id:
                continue
            if pairable(item, other):
                counter += 1
                pair_id = f"pair-{counter:03d}"
                pairing[item.id] = pair_id
                pairing[other.id] = pair_id
                break
    return pairing


def assign_pairs(items: Iterable[SchemaItem]) -> list[SchemaItem]:
    items = list(items)
    pairing = detect_pairs(items)
    return [replace(item, pair_id=pairing[item.id]) for item in items]


def domain_stats(items: Iterable[SchemaItem], names: NamesLexicon) -> DomainStats:
    items = list(items)
    pairing = detect_pairs(items)
    return DomainStats(
        total=len(items),
        name_candidate_count=sum(
            1 for it in items if it.candidates[0] in names and it.candidates[1] in names
        ),
        paired_count=sum(1 for pid in pairing.values() if pid is not None),
    )
