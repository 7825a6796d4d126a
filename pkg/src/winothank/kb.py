"""The thanking-domain knowledge base.

Bundles the four rule programs (semantic roles, candidate relationships,
causal-relation detection, role lifting), the background principles, the
synonym table and a sentiment lexicon in the two-plain-text-file format of
the Hu & Liu opinion word lists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from . import engine, semgraph
from .engine import Atom, Const, Program
from .lexicon import DATA_DIR

DEFAULT_KB_DIR = DATA_DIR / "kb"

CANONICAL_ROLES = ("thanker", "being_thanked", "giver", "given", "helper", "being_helped")
LIFTED_ROLES = ("doing_good", "receiving_good", "owing", "being_owed")
SENTIMENT_ROLES = ("good", "bad")
ALL_ROLES = CANONICAL_ROLES + LIFTED_ROLES + SENTIMENT_ROLES

RELATIONSHIPS = ("owes", "does_good_to", "gives_thanks_to")
CONNECTIVES = ("causal", "conjunctive")
PRONOUN_PROPERTIES = ("doing_good", "receiving_good", "owing", "being_owed")
CONCLUSIONS = ("first", "second")

RULE_FILES = {
    "role_rules": "roles.lp",
    "relationship_rules": "relationships.lp",
    "causal_rules": "causal.lp",
    "lifting_rules": "lifting.lp",
}


class KBError(ValueError):
    pass


@dataclass(frozen=True)
class Principle:
    """One background pattern: when its relationship, connective and pronoun
    property all hold, the pronoun co-refers with one relationship argument."""

    id: int
    relationship: str
    connective: str
    pronoun_property: str
    conclusion: str  # "first" | "second" relationship argument

    def __post_init__(self):
        checks = [
            (self.relationship, RELATIONSHIPS, "relationship"),
            (self.connective, CONNECTIVES, "connective"),
            (self.pronoun_property, PRONOUN_PROPERTIES, "pronounProperty"),
            (self.conclusion, CONCLUSIONS, "conclusion"),
        ]
        for value, allowed, label in checks:
            if value not in allowed:
                raise KBError(f"principle {self.id}: bad {label} {value!r}")


@dataclass(frozen=True)
class KnowledgeBase:
    role_rules: Program
    relationship_rules: Program
    causal_rules: Program
    lifting_rules: Program
    principles: tuple[Principle, ...]
    synonyms: Mapping[str, str]
    positive_words: frozenset[str]
    negative_words: frozenset[str]

    def combined_program(self) -> Program:
        """All four rule layers plus synonym facts, ready to evaluate over a
        graph's facts.  Stratification orders the layers."""
        synonym_facts = tuple(
            Atom("synonym", (Const(s), Const(c))) for s, c in sorted(self.synonyms.items())
        )
        merged = self.role_rules + self.causal_rules + self.relationship_rules + self.lifting_rules
        return Program(merged.rules, merged.facts + synonym_facts)

    def canonicalize(self, word: str) -> str:
        return synonym_canonicalize(word, self.synonyms)


def synonym_canonicalize(word: str, synonyms: Mapping[str, str]) -> str:
    """Map a word to its canonical domain form, identity when unknown."""
    return synonyms.get(word, word)


def _load_word_list(path: Path) -> frozenset[str]:
    words = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith(";"):
                continue
            words.add(line.lower())
    return frozenset(words)


def _load_synonyms(path: Path) -> dict[str, str]:
    synonyms: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise KBError(f"{path}:{lineno}: expected 'surface<TAB>canonical'")
            surface, canonical = parts[0].strip(), parts[1].strip()
            if surface in synonyms:
                raise KBError(f"{path}:{lineno}: duplicate synonym entry {surface!r}")
            synonyms[surface] = canonical
    if not synonyms:
        raise KBError(f"{path}: synonym table is empty")
    for surface, canonical in synonyms.items():
        if synonyms.get(canonical, canonical) != canonical:
            raise KBError(f"synonym chain {surface!r} -> {canonical!r} is not canonical")
    return synonyms


def _load_principles(path: Path) -> tuple[Principle, ...]:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list) or not raw:
        raise KBError(f"{path}: expected a non-empty JSON array")
    principles = []
    seen_ids = set()
    for entry in raw:
        principle = Principle(
            id=int(entry["id"]),
            relationship=entry["relationship"],
            connective=entry["connective"],
            pronoun_property=entry["pronounProperty"],
            conclusion=entry["conclusion"],
        )
        if principle.id in seen_ids:
            raise KBError(f"{path}: duplicate principle id {principle.id}")
        seen_ids.add(principle.id)
        principles.append(principle)
    return tuple(principles)


def _load_rules(path: Path) -> Program:
    try:
        program = engine.parse_program(path.read_text(encoding="utf-8"))
    except engine.EngineError as exc:
        raise KBError(f"{path.name}: {exc}") from exc
    return program


def load_kb(directory: str | Path = DEFAULT_KB_DIR) -> KnowledgeBase:
    directory = Path(directory)
    paths = {
        name: directory / filename for name, filename in RULE_FILES.items()
    }
    for extra in ("principles.json", "synonyms.tsv", "positive-words.txt", "negative-words.txt"):
        paths[extra] = directory / extra
    for name, path in paths.items():
        if not path.exists():
            raise KBError(f"knowledge base is missing {path.name} in {directory}")

    kb = KnowledgeBase(
        role_rules=_load_rules(paths["role_rules"]),
        relationship_rules=_load_rules(paths["relationship_rules"]),
        causal_rules=_load_rules(paths["causal_rules"]),
        lifting_rules=_load_rules(paths["lifting_rules"]),
        principles=_load_principles(paths["principles.json"]),
        synonyms=_load_synonyms(paths["synonyms.tsv"]),
        positive_words=_load_word_list(paths["positive-words.txt"]),
        negative_words=_load_word_list(paths["negative-words.txt"]),
    )

    try:
        engine.stratify(kb.combined_program())
    except engine.EngineError as exc:
        raise KBError(f"knowledge base does not stratify: {exc}") from exc

    head_roles = set()
    for rule in kb.role_rules.rules:
        if rule.head.pred == "has_s" and len(rule.head.args) == 3:
            role = rule.head.args[2]
            if isinstance(role, Const):
                head_roles.add(role.value)
    missing = set(CANONICAL_ROLES) - head_roles
    if missing:
        raise KBError(f"role rules never derive: {sorted(missing)}")
    return kb


def sentiment_role_facts(graph: semgraph.SemanticGraph, kb: KnowledgeBase) -> list[Atom]:
    """Polarity facts for graph nodes whose (synonym-canonicalized) token is
    in the sentiment lexicon."""
    facts = []
    for node in sorted(graph.nodes()):
        token = kb.canonicalize(semgraph.node_token(node))
        if token in kb.positive_words:
            facts.append(Atom("has_s", (Const(node), Const("polarity"), Const("good"))))
        elif token in kb.negative_words:
            facts.append(Atom("has_s", (Const(node), Const("polarity"), Const("bad"))))
    return facts
