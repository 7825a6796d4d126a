"""Abstract a semantic graph into a high-level representation and resolve
the pronoun by matching background principles against it.

The representation captures, for one sentence: the two candidates' role
sets, the relationship holding between them (with argument order), whether
the pronoun's part is connected causally or conjunctively, and the
pronoun's own (lifted) role set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import engine, kb as kb_mod, semgraph
from .engine import Atom, Const, Var
from .kb import KnowledgeBase, LIFTED_ROLES, Principle, RELATIONSHIPS


@dataclass(frozen=True)
class Relationship:
    name: str
    args: tuple[str, str]  # entity node ids, ordered


@dataclass(frozen=True)
class HighLevelRepresentation:
    candidates: tuple[str, str]  # node ids, in SchemaItem order
    pronoun: str
    candidate_roles: tuple[frozenset[str], frozenset[str]]  # base roles only
    relationship: Relationship | None
    connective: str  # "causal" | "conjunctive"
    pronoun_roles: frozenset[str]  # base plus lifted roles

    def to_dict(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "pronoun": self.pronoun,
            "candidateRoles": [sorted(r) for r in self.candidate_roles],
            "relationship": (
                {"name": self.relationship.name, "args": list(self.relationship.args)}
                if self.relationship
                else None
            ),
            "connective": self.connective,
            "pronounRoles": sorted(self.pronoun_roles),
        }


@dataclass(frozen=True)
class Single:
    choice: int


@dataclass(frozen=True)
class NoAnswer:
    pass


@dataclass(frozen=True)
class Multiple:
    choices: frozenset[int]

    def __post_init__(self):
        if len(self.choices) < 2:
            raise ValueError("Multiple requires at least two distinct choices")


ResolutionOutcome = Single | NoAnswer | Multiple


def outcome_to_dict(outcome: ResolutionOutcome) -> dict:
    if isinstance(outcome, Single):
        return {"kind": "single", "choice": outcome.choice}
    if isinstance(outcome, Multiple):
        return {"kind": "multiple", "choices": sorted(outcome.choices)}
    return {"kind": "no_answer"}


def _roles_of(store: engine.FactStore, node: str) -> frozenset[str]:
    pattern = Atom("has_s", (Const(node), Const("semantic_role"), Var("R")))
    return frozenset(m["R"] for m in engine.query(store, pattern))


def abstract(graph: semgraph.SemanticGraph, kb: KnowledgeBase) -> HighLevelRepresentation:
    """Run the role/causal/relationship/lifting rules over the graph facts
    and read the resulting representation out of the model."""
    facts = semgraph.to_facts(graph) + kb_mod.sentiment_role_facts(graph, kb)
    store = engine.evaluate(kb.combined_program(), facts)

    a, b = graph.candidates
    lifted = set(LIFTED_ROLES)
    roles_a = _roles_of(store, a)
    roles_b = _roles_of(store, b)

    relationships = []
    for name in RELATIONSHIPS:
        for x, y in ((a, b), (b, a)):
            if Atom("has_s", (Const(x), Const(name), Const(y))) in store:
                relationships.append(Relationship(name, (x, y)))
    # a unique relationship between the candidates is required; conflicting
    # derivations (degenerate role assignments) leave it unset
    relationship = relationships[0] if len(relationships) == 1 else None

    causal = store.exists(Atom("has_s", (engine.WILDCARD, Const("relation"), Const("causer"))))
    return HighLevelRepresentation(
        candidates=(a, b),
        pronoun=graph.pronoun,
        candidate_roles=(roles_a - lifted, roles_b - lifted),
        relationship=relationship,
        connective="causal" if causal else "conjunctive",
        pronoun_roles=_roles_of(store, graph.pronoun),
    )


def match_principles(
    rep: HighLevelRepresentation, principles: Sequence[Principle]
) -> list[tuple[int, int]]:
    """Principles whose relationship (with argument order), connective and
    pronoun property all hold, as (principle id, concluded candidate index)."""
    matches = []
    if rep.relationship is None:
        return matches
    for principle in principles:
        if principle.relationship != rep.relationship.name:
            continue
        if principle.connective != rep.connective:
            continue
        if principle.pronoun_property not in rep.pronoun_roles:
            continue
        entity = rep.relationship.args[0 if principle.conclusion == "first" else 1]
        matches.append((principle.id, rep.candidates.index(entity)))
    return matches


def resolve(
    graph: semgraph.SemanticGraph,
    kb: KnowledgeBase,
    principles: Sequence[Principle] | None = None,
) -> ResolutionOutcome:
    rep = abstract(graph, kb)
    matches = match_principles(rep, kb.principles if principles is None else principles)
    choices = {index for _pid, index in matches}
    if not choices:
        return NoAnswer()
    if len(choices) == 1:
        return Single(choices.pop())
    return Multiple(frozenset(choices))


def resolution_report(graph: semgraph.SemanticGraph, kb: KnowledgeBase) -> dict:
    """Audit record: outcome plus the evidence it rests on."""
    rep = abstract(graph, kb)
    matches = match_principles(rep, kb.principles)
    choices = {index for _pid, index in matches}
    if not choices:
        outcome: ResolutionOutcome = NoAnswer()
    elif len(choices) == 1:
        outcome = Single(next(iter(choices)))
    else:
        outcome = Multiple(frozenset(choices))
    return {
        "itemId": graph.item_id,
        "outcome": outcome_to_dict(outcome),
        "matchedPrinciples": [
            {"id": pid, "choice": index} for pid, index in matches
        ],
        "representation": rep.to_dict(),
    }
