"""K-Parser-style semantic graphs and their conversion to engine facts.

Graphs are authored externally (or by hand for fixtures) and ingested from
JSON; rebuilding the parser that produces them is out of scope here.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import IO, Iterable

from .engine import Atom, Const

NODE_ID_RE = re.compile(r"^(?P<token>[a-z][a-z0-9_]*)-(?P<index>[1-9][0-9]*)$")
CONSTANT_RE = re.compile(r"^[a-z][a-z0-9_]*$")


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class NodeId:
    token: str
    index: int

    def __post_init__(self):
        if not self.token:
            raise GraphError("node token must be non-empty")
        if self.index < 1:
            raise GraphError(f"node index must be >= 1, got {self.index}")

    def __str__(self) -> str:
        return f"{self.token}-{self.index}"


def node_token(identifier: str) -> str:
    """Token part of a node id; bare constants are their own token."""
    m = NODE_ID_RE.match(identifier)
    return m.group("token") if m else identifier


@dataclass(frozen=True)
class SemanticGraph:
    item_id: str
    triples: frozenset[tuple[str, str, str]]
    pronoun: str
    candidates: tuple[str, str]

    def __post_init__(self):
        if not self.triples:
            raise GraphError(f"graph {self.item_id!r} has no triples")
        if self.candidates[0] == self.candidates[1]:
            raise GraphError(f"graph {self.item_id!r} has identical candidates")
        mentioned = self.nodes()
        for label, node in [("pronoun", self.pronoun)] + [
            ("candidate", c) for c in self.candidates
        ]:
            if node not in mentioned:
                raise GraphError(
                    f"graph {self.item_id!r}: {label} node {node!r} does not"
                    " appear in any triple"
                )

    def nodes(self) -> set[str]:
        out = set()
        for s, _rel, o in self.triples:
            out.add(s)
            out.add(o)
        return out


def load_graph(stream: IO[str] | str) -> SemanticGraph:
    text = stream if isinstance(stream, str) else stream.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"graph is not valid JSON: {exc}") from exc
    for field in ("id", "triples", "pronoun", "candidates"):
        if field not in raw:
            raise GraphError(f"graph is missing field {field!r}")
    triples = set()
    for entry in raw["triples"]:
        if not (isinstance(entry, list) and len(entry) == 3):
            raise GraphError(f"triple must be a [subject, relation, object] list: {entry!r}")
        s, rel, o = (str(x) for x in entry)
        for part in (s, rel, o):
            if not (NODE_ID_RE.match(part) or CONSTANT_RE.match(part)):
                raise GraphError(f"malformed identifier {part!r} in triple {entry!r}")
        triples.add((s, rel, o))  # duplicates collapse silently
    candidates = [str(c) for c in raw["candidates"]]
    if len(candidates) != 2:
        raise GraphError(f"expected 2 candidates, got {len(candidates)}")
    return SemanticGraph(
        item_id=str(raw["id"]),
        triples=frozenset(triples),
        pronoun=str(raw["pronoun"]),
        candidates=(candidates[0], candidates[1]),
    )


def dump_graph(graph: SemanticGraph) -> str:
    return json.dumps(
        {
            "id": graph.item_id,
            "triples": [list(t) for t in sorted(graph.triples)],
            "pronoun": graph.pronoun,
            "candidates": list(graph.candidates),
        },
        indent=2,
    )


def to_facts(graph: SemanticGraph) -> list[Atom]:
    """Ground atoms for the engine: one has_s per triple plus the pronoun
    and candidate markers, in sorted order."""
    facts = [
        Atom("has_s", (Const(s), Const(rel), Const(o))) for s, rel, o in graph.triples
    ]
    facts.append(Atom("pronoun", (Const(graph.pronoun),)))
    facts.extend(Atom("is_candidate", (Const(c),)) for c in graph.candidates)
    return sorted(facts, key=str)


def relabel_candidates(graph: SemanticGraph, tokens: tuple[str, str]) -> SemanticGraph:
    """Rename the candidate nodes' tokens, e.g. to mirror a sentence whose
    candidate names were switched or replaced.  Indices are preserved."""
    if tokens[0].lower() == tokens[1].lower():
        raise GraphError(f"relabeling collapses candidates: {tokens!r}")
    mapping = {}
    for node, token in zip(graph.candidates, tokens):
        m = NODE_ID_RE.match(node)
        clean = token.lower().replace(" ", "_")
        mapping[node] = f"{clean}-{m.group('index')}" if m else clean

    def rename(x: str) -> str:
        return mapping.get(x, x)

    return replace(
        graph,
        triples=frozenset((rename(s), rel, rename(o)) for s, rel, o in graph.triples),
        candidates=(mapping[graph.candidates[0]], mapping[graph.candidates[1]]),
        pronoun=rename(graph.pronoun),
    )


def load_graph_file(path) -> SemanticGraph:
    with open(path, encoding="utf-8") as handle:
        return load_graph(handle)
