from __future__ import annotations

import json

import pytest

from winothank.engine import atom
from winothank.semgraph import (
    GraphError,
    NodeId,
    SemanticGraph,
    dump_graph,
    load_graph,
    node_token,
    relabel_candidates,
    to_facts,
)


def _graph_json(**overrides):
    payload = {
        "id": "g1",
        "triples": [
            ["thanked-10", "agent", "she-9"],
            ["thanked-10", "instance_of", "thank"],
            ["met-4", "recipient", "sam-5"],
            ["met-4", "agent", "tom-1"],
        ],
        "pronoun": "she-9",
        "candidates": ["tom-1", "sam-5"],
    }
    payload.update(overrides)
    return json.dumps(payload)


def test_load_kayla_fixture(graphs):
    graph = graphs["thanking-p2-a"]
    assert graph.pronoun == "she-9"
    assert graph.candidates == ("kayla-1", "jennifer-7")
    assert ("cooked-2", "agent", "kayla-1") in graph.triples


def test_load_rejects_unknown_pronoun_node():
    with pytest.raises(GraphError, match="ghost-3"):
        load_graph(_graph_json(pronoun="ghost-3"))


def test_load_rejects_unknown_candidate_node():
    with pytest.raises(GraphError, match="nobody-8"):
        load_graph(_graph_json(candidates=["tom-1", "nobody-8"]))


def test_load_rejects_empty_triples():
    with pytest.raises(GraphError):
        load_graph(_graph_json(triples=[]))


def test_load_rejects_identical_candidates():
    with pytest.raises(GraphError, match="identical"):
        load_graph(_graph_json(candidates=["tom-1", "tom-1"]))


def test_duplicate_triples_collapse_silently():
    doubled = _graph_json(
        triples=[
            ["thanked-10", "agent", "she-9"],
            ["thanked-10", "agent", "she-9"],
            ["met-4", "recipient", "sam-5"],
            ["met-4", "agent", "tom-1"],
        ]
    )
    graph = load_graph(doubled)
    assert len(graph.triples) == 3


def test_node_id_rendering():
    assert str(NodeId("thanked", 10)) == "thanked-10"
    with pytest.raises(GraphError):
        NodeId("thanked", 0)
    assert node_token("thanked-10") == "thanked"
    assert node_token("thank") == "thank"  # bare constants are their own token


def test_to_facts_direct_mapping():
    graph = load_graph(_graph_json())
    facts = to_facts(graph)
    assert atom("has_s", "thanked-10", "agent", "she-9") in facts
    assert atom("pronoun", "she-9") in facts


def test_to_facts_counts(graphs):
    graph = graphs["thanking-p2-a"]
    facts = to_facts(graph)
    preds = [f.pred for f in facts]
    assert preds.count("pronoun") == 1
    assert preds.count("is_candidate") == 2
    assert preds.count("has_s") == len(graph.triples)  # injective on triples
    assert facts == sorted(facts, key=str)


def test_to_facts_injective_on_all_fixtures(graphs):
    for graph in graphs.values():
        has_s = [f for f in to_facts(graph) if f.pred == "has_s"]
        assert len(has_s) == len(graph.triples)


def test_roundtrip(graphs):
    for graph in graphs.values():
        assert load_graph(dump_graph(graph)) == graph


def test_relabel_candidates(graphs):
    graph = graphs["thanking-p2-a"]
    relabeled = relabel_candidates(graph, ("Jennifer", "Kayla"))
    assert relabeled.candidates == ("jennifer-1", "kayla-7")
    assert ("cooked-2", "agent", "jennifer-1") in relabeled.triples
    assert relabeled.pronoun == graph.pronoun
    # relabeling back restores the original graph
    assert relabel_candidates(relabeled, ("Kayla", "Jennifer")) == graph


def test_relabel_rejects_collapsing_names(graphs):
    graph = graphs["thanking-p2-a"]
    with pytest.raises(GraphError):
        relabel_candidates(graph, ("Kayla", "Kayla"))


def test_malformed_identifier_rejected():
    with pytest.raises(GraphError, match="Bad Name"):
        load_graph(
            _graph_json(
                triples=[["met-4", "agent", "Bad Name"], ["met-4", "recipient", "sam-5"],
                         ["thanked-10", "agent", "she-9"], ["met-4", "agent", "tom-1"]]
            )
        )
