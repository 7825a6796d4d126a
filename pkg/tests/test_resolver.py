from __future__ import annotations

from dataclasses import replace

import pytest

from winothank.kb import Principle
from winothank.resolver import (
    HighLevelRepresentation,
    Multiple,
    NoAnswer,
    Relationship,
    Single,
    abstract,
    match_principles,
    outcome_to_dict,
    resolution_report,
    resolve,
)


# ---------------------------------------------------------------------------
# abstraction


def test_kayla_abstraction(graphs, knowledge):
    rep = abstract(graphs["thanking-p2-a"], knowledge)
    assert rep.candidate_roles == (frozenset({"giver"}), frozenset({"given"}))
    assert rep.relationship == Relationship("owes", ("jennifer-7", "kayla-1"))
    assert rep.connective == "conjunctive"
    assert "receiving_good" in rep.pronoun_roles
    assert rep.pronoun_roles == frozenset({"being_thanked", "receiving_good", "being_owed"})


def test_unrecognized_verbs_leave_empty_representation(graphs, knowledge):
    rep = abstract(graphs["g-noanswer"], knowledge)
    assert rep.candidate_roles == (frozenset(), frozenset())
    assert rep.relationship is None
    assert rep.connective == "conjunctive"  # default without a causal fact


def test_pattern3_abstraction_is_causal(graphs, knowledge):
    rep = abstract(graphs["thanking-p3-a"], knowledge)
    assert rep.connective == "causal"
    assert rep.relationship == Relationship("does_good_to", ("derek-1", "aaron-3"))
    assert "owing" in rep.pronoun_roles


# ---------------------------------------------------------------------------
# principle matching


def test_kayla_matches_pattern_two_only(graphs, knowledge):
    rep = abstract(graphs["thanking-p2-a"], knowledge)
    assert match_principles(rep, knowledge.principles) == [(2, 0)]


def test_no_relationship_means_no_matches(knowledge):
    rep = HighLevelRepresentation(
        candidates=("a-1", "b-2"),
        pronoun="p-3",
        candidate_roles=(frozenset(), frozenset()),
        relationship=None,
        connective="conjunctive",
        pronoun_roles=frozenset({"doing_good"}),
    )
    assert match_principles(rep, knowledge.principles) == []


def test_agreeing_matches_collapse_to_single():
    rep = HighLevelRepresentation(
        candidates=("a-1", "b-2"),
        pronoun="p-3",
        candidate_roles=(frozenset({"given"}), frozenset({"giver"})),
        relationship=Relationship("owes", ("a-1", "b-2")),
        connective="conjunctive",
        pronoun_roles=frozenset({"doing_good", "owing"}),
    )
    principles = (
        Principle(1, "owes", "conjunctive", "doing_good", "first"),
        Principle(6, "owes", "conjunctive", "owing", "first"),
    )
    matches = match_principles(rep, principles)
    assert matches == [(1, 0), (6, 0)]
    choices = {index for _pid, index in matches}
    assert choices == {0}  # two matches, one answer


def test_argument_order_routes_conclusion(knowledge):
    rep = HighLevelRepresentation(
        candidates=("a-1", "b-2"),
        pronoun="p-3",
        candidate_roles=(frozenset({"giver"}), frozenset({"given"})),
        relationship=Relationship("owes", ("b-2", "a-1")),  # b owes a
        connective="conjunctive",
        pronoun_roles=frozenset({"receiving_good"}),
    )
    # pattern 2 concludes the second relationship argument: a
    assert match_principles(rep, knowledge.principles) == [(2, 0)]


# ---------------------------------------------------------------------------
# resolution outcomes


def test_resolve_kayla_single(graphs, knowledge):
    assert resolve(graphs["thanking-p2-a"], knowledge) == Single(0)


def test_resolve_no_answer(graphs, knowledge):
    assert resolve(graphs["g-noanswer"], knowledge) == NoAnswer()


def test_resolve_multiple(graphs, knowledge):
    assert resolve(graphs["g-multiple"], knowledge) == Multiple(frozenset({0, 1}))


def test_multiple_requires_two_choices():
    with pytest.raises(ValueError):
        Multiple(frozenset({0}))


def test_resolve_is_deterministic(graphs, knowledge):
    for graph in graphs.values():
        assert resolve(graph, knowledge) == resolve(graph, knowledge)


def test_single_agrees_with_matches(graphs, knowledge):
    for graph in graphs.values():
        outcome = resolve(graph, knowledge)
        if isinstance(outcome, Single):
            matches = match_principles(abstract(graph, knowledge), knowledge.principles)
            assert matches and {index for _pid, index in matches} == {outcome.choice}


def test_candidate_order_equivariance(graphs, knowledge):
    for graph in graphs.values():
        flipped = replace(graph, candidates=(graph.candidates[1], graph.candidates[0]))
        outcome = resolve(graph, knowledge)
        mirrored = resolve(flipped, knowledge)
        if isinstance(outcome, Single):
            assert mirrored == Single(1 - outcome.choice)
        else:
            assert type(mirrored) is type(outcome)


# ---------------------------------------------------------------------------
# report


def test_resolution_report_shape(graphs, knowledge):
    report = resolution_report(graphs["thanking-p2-a"], knowledge)
    assert report["itemId"] == "thanking-p2-a"
    assert report["outcome"] == {"kind": "single", "choice": 0}
    assert report["matchedPrinciples"] == [{"id": 2, "choice": 0}]
    rep = report["representation"]
    assert rep["relationship"] == {"name": "owes", "args": ["jennifer-7", "kayla-1"]}
    assert rep["connective"] == "conjunctive"
    assert "receiving_good" in rep["pronounRoles"]


def test_outcome_serialization():
    assert outcome_to_dict(NoAnswer()) == {"kind": "no_answer"}
    assert outcome_to_dict(Single(1)) == {"kind": "single", "choice": 1}
    assert outcome_to_dict(Multiple(frozenset({1, 0}))) == {
        "kind": "multiple",
        "choices": [0, 1],
    }
