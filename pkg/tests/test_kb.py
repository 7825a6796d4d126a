from __future__ import annotations

import json
import shutil

import pytest

from winothank.engine import Const, atom, evaluate, query
from winothank.kb import (
    CANONICAL_ROLES,
    DEFAULT_KB_DIR,
    KBError,
    RELATIONSHIPS,
    load_kb,
    sentiment_role_facts,
    synonym_canonicalize,
)
from winothank.semgraph import to_facts


# ---------------------------------------------------------------------------
# loading


def test_default_kb_loads(knowledge):
    assert len(knowledge.relationship_rules.rules) == 5
    assert len(knowledge.principles) == 5
    head_roles = {
        rule.head.args[2].value
        for rule in knowledge.role_rules.rules
        if rule.head.pred == "has_s" and isinstance(rule.head.args[2], Const)
    }
    assert set(CANONICAL_ROLES) <= head_roles


def test_principle_ids_and_conclusions(knowledge):
    table = {p.id: (p.relationship, p.connective, p.pronoun_property, p.conclusion)
             for p in knowledge.principles}
    assert table == {
        1: ("owes", "conjunctive", "doing_good", "first"),
        2: ("owes", "conjunctive", "receiving_good", "second"),
        3: ("does_good_to", "causal", "owing", "first"),
        4: ("gives_thanks_to", "causal", "being_owed", "second"),
        5: ("gives_thanks_to", "causal", "owing", "first"),
    }


def _kb_copy(tmp_path):
    target = tmp_path / "kb"
    shutil.copytree(DEFAULT_KB_DIR, target)
    return target


def test_missing_principles_file_errors(tmp_path):
    broken = _kb_copy(tmp_path)
    (broken / "principles.json").unlink()
    with pytest.raises(KBError, match="principles.json"):
        load_kb(broken)


def test_duplicate_principle_id_errors(tmp_path):
    broken = _kb_copy(tmp_path)
    principles = json.loads((broken / "principles.json").read_text())
    principles.append(dict(principles[0]))
    (broken / "principles.json").write_text(json.dumps(principles))
    with pytest.raises(KBError, match="duplicate"):
        load_kb(broken)


def test_rule_parse_failure_names_file(tmp_path):
    broken = _kb_copy(tmp_path)
    (broken / "roles.lp").write_text("p(X) :- not q(X).\n")
    with pytest.raises(KBError, match="roles.lp"):
        load_kb(broken)


def test_empty_synonyms_errors(tmp_path):
    broken = _kb_copy(tmp_path)
    (broken / "synonyms.tsv").write_text("# nothing\n")
    with pytest.raises(KBError, match="empty"):
        load_kb(broken)


# ---------------------------------------------------------------------------
# synonyms and sentiment


def test_synonym_canonicalize(knowledge):
    assert knowledge.canonicalize("grateful") == "thank"
    assert knowledge.canonicalize("unheard_of_word") == "unheard_of_word"
    assert knowledge.canonicalize("thank") == "thank"


def test_synonym_canonicalize_is_idempotent(knowledge):
    for surface in list(knowledge.synonyms) + ["thank", "give", "help", "other"]:
        once = synonym_canonicalize(surface, knowledge.synonyms)
        assert synonym_canonicalize(once, knowledge.synonyms) == once


def test_sentiment_positive_word(graphs, knowledge):
    facts = sentiment_role_facts(graphs["thanking-p2-a"], knowledge)
    assert atom("has_s", "delicate-15", "polarity", "good") in facts


def test_sentiment_negative_word(graphs, knowledge):
    facts = sentiment_role_facts(graphs["g-measure4"], knowledge)
    assert facts == [atom("has_s", "injured-9", "polarity", "bad")]


def test_sentiment_unlisted_tokens_emit_nothing(graphs, knowledge):
    facts = sentiment_role_facts(graphs["thanking-p1-a"], knowledge)
    assert facts == []


# ---------------------------------------------------------------------------
# Table 3 conformance: role pair + causal flag -> exactly the row's relationship

TABLE_ROWS = [
    ("being_helped", "helper", False, "owes"),
    ("given", "giver", False, "owes"),
    ("helper", "being_helped", True, "does_good_to"),
    ("giver", "given", True, "does_good_to"),
    ("thanker", "being_thanked", True, "gives_thanks_to"),
]


def _relationship_atoms(store):
    out = []
    for name in RELATIONSHIPS:
        for sub in query(store, atom("has_s", "X", name, "Y")):
            out.append((sub["X"], name, sub["Y"]))
    return out


@pytest.mark.parametrize("role_x,role_y,causal,expected", TABLE_ROWS)
def test_table_row_fires_with_matching_flag(knowledge, role_x, role_y, causal, expected):
    facts = [
        atom("has_s", "x", "semantic_role", role_x),
        atom("has_s", "y", "semantic_role", role_y),
    ]
    if causal:
        facts.append(atom("has_s", "p", "relation", "causer"))
    store = evaluate(knowledge.relationship_rules, facts)
    assert ("x", expected, "y") in _relationship_atoms(store)


@pytest.mark.parametrize("role_x,role_y,causal,expected", TABLE_ROWS)
def test_table_row_blocked_with_flipped_flag(knowledge, role_x, role_y, causal, expected):
    facts = [
        atom("has_s", "x", "semantic_role", role_x),
        atom("has_s", "y", "semantic_role", role_y),
    ]
    if not causal:  # flipped: add the causal marker instead of omitting it
        facts.append(atom("has_s", "p", "relation", "causer"))
    store = evaluate(knowledge.relationship_rules, facts)
    assert ("x", expected, "y") not in _relationship_atoms(store)


def test_minimal_row_derives_nothing_else(knowledge):
    store = evaluate(
        knowledge.relationship_rules,
        [
            atom("has_s", "x", "semantic_role", "given"),
            atom("has_s", "y", "semantic_role", "giver"),
        ],
    )
    assert _relationship_atoms(store) == [("x", "owes", "y")]


# ---------------------------------------------------------------------------
# lifting

NAMED_LIFTINGS = [
    ("helper", "doing_good"),
    ("giver", "doing_good"),
    ("being_helped", "receiving_good"),
    ("given", "receiving_good"),
    ("thanker", "owing"),  # the complement of being owed
]


@pytest.mark.parametrize("base,lifted", NAMED_LIFTINGS)
def test_lifting_rules(knowledge, base, lifted):
    store = evaluate(knowledge.lifting_rules, [atom("has_s", "n", "semantic_role", base)])
    assert atom("has_s", "n", "semantic_role", lifted) in store


def test_lifting_is_one_step(knowledge):
    # lifted roles do not lift further
    for lifted in ("doing_good", "receiving_good", "owing", "being_owed"):
        base = [atom("has_s", "n", "semantic_role", lifted)]
        store = evaluate(knowledge.lifting_rules, base)
        assert store.atoms() == base


# ---------------------------------------------------------------------------
# the four generalization measures, each on a dedicated fixture graph


def _store(graph, knowledge):
    facts = to_facts(graph) + sentiment_role_facts(graph, knowledge)
    return evaluate(knowledge.combined_program(), facts)


def test_measure1_complement_role(graphs, knowledge):
    # sam is never a thank recipient; his role comes from tom's
    store = _store(graphs["g-measure1"], knowledge)
    assert atom("has_s", "sam-5", "semantic_role", "being_thanked") in store


def test_measure2_default_benefactive(graphs, knowledge):
    # "bake" is no thanking verb, yet agent/recipient marks ann as giver
    store = _store(graphs["g-measure2"], knowledge)
    assert atom("has_s", "ann-1", "semantic_role", "giver") in store
    assert atom("has_s", "joy-4", "semantic_role", "given") in store


def test_measure3_synonym_role(graphs, knowledge):
    store = _store(graphs["g-measure3"], knowledge)
    assert atom("has_s", "amy-1", "semantic_role", "thanker") in store
    assert atom("has_s", "ben-3", "semantic_role", "being_thanked") in store


def test_measure4_sentiment_role(graphs, knowledge):
    store = _store(graphs["g-measure4"], knowledge)
    assert atom("has_s", "injured-9", "semantic_role", "bad") in store
    kayla = _store(graphs["thanking-p2-a"], knowledge)
    assert atom("has_s", "delicate-15", "semantic_role", "good") in kayla


def test_synonyms_table_nonempty(knowledge):
    assert knowledge.synonyms  # measure 3 needs a populated table
