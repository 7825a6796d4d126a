from __future__ import annotations

import json
from pathlib import Path

import pytest

from winothank import corpus, kb, lexicon, semgraph
from winothank.evaluator import make_variant_set

FIXTURES = Path(__file__).parent / "fixtures"
GRAPHS = FIXTURES / "graphs"
CORPUS_PATH = FIXTURES / "corpus.jsonl"


@pytest.fixture(scope="session")
def fixture_items() -> list[corpus.SchemaItem]:
    with open(CORPUS_PATH, encoding="utf-8") as handle:
        return corpus.load_corpus(handle, source="fixture")


@pytest.fixture(scope="session")
def domain_items(fixture_items) -> list[corpus.SchemaItem]:
    return corpus.extract_domain(fixture_items)


@pytest.fixture(scope="session")
def knowledge() -> kb.KnowledgeBase:
    return kb.load_kb()


@pytest.fixture(scope="session")
def names() -> lexicon.NamesLexicon:
    return lexicon.load_names()


@pytest.fixture(scope="session")
def graphs() -> dict[str, semgraph.SemanticGraph]:
    out = {}
    for path in sorted(GRAPHS.glob("*.json")):
        graph = semgraph.load_graph_file(path)
        out[graph.item_id] = graph
    return out


def perfect_prediction_lines(items, names_lexicon, seed: int = 171) -> list[str]:
    """Recorded predictions answering every variant of every item correctly.

    Variant answers preserve the original answer index (candidate lists
    stay in mention order), so the table is valid for any seed.
    """
    lines = []
    for item in items:
        variant_set = make_variant_set(item, names_lexicon, seed)
        for kind, variant_item in variant_set.variants():
            lines.append(
                json.dumps({"itemId": item.id, "variant": kind, "choice": variant_item.answer})
            )
    return lines


@pytest.fixture()
def perfect_predictions_file(tmp_path, domain_items, names) -> Path:
    path = tmp_path / "predictions.jsonl"
    path.write_text("\n".join(perfect_prediction_lines(domain_items, names)) + "\n", encoding="utf-8")
    return path
