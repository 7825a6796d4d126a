"""Pronoun-resolution workbench for Winograd-style sentences in the
thanking domain: keyword corpus extraction, a stratified-Datalog rule
engine over semantic graphs, principle-based resolution, a symbolic +
statistical ensemble, and a robust-accuracy evaluation protocol."""

__version__ = "0.1.0"

from .corpus import DomainSpec, SchemaItem, THANKING_DOMAIN, extract_domain, load_corpus
from .engine import Program, evaluate, parse_program, query, stratify
from .ensemble import Prediction, Predictor, combine, recorded_predictor_load
from .evaluator import chance_monte_carlo, make_variant_set, split_pairs, switch_candidates
from .kb import KnowledgeBase, load_kb
from .lexicon import NamesLexicon, load_names
from .resolver import HighLevelRepresentation, Multiple, NoAnswer, Single, abstract, resolve
from .semgraph import SemanticGraph, load_graph, to_facts

__all__ = [
    "DomainSpec",
    "HighLevelRepresentation",
    "KnowledgeBase",
    "Multiple",
    "NamesLexicon",
    "NoAnswer",
    "Prediction",
    "Predictor",
    "Program",
    "SchemaItem",
    "SemanticGraph",
    "Single",
    "THANKING_DOMAIN",
    "abstract",
    "chance_monte_carlo",
    "combine",
    "evaluate",
    "extract_domain",
    "load_corpus",
    "load_graph",
    "load_kb",
    "load_names",
    "make_variant_set",
    "parse_program",
    "query",
    "recorded_predictor_load",
    "resolve",
    "split_pairs",
    "stratify",
    "switch_candidates",
    "to_facts",
]
