"""Candidate-substitution scoring worker for pronoun disambiguation.

Speaks the line protocol of the workbench's subprocess predictor: one JSON
request per stdin line, one JSON response per stdout line, in order.
"""

__version__ = "0.1.0"

from .scoring import LexicalStubScorer, constant_answerer, scorer_answerer
from .worker import serve

__all__ = ["LexicalStubScorer", "constant_answerer", "scorer_answerer", "serve"]
