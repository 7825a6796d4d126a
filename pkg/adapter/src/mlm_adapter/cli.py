"""Entry point: pick a scorer, then hand the streams to the serve loop.

Model loading happens before the first request is read, so a broken model
configuration exits nonzero without producing any response.
"""

from __future__ import annotations

import argparse
import sys

from .scoring import (
    LexicalStubScorer,
    constant_answerer,
    masked_lm_answerer,
    scorer_answerer,
)
from .worker import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlm-adapter",
        description="Masked-LM candidate scorer speaking JSON lines over stdio",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="Hugging Face model name or path")
    source.add_argument(
        "--stub",
        help="test double, no model: constant:0 | constant:1 | lexical",
    )
    parser.add_argument("--normalize", choices=("sum", "mean"), default="mean")
    return parser


def _stub_answerer(spec: str):
    if spec == "lexical":
        return scorer_answerer(LexicalStubScorer())
    if spec.startswith("constant:"):
        return constant_answerer(int(spec[len("constant:") :]))
    raise ValueError(f"unknown stub {spec!r} (use constant:0, constant:1 or lexical)")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.stub:
            answer = _stub_answerer(args.stub)
        else:
            from .scoring import MaskedLMScorer

            answer = masked_lm_answerer(MaskedLMScorer(args.model, args.normalize))
    except Exception as exc:
        sys.stderr.write(f"mlm-adapter: failed to initialise scorer: {exc}\n")
        return 1
    return serve(answer)


if __name__ == "__main__":
    sys.exit(main())
