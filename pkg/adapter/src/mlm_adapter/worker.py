"""Serve loop: newline-delimited JSON requests on stdin, responses on
stdout, strictly in request order.

Request:  {"id": str, "variant": str, "sentence": str,
           "placeholder": "_", "candidates": [str, str]}
Response: {"id": str, "choice": 0|1, "score": number|null}

Only JSON lines ever reach stdout; a malformed request produces one JSON
error line and exit code 3.
"""

from __future__ import annotations

import json
import sys
from typing import IO

from .scoring import Answerer

PROTOCOL_ERROR_EXIT = 3


class RequestError(ValueError):
    pass


def _parse_request(line: str) -> tuple[str, str, str, list[str]]:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RequestError(f"request is not JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise RequestError("request must be a JSON object")
    for field in ("id", "sentence", "candidates"):
        if field not in raw:
            raise RequestError(f"request is missing {field!r}")
    candidates = raw["candidates"]
    if not (isinstance(candidates, list) and len(candidates) == 2):
        raise RequestError("candidates must be a two-element list")
    return (
        str(raw["id"]),
        str(raw["sentence"]),
        str(raw.get("placeholder", "_")),
        [str(c) for c in candidates],
    )


def serve(answer: Answerer, stdin: IO[str] | None = None, stdout: IO[str] | None = None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request_id, sentence, placeholder, candidates = _parse_request(line)
            choice, score = answer(sentence, placeholder, candidates)
        except (RequestError, ValueError) as exc:
            stdout.write(json.dumps({"error": str(exc)}) + "\n")
            stdout.flush()
            return PROTOCOL_ERROR_EXIT
        stdout.write(json.dumps({"id": request_id, "choice": choice, "score": score}) + "\n")
        stdout.flush()
    return 0
