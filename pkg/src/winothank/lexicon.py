"""Gendered first-name lexicon used for name-candidate detection and for
sampling gender-matched replacement names."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

GENDERS = ("f", "m")

# replacement variants need room to draw three distinct pairs
MIN_NAMES_PER_GENDER = 8

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_NAMES_PATH = DATA_DIR / "names.tsv"


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class NamesLexicon:
    genders: Mapping[str, str]  # name -> "f" | "m"

    def __post_init__(self):
        if not self.genders:
            raise LexiconError("names lexicon is empty")
        for name, gender in self.genders.items():
            if not name:
                raise LexiconError("names must be non-empty")
            if gender not in GENDERS:
                raise LexiconError(f"unknown gender tag {gender!r} for {name!r}")

    def __contains__(self, name: str) -> bool:
        return name in self.genders

    def gender(self, name: str) -> str | None:
        return self.genders.get(name)

    def names_for(self, gender: str) -> tuple[str, ...]:
        return tuple(sorted(n for n, g in self.genders.items() if g == gender))


def load_names(path: str | Path = DEFAULT_NAMES_PATH) -> NamesLexicon:
    """Load a "name<TAB>f|m" TSV and check it is big enough for variant
    sampling (at least MIN_NAMES_PER_GENDER names per gender)."""
    genders: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"{path}:{lineno}: expected 'name<TAB>f|m'")
            name, gender = parts[0].strip(), parts[1].strip()
            if name in genders:
                raise LexiconError(f"{path}:{lineno}: duplicate name {name!r}")
            genders[name] = gender
    lexicon = NamesLexicon(genders)
    for gender in GENDERS:
        have = len(lexicon.names_for(gender))
        if have < MIN_NAMES_PER_GENDER:
            raise LexiconError(
                f"{path}: need at least {MIN_NAMES_PER_GENDER} {gender!r} names, found {have}"
            )
    return lexicon
