"""Robust-accuracy protocol: candidate switching, gender-matched name
replacement, metrics, a chance-rate simulation and the paired-split
designs.

Variant bookkeeping keeps candidate lists in sentence-mention order, so
the answer index of a variant always points at the true referent: for a
switched sentence the candidate list is reversed and the answer *string*
flips to the other name while the index value is preserved.  Recorded
predictions keyed by (item id, variant kind) therefore stay valid across
seeds.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from .corpus import SchemaItem
from .ensemble import Prediction, PredictionRequest
from .lexicon import MIN_NAMES_PER_GENDER, NamesLexicon

VARIANT_ORIGINAL = "original"
VARIANT_SWITCHED = "switched"
VARIANT_REPLACED = ("replaced-1", "replaced-2", "replaced-3")

_MAX_SAMPLING_ATTEMPTS = 1000


class NonSwitchableError(ValueError):
    """A candidate does not occur exactly once as a whole token sequence."""


class NamesUnavailableError(ValueError):
    """A candidate is not in the names lexicon, or the lexicon is too small."""


def _whole_token_re(surface: str) -> re.Pattern[str]:
    return re.compile(rf"(?<![\w]){re.escape(surface)}(?![\w])")


def _rewrite(sentence: str, mapping: dict[str, str]) -> str:
    """Replace every whole-token occurrence of each key, simultaneously."""
    alternation = "|".join(re.escape(s) for s in sorted(mapping, key=len, reverse=True))
    pattern = re.compile(rf"(?<![\w])({alternation})(?![\w])")
    return pattern.sub(lambda m: mapping[m.group(1)], sentence)


def switch_candidates(item: SchemaItem) -> SchemaItem:
    """Swap the two candidate surface forms in the sentence.

    The candidate list is reversed so index i still names the string at
    mention position i; the gold answer keeps its index and thereby flips
    to the other surface string.  Involution: switching twice restores the
    item exactly.
    """
    c0, c1 = item.candidates
    for surface in (c0, c1):
        count = len(_whole_token_re(surface).findall(item.sentence))
        if count != 1:
            raise NonSwitchableError(
                f"item {item.id!r}: candidate {surface!r} occurs {count} times"
            )
    swapped = _rewrite(item.sentence, {c0: c1, c1: c0})
    return replace(item, sentence=swapped, candidates=(c1, c0))


def replace_names(item: SchemaItem, lexicon: NamesLexicon, seed: int) -> list[SchemaItem]:
    """Three gender-matched name replacements with a seeded sampler.

    Within a variant the two names are distinct; each variant's pair
    differs from the original pair and from the other variants' pairs.
    Individual names may recur across variants.
    """
    c0, c1 = item.candidates
    genders = []
    for surface in (c0, c1):
        gender = lexicon.gender(surface)
        if gender is None:
            raise NamesUnavailableError(f"item {item.id!r}: {surface!r} is not a known name")
        genders.append(gender)
    pools = {g: lexicon.names_for(g) for g in set(genders)}
    for gender, pool in pools.items():
        if len(pool) < MIN_NAMES_PER_GENDER:
            raise NamesUnavailableError(
                f"need at least {MIN_NAMES_PER_GENDER} {gender!r} names to sample"
                f" replacements, lexicon has {len(pool)}"
            )

    rng = random.Random(seed)
    variants = []
    used_pairs = {(c0, c1)}
    for position in range(3):
        for _attempt in range(_MAX_SAMPLING_ATTEMPTS):
            n0 = rng.choice(pools[genders[0]])
            n1 = rng.choice(pools[genders[1]])
            if n0 != n1 and (n0, n1) not in used_pairs:
                break
        else:
            raise NamesUnavailableError("could not sample a fresh replacement pair")
        used_pairs.add((n0, n1))
        variants.append(
            replace(
                item,
                sentence=_rewrite(item.sentence, {c0: n0, c1: n1}),
                candidates=(n0, n1),
            )
        )
    return variants


@dataclass(frozen=True)
class VariantSet:
    original: SchemaItem
    switched: SchemaItem | None
    replaced: tuple[SchemaItem, ...]  # empty or exactly three
    seed: int
    switchable: bool

    def variants(self) -> list[tuple[str, SchemaItem]]:
        out = [(VARIANT_ORIGINAL, self.original)]
        if self.switched is not None:
            out.append((VARIANT_SWITCHED, self.switched))
        out.extend(zip(VARIANT_REPLACED, self.replaced))
        return out

    def __len__(self) -> int:
        return len(self.variants())


def item_seed(seed: int, item_id: str) -> int:
    """Stable per-item sampler seed derived from the run seed."""
    digest = hashlib.blake2s(f"{seed}:{item_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def make_variant_set(item: SchemaItem, lexicon: NamesLexicon, seed: int) -> VariantSet:
    """Name candidates get {original, switched, 3 replacements}; non-name
    candidates fall back to switching only; a non-switchable item keeps
    its original and is flagged."""
    switched: SchemaItem | None
    try:
        switched = switch_candidates(item)
        switchable = True
    except NonSwitchableError:
        switched = None
        switchable = False
    both_names = item.candidates[0] in lexicon and item.candidates[1] in lexicon
    replaced: tuple[SchemaItem, ...] = ()
    if both_names:
        replaced = tuple(replace_names(item, lexicon, item_seed(seed, item.id)))
    return VariantSet(
        original=item,
        switched=switched,
        replaced=replaced,
        seed=seed,
        switchable=switchable,
    )


@dataclass(frozen=True)
class EvalRecord:
    item_id: str
    variant: str
    prediction: Prediction | None
    correct: bool
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "itemId": self.item_id,
            "variant": self.variant,
            "choice": self.prediction.choice if self.prediction else None,
            "correct": self.correct,
            "error": self.error,
        }


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    robust_accuracy: float
    n: int
    per_variant: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "robust_accuracy": self.robust_accuracy,
            "n": self.n,
            "per_variant_breakdown": self.per_variant,
        }


Answerer = Callable[[PredictionRequest], Prediction]


def evaluate(
    items: Iterable[SchemaItem],
    answerer: Answerer,
    lexicon: NamesLexicon,
    seed: int,
) -> tuple[Metrics, list[EvalRecord]]:
    """Accuracy over originals, robust accuracy over whole variant sets.

    An answerer exception counts as incorrect on that variant and is
    surfaced in the record.
    """
    items = list(items)
    records: list[EvalRecord] = []
    original_correct = 0
    robust_correct = 0
    variant_tallies: dict[str, list[int]] = {}
    for item in items:
        variant_set = make_variant_set(item, lexicon, seed)
        all_correct = True
        for kind, variant_item in variant_set.variants():
            request = PredictionRequest.from_item(variant_item, variant=kind, parent_id=item.id)
            prediction: Prediction | None
            error: str | None = None
            try:
                prediction = answerer(request)
                correct = prediction.choice == variant_item.answer
            except Exception as exc:  # failures score as incorrect, loudly
                prediction = None
                correct = False
                error = f"{type(exc).__name__}: {exc}"
            records.append(EvalRecord(item.id, kind, prediction, correct, error))
            tally = variant_tallies.setdefault(kind, [0, 0])
            tally[0] += int(correct)
            tally[1] += 1
            if kind == VARIANT_ORIGINAL and correct:
                original_correct += 1
            all_correct = all_correct and correct
        robust_correct += int(all_correct)
    n = len(items)
    per_variant = {
        kind: {"correct": c, "n": t, "accuracy": c / t if t else 0.0}
        for kind, (c, t) in sorted(variant_tallies.items())
    }
    metrics = Metrics(
        accuracy=original_correct / n if n else 0.0,
        robust_accuracy=robust_correct / n if n else 0.0,
        n=n,
        per_variant=per_variant,
    )
    return metrics, records


def chance_monte_carlo(trials: int, seed: int, variants: int = 5) -> float:
    """Empirical robust-chance rate of a uniform random answerer over
    fixed-size variant sets."""
    if trials < 10_000:
        raise ValueError(f"need at least 10000 trials for a stable estimate, got {trials}")
    rng = random.Random(seed)
    robust = 0
    for _ in range(trials):
        if all(rng.random() < 0.5 for _ in range(variants)):
            robust += 1
    return robust / trials


def split_pairs(
    items: Iterable[SchemaItem], mode: str, seed: int
) -> tuple[list[SchemaItem], list[SchemaItem]]:
    """Paired train/test splits.

    "separated": one member of each pair per side (coin per pair).
    "together": whole pairs assigned to sides, item counts within one pair
    of 50:50.  Items without a pair id are rejected.
    """
    if mode not in ("separated", "together"):
        raise ValueError(f"unknown split mode {mode!r}")
    items = list(items)
    by_pair: dict[str, list[SchemaItem]] = {}
    for item in items:
        if item.pair_id is None:
            raise ValueError(f"item {item.id!r} is unpaired; run pair detection first")
        by_pair.setdefault(item.pair_id, []).append(item)
    for pair_id, members in by_pair.items():
        if len(members) != 2:
            raise ValueError(f"pair {pair_id!r} has {len(members)} members, expected 2")

    rng = random.Random(seed)
    pair_ids = sorted(by_pair)
    train_ids: set[str] = set()
    if mode == "separated":
        first_to_train = {pid: rng.random() < 0.5 for pid in pair_ids}
        for pid, members in by_pair.items():
            chosen = members[0] if first_to_train[pid] else members[1]
            train_ids.add(chosen.id)
    else:
        shuffled = rng.sample(pair_ids, len(pair_ids))
        for pid in shuffled[: len(shuffled) // 2]:
            train_ids.update(m.id for m in by_pair[pid])
    train = [item for item in items if item.id in train_ids]
    test = [item for item in items if item.id not in train_ids]
    return train, test
