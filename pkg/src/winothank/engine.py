"""Rule engine: a small stratified Datalog with negation-as-failure.

The rule language mirrors ASP surface syntax for the fragment we need:
plain Horn rules, ``not`` literals, ``_`` wildcards and at-least-k body
groups ``k { a ; b }``.  Negation is evaluated under stratified semantics,
which keeps the model unique and evaluation deterministic.

Because the knowledge bases reify their relations inside a single
``has_s/3`` predicate, stratification works on *unification classes* of
atom patterns rather than bare predicate names: ``has_s(_, relation,
causer)`` and ``has_s(_, owes, _)`` land in different classes and may sit
in different strata even though they share a predicate symbol.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class EngineError(Exception):
    """Base class for rule-engine failures."""


class ParseError(EngineError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class SafetyError(EngineError):
    """A head or negated variable is not bound by the positive body."""


class StratificationError(EngineError):
    def __init__(self, cycle: Sequence[str]):
        super().__init__(
            "negative cycle through " + " -> ".join(list(cycle) + [cycle[0]])
        )
        self.cycle = tuple(cycle)


# ---------------------------------------------------------------------------
# terms and atoms


@dataclass(frozen=True)
class Const:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Wildcard:
    def __str__(self) -> str:
        return "_"


WILDCARD = Wildcard()

Term = Const | Var | Wildcard


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return "%s(%s)" % (self.pred, ",".join(str(t) for t in self.args))

    @property
    def key(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def variables(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Var)}

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)


@dataclass(frozen=True)
class Group:
    lower: int
    alternatives: tuple[Atom, ...]

    def __str__(self) -> str:
        return "%d { %s }" % (self.lower, " ; ".join(str(a) for a in self.alternatives))

    def variables(self) -> set[str]:
        out: set[str] = set()
        for alt in self.alternatives:
            out |= alt.variables()
        return out

    def binder_variables(self) -> set[str]:
        """Variables occurring in every alternative; only these may bind."""
        common = self.alternatives[0].variables()
        for alt in self.alternatives[1:]:
            common &= alt.variables()
        return common


@dataclass(frozen=True)
class Rule:
    head: Atom
    positive: tuple[Atom, ...] = ()
    negative: tuple[Atom, ...] = ()
    groups: tuple[Group, ...] = ()

    def __str__(self) -> str:
        if not (self.positive or self.negative or self.groups):
            return f"{self.head}."
        body = [str(a) for a in self.positive]
        body += [str(g) for g in self.groups]
        body += [f"not {a}" for a in self.negative]
        return f"{self.head} :- {', '.join(body)}."


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    facts: tuple[Atom, ...] = ()

    def __add__(self, other: "Program") -> "Program":
        return Program(self.rules + other.rules, self.facts + other.facts)


def atom(pred: str, *args: str) -> Atom:
    """Shorthand for building atoms from strings.

    Uppercase-initial arguments become variables, "_" a wildcard, anything
    else a constant.
    """
    terms: list[Term] = []
    for a in args:
        if a == "_":
            terms.append(WILDCARD)
        elif a[:1].isupper():
            terms.append(Var(a))
        else:
            terms.append(Const(a))
    return Atom(pred, tuple(terms))


# ---------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<implies>:-)
  | (?P<int>\d+)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<const>[a-z][A-Za-z0-9_-]*)
  | (?P<wild>_(?![A-Za-z0-9_-]))
  | (?P<punct>[(){},;.])
""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup or ""
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def parse(self) -> Program:
        rules: list[Rule] = []
        facts: list[Atom] = []
        arities: dict[str, tuple[int, int]] = {}  # pred -> (arity, first line)

        def check_arity(a: Atom, tok: _Token) -> None:
            seen = arities.get(a.pred)
            if seen is None:
                arities[a.pred] = (len(a.args), tok.line)
            elif seen[0] != len(a.args):
                raise ParseError(
                    f"predicate {a.pred!r} used with arity {len(a.args)}"
                    f" but arity {seen[0]} on line {seen[1]}",
                    tok.line,
                    tok.column,
                )

        while self.peek().kind != "eof":
            start = self.peek()
            head = self.atom()
            check_arity(head, start)
            if self.peek().text == ".":
                self.next()
                if not head.is_ground():
                    raise ParseError("facts must be ground", start.line, start.column)
                facts.append(head)
                continue
            self.expect(":-")
            positive: list[Atom] = []
            negative: list[Atom] = []
            groups: list[Group] = []
            while True:
                tok = self.peek()
                if tok.kind == "const" and tok.text == "not":
                    self.next()
                    neg = self.atom()
                    check_arity(neg, tok)
                    negative.append(neg)
                elif tok.kind == "int":
                    groups.append(self.group(check_arity))
                else:
                    pos_atom = self.atom()
                    check_arity(pos_atom, tok)
                    positive.append(pos_atom)
                if self.peek().text == ",":
                    self.next()
                    continue
                self.expect(".")
                break
            rule = Rule(head, tuple(positive), tuple(negative), tuple(groups))
            _check_safety(rule, start)
            rules.append(rule)
        return Program(tuple(rules), tuple(facts))

    def group(self, check_arity) -> Group:
        tok = self.next()
        lower = int(tok.text)
        self.expect("{")
        alternatives = [self.atom()]
        check_arity(alternatives[-1], tok)
        while self.peek().text == ";":
            self.next()
            alternatives.append(self.atom())
            check_arity(alternatives[-1], tok)
        self.expect("}")
        if self.peek().kind == "int":
            bound = self.peek()
            raise ParseError("upper bounds on groups are not supported", bound.line, bound.column)
        if lower < 1:
            raise ParseError("group lower bound must be >= 1", tok.line, tok.column)
        if lower > len(alternatives):
            raise ParseError(
                f"group lower bound {lower} exceeds {len(alternatives)} alternatives",
                tok.line,
                tok.column,
            )
        return Group(lower, tuple(alternatives))

    def atom(self) -> Atom:
        tok = self.next()
        if tok.kind != "const":
            raise ParseError(f"expected predicate, found {tok.text!r}", tok.line, tok.column)
        if self.peek().text != "(":
            return Atom(tok.text)
        self.next()
        args = [self.term()]
        while self.peek().text == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        return Atom(tok.text, tuple(args))

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "var":
            return Var(tok.text)
        if tok.kind == "wild":
            return WILDCARD
        if tok.kind in ("const", "int"):
            return Const(tok.text)
        raise ParseError(f"expected term, found {tok.text!r}", tok.line, tok.column)


def _check_safety(rule: Rule, tok: _Token) -> None:
    bound = set()
    for a in rule.positive:
        bound |= a.variables()
    # a variable shared by some but not all alternatives of a group has no
    # single binding; only fully-shared (binder) or already-bound variables
    # may recur across alternatives
    for g in rule.groups:
        binders = g.binder_variables()
        occurrence: dict[str, int] = {}
        for alt in g.alternatives:
            for name in alt.variables():
                occurrence[name] = occurrence.get(name, 0) + 1
        for name, count in occurrence.items():
            if count > 1 and name not in bound and name not in binders:
                raise SafetyError(
                    f"variable {name} is shared by only some alternatives of a"
                    f" group in rule {rule} (line {tok.line})"
                )
        bound |= binders
    unsafe = rule.head.variables() - bound
    for a in rule.negative:
        unsafe |= a.variables() - bound
    if unsafe:
        raise SafetyError(
            f"unsafe variables {sorted(unsafe)} in rule {rule} (line {tok.line})"
        )


def parse_program(text: str) -> Program:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# stratification over unification classes


def _unifiable(a: Atom, b: Atom) -> bool:
    """Could some ground atom be an instance of both patterns?

    Variables from the two sides are kept apart; wildcards unify with
    anything.  Function-free, so plain union-find style binding suffices.
    """
    if a.key != b.key:
        return False
    env: dict[tuple[str, str], object] = {}

    def resolve(t, side):
        while isinstance(t, Var) and (side, t.name) in env:
            t, side = env[(side, t.name)]  # type: ignore[assignment]
        return t, side

    for left, right in zip(a.args, b.args):
        if isinstance(left, Wildcard) or isinstance(right, Wildcard):
            continue
        lt, ls = resolve(left, "a")
        rt, rs = resolve(right, "b")
        if isinstance(lt, Const) and isinstance(rt, Const):
            if lt.value != rt.value:
                return False
        elif isinstance(lt, Var):
            env[(ls, lt.name)] = (rt, rs)
        elif isinstance(rt, Var):
            env[(rs, rt.name)] = (lt, ls)
    return True


class _ClassIndex:
    """Union-find over the atom patterns of a program."""

    def __init__(self, patterns: Iterable[Atom]):
        self.patterns = list(dict.fromkeys(patterns))
        self.parent = list(range(len(self.patterns)))
        for i, a in enumerate(self.patterns):
            for j in range(i):
                if _unifiable(a, self.patterns[j]):
                    self._union(i, j)

    def _find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def _union(self, i: int, j: int) -> None:
        ri, rj = self._find(i), self._find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)

    def class_of(self, pattern: Atom) -> int:
        for i, a in enumerate(self.patterns):
            if _unifiable(a, pattern):
                return self._find(i)
        return -1

    def label(self, root: int) -> str:
        members = [a for i, a in enumerate(self.patterns) if self._find(i) == root]
        first = members[0]
        if not first.args:
            return first.pred
        parts = []
        for idx in range(len(first.args)):
            column = {m.args[idx] for m in members}
            only = next(iter(column))
            if len(column) == 1 and isinstance(only, Const):
                parts.append(only.value)
            else:
                parts.append("_")
        return "%s(%s)" % (first.pred, ",".join(parts))


@dataclass(frozen=True)
class Stratification:
    strata: tuple[tuple[Rule, ...], ...]
    class_strata: Mapping[str, int]
    _index: _ClassIndex = field(repr=False, compare=False)

    def stratum_of(self, pattern: Atom) -> int:
        root = self._index.class_of(pattern)
        if root < 0:
            return 0
        return self.class_strata.get(self._index.label(root), 0)


def stratify(program: Program) -> Stratification:
    patterns: list[Atom] = []
    for rule in program.rules:
        patterns.append(rule.head)
        patterns.extend(rule.positive)
        patterns.extend(rule.negative)
        for g in rule.groups:
            patterns.extend(g.alternatives)
    patterns.extend(program.facts)
    index = _ClassIndex(patterns)

    pos_edges: dict[int, set[int]] = {}
    neg_edges: dict[int, set[int]] = {}
    nodes: set[int] = {index.class_of(p) for p in patterns}
    for rule in program.rules:
        head = index.class_of(rule.head)
        deps = [index.class_of(a) for a in rule.positive]
        for g in rule.groups:
            deps += [index.class_of(a) for a in g.alternatives]
        for d in deps:
            pos_edges.setdefault(d, set()).add(head)
        for a in rule.negative:
            neg_edges.setdefault(index.class_of(a), set()).add(head)

    # Full SCC machinery is overkill at this scale: a negative cycle exists
    # exactly when the head of some negative edge reaches the edge's source.
    def reaches(src: int, dst: int) -> list[int] | None:
        stack = [(src, [src])]
        seen = {src}
        while stack:
            node, path = stack.pop()
            for nxt in pos_edges.get(node, set()) | neg_edges.get(node, set()):
                if nxt == dst:
                    return path
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, path + [nxt]))
        return None

    for src, heads in neg_edges.items():
        for head in heads:
            if head == src:
                raise StratificationError([index.label(src)])
            path = reaches(head, src)
            if path is not None:
                raise StratificationError([index.label(c) for c in [src] + path])

    strata_by_class: dict[int, int] = {n: 0 for n in nodes}
    changed = True
    guard = 0
    while changed:
        changed = False
        guard += 1
        if guard > len(nodes) ** 2 + 2:  # unreachable once cycles are rejected
            raise StratificationError(["unbounded stratum growth"])
        for src, heads in pos_edges.items():
            for head in heads:
                if strata_by_class[head] < strata_by_class[src]:
                    strata_by_class[head] = strata_by_class[src]
                    changed = True
        for src, heads in neg_edges.items():
            for head in heads:
                if strata_by_class[head] < strata_by_class[src] + 1:
                    strata_by_class[head] = strata_by_class[src] + 1
                    changed = True

    n_strata = max(strata_by_class.values(), default=0) + 1
    buckets: list[list[Rule]] = [[] for _ in range(n_strata)]
    for rule in program.rules:
        buckets[strata_by_class[index.class_of(rule.head)]].append(rule)
    labels = {index.label(index.class_of(p)): strata_by_class[index.class_of(p)] for p in patterns}
    return Stratification(tuple(tuple(b) for b in buckets), labels, index)


# ---------------------------------------------------------------------------
# evaluation


class FactStore:
    """An immutable set of ground atoms indexed by predicate."""

    def __init__(self, atoms: Iterable[Atom] = ()):
        by_key: dict[tuple[str, int], set[tuple[str, ...]]] = {}
        for a in atoms:
            if not a.is_ground():
                raise EngineError(f"fact store atoms must be ground: {a}")
            by_key.setdefault(a.key, set()).add(tuple(t.value for t in a.args))  # type: ignore[union-attr]
        self._rows = {k: frozenset(v) for k, v in by_key.items()}

    def rows(self, pred: str, arity: int) -> frozenset[tuple[str, ...]]:
        return self._rows.get((pred, arity), frozenset())

    def __contains__(self, a: Atom) -> bool:
        return a.is_ground() and tuple(t.value for t in a.args) in self.rows(*a.key)  # type: ignore[union-attr]

    def __len__(self) -> int:
        return sum(len(v) for v in self._rows.values())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FactStore) and self._rows == other._rows

    def atoms(self) -> list[Atom]:
        out = []
        for (pred, _arity), rows in self._rows.items():
            for row in rows:
                out.append(Atom(pred, tuple(Const(v) for v in row)))
        out.sort(key=str)
        return out

    def exists(self, pattern: Atom) -> bool:
        """True when some stored atom matches; unbound vars act existentially."""
        return next(_match(pattern, self, {}), None) is not None


def _match(pattern: Atom, store: FactStore, sub: dict[str, str]) -> Iterator[dict[str, str]]:
    for row in store.rows(*pattern.key):
        out = None
        for term, value in zip(pattern.args, row):
            if isinstance(term, Const):
                if term.value != value:
                    break
            elif isinstance(term, Var):
                bound = (out or sub).get(term.name)
                if bound is None:
                    if out is None:
                        out = dict(sub)
                    out[term.name] = value
                elif bound != value:
                    break
            # wildcard matches anything
        else:
            yield out if out is not None else dict(sub)


def _substitute(a: Atom, sub: Mapping[str, str]) -> Atom:
    args = tuple(
        Const(sub[t.name]) if isinstance(t, Var) and t.name in sub else t for t in a.args
    )
    return Atom(a.pred, args)


def _group_solutions(group: Group, store: FactStore, sub: dict[str, str]) -> Iterator[dict[str, str]]:
    binders = sorted(group.binder_variables() - set(sub))

    def satisfied_count(s: dict[str, str]) -> int:
        return sum(1 for alt in group.alternatives if store.exists(_substitute(alt, s)))

    if not binders:
        if satisfied_count(sub) >= group.lower:
            yield sub
        return
    candidates: set[tuple[str, ...]] = set()
    for alt in group.alternatives:
        for m in _match(alt, store, sub):
            candidates.add(tuple(m[v] for v in binders))
    for values in sorted(candidates):
        extended = dict(sub)
        extended.update(zip(binders, values))
        if satisfied_count(extended) >= group.lower:
            yield extended


def _rule_solutions(rule: Rule, store: FactStore) -> Iterator[dict[str, str]]:
    subs: list[dict[str, str]] = [{}]
    for a in rule.positive:
        subs = [m for s in subs for m in _match(a, store, s)]
        if not subs:
            return
    for g in rule.groups:
        subs = [m for s in subs for m in _group_solutions(g, store, s)]
        if not subs:
            return
    for s in subs:
        if any(store.exists(_substitute(a, s)) for a in rule.negative):
            continue
        yield s


def evaluate(program: Program, extra_facts: Iterable[Atom] = ()) -> FactStore:
    """Compute the perfect model of a stratifiable program plus input facts."""
    stratification = stratify(program)
    extra = tuple(extra_facts)
    for a in extra:
        if not a.is_ground():
            raise EngineError(f"input facts must be ground: {a}")
    atoms: set[Atom] = set(program.facts) | set(extra)
    for stratum in stratification.strata:
        if not stratum:
            continue
        changed = True
        while changed:
            changed = False
            store = FactStore(atoms)
            for rule in stratum:
                for sub in _rule_solutions(rule, store):
                    derived = _substitute(rule.head, sub)
                    if derived not in atoms:
                        atoms.add(derived)
                        changed = True
    return FactStore(atoms)


def query(store: FactStore, pattern: Atom) -> list[dict[str, str]]:
    """All substitutions making the pattern a member of the store, sorted."""
    seen = {tuple(sorted(m.items())) for m in _match(pattern, store, {})}
    return [dict(items) for items in sorted(seen)]
