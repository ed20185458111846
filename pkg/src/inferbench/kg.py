"""Interned triple store.

Every name is interned into one integer space shared by constants,
relations and type names.  A triple is a plain ``(s, p, o)`` tuple of ids;
type assertions ``(e, type, t)`` use the reserved id :data:`TYPE` in the
middle slot and the type-name id in the object slot.
"""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import ParseError, SignatureConflictError

log = logging.getLogger(__name__)

TYPE = 0
NEQ = 1
FRESH_BASE = 1 << 48  # ids reserved for frozen constants (entailment checks)

CONSTANT = "constant"
RELATION = "relation"
TYPE_NAME = "type"
_RESERVED = "reserved"

Triple = tuple  # (s, p, o) of ints


class SymbolTable:
    """Bijection between names and integer ids, with a kind tag per id."""

    def __init__(self, type_marker: str = "type"):
        self.type_marker = type_marker
        self._names = [type_marker, "!="]
        self._kinds = [_RESERVED, _RESERVED]
        self._ids = {type_marker: TYPE, "!=": NEQ}

    def __len__(self):
        return len(self._names)

    def intern(self, name: str, kind: str) -> int:
        i = self._ids.get(name)
        if i is None:
            i = len(self._names)
            self._ids[name] = i
            self._names.append(name)
            self._kinds.append(kind)
            return i
        if self._kinds[i] != kind:
            raise SignatureConflictError(
                f"{name!r} used as {kind} but already known as {self._kinds[i]}"
            )
        return i

    def lookup(self, name: str):
        return self._ids.get(name)

    def name(self, i: int) -> str:
        if i >= FRESH_BASE:
            return f"_:f{i - FRESH_BASE}"
        return self._names[i]

    def kind(self, i: int) -> str:
        if i >= FRESH_BASE:
            return CONSTANT
        return self._kinds[i]

    def ids_of_kind(self, kind: str) -> list:
        return [i for i, k in enumerate(self._kinds) if k == kind]

    def triple_names(self, t) -> tuple:
        return (self.name(t[0]), self.name(t[1]), self.name(t[2]))

    def intern_triple(self, s: str, p: str, o: str) -> Triple:
        si = self.intern(s, CONSTANT)
        if p == self.type_marker:
            return (si, TYPE, self.intern(o, TYPE_NAME))
        return (si, self.intern(p, RELATION), self.intern(o, CONSTANT))


def is_type_triple(t) -> bool:
    return t[1] == TYPE


class FactIndex:
    """Mutable, append-only set of triples with the join indexes.

    ``by_p[p]`` lists ``(s, o)`` pairs, ``by_ps[(p, s)]`` lists objects and
    ``by_po[(p, o)]`` lists subjects, all in insertion order.
    """

    __slots__ = ("facts", "by_p", "by_ps", "by_po", "n_subj", "n_obj")

    def __init__(self, triples: Iterable = ()):
        self.facts = set()
        self.by_p = defaultdict(list)
        self.by_ps = {}
        self.by_po = {}
        self.n_subj = defaultdict(int)
        self.n_obj = defaultdict(int)
        self.update(triples)

    def __len__(self):
        return len(self.facts)

    def __contains__(self, t):
        return t in self.facts

    def __iter__(self):
        return iter(self.facts)

    def add(self, t) -> bool:
        if t in self.facts:
            return False
        self.facts.add(t)
        s, p, o = t
        self.by_p[p].append((s, o))
        lst = self.by_ps.get((p, s))
        if lst is None:
            self.by_ps[(p, s)] = [o]
            self.n_subj[p] += 1
        else:
            lst.append(o)
        lst = self.by_po.get((p, o))
        if lst is None:
            self.by_po[(p, o)] = [s]
            self.n_obj[p] += 1
        else:
            lst.append(s)
        return True

    def update(self, triples: Iterable) -> list:
        add = self.add
        return [t for t in triples if add(t)]

    def subjects(self, p) -> list:
        return list(dict.fromkeys(s for s, _ in self.by_p.get(p, ())))

    def objects(self, p) -> list:
        return list(dict.fromkeys(o for _, o in self.by_p.get(p, ())))


class Signature(NamedTuple):
    types: frozenset
    relations: frozenset
    constants: frozenset


class KnowledgeGraph:
    """Immutable deduplicated set of triples plus lookup indexes."""

    def __init__(self, triples: Iterable = (), symbols: SymbolTable = None):
        self.symbols = symbols if symbols is not None else SymbolTable()
        self.index = FactIndex(triples)
        self._occurrences = None

    def __len__(self):
        return len(self.index.facts)

    def __contains__(self, t):
        return t in self.index.facts

    def __iter__(self):
        return iter(self.index.facts)

    def __repr__(self):
        return f"KnowledgeGraph({len(self)} triples)"

    @property
    def facts(self) -> set:
        return self.index.facts

    def by_predicate(self, p) -> list:
        return [(s, p, o) for s, o in self.index.by_p.get(p, ())]

    def by_predicate_subject(self, p, s) -> list:
        return [(s, p, o) for o in self.index.by_ps.get((p, s), ())]

    def by_predicate_object(self, p, o) -> list:
        return [(s, p, o) for s in self.index.by_po.get((p, o), ())]

    def occurrences(self, c) -> list:
        """Triples mentioning constant ``c`` as subject or object."""
        if self._occurrences is None:
            occ = defaultdict(list)
            for t in self.index.facts:
                occ[t[0]].append(t)
                if t[1] != TYPE and t[2] != t[0]:
                    occ[t[2]].append(t)
            self._occurrences = occ
        return list(self._occurrences.get(c, ()))

    def with_facts(self, triples: Iterable) -> "KnowledgeGraph":
        return KnowledgeGraph(triples, self.symbols)

    def names(self) -> set:
        return {self.symbols.triple_names(t) for t in self.index.facts}

    def sorted_triples(self) -> list:
        return sort_by_name(self.index.facts, self.symbols)


def signature(kg) -> Signature:
    """Types, relations and constants that actually occur in ``kg``'s facts."""
    types, rels, consts = set(), set(), set()
    for s, p, o in kg:
        consts.add(s)
        if p == TYPE:
            types.add(o)
        else:
            rels.add(p)
            consts.add(o)
    return Signature(frozenset(types), frozenset(rels), frozenset(consts))


def sort_by_name(triples, symbols) -> list:
    name = symbols.name
    return sorted(triples, key=lambda t: (name(t[0]), name(t[1]), name(t[2])))


def read_triple_lines(path):
    """Yield ``(line_number, (s, p, o))`` name triples from a TSV file."""
    with open(path, encoding="utf-8", newline="\n") as fh:
        for n, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(
                    f"{path}: expected 3 tab-separated fields, got {len(parts)}", line=n
                )
            yield n, tuple(parts)


def load_triples(path, symbols: SymbolTable) -> list:
    out = []
    for n, (s, p, o) in read_triple_lines(path):
        try:
            out.append(symbols.intern_triple(s, p, o))
        except SignatureConflictError as e:
            raise SignatureConflictError(f"{path}:{n}: {e}") from None
    return out


def load_kg(path, type_marker: str = "type", symbols: SymbolTable = None) -> KnowledgeGraph:
    symbols = symbols if symbols is not None else SymbolTable(type_marker)
    triples = load_triples(path, symbols)
    kg = KnowledgeGraph(triples, symbols)
    dupes = len(triples) - len(kg)
    if dupes:
        log.info("%s: dropped %d duplicate triple(s)", path, dupes)
    return kg


def write_triples(path, triples, symbols: SymbolTable, sort: bool = True):
    rows = sort_by_name(triples, symbols) if sort else list(triples)
    name = symbols.name
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s, p, o in rows:
            fh.write(f"{name(s)}\t{name(p)}\t{name(o)}\n")
