"""Rule AST, text syntax and canonical forms.

Terms are ints: variables are negative (``-1, -2, ...``), constants are
symbol ids.  An :class:`Atom` ``(s, p, o)`` is a relation atom, a type atom
when ``p == TYPE`` (``o`` then holds the type-name id) or an inequality
when ``p == NEQ``.

Grammar (one rule per line)::

    rule  := body "->" head
    body  := atom ("," atom)*
    atom  := "(" term "," pred "," term ")"
           | "(" term "," type "," typename ")"
           | term "!=" term
    term  := lowercase-ident | "<" name ">"

Predicate and type names are bare tokens or ``<...>``-quoted.
"""

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from ..errors import ParseError, SafetyError, SignatureConflictError
from ..kg import CONSTANT, NEQ, RELATION, TYPE, TYPE_NAME, SymbolTable


class Atom(NamedTuple):
    s: int
    p: int
    o: int

    @property
    def is_neq(self):
        return self.p == NEQ

    @property
    def is_type(self):
        return self.p == TYPE

    @property
    def predicate(self):
        """Relation id, or the type-name id for type atoms."""
        return self.o if self.p == TYPE else self.p

    def terms(self):
        return (self.s,) if self.p == TYPE else (self.s, self.o)


def is_var(t) -> bool:
    return t < 0


def atom_vars(a: Atom):
    return [t for t in a.terms() if t < 0]


# ---------------------------------------------------------------- canonical

def _shape(a: Atom):
    # renaming-invariant sort key; inequalities sort last
    s = a.s if a.s >= 0 else -1
    if a.p == TYPE:
        return (0, TYPE, a.o, s, 0)
    o = a.o if a.o >= 0 else -1
    return (0, a.p, 0, s, o, a.s < 0 and a.s == a.o)


def canonical_key(body, head=None):
    """Canonical form under variable renaming and body permutation.

    The key is the lexicographic minimum, over all body orderings that keep
    atoms sorted by shape, of the body/head rewritten with variables
    numbered by first occurrence.
    """
    pos = sorted(set(a for a in body if a.p != NEQ), key=_shape)
    neqs = [a for a in body if a.p == NEQ]
    groups = [list(g) for _, g in itertools.groupby(pos, key=_shape)]
    best = None
    for combo in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = [a for g in combo for a in g]
        ren = {}

        def r(t):
            if t >= 0:
                return t
            v = ren.get(t)
            if v is None:
                v = ren[t] = -(len(ren) + 1)
            return v

        b = tuple(Atom(r(a.s), a.p, a.o if a.p == TYPE else r(a.o)) for a in order)
        h = None
        if head is not None:
            h = Atom(r(head.s), head.p, head.o if head.p == TYPE else r(head.o))
        n = []
        for a in neqs:
            x, y = r(a.s), r(a.o)
            n.append((x, y) if x <= y else (y, x))
        key = (b, h, tuple(sorted(set(n))))
        if best is None or key < best:
            best = key
    if best is None:
        best = ((), head, ())
    return best


def render_canonical(key, symbols) -> str:
    """Text of a canonical key; the head part is omitted when ``None``."""
    body, head, neqs = key
    name = lambda v: f"v{-v - 1}"  # noqa: E731
    r = lambda a: render_atom(a, symbols, name)  # noqa: E731
    text = ", ".join([r(a) for a in body] + [r(Atom(x, NEQ, y)) for x, y in neqs])
    return text if head is None else f"{text} -> {r(head)}"


# ---------------------------------------------------------------- rules

_BARE = re.compile(r"^[^\s,()<>!]+$")


def render_name(name: str) -> str:
    return name if _BARE.match(name) else f"<{name}>"


def render_atom(a: Atom, symbols: SymbolTable, var_name) -> str:
    def term(t):
        return var_name(t) if t < 0 else f"<{symbols.name(t)}>"

    if a.p == NEQ:
        return f"{term(a.s)} != {term(a.o)}"
    if a.p == TYPE:
        return f"({term(a.s)},{render_name(symbols.type_marker)},{render_name(symbols.name(a.o))})"
    return f"({term(a.s)},{render_name(symbols.name(a.p))},{term(a.o)})"


@dataclass(frozen=True, eq=False)
class Rule:
    """A safe Datalog rule.  Equality is canonical (renaming/permutation)."""

    body: tuple
    head: Atom
    var_names: tuple = ()
    symbols: SymbolTable = field(default=None, repr=False)

    def __post_init__(self):
        if self.head.p == NEQ:
            raise SafetyError("an inequality cannot be a rule head")
        if not self.body:
            raise SafetyError("rule body must contain at least one atom")
        bound = {v for a in self.body if a.p != NEQ for v in atom_vars(a)}
        loose = [v for a in list(self.body) + [self.head] for v in atom_vars(a) if v not in bound]
        if loose:
            names = sorted({self.var_name(v) for v in loose})
            raise SafetyError(f"unsafe rule: variable(s) {', '.join(names)} not bound by a body atom")

    def __eq__(self, other):
        return isinstance(other, Rule) and self.canonical == other.canonical

    def __hash__(self):
        return hash(self.canonical)

    def __str__(self):
        return self.text()

    @cached_property
    def canonical(self):
        return canonical_key(self.body, self.head)

    @cached_property
    def variables(self) -> tuple:
        """Variable ids in first-occurrence order over the body."""
        seen = {}
        for a in self.body:
            for v in atom_vars(a):
                seen.setdefault(v, None)
        return tuple(seen)

    @property
    def positive_body(self):
        return [a for a in self.body if a.p != NEQ]

    @property
    def neq_body(self):
        return [a for a in self.body if a.p == NEQ]

    def var_name(self, v: int) -> str:
        i = -v - 1
        if i < len(self.var_names):
            return self.var_names[i]
        return f"v{i}"

    def text(self) -> str:
        r = lambda a: render_atom(a, self.symbols, self.var_name)  # noqa: E731
        return ", ".join(r(a) for a in self.body) + " -> " + r(self.head)

    def canonical_text(self) -> str:
        return render_canonical(self.canonical, self.symbols)

    def substitution(self, values) -> dict:
        """Map variable names to constant names for a witness tuple."""
        return {
            self.var_name(v): self.symbols.name(values[-v - 1]) for v in self.variables
        }

    def ground_head(self, values):
        h = self.head
        s = values[-h.s - 1] if h.s < 0 else h.s
        if h.p == TYPE:
            return (s, TYPE, h.o)
        o = values[-h.o - 1] if h.o < 0 else h.o
        return (s, h.p, o)


def make_rule(body, head, symbols, var_names=()) -> Rule:
    """Build a rule, renumbering variables ``-1..-n`` in first-occurrence order."""
    ren = {}
    for a in list(body) + [head]:
        for v in atom_vars(a):
            if v not in ren:
                ren[v] = -(len(ren) + 1)
    names = []
    for old in ren:
        i = -old - 1
        names.append(var_names[i] if i < len(var_names) else f"v{len(names)}")

    def m(t):
        return ren[t] if t < 0 else t

    def ma(a):
        return Atom(m(a.s), a.p, a.o if a.p == TYPE else m(a.o))

    seen, b = set(), []
    for a in body:
        a = ma(a)
        if a not in seen:
            seen.add(a)
            b.append(a)
    return Rule(tuple(b), ma(head), tuple(names), symbols)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<arrow>->)
      | (?P<neq>!=)
      | (?P<punct>[(),])
      | <(?P<quoted>[^>]*)>
      | (?P<bare>[^\s,()<>!]+)
    )""",
    re.VERBOSE,
)
_VAR = re.compile(r"^[a-z][A-Za-z0-9_]*$")


class _Tok(NamedTuple):
    kind: str
    value: str
    col: int


def _tokenize(text, line):
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return toks


class RawAtom(NamedTuple):
    kind: str  # "rel" | "type" | "neq"
    s: tuple  # ("var", name) | ("const", name)
    pred: str
    o: tuple  # term, or ("name", typename) for type atoms


class _Parser:
    def __init__(self, text, type_marker, line):
        self.line = line
        self.toks = _tokenize(text, line)
        self.i = 0
        self.type_marker = type_marker

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        col = tok.col if tok else None
        raise ParseError(msg, self.line, col)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok is None:
            self.fail(f"unexpected end of rule, expected {value or kind}")
        if (kind and tok.kind != kind) or (value and tok.value != value):
            self.fail(f"expected {value or kind}, found {tok.value!r}", tok)
        self.i += 1
        return tok

    def term(self):
        tok = self.take()
        if tok.kind == "quoted":
            return ("const", tok.value)
        if tok.kind == "bare" and _VAR.match(tok.value):
            return ("var", tok.value)
        self.fail(f"expected a variable or <constant>, found {tok.value!r}", tok)

    def name(self):
        tok = self.take()
        if tok.kind in ("quoted", "bare"):
            return tok.value
        self.fail(f"expected a predicate name, found {tok.value!r}", tok)

    def atom(self):
        tok = self.peek()
        if tok is not None and tok.kind == "punct" and tok.value == "(":
            self.take()
            s = self.term()
            self.take("punct", ",")
            pred = self.name()
            self.take("punct", ",")
            if pred == self.type_marker:
                o = ("name", self.name())
                kind = "type"
            else:
                o = self.term()
                kind = "rel"
            self.take("punct", ")")
            return RawAtom(kind, s, pred, o)
        s = self.term()
        self.take("neq")
        return RawAtom("neq", s, "!=", self.term())

    def rule(self):
        body = [self.atom()]
        while self.peek() is not None and self.peek().value == ",":
            self.take()
            body.append(self.atom())
        self.take("arrow")
        head = self.atom()
        if self.peek() is not None:
            self.fail(f"trailing input {self.peek().value!r}")
        if head.kind == "neq":
            raise ParseError("an inequality cannot be a rule head", self.line)
        return body, head


def parse_raw(text: str, type_marker: str = "type", line=None):
    """Parse rule text into ``(body, head)`` lists of :class:`RawAtom`."""
    return _Parser(text, type_marker, line).rule()


class _Resolver:
    """Turns raw atoms into :class:`Atom` tuples over a symbol table."""

    def __init__(self, symbols, line=None):
        self.symbols = symbols
        self.vars = {}
        self.line = line

    def term(self, t):
        kind, name = t
        if kind == "var":
            v = self.vars.get(name)
            if v is None:
                v = self.vars[name] = -(len(self.vars) + 1)
            return v
        return self.intern(name, CONSTANT)

    def intern(self, name, kind):
        try:
            return self.symbols.intern(name, kind)
        except SignatureConflictError as e:
            raise ParseError(f"predicate of unknown kind: {e}", self.line) from None

    def atom(self, raw: RawAtom, pred=None):
        if raw.kind == "neq":
            return Atom(self.term(raw.s), NEQ, self.term(raw.o))
        s = self.term(raw.s)
        if raw.kind == "type":
            o = pred if pred is not None else self.intern(raw.o[1], TYPE_NAME)
            return Atom(s, TYPE, o)
        p = pred if pred is not None else self.intern(raw.pred, RELATION)
        return Atom(s, p, self.term(raw.o))

    @property
    def var_names(self):
        return tuple(self.vars)


DEFAULT_SYMBOLS = SymbolTable()


def parse_rule(text: str, symbols: SymbolTable = None, line=None) -> Rule:
    symbols = symbols if symbols is not None else DEFAULT_SYMBOLS
    body, head = parse_raw(text, symbols.type_marker, line)
    res = _Resolver(symbols, line)
    b = [res.atom(a) for a in body]
    h = res.atom(head)
    try:
        return make_rule(b, h, symbols, res.var_names)
    except SafetyError as e:
        raise SafetyError(f"line {line}: {e}" if line else str(e)) from None


def iter_rule_lines(text: str):
    """Yield ``(line_number, rule_text)``, skipping blanks and ``#`` comments.

    Anything after the first tab is metadata (e.g. supports) and dropped.
    """
    for n, line in enumerate(text.splitlines(), 1):
        s = line.split("\t", 1)[0].strip()
        if s and not s.startswith("#"):
            yield n, s


def parse_rules(text: str, symbols: SymbolTable = None) -> list:
    return [parse_rule(s, symbols, line=n) for n, s in iter_rule_lines(text)]


def load_rules(path, symbols: SymbolTable = None) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read(), symbols)
