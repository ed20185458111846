"""Inference patterns, candidate rule instantiation and support-based selection."""

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources

from .datalog.engine import count_witnesses, has_witness
from .datalog.syntax import (
    Atom,
    Rule,
    _Resolver,
    canonical_key,
    make_rule,
    parse_raw,
    render_canonical,
)
from .errors import ParseError
from .kg import NEQ, RELATION, TYPE, TYPE_NAME, SymbolTable, signature
from .seeding import derive_rng

log = logging.getLogger(__name__)


def is_relation_template(name: str) -> bool:
    return len(name) > 1 and name[0] == "_" and name[1].isupper()


def is_type_template(name: str) -> bool:
    return len(name) > 1 and name[0] == "_" and name[1].islower()


@dataclass(frozen=True)
class PatternAtom:
    kind: str  # "rel" | "type" | "neq"
    s: int
    pred: object  # template name (str) or predicate id (int)
    o: int  # term; unused (0) for type atoms

    @property
    def is_template(self):
        return isinstance(self.pred, str)


@dataclass(frozen=True)
class Pattern:
    """A rule template whose predicates may be ``_R``/``_t`` placeholders."""

    name: str
    body: tuple
    head: PatternAtom
    var_names: tuple = ()
    symbols: SymbolTable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        bound = {t for a in self.body if a.kind != "neq" for t in _terms(a) if t < 0}
        for a in list(self.body) + [self.head]:
            for t in _terms(a):
                if t < 0 and t not in bound:
                    raise ParseError(f"pattern {self.name}: unsafe variable")
        if self.head.kind == "neq":
            raise ParseError(f"pattern {self.name}: inequality head")

    @property
    def body_templates(self) -> list:
        """Templates of the body in first-occurrence order."""
        seen = {}
        for a in self.body:
            if a.kind != "neq" and a.is_template:
                seen.setdefault(a.pred, a.kind)
        return list(seen.items())

    @property
    def head_in_body(self) -> bool:
        if not self.head.is_template:
            return True
        return any(t == self.head.pred for t, _ in self.body_templates)

    def body_atoms(self, assignment) -> list:
        return [_ground_atom(a, assignment) for a in self.body]

    def instantiate(self, assignment) -> Rule:
        """Substitute templates by predicate ids (``assignment``: name -> id)."""
        return make_rule(
            self.body_atoms(assignment), _ground_atom(self.head, assignment),
            self.symbols, self.var_names,
        )

    def text(self) -> str:
        def term(t):
            return self.var_names[-t - 1] if t < 0 else f"<{self.symbols.name(t)}>"

        def pred(p):
            return p if isinstance(p, str) else self.symbols.name(p)

        def atom(a):
            if a.kind == "neq":
                return f"{term(a.s)} != {term(a.o)}"
            if a.kind == "type":
                return f"({term(a.s)},{self.symbols.type_marker},{pred(a.pred)})"
            return f"({term(a.s)},{pred(a.pred)},{term(a.o)})"

        return ", ".join(atom(a) for a in self.body) + " -> " + atom(self.head)


def _terms(a):
    return (a.s,) if a.kind == "type" else (a.s, a.o)


def _ground_atom(a: PatternAtom, assignment) -> Atom:
    p = assignment[a.pred] if a.is_template else a.pred
    if a.kind == "neq":
        return Atom(a.s, NEQ, a.o)
    if a.kind == "type":
        return Atom(a.s, TYPE, p)
    return Atom(a.s, p, a.o)


def parse_pattern(text: str, symbols: SymbolTable, name: str = None, line=None) -> Pattern:
    """Parse ``[@name] body -> head`` with ``_R``/``_t`` templates."""
    text = text.strip()
    if text.startswith("@"):
        label, _, text = text.partition(" ")
        name = label[1:]
    body, head = parse_raw(text, symbols.type_marker, line)
    res = _Resolver(symbols, line)

    def conv(raw):
        if raw.kind == "neq":
            return PatternAtom("neq", res.term(raw.s), NEQ, res.term(raw.o))
        s = res.term(raw.s)
        if raw.kind == "type":
            t = raw.o[1]
            if is_relation_template(t):
                raise ParseError(f"relation template {t} used as a type", line)
            pred = t if is_type_template(t) else res.intern(t, TYPE_NAME)
            return PatternAtom("type", s, pred, 0)
        if is_type_template(raw.pred):
            raise ParseError(f"type template {raw.pred} used as a relation", line)
        pred = raw.pred if is_relation_template(raw.pred) else res.intern(raw.pred, RELATION)
        return PatternAtom("rel", s, pred, res.term(raw.o))

    b = tuple(conv(a) for a in body)
    h = conv(head)
    return Pattern(name or f"p{line or 0}", b, h, res.var_names, symbols)


def parse_patterns(text: str, symbols: SymbolTable) -> list:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        s = line.split("\t", 1)[0].strip()
        if s and not s.startswith("#"):
            out.append(parse_pattern(s, symbols, name=f"p{len(out)}", line=n))
    return out


def load_patterns(path, symbols: SymbolTable) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_patterns(fh.read(), symbols)


def builtin_patterns(symbols: SymbolTable, names=None) -> list:
    """The shipped pattern library (see ``data/patterns.txt``).

    ``trian`` and ``diam`` there are illustrative shapes, not a fixed
    definition; pass your own pattern file when exact shapes matter.
    """
    text = resources.files("inferbench").joinpath("data/patterns.txt").read_text("utf-8")
    pats = parse_patterns(text, symbols)
    if names is not None:
        wanted = list(names)
        by_name = {p.name: p for p in pats}
        missing = [n for n in wanted if n not in by_name]
        if missing:
            raise KeyError(f"unknown built-in pattern(s): {', '.join(missing)}")
        pats = [by_name[n] for n in wanted]
    return pats


# ---------------------------------------------------------------- candidates

def _predicates_by_kind(kg):
    sig = signature(kg)
    return {"rel": sorted(sig.relations), "type": sorted(sig.types)}


def _head_kind(p: Pattern):
    return p.head.kind


def _body_key(body_atoms):
    return canonical_key(body_atoms)


def _complete(p: Pattern, assignment, preds, seed):
    """Attach a head to a body assignment; ``None`` if no head is available."""
    if p.head_in_body:
        return p.instantiate(assignment)
    body = p.body_atoms(assignment)
    used = set(assignment.values())
    options = [x for x in preds[_head_kind(p)] if x not in used]
    if not options:
        return None
    body_text = render_canonical(canonical_key(body), p.symbols)
    rng = derive_rng(seed, "head", p.name, body_text)
    full = dict(assignment)
    full[p.head.pred] = rng.choice(options)
    return p.instantiate(full)


def _first_pos(body):
    return next(a for a in body if a.p != NEQ)


def _assignments(templates, preds):
    """All injective template -> predicate maps respecting kinds."""
    names = [t for t, _ in templates]
    pools = [preds[k] for _, k in templates]

    def rec(i, used, cur):
        if i == len(names):
            yield dict(cur)
            return
        for x in pools[i]:
            if x in used:
                continue
            cur[names[i]] = x
            used.add(x)
            yield from rec(i + 1, used, cur)
            used.discard(x)
        cur.pop(names[i], None)

    yield from rec(0, set(), {})


def instantiate_candidates(p: Pattern, kg, seed: int = 0) -> set:
    """Exhaustive instantiation of ``p`` over the predicates of ``kg``.

    Head-in-body patterns yield one rule per injective assignment of body
    templates; otherwise the head template gets a seeded random predicate of
    the right kind not used in the body.
    """
    preds = _predicates_by_kind(kg)
    templates = p.body_templates
    if any(not preds[k] for _, k in templates):
        log.warning("pattern %s: KG lacks predicates of a required kind", p.name)
        return set()
    out = set()
    for a in _assignments(templates, preds):
        r = _complete(p, a, preds, seed)
        if r is not None:
            out.add(r)
    return out


class _Cooccurrence:
    """Which predicates share a constant in given positions (join pruning)."""

    def __init__(self, kg):
        roles = defaultdict(lambda: defaultdict(set))  # role -> const -> preds
        for p, pairs in kg.index.by_p.items():
            if not pairs:
                continue
            if p == TYPE:
                for s, o in pairs:
                    roles["t"][s].add(o)
            else:
                for s, o in pairs:
                    roles["s"][s].add(p)
                    roles["o"][o].add(p)
        self.roles = roles
        self._cache = {}

    def compat(self, role_a, role_b) -> dict:
        key = (role_a, role_b)
        got = self._cache.get(key)
        if got is None:
            got = defaultdict(set)
            ra, rb = self.roles[role_a], self.roles[role_b]
            for c, preds_a in ra.items():
                preds_b = rb.get(c)
                if preds_b:
                    for x in preds_a:
                        got[x] |= preds_b
            self._cache[key] = got
        return got


def _roles(a: PatternAtom):
    """Variable -> positional role for one atom."""
    if a.kind == "type":
        return [(a.s, "t")] if a.s < 0 else []
    out = []
    if a.s < 0:
        out.append((a.s, "s"))
    if a.o < 0:
        out.append((a.o, "o"))
    return out


def enumerate_supported_candidates(p: Pattern, kg, seed: int = 0, cooc=None) -> set:
    """Candidates of ``p`` with positive support, without a full cross product.

    Body templates are assigned atom by atom; a predicate is only tried if
    it shares a constant, in the joined positions, with every already
    assigned atom it is connected to.  Survivors are verified with an
    existence query.  Equals ``instantiate_candidates`` filtered to
    support > 0.
    """
    preds = _predicates_by_kind(kg)
    templates = p.body_templates
    if any(not preds[k] for _, k in templates):
        log.warning("pattern %s: KG lacks predicates of a required kind", p.name)
        return set()
    cooc = cooc or _Cooccurrence(kg)
    pos = [a for a in p.body if a.kind != "neq"]
    # connected order: start with the first atom, then atoms sharing variables
    order, left = [], list(range(len(pos)))
    while left:
        pick = None
        seen_vars = {v for i in order for v, _ in _roles(pos[i])}
        for i in left:
            if {v for v, _ in _roles(pos[i])} & seen_vars:
                pick = i
                break
        if pick is None:
            pick = left[0]
        order.append(pick)
        left.remove(pick)
    nonempty = {x for x, pairs in kg.index.by_p.items() if pairs}
    type_nonempty = {o for _, o in kg.index.by_p.get(TYPE, ())}

    def pool(a):
        if a.kind == "type":
            return preds["type"] if a.is_template else [a.pred]
        return preds["rel"] if a.is_template else [a.pred]

    def pred_of(a, assign):
        return assign[a.pred] if a.is_template else a.pred

    out, checked = set(), {}

    def rec(k, assign, used):
        if k == len(order):
            body = p.body_atoms(assign)
            key = _body_key(body)
            ok = checked.get(key)
            if ok is None:
                probe = make_rule(body, _first_pos(body), p.symbols, p.var_names)
                ok = checked[key] = has_witness(probe, kg)
            if ok:
                r = _complete(p, assign, preds, seed)
                if r is not None:
                    out.add(r)
            return
        a = pos[order[k]]
        fixed = (not a.is_template) or a.pred in assign
        cands = [pred_of(a, assign)] if fixed else [x for x in pool(a) if x not in used]
        live = type_nonempty if a.kind == "type" else nonempty
        cands = [x for x in cands if x in live]
        for j in order[:k]:
            b = pos[j]
            pb = pred_of(b, assign)
            for v, rb in _roles(b):
                for w, ra in _roles(a):
                    if v == w:
                        allowed = cooc.compat(rb, ra).get(pb, ())
                        cands = [x for x in cands if x in allowed]
        for x in cands:
            if fixed:
                rec(k + 1, assign, used)
            else:
                assign[a.pred] = x
                used.add(x)
                rec(k + 1, assign, used)
                used.discard(x)
                del assign[a.pred]

    rec(0, {}, set())
    return out


# ---------------------------------------------------------------- selection

@dataclass(frozen=True)
class RankedRule:
    rule: Rule
    support: int
    pattern: str

    def text(self):
        return self.rule.text()


def _support_job(args):
    from . import _parallel

    return count_witnesses(args, _parallel.shared())


def supports(rules, kg, workers: int = 1) -> list:
    """Witness counts for ``rules`` (order preserved)."""
    rules = list(rules)
    if workers > 1 and len(rules) > 1:
        from . import _parallel

        return _parallel.map_shared(_support_job, rules, kg, workers)
    return [count_witnesses(r, kg) for r in rules]


def rank_rules(rules, kg, pattern="manual", workers: int = 1) -> list:
    """Rules with their supports, largest first, ties by canonical text."""
    rules = list(dict.fromkeys(rules))
    counts = supports(rules, kg, workers)
    ranked = [RankedRule(r, c, pattern) for r, c in zip(rules, counts)]
    ranked.sort(key=lambda x: (-x.support, x.rule.canonical_text()))
    return ranked


def select_rules(patterns, kg, k1: int, seed: int = 0, workers: int = 1) -> list:
    """Per pattern, the ``k1`` positive-support candidates of largest support."""
    if k1 < 1:
        raise ValueError("k1 must be at least 1")
    cooc = _Cooccurrence(kg)
    chosen, seen = [], set()
    for p in patterns:
        cands = enumerate_supported_candidates(p, kg, seed, cooc)
        ranked = [x for x in rank_rules(cands, kg, p.name, workers) if x.support > 0]
        if len(ranked) < k1:
            log.warning(
                "pattern %s: only %d candidate(s) with positive support (k1=%d)",
                p.name, len(ranked), k1,
            )
        for x in ranked[:k1]:
            if x.rule not in seen:
                seen.add(x.rule)
                chosen.append(x)
    return chosen
