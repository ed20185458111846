"""Rule-set entailment by freezing rule bodies (a chase over canonical databases)."""

import itertools

from ..kg import FRESH_BASE, TYPE, FactIndex
from .engine import apply_once, materialise_index


def set_partitions(items):
    """Yield every partition of ``items`` as a list of blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _rule_constants(rule):
    out = set()
    for a in list(rule.body) + [rule.head]:
        for t in a.terms():
            if t >= 0:
                out.add(t)
    return out


def _groundings(rule, extra_constants):
    """Yield variable assignments covering every way a witness can collapse.

    Variables are partitioned into blocks; each block is sent either to a
    fresh constant or, injectively, to a constant mentioned by the rules.
    Assignments violating the rule's own inequalities are skipped.
    """
    variables = list(rule.variables)
    neqs = rule.neq_body
    consts = sorted(_rule_constants(rule) | set(extra_constants))
    for blocks in set_partitions(variables):
        n = len(blocks)
        # each block: None (fresh) or an index into consts, injective on consts
        options = [None] + consts
        for choice in itertools.product(options, repeat=n):
            used = [c for c in choice if c is not None]
            if len(used) != len(set(used)):
                continue
            val = {}
            fresh = 0
            for blk, c in zip(blocks, choice):
                if c is None:
                    c = FRESH_BASE + fresh
                    fresh += 1
                for v in blk:
                    val[v] = c
            ok = True
            for a in neqs:
                x = val.get(a.s, a.s) if a.s < 0 else a.s
                y = val.get(a.o, a.o) if a.o < 0 else a.o
                if x == y:
                    ok = False
                    break
            if ok:
                yield val


def freeze(atom, val):
    s = val[atom.s] if atom.s < 0 else atom.s
    if atom.p == TYPE:
        return (s, TYPE, atom.o)
    o = val[atom.o] if atom.o < 0 else atom.o
    return (s, atom.p, o)


def entails(ruleset, rule) -> bool:
    """Whether ``ruleset`` logically entails ``rule`` over every KG.

    For each way of identifying the rule's variables (with each other or
    with constants occurring in either side), the body is frozen into a
    small KG, ``ruleset`` is materialised over it and the frozen head must
    be derived.
    """
    ruleset = list(ruleset)
    extra = set()
    for r in ruleset:
        extra |= _rule_constants(r)
    body = rule.positive_body
    for val in _groundings(rule, extra):
        facts = [freeze(a, val) for a in body]
        head = freeze(rule.head, val)
        if head in facts:
            continue
        if head not in materialise_index(ruleset, facts).facts:
            return False
    return True


def counterexample(ruleset, rule, kg_facts):
    """A triple of T_rule(K) missing from M_ruleset(K), or ``None``."""
    closure = materialise_index(ruleset, kg_facts)
    for t in sorted(apply_once(rule, FactIndex(kg_facts))):
        if t not in closure.facts:
            return t
    return None
