"""Random instance generators and brute-force oracles shared by the tests."""

import itertools
import random

from inferbench.datalog.syntax import parse_rule
from inferbench.kg import NEQ, TYPE, SymbolTable

RELS = ["A", "B", "C", "D"]
TYPES = ["T1", "T2"]
VARS = ["x", "y", "z", "w"]


def random_triples(rng, symbols, n, n_consts=6, rels=RELS, types=TYPES, type_share=0.2):
    consts = [f"c{i}" for i in range(n_consts)]
    out = set()
    for _ in range(n):
        if types and rng.random() < type_share:
            out.add(symbols.intern_triple(rng.choice(consts), symbols.type_marker, rng.choice(types)))
        else:
            out.add(symbols.intern_triple(rng.choice(consts), rng.choice(rels), rng.choice(consts)))
    return out


def random_rule_text(rng, rels=RELS, types=TYPES, max_body=3, neq=0.3, consts=()):
    while True:
        body, used = [], []
        for _ in range(rng.randint(1, max_body)):
            if types and rng.random() < 0.2:
                v = rng.choice(VARS[:3])
                body.append(f"({v}, type, {rng.choice(types)})")
                used.append(v)
            else:
                s, o = rng.choice(VARS[:3]), rng.choice(VARS[:3] + [f"<{c}>" for c in consts])
                body.append(f"({s}, {rng.choice(rels)}, {o})")
                used += [s] + ([o] if o in VARS else [])
        used = sorted(set(used))
        if neq and len(used) > 1 and rng.random() < neq:
            a, b = rng.sample(used, 2)
            body.append(f"{a} != {b}")
        if types and rng.random() < 0.2:
            head = f"({rng.choice(used)}, type, {rng.choice(types)})"
        else:
            head = f"({rng.choice(used)}, {rng.choice(rels)}, {rng.choice(used)})"
        return ", ".join(body) + " -> " + head


def random_rule(rng, symbols, **kw):
    return parse_rule(random_rule_text(rng, **kw), symbols)


def ground(atom, val):
    def g(t):
        return val[t] if t < 0 else t

    if atom.p == TYPE:
        return (g(atom.s), TYPE, atom.o)
    return (g(atom.s), atom.p, g(atom.o))


def brute_substitutions(rule, facts):
    """Every total assignment over the active domain satisfying the body."""
    domain = set()
    for s, p, o in facts:
        domain.add(s)
        if p != TYPE:
            domain.add(o)
    for a in list(rule.body) + [rule.head]:
        for t in (a.s, a.o):
            if t >= 0 and a.p != TYPE and a.p != NEQ:
                domain.add(t)
    variables = sorted({t for a in rule.body for t in (a.s, a.o) if t < 0}, reverse=True)
    for combo in itertools.product(sorted(domain), repeat=len(variables)):
        val = dict(zip(variables, combo))
        ok = True
        for a in rule.body:
            if a.p == NEQ:
                x = val[a.s] if a.s < 0 else a.s
                y = val[a.o] if a.o < 0 else a.o
                if x == y:
                    ok = False
                    break
            elif ground(a, val) not in facts:
                ok = False
                break
        if ok:
            yield val


def brute_apply(rule, facts):
    return {ground(rule.head, v) for v in brute_substitutions(rule, facts)}


def naive_fixpoint(rules, facts):
    cur = set(facts)
    while True:
        new = set()
        for r in rules:
            new |= brute_apply(r, cur)
        if new <= cur:
            return cur
        cur |= new


def fresh_symbols():
    return SymbolTable()


def isomorphic(r1, r2):
    """Equal up to variable renaming and body permutation, by exhaustive search."""
    if len(r1.body) != len(r2.body):
        return False

    def options(a, b):
        if a.p != b.p:
            return []
        if a.p == TYPE:
            return [[(a.s, b.s)]] if a.o == b.o else []
        if a.p == NEQ:
            return [[(a.s, b.s), (a.o, b.o)], [(a.s, b.o), (a.o, b.s)]]
        return [[(a.s, b.s), (a.o, b.o)]]

    def search(pairs_left, m, inv):
        if not pairs_left:
            return True
        (a, b), rest = pairs_left[0], pairs_left[1:]
        for opt in options(a, b):
            got = _extend(opt, m, inv)
            if got is not None and search(rest, *got):
                return True
        return False

    for perm in itertools.permutations(r2.body):
        pairs = list(zip(r1.body, perm)) + [(r1.head, r2.head)]
        if search(pairs, {}, {}):
            return True
    return False


def _extend(pairs, m, inv):
    m, inv = dict(m), dict(inv)
    for x, y in pairs:
        if (x < 0) != (y < 0):
            return None
        if x >= 0:
            if x != y:
                return None
            continue
        if m.get(x, y) != y or inv.get(y, x) != x:
            return None
        m[x], inv[y] = y, x
    return m, inv


# acceptance verdicts, printed at the end of the session by conftest
ACCEPTANCE = []
