"""Indexed join evaluation, one-step application and semi-naive materialisation."""

from ..kg import NEQ, TYPE, FactIndex, KnowledgeGraph

FULL, DELTA, OLD = 0, 1, 2

# step modes
_CHECK, _BY_S, _BY_O, _SCAN = range(4)


def _index_of(kg) -> FactIndex:
    return kg.index if isinstance(kg, KnowledgeGraph) else kg


class _Step:
    __slots__ = ("p", "s", "o", "mode", "src", "checks", "bind_s", "bind_o", "same")

    def __repr__(self):
        return f"_Step(p={self.p}, s={self.s}, o={self.o}, mode={self.mode}, src={self.src})"


def _estimate(index, a, bound):
    s_known = a.s >= 0 or a.s in bound
    o_known = a.o >= 0 or a.o in bound
    n = len(index.by_p.get(a.p, ()))
    if n == 0:
        return -1.0  # empty relation: fail fast
    if s_known and o_known:
        return 0.0
    if s_known:
        return n / max(index.n_subj[a.p], 1)
    if o_known:
        return n / max(index.n_obj[a.p], 1)
    return float(n)


def plan(atoms, index, bound=(), first=None, sources=None):
    """Greedy join order: cheapest atom next given the variables bound so far.

    ``first`` forces an atom (by position) to lead, used for delta atoms in
    semi-naive rounds.  Inequalities are attached to the earliest step after
    which both of their sides are bound.
    """
    pos = [(i, a) for i, a in enumerate(atoms) if a.p != NEQ]
    neqs = [a for a in atoms if a.p == NEQ]
    bound = set(bound)
    pending_neq = list(neqs)
    steps = []
    remaining = list(pos)

    def ready(a):
        return (a.s >= 0 or a.s in bound) and (a.o >= 0 or a.o in bound)

    initial = [a for a in pending_neq if ready(a)]
    pending_neq = [a for a in pending_neq if not ready(a)]

    while remaining:
        if first is not None and not steps:
            pick = next(x for x in remaining if x[0] == first)
        else:
            pick = min(remaining, key=lambda x: (_estimate(index, x[1], bound), x[0]))
        remaining.remove(pick)
        i, a = pick
        st = _Step()
        st.p = a.p
        st.s, st.o = a.s, a.o
        st.src = sources[i] if sources else FULL
        s_known = a.s >= 0 or a.s in bound
        o_known = a.o >= 0 or a.o in bound
        st.same = a.s < 0 and a.s == a.o and not s_known
        if s_known and o_known:
            st.mode = _CHECK
        elif s_known:
            st.mode = _BY_S
        elif o_known:
            st.mode = _BY_O
        else:
            st.mode = _SCAN
        st.bind_s = None if s_known else -a.s - 1
        st.bind_o = None if (o_known or st.same) else -a.o - 1
        for v in (a.s, a.o):
            if v < 0:
                bound.add(v)
        now = [n for n in pending_neq if ready(n)]
        pending_neq = [n for n in pending_neq if not ready(n)]
        st.checks = tuple((n.s, n.o) for n in now)
        steps.append(st)
    return steps, tuple((n.s, n.o) for n in initial)


def _candidates(st, idx, bind):
    """Yield ``(s, o)`` pairs matching a step under the current binding."""
    s = st.s if st.s >= 0 else bind[-st.s - 1]
    o = st.o if st.o >= 0 else bind[-st.o - 1]
    p = st.p
    if st.mode == _CHECK:
        if (s, p, o) in idx.facts:
            yield s, o
    elif st.mode == _BY_S:
        for x in idx.by_ps.get((p, s), ()):
            yield s, x
    elif st.mode == _BY_O:
        for x in idx.by_po.get((p, o), ()):
            yield x, o
    else:
        for pair in idx.by_p.get(p, ()):
            yield pair


def _val(t, bind):
    return t if t >= 0 else bind[-t - 1]


def _search(steps, k, bind, indexes, delta_facts):
    if k == len(steps):
        yield bind
        return
    st = steps[k]
    idx = indexes[st.src]
    excl = delta_facts if st.src == OLD else None
    bs, bo, p = st.bind_s, st.bind_o, st.p
    for s, o in _candidates(st, idx, bind):
        if st.same and s != o:
            continue
        if excl is not None and (s, p, o) in excl:
            continue
        if bs is not None:
            bind[bs] = s
        if bo is not None:
            bind[bo] = o
        ok = True
        for a, b in st.checks:
            if _val(a, bind) == _val(b, bind):
                ok = False
                break
        if ok:
            yield from _search(steps, k + 1, bind, indexes, delta_facts)


def _solutions(atoms, nvars, index, init=None, first=None, sources=None, delta=None):
    bind = list(init) if init is not None else [None] * nvars
    bound = {-(i + 1) for i, x in enumerate(bind) if x is not None}
    steps, initial = plan(atoms, index, bound, first, sources)
    for a, b in initial:
        if _val(a, bind) == _val(b, bind):
            return
    indexes = (index, delta, index)
    dfacts = delta.facts if delta is not None else None
    yield from _search(steps, 0, bind, indexes, dfacts)


def _nvars(rule):
    return len(rule.variables)


def iter_witnesses(rule, kg):
    """Yield witness tuples (values indexed by ``-var - 1``) without collecting."""
    for b in _solutions(rule.body, _nvars(rule), _index_of(kg)):
        yield tuple(b)


def find_witnesses(rule, kg) -> set:
    """All substitutions satisfying the body of ``rule`` in ``kg``.

    Each witness is a tuple whose ``i``-th entry is the constant bound to
    variable ``-(i + 1)``; ``rule.substitution(w)`` gives a name mapping.
    """
    return set(iter_witnesses(rule, kg))


def count_witnesses(rule, kg, limit=None) -> int:
    """Support size, stopping early once ``limit`` is reached."""
    index = _index_of(kg)
    steps, initial = plan(rule.body, index)
    bind = [None] * _nvars(rule)
    for a, b in initial:
        if _val(a, bind) == _val(b, bind):
            return 0
    if not steps:
        return 0
    last = steps[-1]
    # the final step can be counted without enumeration when it has no filters
    fast = not last.checks and not last.same and last.mode in (_BY_S, _BY_O)
    indexes = (index, None, index)
    total = 0
    if fast and len(steps) > 0:
        head = steps[:-1]
        p = last.p
        for b in _search(head, 0, bind, indexes, None):
            if last.mode == _BY_S:
                total += len(index.by_ps.get((p, _val(last.s, b)), ()))
            else:
                total += len(index.by_po.get((p, _val(last.o, b)), ()))
            if limit is not None and total >= limit:
                return total
        return total
    for _ in _search(steps, 0, bind, indexes, None):
        total += 1
        if limit is not None and total >= limit:
            break
    return total


def has_witness(rule, kg) -> bool:
    return count_witnesses(rule, kg, limit=1) > 0


def witnesses_for(rule, triple, kg):
    """Witnesses whose head instance equals ``triple``."""
    h = rule.head
    init = [None] * _nvars(rule)
    pairs = [(h.s, triple[0])]
    if h.p == TYPE:
        if triple[1] != TYPE or triple[2] != h.o:
            return
    else:
        if triple[1] != h.p:
            return
        pairs.append((h.o, triple[2]))
    for t, v in pairs:
        if t >= 0:
            if t != v:
                return
        else:
            cur = init[-t - 1]
            if cur is not None and cur != v:
                return
            init[-t - 1] = v
    for b in _solutions(rule.body, len(init), _index_of(kg), init=init):
        yield tuple(b)


def apply_once(rule, kg) -> set:
    """One-step application: every head instance of a witness."""
    g = rule.ground_head
    return {g(b) for b in _solutions(rule.body, _nvars(rule), _index_of(kg))}


def apply_once_set(rules, kg) -> set:
    out = set()
    for r in rules:
        out |= apply_once(r, kg)
    return out


def _new_conclusions(rules, full, delta, sink):
    for r in rules:
        g = r.ground_head
        n = _nvars(r)
        pos = [i for i, a in enumerate(r.body) if a.p != NEQ]
        for k, i in enumerate(pos):
            if not delta.by_p.get(r.body[i].p):
                continue
            sources = {}
            for j in pos:
                sources[j] = OLD if j < i else (DELTA if j == i else FULL)
            for b in _solutions(r.body, n, full, first=i, sources=sources, delta=delta):
                t = g(b)
                if t not in full.facts:
                    sink.add(t)


def materialise_index(rules, facts) -> FactIndex:
    """Least fixpoint of ``rules`` over ``facts`` by semi-naive evaluation."""
    rules = list(rules)
    full = FactIndex(facts)
    new = set()
    for r in rules:
        g = r.ground_head
        for b in _solutions(r.body, _nvars(r), full):
            t = g(b)
            if t not in full.facts:
                new.add(t)
    while new:
        delta = FactIndex(new)
        full.update(new)
        new = set()
        _new_conclusions(rules, full, delta, new)
    return full


def materialise(rules, kg) -> KnowledgeGraph:
    index = materialise_index(rules, _index_of(kg).facts)
    out = KnowledgeGraph((), getattr(kg, "symbols", None))
    out.index = index
    return out
