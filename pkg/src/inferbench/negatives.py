"""Negative example generation: rc, rb, pa and qg.

All four methods return balanced, pairwise disjoint negative splits that
never intersect the positives.  When a pool is too small a
:class:`ShortfallError` is raised unless ``allow_shortfall`` is set, in
which case the shortage is recorded on the result.
"""

import bisect
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .datalog.engine import apply_once_set, iter_witnesses
from .datalog.syntax import atom_vars, make_rule
from .errors import ShortfallError
from .kg import TYPE, FactIndex, signature
from .seeding import derive_rng
from .splits import DEFAULT_RATIO, split_sizes

log = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")
MATERIALISE_LIMIT = 200_000


@dataclass
class NegativeSets:
    train: list
    valid: list
    test: list
    method: str
    sources: dict = field(default_factory=dict)  # triple -> "rc" | "rb" | "pa" | "subrule"
    shortfall: dict = field(default_factory=dict)  # split -> (needed, produced)
    info: dict = field(default_factory=dict)

    def split(self, name) -> list:
        return getattr(self, name)

    @property
    def all(self) -> set:
        return set(self.train) | set(self.valid) | set(self.test)


def _rules(rules):
    return [getattr(r, "rule", r) for r in rules]


class _Collector:
    """Accumulates splits while enforcing balance and the shortfall policy."""

    def __init__(self, method, allow_shortfall):
        self.result = NegativeSets([], [], [], method)
        self.allow = allow_shortfall

    def put(self, name, items, needed, tag):
        items = list(items)
        self.result.split(name).extend(items)
        for t in items:
            self.result.sources[t] = tag if isinstance(tag, str) else tag(t)
        got = len(self.result.split(name))
        if needed is not None and got < needed:
            if not self.allow:
                raise ShortfallError(
                    f"{self.result.method}: {name} pool yields {got} of {needed} negatives"
                )
            log.warning("%s: %s shortfall, %d of %d", self.result.method, name, got, needed)
            self.result.shortfall[name] = (needed, got)


# ---------------------------------------------------------------- rc

def gen_rc(positives, kg, seed: int = 0, allow_shortfall=False, retries: int = 64) -> NegativeSets:
    """Random object corruption with constants of the KG.

    Type triples are corrupted in their entity slot.
    """
    consts = sorted(signature(kg).constants)
    if not consts:
        raise ShortfallError("rc: KG has no constants")
    p_all = positives.all
    taken = set()
    col = _Collector("rc", allow_shortfall)
    for name in SPLITS:
        rng = derive_rng(seed, "rc", name)
        part = sorted(getattr(positives, name))
        out = []
        for s, p, o in part:
            def make(c):
                return (c, p, o) if p == TYPE else (s, p, c)

            pick = None
            for _ in range(retries):
                t = make(rng.choice(consts))
                if t not in p_all and t not in taken:
                    pick = t
                    break
            if pick is None:
                rest = [make(c) for c in consts]
                rest = [t for t in rest if t not in p_all and t not in taken]
                if rest:
                    pick = rng.choice(rest)
            if pick is not None:
                taken.add(pick)
                out.append(pick)
        col.put(name, out, len(part), "rc")
    return col.result


# ---------------------------------------------------------------- rb

def relevance_descriptors(rules, kg):
    """``(head relations, head types, support constants)`` for ``rules``.

    Support constants are those in the range of some witness of some rule.
    """
    rels, types, consts = set(), set(), set()
    for r in _rules(rules):
        if r.head.p == TYPE:
            types.add(r.head.o)
        else:
            rels.add(r.head.p)
        for w in iter_witnesses(r, kg):
            consts.update(w)
    return sorted(rels), sorted(types), sorted(consts)


class RelevancePool:
    """Triples over head predicates and support constants, minus P_all."""

    def __init__(self, rels, types, consts, p_all):
        self.rels, self.types, self.consts = rels, types, consts
        self.p_all = p_all
        n = len(consts)
        self.n_rel = len(rels) * n * n
        self.size = self.n_rel + len(types) * n
        cs, rs, ts = set(consts), set(rels), set(types)
        inside = 0
        for s, p, o in p_all:
            if s not in cs:
                continue
            if p == TYPE:
                inside += o in ts
            else:
                inside += p in rs and o in cs
        self.available = self.size - inside

    def triple(self, i):
        n = len(self.consts)
        if i < self.n_rel:
            r, rest = divmod(i, n * n)
            a, b = divmod(rest, n)
            return (self.consts[a], self.rels[r], self.consts[b])
        i -= self.n_rel
        t, a = divmod(i, n)
        return (self.consts[a], TYPE, self.types[t])

    def __iter__(self):
        for i in range(self.size):
            t = self.triple(i)
            if t not in self.p_all:
                yield t

    def __contains__(self, t):
        cs = self.consts
        s, p, o = t
        if t in self.p_all or s not in cs:
            return False
        if p == TYPE:
            return o in self.types
        return p in self.rels and o in cs


def gen_rb(positives, rules, kg, seed: int = 0, allow_shortfall=False) -> NegativeSets:
    if not rules:
        raise ValueError("rb needs at least one rule")
    rels, types, consts = relevance_descriptors(rules, kg)
    p_all = positives.all
    pool = RelevancePool(rels, types, consts, p_all)
    needs = [len(getattr(positives, n)) for n in SPLITS]
    total = sum(needs)
    rng = derive_rng(seed, "rb")
    if pool.available <= MATERIALISE_LIMIT or total * 2 > pool.available:
        cands = list(pool)
        drawn = rng.sample(cands, min(total, len(cands)))
    else:
        drawn, seen = [], set()
        while len(drawn) < total:
            t = pool.triple(rng.randrange(pool.size))
            if t not in p_all and t not in seen:
                seen.add(t)
                drawn.append(t)
    col = _Collector("rb", allow_shortfall)
    col.result.info.update(
        pred_r=len(rels) + len(types), const_sup=len(consts),
        n_cand=pool.size, const_sup_source="substitution_range",
    )
    start = 0
    for name, need in zip(SPLITS, needs):
        col.put(name, drawn[start:start + need], need, "rb")
        start += need
    return col.result


# ---------------------------------------------------------------- pa

class PositionAwarePool:
    """Corruptions of ``conclusions`` with constants seen in the same position.

    Membership follows three clauses: an entity-corrupted type triple whose
    new entity is typed somewhere in P_all, a subject-corrupted triple whose
    new subject is a subject of the same relation in P_all, and the
    object-corrupted analogue; P_all members are excluded.

    Large pools are sampled by generate-and-reject: a (conclusion, slot,
    replacement) triple is drawn uniformly and accepted with probability
    one over the number of ways it could have been generated, which makes
    accepted triples uniform over the pool.
    """

    def __init__(self, conclusions, p_all: FactIndex, materialise_limit=MATERIALISE_LIMIT):
        self.conclusions = sorted(conclusions)
        self.p_all = p_all
        self.limit = materialise_limit
        self._subj, self._obj = {}, {}
        self.typed = sorted({s for s, _ in p_all.by_p.get(TYPE, ())})
        self.typed_set = set(self.typed)
        self.c_po = Counter((p, o) for _, p, o in self.conclusions)
        self.c_ps = Counter((p, s) for s, p, _ in self.conclusions if p != TYPE)
        cum, g = [], 0
        for s, p, o in self.conclusions:
            g += len(self.typed) if p == TYPE else len(self.subjects(p)[0]) + len(self.objects(p)[0])
            cum.append(g)
        self.cum = cum
        self.generators = g
        self._members = None

    def subjects(self, p):
        got = self._subj.get(p)
        if got is None:
            lst = sorted({s for s, _ in self.p_all.by_p.get(p, ())})
            got = self._subj[p] = (lst, set(lst))
        return got

    def objects(self, p):
        got = self._obj.get(p)
        if got is None:
            lst = sorted({o for _, o in self.p_all.by_p.get(p, ())})
            got = self._obj[p] = (lst, set(lst))
        return got

    def multiplicity(self, t) -> int:
        s, p, o = t
        if p == TYPE:
            return self.c_po[(TYPE, o)] if s in self.typed_set else 0
        m = 0
        if s in self.subjects(p)[1]:
            m += self.c_po[(p, o)]
        if o in self.objects(p)[1]:
            m += self.c_ps[(p, s)]
        return m

    def __contains__(self, t) -> bool:
        return t not in self.p_all.facts and self.multiplicity(t) > 0

    def enumerate(self) -> set:
        if self._members is None:
            out = set()
            facts = self.p_all.facts
            for s, p, o in self.conclusions:
                if p == TYPE:
                    cands = [(e, TYPE, o) for e in self.typed]
                else:
                    cands = [(x, p, o) for x in self.subjects(p)[0]]
                    cands += [(s, p, x) for x in self.objects(p)[0]]
                out.update(t for t in cands if t not in facts)
            self._members = out
        return self._members

    def _generate(self, rng):
        u = rng.randrange(self.generators)
        i = bisect.bisect_right(self.cum, u)
        off = u - (self.cum[i - 1] if i else 0)
        s, p, o = self.conclusions[i]
        if p == TYPE:
            return (self.typed[off], TYPE, o)
        subj = self.subjects(p)[0]
        if off < len(subj):
            return (subj[off], p, o)
        return (s, p, self.objects(p)[0][off - len(subj)])

    def sample(self, k, rng, exclude=frozenset()) -> list:
        """Up to ``k`` distinct pool members outside ``exclude``, uniformly."""
        if k <= 0 or self.generators == 0:
            return []
        if self.generators <= self.limit:
            return self._sample_exact(k, rng, exclude)
        facts = self.p_all.facts
        out, seen = [], set()
        misses, cap = 0, max(20_000, 50 * k)
        while len(out) < k:
            t = self._generate(rng)
            if t in facts or t in exclude or t in seen:
                misses += 1
                if misses > cap:
                    rest = self._sample_exact(k - len(out), rng, set(exclude) | seen)
                    return out + rest
                continue
            if rng.random() * self.multiplicity(t) < 1.0:
                seen.add(t)
                out.append(t)
                misses = 0
        return out

    def _sample_exact(self, k, rng, exclude):
        cands = sorted(self.enumerate() - set(exclude))
        if len(cands) <= k:
            rng.shuffle(cands)
            return cands
        return rng.sample(cands, k)


@dataclass
class CorruptionPools:
    conclusions: set  # T_R(K)
    c: dict  # split -> conclusion triples in that positive split
    prime: dict  # split -> PositionAwarePool
    p_all: FactIndex


def build_pools(positives, rules, kg, conclusions=None, materialise_limit=MATERIALISE_LIMIT):
    rules = _rules(rules)
    if conclusions is None:
        conclusions = apply_once_set(rules, kg)
    p_all = FactIndex(sorted(positives.all))
    c = {
        "train": conclusions & positives.train,
        "valid": set(positives.valid),
        "test": set(positives.test),
    }
    prime = {n: PositionAwarePool(c[n], p_all, materialise_limit) for n in SPLITS}
    return CorruptionPools(conclusions, c, prime, p_all)


def gen_pa(positives, pools: CorruptionPools, seed: int = 0, allow_shortfall=False) -> NegativeSets:
    col = _Collector("pa", allow_shortfall)
    taken = set()
    for name in SPLITS:
        need = len(getattr(positives, name))
        got = pools.prime[name].sample(need, derive_rng(seed, "pa", name), taken)
        taken.update(got)
        col.put(name, got, need, "pa")
    return col.result


# ---------------------------------------------------------------- qg

def derive_subrules(rules):
    """Rules obtained by deleting inequality-free body atoms.

    Returns ``(sub_rules, complex_rules)``: safe, deduplicated sub-rules not
    equal to any input rule, and the input rules that produced at least one.
    """
    rules = _rules(rules)
    originals = set(rules)
    subs, complex_ = {}, []
    for r in rules:
        pos, neqs = r.positive_body, r.neq_body
        contributed = False
        for size in range(len(pos) - 1, 0, -1):
            for keep in itertools.combinations(pos, size):
                bound = {v for a in keep for v in atom_vars(a)}
                if any(v not in bound for v in atom_vars(r.head)):
                    continue
                kept_neq = [a for a in neqs if all(v in bound for v in atom_vars(a))]
                sub = make_rule(list(keep) + kept_neq, r.head, r.symbols, r.var_names)
                if sub in originals:
                    continue
                contributed = True
                subs.setdefault(sub, sub)
        if contributed:
            complex_.append(r)
    return list(subs), complex_


def gen_qg(positives, pools: CorruptionPools, rules, kg, seed: int = 0,
           ratio=DEFAULT_RATIO, allow_shortfall=False) -> NegativeSets:
    """Sub-rule conclusions first (up to a fraction of each split), then pa."""
    rules = _rules(rules)
    if not rules:
        raise ValueError("qg needs at least one rule")
    subs, complex_ = derive_subrules(rules)
    if not complex_:
        log.warning("qg: no rule has sub-rules; falling back to position-aware sampling")
    frac = Fraction(len(complex_), len(rules))
    p_all = pools.p_all.facts
    minus = sorted(t for t in apply_once_set(subs, kg) if t not in p_all)
    derive_rng(seed, "qg", "split").shuffle(minus)
    a, b, _ = split_sizes(len(minus), ratio)
    c_minus = {"train": minus[:a], "valid": minus[a:a + b], "test": minus[a + b:]}

    col = _Collector("qg", allow_shortfall)
    col.result.info.update(
        fraction=f"{frac.numerator}/{frac.denominator}",
        sub_rules=len(subs), complex_rules=len(complex_),
        c_minus={n: len(v) for n, v in c_minus.items()}, quota={},
    )
    taken = set()
    for name in SPLITS:
        need = len(getattr(positives, name))
        rng = derive_rng(seed, "qg", name)
        avail = [t for t in c_minus[name] if t not in taken]
        avail.sort()
        quota = min(math.ceil(frac * need), len(avail))
        picked = rng.sample(avail, quota) if quota else []
        col.result.info["quota"][name] = quota
        taken.update(picked)
        rest = pools.prime[name].sample(need - quota, rng, taken)
        taken.update(rest)
        col.put(name, picked, None, "subrule")
        col.put(name, rest, need, "pa")
    return col.result


# ---------------------------------------------------------------- checks

def violations(neg: NegativeSets, positives) -> list:
    """Balance, leakage and disjointness problems (empty when sound)."""
    out = []
    p_all = positives.all
    for name in SPLITS:
        got, need = len(neg.split(name)), len(getattr(positives, name))
        if len(set(neg.split(name))) != got:
            out.append(f"{name}: duplicate negatives")
        if got != need and name not in neg.shortfall:
            out.append(f"{name}: {got} negatives for {need} positives")
        leaked = set(neg.split(name)) & p_all
        if leaked:
            out.append(f"{name}: {len(leaked)} negatives are positives")
    for x, y in itertools.combinations(SPLITS, 2):
        if set(neg.split(x)) & set(neg.split(y)):
            out.append(f"{x}/{y}: overlapping negatives")
    return out

