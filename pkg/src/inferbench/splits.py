"""Distribute one-step rule conclusions into leakage-free positive splits."""

import logging
from dataclasses import dataclass, field

from .datalog.engine import apply_once, witnesses_for
from .kg import KnowledgeGraph, signature
from .seeding import derive_rng

log = logging.getLogger(__name__)

DEFAULT_RATIO = (8, 1, 1)


@dataclass
class PerRuleSplit:
    rule_id: int
    sampled: list
    train: list
    valid: list
    test: list


@dataclass
class PositiveSets:
    train: set
    valid: set
    test: set
    provenance: dict = field(default_factory=dict)  # triple -> tuple of rule ids

    @property
    def all(self) -> set:
        return self.train | self.valid | self.test

    def sizes(self):
        return len(self.train), len(self.valid), len(self.test)


def new_conclusions(rule, kg) -> set:
    """T_r(K) minus K."""
    return {t for t in apply_once(rule, kg) if t not in kg.facts}


def sample_conclusions(rule, kg, k2: int, rng) -> list:
    """Uniform sample of ``min(k2, |T_r(K) \\ K|)`` new conclusions."""
    if k2 < 1:
        raise ValueError("k2 must be at least 1")
    pool = sorted(new_conclusions(rule, kg))
    if not pool:
        log.warning("rule %s derives nothing new", rule)
        return []
    if len(pool) <= k2:
        rng.shuffle(pool)
        return pool
    return rng.sample(pool, k2)


def split_sizes(n: int, ratio=DEFAULT_RATIO) -> tuple:
    """Floor of each share, leftovers handed out train, valid, test in turn."""
    total = sum(ratio)
    if total <= 0 or any(r < 0 for r in ratio):
        raise ValueError(f"bad split ratio {ratio}")
    sizes = [n * r // total for r in ratio]
    left = n - sum(sizes)
    i = 0
    while left > 0:
        if ratio[i % 3] > 0:
            sizes[i % 3] += 1
            left -= 1
        i += 1
    return tuple(sizes)


def split_per_rule(sampled, ratio, rng, rule_id=0) -> PerRuleSplit:
    items = list(sampled)
    rng.shuffle(items)
    a, b, _ = split_sizes(len(items), ratio)
    return PerRuleSplit(rule_id, list(sampled), items[:a], items[a:a + b], items[a + b:])


def assemble(kg, splits) -> PositiveSets:
    """Combine per-rule splits; a triple lands in the earliest split claiming it."""
    train_c, valid_c, test_c = set(), set(), set()
    prov = {}
    for sp in splits:
        train_c.update(sp.train)
        valid_c.update(sp.valid)
        test_c.update(sp.test)
        for t in sp.sampled:
            prov.setdefault(t, []).append(sp.rule_id)
    train = train_c | set(kg.facts)
    valid = valid_c - train
    test = test_c - train - valid
    return PositiveSets(train, valid, test, {t: tuple(v) for t, v in prov.items()})


def build_positive_sets(kg, rules, k2: int, ratio=DEFAULT_RATIO, seed: int = 0):
    """Sample, split and assemble positives for every rule.

    Returns ``(positives, splits)``; each rule's generator is derived from
    the seed and its canonical text.
    """
    rules = [getattr(r, "rule", r) for r in rules]
    splits = []
    for i, r in enumerate(rules):
        rng = derive_rng(seed, "split", r.canonical_text())
        sampled = sample_conclusions(r, kg, k2, rng)
        splits.append(split_per_rule(sampled, ratio, rng, rule_id=i))
    return assemble(kg, splits), splits


# ---------------------------------------------------------------- checks

def unsupported_examples(positives: PositiveSets, rules) -> list:
    """Validation/test triples lacking a witness with premises in P_train."""
    rules = [getattr(r, "rule", r) for r in rules]
    train = KnowledgeGraph(positives.train)
    bad = []
    for t in sorted(positives.valid | positives.test):
        ids = positives.provenance.get(t, range(len(rules)))
        if not any(next(witnesses_for(rules[i], t, train), None) is not None for i in ids):
            bad.append(t)
    return bad


def signature_leaks(positives: PositiveSets) -> dict:
    """Symbols of valid/test that do not occur in train (should be empty)."""
    tr = signature(positives.train)
    out = {}
    for name, part in (("valid", positives.valid), ("test", positives.test)):
        sg = signature(part)
        extra = (sg.types - tr.types) | (sg.relations - tr.relations) | (sg.constants - tr.constants)
        if extra:
            out[name] = extra
    return out
