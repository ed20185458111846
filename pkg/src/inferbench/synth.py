"""Synthetic knowledge graphs with planted regularities, for tests and demos."""

import random


def random_kg(n_triples=100_000, n_entities=None, n_relations=40, n_types=6,
              planted=0.3, seed=0) -> list:
    """Name triples of a random KG with planted pattern instances.

    About ``1 - planted`` of the relation triples are uniform noise with
    skewed relation frequencies; the rest copy existing triples through
    symmetric, inverse, hierarchical and compositional links so that the
    built-in patterns find well-supported rules.  Every entity gets one type.
    """
    rng = random.Random(seed)
    if n_entities is None:
        n_entities = max(10, n_triples // 12)
    ents = [f"e{i}" for i in range(n_entities)]
    rels = [f"r{i}" for i in range(n_relations)]
    weights = [1.0 / (i + 1) ** 0.8 for i in range(n_relations)]
    n_type_triples = min(n_entities, n_triples // 10)
    budget = n_triples - n_type_triples
    n_noise = int(budget * (1 - planted))

    facts = set()
    while len(facts) < n_noise:
        facts.add((rng.choice(ents), rng.choices(rels, weights)[0], rng.choice(ents)))

    base = sorted(facts)
    links = []
    for _ in range(max(1, n_relations // 2)):
        kind = rng.choice(("sym", "inv", "hier", "comp"))
        links.append((kind, rng.sample(rels, 3)))
    by_subj = {}
    for s, p, o in base:
        by_subj.setdefault((p, s), []).append(o)
    guard = 0
    while len(facts) < budget and guard < 50 * budget:
        guard += 1
        kind, (a, b, c) = rng.choice(links)
        s, p, o = rng.choice(base)
        if kind == "sym":
            facts.add((o, p, s))
        elif kind == "inv":
            facts.add((o, a if p == b else b, s))
        elif kind == "hier":
            facts.add((s, a if p != a else b, o))
        else:
            nxt = by_subj.get((a, o))
            if nxt:
                facts.add((s, c, rng.choice(nxt)))
            else:
                facts.add((o, a, rng.choice(ents)))
    out = sorted(facts)
    types = [f"t{i}" for i in range(n_types)]
    for e in rng.sample(ents, n_type_triples):
        out.append((e, "type", rng.choice(types)))
    return out


def disjoint_rules_kg(k1: int, k2: int, extra: int = 5):
    """KG plus ``k1`` rules whose new conclusions never coincide.

    Rule ``i`` copies relation ``a{i}`` into the otherwise unused ``b{i}``;
    each ``a{i}`` has ``k2 + extra`` facts over its own constants.
    """
    triples, rules = [], []
    for i in range(k1):
        for j in range(k2 + extra):
            triples.append((f"c{i}_{j}", f"a{i}", f"d{i}_{j}"))
        triples.append((f"c{i}_0", f"b{i}", f"c{i}_0"))
        rules.append(f"(x, a{i}, y) -> (x, b{i}, y)")
    return triples, rules


def overlapping_rules_kg(k1: int, k2: int, shared: int = None):
    """KG plus ``k1`` rules that derive partly the same conclusions.

    Every rule derives exactly ``k2`` new triples of relation ``h``;
    ``shared`` of them (default a tenth) are common to all rules, so
    validation and test conclusions of one rule can already sit in the
    training split of another.
    """
    if shared is None:
        shared = max(1, k2 // 10)
    triples = []
    for i in range(k1):
        for j in range(k2):
            s, o = (f"s{j}", f"t{j}") if j < shared else (f"c{i}_{j}", f"d{i}_{j}")
            triples.append((s, f"a{i}", o))
    triples.append(("s0", "h", "s0"))
    rules = [f"(x, a{i}, y) -> (x, h, y)" for i in range(k1)]
    return triples, rules


def write_tsv(path, triples):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in triples:
            fh.write("\t".join(t) + "\n")
