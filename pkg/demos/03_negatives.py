"""Compare the four negative generators on one benchmark."""
from collections import Counter

from inferbench.kg import KnowledgeGraph, SymbolTable
from inferbench.negatives import build_pools, gen_pa, gen_qg, gen_rb, gen_rc, violations
from inferbench.patterns import builtin_patterns, select_rules
from inferbench.splits import build_positive_sets
from inferbench.synth import random_kg

symbols = SymbolTable()
kg = KnowledgeGraph([symbols.intern_triple(*r) for r in random_kg(10_000, seed=9)], symbols)
rules = [r.rule for r in select_rules(builtin_patterns(symbols, ["comp", "inter"]), kg, 5)]
pos, _ = build_positive_sets(kg, rules, k2=50, seed=1)
print("positives (train, valid, test):", pos.sizes())

pools = build_pools(pos, rules, kg)
runs = {
    "rc": gen_rc(pos, kg, seed=1),
    "rb": gen_rb(pos, rules, kg, seed=1),
    "pa": gen_pa(pos, pools, seed=1),
    "qg": gen_qg(pos, pools, rules, kg, seed=1),
}
for name, neg in runs.items():
    tags = Counter(neg.sources[t] for t in neg.test)
    print(f"{name}: {len(neg.test)} test negatives, sources {dict(tags)}, "
          f"problems {violations(neg, pos) or 'none'}")

# qg draws from conclusions of rules with body atoms removed
print("qg details:", runs["qg"].info)
print("sample qg test negatives:")
for t in sorted(runs["qg"].test)[:5]:
    print("  ", symbols.triple_names(t), runs["qg"].sources[t])
