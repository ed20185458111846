"""Instantiate inference patterns on a synthetic KG and keep the best-supported rules."""
from inferbench.kg import KnowledgeGraph, SymbolTable
from inferbench.patterns import builtin_patterns, enumerate_supported_candidates, select_rules
from inferbench.synth import random_kg

symbols = SymbolTable()
rows = random_kg(20_000, n_relations=15, seed=4)
kg = KnowledgeGraph([symbols.intern_triple(*r) for r in rows], symbols)
print(kg)

patterns = builtin_patterns(symbols, ["sym", "inver", "hier", "comp", "inter"])
for p in patterns:
    cands = enumerate_supported_candidates(p, kg, seed=0)
    print(f"{p.name:6s} {p.text():45s} {len(cands):5d} supported candidates")

# k1 = 3 rules per pattern, ranked by number of witnesses
for r in select_rules(patterns, kg, k1=3, seed=0):
    print(f"{r.pattern:6s} support={r.support:5d}  {r.rule}")

# a pattern of your own: types may be templated as well
from inferbench.patterns import parse_pattern  # noqa: E402

typed = parse_pattern("@typed (x, _R, y), (y, type, _t) -> (x, type, _u)", symbols)
for r in select_rules([typed], kg, k1=3, seed=0):
    print(f"typed  support={r.support:5d}  {r.rule}")
