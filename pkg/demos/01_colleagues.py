"""Walk through a tiny benchmark built from six colleague triples.

Run from the repository root:  python demos/01_colleagues.py
"""
from pathlib import Path

from inferbench.datalog import apply_once, find_witnesses, parse_rule
from inferbench.kg import load_kg, signature
from inferbench.metrics import simpbl_predict
from inferbench.negatives import build_pools, gen_pa
from inferbench.splits import build_positive_sets, unsupported_examples

kg = load_kg(Path(__file__).parent / "data" / "colleagues.tsv")
names = kg.symbols.triple_names
sig = signature(kg)
print(f"{len(kg)} triples, {len(sig.relations)} relation, {len(sig.constants)} people")

# colleagues of colleagues are colleagues
rule = parse_rule("(x, IsColleague, y), (y, IsColleague, z), x != z -> (x, IsColleague, z)",
                  kg.symbols)
print("rule:", rule)
for w in sorted(find_witnesses(rule, kg)):
    print("  witness", [kg.symbols.name(c) for c in w])
print("new conclusions:", sorted(names(t) for t in apply_once(rule, kg) - kg.facts))

# all three conclusions sampled (k2 = 3); two go to training, one to test
seed = 25361
pos, _ = build_positive_sets(kg, [rule], k2=3, ratio=(2, 0, 1), seed=seed)
print("\nP_train:", len(pos.train), "triples")
print("P_test: ", sorted(names(t) for t in pos.test))
print("test triples without a training witness:", unsupported_examples(pos, [rule]))

# position-aware negatives: corrupt conclusions with constants seen in the same slot
pools = build_pools(pos, [rule], kg)
print("\ncorruption pool for test:", sorted(names(t) for t in pools.prime["test"].enumerate()))
neg = gen_pa(pos, pools, seed)
print("N_train:", sorted(names(t) for t in neg.train))
print("N_test: ", sorted(names(t) for t in neg.test))

# the pair-involvement baseline accepts the negative too
preds = simpbl_predict(sorted(pos.test | set(neg.test)), pos.train)
for t, v in sorted(preds.items()):
    print("SimpBL", names(t), "->", bool(v))
