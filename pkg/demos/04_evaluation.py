"""Score a made-up model on a built benchmark: threshold, AUC and ranking metrics."""
import random
import tempfile
from pathlib import Path

from inferbench.pipeline import BuildConfig, build, evaluate, load_benchmark, stats
from inferbench.synth import random_kg, write_tsv

work = Path(tempfile.mkdtemp())
write_tsv(work / "kg.tsv", random_kg(8_000, seed=2))
bench = build(BuildConfig(kg=str(work / "kg.tsv"), out=str(work / "bench"),
                          builtin="sym,comp,inter", k1=5, k2=60, method="pa", seed=2))
print("benchmark stats:", stats(bench))

# a noisy scorer: positives tend to score higher than negatives
b = load_benchmark(bench)
rng = random.Random(0)
with open(work / "preds.tsv", "w") as fh:
    for split in ("valid", "test"):
        for label, triples in ((1, b.positives[split]), (0, b.negatives[split])):
            for t in sorted(triples):
                conf = min(1.0, max(0.0, rng.gauss(0.65 if label else 0.4, 0.15)))
                fh.write("\t".join(b.symbols.triple_names(t)) + f"\t{conf:.4f}\n")

print(evaluate(bench, work / "preds.tsv", ks=(1, 3)).text())
print(evaluate(bench, baseline="simpbl").text())
