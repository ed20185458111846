"""One test per acceptance criterion; each records a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the summary is printed at the
end) or ``python tests/test_acceptance.py``.
"""

import functools
import math
import random
import resource
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from helpers import ACCEPTANCE, brute_apply, isomorphic, naive_fixpoint, random_rule, random_triples
from inferbench.datalog import apply_once, apply_once_set, counterexample, entails, materialise
from inferbench.datalog import parse_rule
from inferbench.kg import TYPE, KnowledgeGraph, SymbolTable, load_kg
from inferbench.metrics import (
    classification_metrics,
    from_counts,
    ranking_metrics,
    roc_auc,
)
from inferbench.negatives import (
    SPLITS,
    build_pools,
    derive_subrules,
    gen_pa,
    gen_qg,
    gen_rb,
    gen_rc,
    violations,
)
from inferbench.patterns import builtin_patterns, select_rules
from inferbench.pipeline import BuildConfig, build
from inferbench.rule_analysis import compare_rules, epsilon_cont, epsilon_ent
from inferbench.seeding import derive_rng
from inferbench.splits import build_positive_sets, split_sizes, unsupported_examples
from inferbench.synth import disjoint_rules_kg, overlapping_rules_kg, random_kg, write_tsv

HERE = Path(__file__).resolve().parent
GOLDEN = HERE / "golden" / "colleagues"
COLLEAGUES = HERE.parent / "demos" / "data" / "colleagues.tsv"


def criterion(n, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*a, **kw):
            try:
                detail = fn(*a, **kw)
            except BaseException as e:
                ACCEPTANCE.append((n, title, False, f"{type(e).__name__}: {str(e)[:200]}"))
                raise
            ACCEPTANCE.append((n, title, True, detail or "ok"))
        return run
    return wrap


# ---------------------------------------------------------------- 1

@criterion(1, "colleague benchmark golden output")
def test_c1_colleagues_golden(tmp_path):
    start = time.perf_counter()
    out = build(BuildConfig(kg=str(COLLEAGUES), rules=str(GOLDEN / "transitivity.rules"), k2=3,
                            ratio="2:0:1", method="pa", seed=25361, out=str(tmp_path / "b")))
    elapsed = time.perf_counter() - start
    for f in ("train", "valid", "test", "train_neg", "valid_neg", "test_neg"):
        got = set((out / f"{f}.txt").read_text().splitlines())
        want = set((GOLDEN / f"{f}.txt").read_text().splitlines())
        assert got == want, f
    # premises of every valid/test conclusion are training triples
    kg = load_kg(COLLEAGUES)
    rule = parse_rule((GOLDEN / "transitivity.rules").read_text(), kg.symbols)
    pos, _ = build_positive_sets(kg, [rule], 3, (2, 0, 1), 25361)
    assert unsupported_examples(pos, [rule]) == []
    pools = build_pools(pos, [rule], kg)
    ada_james = kg.symbols.intern_triple("Ada", "IsColleague", "James")
    assert ada_james in pools.prime["test"].enumerate()
    assert elapsed < 1.0, elapsed
    return f"exact golden match, build {elapsed * 1000:.0f} ms"


# ---------------------------------------------------------------- 2

def _build_manual(tmp_path, triples, rules, k2, name):
    kg = tmp_path / f"{name}.tsv"
    write_tsv(kg, triples)
    rf = tmp_path / f"{name}.rules"
    rf.write_text("\n".join(rules) + "\n")
    out = build(BuildConfig(kg=str(kg), rules=str(rf), k2=k2, method="rc", seed=1,
                            out=str(tmp_path / name)))
    return {k: len((out / f"{k}.txt").read_text().splitlines()) for k in ("train", "valid", "test")}, len(set(triples))


@criterion(2, "split size arithmetic")
def test_c2_split_arithmetic(tmp_path):
    k1, k2 = 20, 200
    sizes, n_kg = _build_manual(tmp_path, *disjoint_rules_kg(k1, k2), k2, "disjoint")
    assert sizes["train"] == n_kg + k1 * k2 * 8 // 10
    assert sizes["valid"] == sizes["test"] == k1 * k2 // 10
    over, n_kg2 = _build_manual(tmp_path, *overlapping_rules_kg(k1, k2), k2, "overlap")
    assert over["valid"] < k1 * k2 // 10 and over["test"] < k1 * k2 // 10
    return (f"disjoint |P_train|={sizes['train']}={n_kg}+{k1 * k2 * 8 // 10}; "
            f"overlap |P_valid|={over['valid']}, |P_test|={over['test']} < {k1 * k2 // 10}")


# ---------------------------------------------------------------- 3

@criterion(3, "Datalog oracle equivalence")
def test_c3_datalog_oracles():
    start = time.perf_counter()
    for seed in range(100):
        rng = random.Random(seed)
        st = SymbolTable()
        facts = random_triples(rng, st, rng.randint(0, 200), n_consts=10)
        kg = KnowledgeGraph(facts, st)
        consts = ("c0", "c1") if seed % 3 == 0 else ()
        rules = [random_rule(rng, st, consts=consts) for _ in range(rng.randint(1, 5))]
        for r in rules:
            assert apply_once(r, kg) == brute_apply(r, facts), (seed, r.text())
        assert set(materialise(rules, kg)) == naive_fixpoint(rules, facts), seed
    elapsed = time.perf_counter() - start
    assert elapsed < 10, elapsed
    return f"100 instances, {elapsed:.1f} s"


# ---------------------------------------------------------------- 4

ENTAILMENT_SUITE = [
    # (ruleset, rule, expected)
    (["(x,IsParent,y) -> (x,IsMother,y)"],
     "(x,IsParent,y), (x,GivesBirth,y) -> (x,IsMother,y)", True),
    (["(x,IsParent,y), (x,GivesBirth,y) -> (x,IsMother,y)"],
     "(x,IsParent,y) -> (x,IsMother,y)", False),
    (["(x,R,y) -> (y,R,x)"], "(x,R,y) -> (y,R,x)", True),
    (["(x,R,y) -> (y,R,x)"], "(x,R,y), (y,R,z) -> (z,R,y)", True),
    (["(x,R,y) -> (y,S,x)"], "(x,R,y) -> (x,S,y)", False),
    (["(x,R,y) -> (y,S,x)", "(x,S,y) -> (y,T,x)"], "(x,R,y) -> (x,T,y)", True),
    (["(x,R,y) -> (y,S,x)", "(x,S,y) -> (y,R,x)"], "(x,R,y) -> (y,S,x)", True),
    (["(x,R,y) -> (y,R,x)", "(x,R,y) -> (y,S,x)"], "(x,R,y) -> (x,S,y)", True),
    # inequalities: identifying variables flips the verdict
    (["(x,R,y), x != y -> (x,S,y)"], "(x,R,y) -> (x,S,y)", False),
    (["(x,R,y), x != y -> (x,S,y)", "(x,R,x) -> (x,S,x)"], "(x,R,y) -> (x,S,y)", True),
    (["(x,R,y), (y,R,z), x != z -> (x,R,z)"], "(x,R,y), (y,R,z) -> (x,R,z)", False),
    (["(x,R,y), (y,R,z) -> (x,R,z)"], "(x,R,y), (y,R,z), x != z -> (x,R,z)", True),
    (["(x,R,y), x != y -> (x,S,y)"], "(x,R,y), y != x -> (x,S,y)", True),
    (["(x,R,y), x != <a> -> (x,S,y)", "(<a>,R,y) -> (<a>,S,y)"], "(x,R,y) -> (x,S,y)", True),
    (["(x,R,y), x != <a> -> (x,S,y)"], "(x,R,y) -> (x,S,y)", False),
    (["(x,type,P) -> (x,type,Q)", "(x,type,Q) -> (x,type,W)"], "(x,type,P) -> (x,type,W)", True),
    (["(x,type,P) -> (x,type,Q)"], "(x,type,Q) -> (x,type,P)", False),
    (["(x,R,y), (y,R,z) -> (x,R,z)"], "(x,R,y), (y,R,z), (z,R,w) -> (x,R,w)", True),
]


def _random_kg_for(rules, rng, st):
    rels, types, consts = set(), set(), {"c0", "c1", "c2", "c3"}
    for r in rules:
        for a in list(r.body) + [r.head]:
            if a.p == TYPE:
                types.add(st.name(a.o))
            elif a.p > 1:
                rels.add(st.name(a.p))
            for t in (a.s, a.o):
                if t >= 0 and a.p != TYPE and st.kind(t) == "constant":
                    consts.add(st.name(t))
    rels, types, consts = sorted(rels), sorted(types), sorted(consts)
    facts = set()
    for _ in range(rng.randint(1, 12)):
        if types and (not rels or rng.random() < 0.4):
            facts.add(st.intern_triple(rng.choice(consts), "type", rng.choice(types)))
        else:
            facts.add(st.intern_triple(rng.choice(consts), rng.choice(rels), rng.choice(consts)))
    return facts


@criterion(4, "Entailment correctness")
def test_c4_entailment():
    start = time.perf_counter()
    st = SymbolTable()
    cases = [([parse_rule(t, st) for t in rs], parse_rule(r, st), want)
             for rs, r, want in ENTAILMENT_SUITE]
    for rs, r, want in cases:
        assert entails(rs, r) == want, r.text()
    true_cases = [(rs, r) for rs, r, want in cases if want]
    rng = random.Random(0)
    trials = 10_000
    for i in range(trials):
        rs, r = true_cases[i % len(true_cases)]
        facts = _random_kg_for(rs + [r], rng, st)
        assert counterexample(rs, r, facts) is None, (r.text(), facts)
    # the false verdicts are witnessed by concrete counterexamples
    refuted = 0
    for rs, r, want in cases:
        if want:
            continue
        for _ in range(500):
            if counterexample(rs, r, _random_kg_for(rs + [r], rng, st)) is not None:
                refuted += 1
                break
    n_false = sum(1 for *_, w in cases if not w)
    assert refuted == n_false
    elapsed = time.perf_counter() - start
    assert elapsed < 30, elapsed
    return (f"{len(cases)} curated cases, {trials} trials without counterexample, "
            f"{refuted}/{n_false} non-entailments refuted, {elapsed:.1f} s")


# ---------------------------------------------------------------- 5

def _clause_member(t, conclusions, p_all):
    s, p, o = t
    if t in p_all:
        return False
    if p == TYPE:
        typed = any(x[0] == s and x[1] == TYPE for x in p_all)
        return typed and any(c[1] == TYPE and c[2] == o for c in conclusions)
    subj = any(x[1] == p and x[0] == s for x in p_all)
    obj = any(x[1] == p and x[2] == o for x in p_all)
    return ((subj and any(c[1] == p and c[2] == o for c in conclusions))
            or (obj and any(c[1] == p and c[0] == s for c in conclusions)))


def _desk_benchmark(seed):
    st = SymbolTable()
    rows = random_kg(1500, n_entities=150, n_relations=8, seed=seed)
    kg = KnowledgeGraph([st.intern_triple(*r) for r in rows], st)
    pats = builtin_patterns(st, ["sym", "inver", "hier", "comp", "inter"])
    rules = [x.rule for x in select_rules(pats, kg, 2, seed)]
    pos, _ = build_positive_sets(kg, rules, 20, (8, 1, 1), seed)
    return kg, rules, pos


@criterion(5, "Negative-set invariants")
def test_c5_negative_invariants():
    checked = 0
    for seed in range(20):
        kg, rules, pos = _desk_benchmark(seed)
        pools = build_pools(pos, rules, kg)
        conc = apply_once_set(rules, kg)
        c = {"train": conc & pos.train, "valid": pos.valid, "test": pos.test}
        p_all = pos.all
        subs, complex_ = derive_subrules(rules)
        minus_all = apply_once_set(subs, kg)
        runs = {
            "rc": gen_rc(pos, kg, seed, allow_shortfall=True),
            "rb": gen_rb(pos, rules, kg, seed, allow_shortfall=True),
            "pa": gen_pa(pos, pools, seed, allow_shortfall=True),
            "qg": gen_qg(pos, pools, rules, kg, seed, (8, 1, 1), allow_shortfall=True),
        }
        for method, neg in runs.items():
            assert violations(neg, pos) == [], (seed, method)
            for name, (need, got) in neg.shortfall.items():
                assert got == len(neg.split(name)) < need == len(getattr(pos, name))
            for name in SPLITS:
                for t in neg.split(name):
                    checked += 1
                    tag = neg.sources[t]
                    if tag == "pa":
                        assert _clause_member(t, c[name], p_all), (seed, method, t)
                    elif tag == "subrule":
                        assert t in minus_all, (seed, t)
        # quota = min(ceil(f * |P_x|), available C-_x)
        qg = runs["qg"]
        f = Fraction(len(complex_), len(rules))
        pool = sorted(t for t in minus_all if t not in p_all)
        derive_rng(seed, "qg", "split").shuffle(pool)
        a, b, _ = split_sizes(len(pool), (8, 1, 1))
        c_minus = {"train": pool[:a], "valid": pool[a:a + b], "test": pool[a + b:]}
        earlier = set()
        for name in SPLITS:
            avail = len([t for t in c_minus[name] if t not in earlier])
            quota = min(math.ceil(f * len(getattr(pos, name))), avail)
            tagged = [t for t in qg.split(name) if qg.sources[t] == "subrule"]
            assert len(tagged) == quota, (seed, name)
            assert set(tagged) <= set(c_minus[name])
            earlier |= set(qg.split(name))
    return f"20 benchmarks x 4 methods, {checked} negatives verified"


# ---------------------------------------------------------------- 6

def _trapezoid(conf, labels):
    P, N = labels.sum(), (~labels).sum()
    xs, ys = [0.0], [0.0]
    for thr in sorted(set(conf.tolist()), reverse=True):
        pred = conf >= thr
        xs.append((pred & ~labels).sum() / N)
        ys.append((pred & labels).sum() / P)
    return sum((x1 - x0) * (y0 + y1) / 2 for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:]))


def _brute_ranking(preds, positives, negatives, ks):
    out = {}
    for slot, keep in (("s", (1, 2)), ("o", (0, 1)), ("R", (0, 2))):
        rr = []
        for lam in positives:
            if slot == "R" and lam[1] == TYPE:
                continue
            group = [n for n in negatives if all(n[i] == lam[i] for i in keep) and n != lam
                     and not (slot == "R" and n[1] == TYPE)]
            above = sum(1 for n in group if preds[n] > preds[lam])
            tied = sum(1 for n in group if preds[n] == preds[lam])
            optimistic, pessimistic = 1 + above, 1 + above + tied
            rr.append((optimistic + pessimistic) / 2)
        out[("mrr", slot)] = math.fsum(1 / r for r in rr) / len(rr) if rr else 0.0
        for k in ks:
            out[("hits", slot, k)] = sum(1 for r in rr if r <= k) / len(rr) if rr else 0.0
    return out


def _random_prediction_set(rng):
    n_ent, n_rel = 6, 3
    pos = set()
    while len(pos) < rng.integers(3, 15):
        pos.add((int(rng.integers(n_ent)), int(10 + rng.integers(n_rel)), int(rng.integers(n_ent))))
        if rng.random() < 0.2:
            pos.add((int(rng.integers(n_ent)), TYPE, int(20 + rng.integers(2))))
    neg = set()
    for s, p, o in sorted(pos):
        for _ in range(int(rng.integers(0, 4))):
            slot = rng.integers(3)
            if slot == 0:
                t = (int(rng.integers(n_ent)), p, o)
            elif slot == 1 and p != TYPE:
                t = (s, int(10 + rng.integers(n_rel)), o)
            else:
                t = (s, p, int(20 + rng.integers(2)) if p == TYPE else int(rng.integers(n_ent)))
            if t not in pos:
                neg.add(t)
    if not neg:
        neg.add((99, 10, 98))
    preds = {t: float(np.round(rng.random(), 2)) for t in pos | neg}
    return sorted(pos), sorted(neg), preds


@criterion(6, "Metric oracles")
def test_c6_metrics():
    rng = np.random.default_rng(0)
    ks = (1, 3, 10)
    for _ in range(100):
        pos, neg, preds = _random_prediction_set(rng)
        conf = np.array([preds[t] for t in pos + neg])
        labels = np.array([True] * len(pos) + [False] * len(neg))
        auc = roc_auc(conf, labels)
        assert abs(auc - _trapezoid(conf, labels)) <= 1e-9
        rk = ranking_metrics(preds, pos, neg, ks)
        brute = _brute_ranking(preds, pos, neg, ks)
        for slot in ("s", "o", "R"):
            assert rk.mrr[slot] == brute[("mrr", slot)]
            for k in ks:
                assert rk.hits[(slot, k)] == brute[("hits", slot, k)]
        for f in (np.sqrt, lambda x: x ** 3, lambda x: np.exp(5 * x), lambda x: 0.1 + 0.8 * x):
            tp = {t: float(f(v)) for t, v in preds.items()}
            tconf = np.array([tp[t] for t in pos + neg])
            assert roc_auc(tconf, labels) == auc
            rk2 = ranking_metrics(tp, pos, neg, ks)
            assert rk2.mrr == rk.mrr and rk2.hits == rk.hits
    counts = 0
    for tp_, tn, fp, fn in np.random.default_rng(1).integers(0, 60, size=(2000, 4)).tolist():
        m = from_counts(tp_, tn, fp, fn)
        if m.prec + m.rec > 0:
            assert m.f1 == pytest.approx(2 * m.prec * m.rec / (m.prec + m.rec), rel=1e-12)
        if tp_ + tn + fp + fn:
            assert m.acc == (tp_ + tn) / (tp_ + tn + fp + fn)
        counts += 1
    m = classification_metrics(conf, labels, 0.5)
    assert m.tp + m.tn + m.fp + m.fn == len(conf)
    return f"100 prediction sets x 4 transforms, {counts} count tuples"


# ---------------------------------------------------------------- 7

@criterion(7, "Rule analysis")
def test_c7_rule_analysis():
    st = SymbolTable()
    rng = random.Random(7)
    rels, types = ["A", "B", "C"], ["T"]
    for _ in range(100):
        bench = [random_rule(rng, st, rels=rels, types=types) for _ in range(rng.randint(1, 5))]
        sys_ = [random_rule(rng, st, rels=rels, types=types) for _ in range(rng.randint(0, 5))]
        sys_ += rng.sample(bench, rng.randint(0, len(bench)))
        rep = compare_rules(bench, sys_)
        assert rep.epsilon_cont <= rep.epsilon_ent
    for _ in range(40):
        pool = [random_rule(rng, st, rels=["A", "B"], types=types) for _ in range(20)]
        bench = rng.sample(pool, rng.randint(1, 20))
        sys_ = rng.sample(pool, rng.randint(0, 20))
        sys_ += [parse_rule(r.text(), st) for r in rng.sample(bench, min(3, len(bench)))]
        want = 100.0 * sum(any(isomorphic(b, s) for s in sys_) for b in bench) / len(bench)
        assert epsilon_cont(bench, sys_) == want
    # complex-pattern benchmark rules against their sub-rules only
    kst = SymbolTable()
    rows = random_kg(3000, n_entities=100, n_relations=10, seed=3)
    kg = KnowledgeGraph([kst.intern_triple(*r) for r in rows], kst)
    pats = builtin_patterns(kst, ["trian", "diam", "inter", "comp"])
    bench = [x.rule for x in select_rules(pats, kg, 5, seed=1)]
    subs, complex_ = derive_subrules(bench)
    bench = complex_
    ent, cont = epsilon_ent(bench, subs), epsilon_cont(bench, subs)
    assert (ent, cont) == (100.0, 0.0)
    return f"signature eps_ent={ent:.1f}, eps_cont={cont:.1f} on {len(bench)} complex rules"


# ---------------------------------------------------------------- 8

@criterion(8, "Performance (100k triples, qg)")
def test_c8_performance(tmp_path):
    kg = tmp_path / "big.tsv"
    write_tsv(kg, random_kg(100_000, seed=1))
    code = (
        "import resource, sys, time\n"
        "from inferbench.pipeline import BuildConfig, build\n"
        "t = time.perf_counter()\n"
        f"build(BuildConfig(kg={str(kg)!r}, out={str(tmp_path / 'out')!r}, "
        "builtin='sym,inver,hier,comp,inter', k1=20, k2=200, method='qg', seed=0))\n"
        "print(time.perf_counter() - t, resource.getrusage(resource.RUSAGE_SELF).ru_maxrss)\n"
    )
    res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    seconds, rss_kb = res.stdout.split()
    seconds, mb = float(seconds), int(rss_kb) / 1024
    assert seconds < 60, seconds
    assert mb < 2048, mb
    return f"{seconds:.1f} s, peak {mb:.0f} MB"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
