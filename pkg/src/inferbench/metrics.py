"""Classification, ROC AUC and corruption-ranking metrics, plus SimpBL."""

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import CoverageError, ParseError, UndefinedMetricError
from .kg import TYPE

TIE_RULE = "mean"  # rank of a tied block
EMPTY_RULE = "rank1"  # positives without corruptions


# ---------------------------------------------------------------- inputs

def read_predictions(path, symbols) -> dict:
    """``s<TAB>p<TAB>o<TAB>confidence`` lines to ``{triple: confidence}``.

    Names unknown to ``symbols`` are interned; such triples can never be
    labelled and are rejected later.
    """
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}", n)
            try:
                conf = float(parts[3])
            except ValueError:
                raise ParseError(f"bad confidence {parts[3]!r}", n) from None
            if not 0.0 <= conf <= 1.0:
                raise ParseError(f"confidence {conf} outside [0, 1]", n)
            out[symbols.intern_triple(*parts[:3])] = conf
    return out


def labelled(preds: dict, positives, negatives, symbols=None):
    """Confidence and label arrays for ``positives`` then ``negatives``.

    Every required triple must be scored; scored triples outside both sets
    are rejected.
    """
    positives, negatives = sorted(positives), sorted(negatives)
    wanted = set(positives) | set(negatives)
    missing = [t for t in positives + negatives if t not in preds]
    if missing:
        show = [symbols.triple_names(t) for t in missing] if symbols else missing
        raise CoverageError(show)
    stray = sorted(t for t in preds if t not in wanted)
    if stray:
        show = symbols.triple_names(stray[0]) if symbols else stray[0]
        raise UndefinedMetricError(f"{len(stray)} scored triples are unlabelled, e.g. {show}")
    conf = np.array([preds[t] for t in positives + negatives], dtype=float)
    labels = np.zeros(len(conf), dtype=bool)
    labels[: len(positives)] = True
    return conf, labels


def is_boolean(conf) -> bool:
    conf = np.asarray(conf)
    return bool(np.all((conf == 0.0) | (conf == 1.0)))


# ---------------------------------------------------------------- classification

@dataclass
class Classification:
    tp: int
    tn: int
    fp: int
    fn: int
    prec: float
    rec: float
    acc: float
    f1: float
    prec_undefined: bool = False


def from_counts(tp, tn, fp, fn) -> Classification:
    prec_undefined = tp + fp == 0
    prec = 0.0 if prec_undefined else tp / (tp + fp)
    rec = tp / (tp + fn) if tp + fn else 0.0
    total = tp + tn + fp + fn
    acc = (tp + tn) / total if total else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
    return Classification(tp, tn, fp, fn, prec, rec, acc, f1, prec_undefined)


def classification_metrics(conf, labels, threshold) -> Classification:
    conf, labels = np.asarray(conf), np.asarray(labels, dtype=bool)
    pred = conf >= threshold
    tp = int(np.sum(pred & labels))
    fp = int(np.sum(pred & ~labels))
    fn = int(np.sum(~pred & labels))
    tn = int(np.sum(~pred & ~labels))
    return from_counts(tp, tn, fp, fn)


def threshold_candidates(conf) -> np.ndarray:
    """The smallest confidence and every midpoint between consecutive ones."""
    vals = np.unique(np.asarray(conf, dtype=float))
    if len(vals) == 0:
        return vals
    return np.concatenate([vals[:1], (vals[:-1] + vals[1:]) / 2])


def tune_threshold(conf, labels) -> float:
    """Threshold with the best validation F1; the smallest one on ties."""
    conf, labels = np.asarray(conf, dtype=float), np.asarray(labels, dtype=bool)
    if len(conf) == 0:
        raise UndefinedMetricError(
            "no validation predictions to tune a threshold on; pass --threshold"
        )
    cands = threshold_candidates(conf)
    pos = np.sort(conf[labels])
    neg = np.sort(conf[~labels])
    tp = len(pos) - np.searchsorted(pos, cands, side="left")
    fp = len(neg) - np.searchsorted(neg, cands, side="left")
    fn = len(pos) - tp
    denom = 2 * tp + fp + fn
    f1 = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)
    return float(cands[int(np.argmax(f1))])


# ---------------------------------------------------------------- AUC

def roc_auc(conf, labels) -> float:
    """Probability that a positive outscores a negative, ties counting half."""
    conf, labels = np.asarray(conf, dtype=float), np.asarray(labels, dtype=bool)
    pos, neg = conf[labels], np.sort(conf[~labels])
    if len(pos) == 0 or len(neg) == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative")
    below = np.searchsorted(neg, pos, side="left")
    upto = np.searchsorted(neg, pos, side="right")
    wins = 2 * int(below.sum()) + int((upto - below).sum())
    return wins / (2 * len(pos) * len(neg))


def roc_auc_mann_whitney(conf, labels) -> float:
    conf, labels = np.asarray(conf, dtype=float), np.asarray(labels, dtype=bool)
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative")
    ranks = rankdata(conf)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


# ---------------------------------------------------------------- ranking

_SLOT_KEYS = {
    "s": lambda t: (t[1], t[2]),
    "o": lambda t: (t[0], t[1]),
    "R": lambda t: (t[0], t[2]),
}


def corruption_groups(negatives, slot) -> dict:
    """Negatives grouped by the two components a corruption in ``slot`` keeps."""
    key = _SLOT_KEYS[slot]
    groups = defaultdict(list)
    for t in negatives:
        if slot == "R" and t[1] == TYPE:
            continue
        groups[key(t)].append(t)
    return groups


def ranks(preds: dict, positives, negatives, slot) -> dict:
    """``rank_slot`` of every participating positive.

    Relation-slot ranks cover relation triples only; type triples take part
    in the entity (``s``) and type-name (``o``) slots.
    """
    groups = corruption_groups(negatives, slot)
    key = _SLOT_KEYS[slot]
    sorted_conf = {}
    out = {}
    for lam in positives:
        if slot == "R" and lam[1] == TYPE:
            continue
        k = key(lam)
        arr = sorted_conf.get(k)
        if arr is None:
            arr = sorted_conf[k] = np.sort([preds[t] for t in groups.get(k, ())])
        c = preds[lam]
        lo = np.searchsorted(arr, c, side="left")
        hi = np.searchsorted(arr, c, side="right")
        greater = len(arr) - hi
        equal = hi - lo
        out[lam] = 1 + int(greater) + int(equal) / 2
    return out


@dataclass
class Ranking:
    hits: dict  # (slot, k) -> value
    mrr: dict  # slot -> value
    ks: tuple

    def c_hits(self, k):
        return (self.hits[("s", k)] + self.hits[("o", k)]) / 2

    def r_hits(self, k):
        return self.hits[("R", k)]

    @property
    def c_mrr(self):
        return (self.mrr["s"] + self.mrr["o"]) / 2

    @property
    def r_mrr(self):
        return self.mrr["R"]


def ranking_metrics(preds: dict, positives, negatives, ks=(1, 3, 10)) -> Ranking:
    positives = sorted(positives)
    hits, mrr = {}, {}
    for slot in ("s", "o", "R"):
        r = ranks(preds, positives, negatives, slot)
        vals = list(r.values())
        n = len(vals)
        # fsum: the result does not depend on summation order
        mrr[slot] = math.fsum(1.0 / v for v in vals) / n if n else 0.0
        for k in ks:
            hits[(slot, k)] = sum(1 for v in vals if v <= k) / n if n else 0.0
    return Ranking(hits, mrr, tuple(ks))


# ---------------------------------------------------------------- SimpBL

def involvement_pairs(triples) -> set:
    out = set()
    for s, p, o in triples:
        for a, b in ((s, p), (p, o), (s, o)):
            out.add((a, b) if a <= b else (b, a))
    return out


def simpbl_predict(triples, p_train, pairs=None) -> dict:
    """``(a, b, c)`` is true iff training has triples involving a&b and b&c."""
    if pairs is None:
        pairs = involvement_pairs(p_train)

    def has(x, y):
        return ((x, y) if x <= y else (y, x)) in pairs

    return {t: float(has(t[0], t[1]) and has(t[1], t[2])) for t in triples}


# ---------------------------------------------------------------- report

@dataclass
class MetricsReport:
    classification: Classification
    threshold: float
    auc: float = None
    ranking: Ranking = None
    notes: list = field(default_factory=list)

    def values(self) -> dict:
        c = self.classification
        out = {"tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn,
               "Prec": pct(c.prec), "Rec": pct(c.rec), "Acc": pct(c.acc), "F1": pct(c.f1)}
        out["AUC"] = "-" if self.auc is None else pct(self.auc)
        rk = self.ranking
        if rk is None:
            for name in ("MRR_s", "MRR_o", "MRR_R", "C-MRR", "R-MRR"):
                out[name] = "-"
        else:
            out.update({"MRR_s": pct(rk.mrr["s"]), "MRR_o": pct(rk.mrr["o"]),
                        "MRR_R": pct(rk.mrr["R"]), "C-MRR": pct(rk.c_mrr), "R-MRR": pct(rk.r_mrr)})
            for k in rk.ks:
                out[f"Hits_s@{k}"] = pct(rk.hits[("s", k)])
                out[f"Hits_o@{k}"] = pct(rk.hits[("o", k)])
                out[f"Hits_R@{k}"] = pct(rk.hits[("R", k)])
                out[f"C-Hits@{k}"] = pct(rk.c_hits(k))
                out[f"R-Hits@{k}"] = pct(rk.r_hits(k))
        out["threshold"] = repr(float(self.threshold))
        return out

    def text(self) -> str:
        lines = [f"# ties={TIE_RULE} empty_corruptions={EMPTY_RULE} prediction=conf>=threshold"]
        lines += [f"# {n}" for n in self.notes]
        if self.classification.prec_undefined:
            lines.append("# precision undefined (no predicted positives), reported as 0")
        lines += [f"{k}={v}" for k, v in self.values().items()]
        return "\n".join(lines) + "\n"


def pct(x) -> str:
    return f"{100 * x:.1f}"


def evaluate_predictions(test_preds, pos_test, neg_test, valid_preds=None, pos_valid=(),
                         neg_valid=(), threshold=None, ks=(1, 3, 10), boolean=None,
                         symbols=None) -> MetricsReport:
    conf, labels = labelled(test_preds, pos_test, neg_test, symbols)
    if boolean is None:
        boolean = is_boolean(conf)
    notes = []
    if threshold is None:
        if boolean:
            threshold = 0.5
        else:
            if not valid_preds:
                raise UndefinedMetricError(
                    "no validation predictions to tune a threshold on; pass --threshold"
                )
            vc, vl = labelled(valid_preds, pos_valid, neg_valid, symbols)
            threshold = tune_threshold(vc, vl)
    report = MetricsReport(classification_metrics(conf, labels, threshold), threshold, notes=notes)
    if boolean:
        notes.append("boolean predictions: AUC and ranking metrics suppressed")
        return report
    if labels.any() and not labels.all():
        report.auc = roc_auc(conf, labels)
    else:
        notes.append("AUC undefined: one class is empty")
    report.ranking = ranking_metrics(test_preds, pos_test, neg_test, ks)
    return report
