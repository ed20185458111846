"""End-to-end benchmark construction, statistics and evaluation."""

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

from .datalog.syntax import load_rules
from .errors import CoverageError, InferBenchError, ParseError
from .kg import SymbolTable, load_kg, load_triples, sort_by_name, write_triples
from .metrics import (
    EMPTY_RULE,
    TIE_RULE,
    evaluate_predictions,
    involvement_pairs,
    read_predictions,
    simpbl_predict,
)
from .negatives import build_pools, gen_pa, gen_qg, gen_rb, gen_rc
from .patterns import builtin_patterns, load_patterns, rank_rules, select_rules
from .splits import PositiveSets, build_positive_sets

log = logging.getLogger(__name__)

VERSION = "1"
METHODS = ("rc", "rb", "pa", "qg")
POSITIVE_FILES = {"train": "train.txt", "valid": "valid.txt", "test": "test.txt"}
NEGATIVE_FILES = {"train": "train_neg.txt", "valid": "valid_neg.txt", "test": "test_neg.txt"}


class StageError(InferBenchError):
    """An error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


class NoRulesError(InferBenchError):
    pass


def parse_ratio(text) -> tuple:
    if isinstance(text, (tuple, list)):
        parts = [int(x) for x in text]
    else:
        parts = [int(x) for x in str(text).replace(",", ":").split(":")]
    if len(parts) != 3 or any(x < 0 for x in parts) or sum(parts) == 0:
        raise ValueError(f"ratio must be three non-negative integers like 8:1:1, got {text!r}")
    return tuple(parts)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class BuildConfig:
    kg: str = None
    out: str = None
    patterns: str = None  # pattern file
    builtin: tuple = ()  # built-in pattern names
    rules: str = None  # rule file (instead of patterns)
    k1: int = 50
    k2: int = 200
    ratio: tuple = (8, 1, 1)
    method: str = "qg"
    seed: int = 0
    allow_shortfall: bool = False
    type_marker: str = "type"
    workers: int = 1

    _CASTS = {"k1": int, "k2": int, "seed": int, "workers": int, "ratio": parse_ratio,
              "allow_shortfall": _bool,
              "builtin": lambda v: tuple(x.strip() for x in v.split(",") if x.strip())
              if isinstance(v, str) else tuple(v)}

    def __post_init__(self):
        for k, cast in self._CASTS.items():
            setattr(self, k, cast(getattr(self, k)))

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    def update(self, **values):
        for k, v in values.items():
            if v is None:
                continue
            if k not in self.keys():
                raise ValueError(f"unknown configuration key {k!r}")
            setattr(self, k, self._CASTS.get(k, lambda x: x)(v))
        return self

    def validate(self, need_out=True):
        if not self.kg:
            raise ValueError("no KG given (kg = path)")
        if need_out and not self.out:
            raise ValueError("no output directory given (out = path)")
        sources = [bool(self.patterns or self.builtin), bool(self.rules)]
        if sum(sources) != 1:
            raise ValueError("give either patterns/builtin or rules, not both or neither")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {', '.join(METHODS)}")
        if self.k1 < 1 or self.k2 < 1:
            raise ValueError("k1 and k2 must be positive")
        return self


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}: expected key = value", n)
            k, v = (x.strip() for x in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


# ---------------------------------------------------------------- manifest

def write_manifest(path, values: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in values.items():
            fh.write(f"{k}={v}\n")


def read_manifest(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line and "=" in line:
                k, v = line.split("=", 1)
                out[k] = v
    return out


def _merge_manifest(out_dir, values):
    path = Path(out_dir) / "manifest"
    current = read_manifest(path) if path.exists() else {}
    current.update(values)
    write_manifest(path, current)


# ---------------------------------------------------------------- stages

def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError:
        raise
    except (InferBenchError, ValueError, OSError) as e:
        raise StageError(name, e) from e


def load_inputs(cfg: BuildConfig):
    return _stage("load", load_kg, cfg.kg, cfg.type_marker)


def generate_rules(cfg: BuildConfig, kg) -> list:
    def run():
        if cfg.rules:
            ranked = rank_rules(load_rules(cfg.rules, kg.symbols), kg, workers=cfg.workers)
            dead = [r for r in ranked if r.support == 0]
            for r in dead:
                log.warning("rule without support dropped: %s", r.rule)
            ranked = [r for r in ranked if r.support > 0]
        else:
            pats = []
            if cfg.patterns:
                pats += load_patterns(cfg.patterns, kg.symbols)
            if cfg.builtin:
                pats += builtin_patterns(kg.symbols, list(cfg.builtin))
            ranked = select_rules(pats, kg, cfg.k1, cfg.seed, cfg.workers)
        if not ranked:
            raise NoRulesError("no rules with positive support")
        return ranked

    return _stage("gen-rules", run)


def write_rules(path, ranked):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in ranked:
            fh.write(f"{r.rule.text()}\tsupport={r.support}\tpattern={r.pattern}\n")


def apply_split(cfg: BuildConfig, kg, ranked) -> PositiveSets:
    def run():
        pos, _ = build_positive_sets(kg, ranked, cfg.k2, cfg.ratio, cfg.seed)
        return pos

    return _stage("apply-split", run)


def generate_negatives(cfg: BuildConfig, kg, ranked, positives):
    def run():
        rules = [getattr(r, "rule", r) for r in ranked]
        m = cfg.method
        if m == "rc":
            return gen_rc(positives, kg, cfg.seed, cfg.allow_shortfall)
        if m == "rb":
            return gen_rb(positives, rules, kg, cfg.seed, cfg.allow_shortfall)
        pools = build_pools(positives, rules, kg)
        if m == "pa":
            return gen_pa(positives, pools, cfg.seed, cfg.allow_shortfall)
        return gen_qg(positives, pools, rules, kg, cfg.seed, cfg.ratio, cfg.allow_shortfall)

    return _stage("gen-negatives", run)


def write_positives(out_dir, positives, symbols):
    for name, fname in POSITIVE_FILES.items():
        write_triples(Path(out_dir) / fname, getattr(positives, name), symbols)


def write_negatives(out_dir, neg, symbols):
    for name, fname in NEGATIVE_FILES.items():
        rows = sort_by_name(neg.split(name), symbols)
        write_triples(Path(out_dir) / fname, rows, symbols, sort=False)
        meta = Path(out_dir) / fname.replace(".txt", ".meta")
        with open(meta, "w", encoding="utf-8", newline="\n") as fh:
            for i, t in enumerate(rows):
                fh.write(f"{i}\t{neg.sources[t]}\n")


def _config_manifest(cfg):
    return {
        "version": VERSION,
        "kg": Path(cfg.kg).name,
        "rule_source": "rules" if cfg.rules else "patterns",
        "patterns": ",".join(filter(None, [cfg.patterns and Path(cfg.patterns).name,
                                           *cfg.builtin])) or "-",
        "rules_file": Path(cfg.rules).name if cfg.rules else "-",
        "k1": cfg.k1,
        "k2": cfg.k2,
        "ratio": ":".join(map(str, cfg.ratio)),
        "method": cfg.method,
        "seed": cfg.seed,
        "allow_shortfall": str(cfg.allow_shortfall).lower(),
        "type_marker": cfg.type_marker,
        "split_rounding": "floor_then_train_valid_test",
        "rank_ties": TIE_RULE,
        "rank_empty_corruptions": EMPTY_RULE,
        "threshold_objective": "validation_f1",
    }


def _negative_manifest(neg):
    out = {"negatives": neg.method}
    if neg.method == "rb":
        out.update({f"rb_{k}": v for k, v in neg.info.items()})
    if neg.method == "qg":
        info = neg.info
        out.update(qg_fraction=info["fraction"], qg_sub_rules=info["sub_rules"],
                   qg_complex_rules=info["complex_rules"])
        for s in ("train", "valid", "test"):
            out[f"qg_c_minus_{s}"] = info["c_minus"][s]
            out[f"qg_quota_{s}"] = info["quota"][s]
    for s in ("train", "valid", "test"):
        need, got = neg.shortfall.get(s, (len(neg.split(s)), len(neg.split(s))))
        out[f"n_{s}_neg"] = got
        out[f"shortfall_{s}"] = need - got
    return out


def build(cfg: BuildConfig) -> Path:
    """Run all three stages and write the benchmark directory."""
    cfg.validate()
    out = Path(cfg.out)
    kg = load_inputs(cfg)
    ranked = generate_rules(cfg, kg)
    positives = apply_split(cfg, kg, ranked)
    neg = generate_negatives(cfg, kg, ranked, positives)
    out.mkdir(parents=True, exist_ok=True)
    write_rules(out / "rules.txt", ranked)
    write_positives(out, positives, kg.symbols)
    write_negatives(out, neg, kg.symbols)
    manifest = _config_manifest(cfg)
    manifest.update(n_kg=len(kg), n_rules=len(ranked), n_train=len(positives.train),
                    n_valid=len(positives.valid), n_test=len(positives.test))
    manifest.update(_negative_manifest(neg))
    write_manifest(out / "manifest", manifest)
    return out


# ---------------------------------------------------------------- single stages

def run_gen_rules(cfg: BuildConfig) -> Path:
    cfg.validate()
    kg = load_inputs(cfg)
    ranked = generate_rules(cfg, kg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rules(out / "rules.txt", ranked)
    m = _config_manifest(cfg)
    _merge_manifest(out, {k: m[k] for k in ("version", "kg", "rule_source", "patterns",
                                            "rules_file", "k1", "seed", "type_marker")}
                    | {"n_kg": len(kg), "n_rules": len(ranked)})
    return out / "rules.txt"


def _ranked_from_file(cfg, kg):
    if not cfg.rules:
        raise ValueError("this stage needs a rule file (rules = path)")
    return _stage("load", lambda: rank_rules(load_rules(cfg.rules, kg.symbols), kg,
                                             workers=cfg.workers))


def run_apply_split(cfg: BuildConfig) -> Path:
    cfg.validate()
    kg = load_inputs(cfg)
    ranked = _ranked_from_file(cfg, kg)
    positives = apply_split(cfg, kg, ranked)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_positives(out, positives, kg.symbols)
    m = _config_manifest(cfg)
    _merge_manifest(out, {k: m[k] for k in ("version", "kg", "k2", "ratio", "seed",
                                            "type_marker", "split_rounding")}
                    | {"n_kg": len(kg), "n_train": len(positives.train),
                       "n_valid": len(positives.valid), "n_test": len(positives.test)})
    return out


def load_positives(bench_dir, symbols) -> PositiveSets:
    parts = {n: set(load_triples(Path(bench_dir) / f, symbols)) for n, f in POSITIVE_FILES.items()}
    return PositiveSets(parts["train"], parts["valid"], parts["test"])


def run_gen_negatives(cfg: BuildConfig) -> Path:
    cfg.validate()
    kg = load_inputs(cfg)
    ranked = _ranked_from_file(cfg, kg)
    out = Path(cfg.out)
    positives = _stage("load", load_positives, out, kg.symbols)
    neg = generate_negatives(cfg, kg, ranked, positives)
    write_negatives(out, neg, kg.symbols)
    m = _config_manifest(cfg)
    _merge_manifest(out, {k: m[k] for k in ("version", "method", "seed", "allow_shortfall",
                                            "rank_ties", "rank_empty_corruptions")}
                    | _negative_manifest(neg))
    return out


# ---------------------------------------------------------------- stats

STAT_COLUMNS = ("k1", "k2", "|K|", "|P_train|", "|P_valid|", "|P_test|",
                "|N_train|", "|N_valid|", "|N_test|")


def _count_lines(path) -> int:
    with open(path, encoding="utf-8") as fh:
        return sum(1 for line in fh if line.strip())


def stats(bench_dir) -> dict:
    bench = Path(bench_dir)
    need = ["manifest", *POSITIVE_FILES.values(), *NEGATIVE_FILES.values()]
    missing = [f for f in need if not (bench / f).exists()]
    if missing:
        raise FileNotFoundError(f"{bench}: missing {', '.join(missing)}")
    man = read_manifest(bench / "manifest")
    row = {"k1": man.get("k1", "-"), "k2": man.get("k2", "-"), "|K|": man.get("n_kg", "-")}
    for n, f in POSITIVE_FILES.items():
        row[f"|P_{n}|"] = _count_lines(bench / f)
    for n, f in NEGATIVE_FILES.items():
        row[f"|N_{n}|"] = _count_lines(bench / f)
    return row


def format_stats(row) -> str:
    return "\t".join(STAT_COLUMNS) + "\n" + "\t".join(str(row[c]) for c in STAT_COLUMNS) + "\n"


# ---------------------------------------------------------------- evaluation

@dataclass
class Benchmark:
    symbols: SymbolTable
    positives: dict
    negatives: dict
    manifest: dict = field(default_factory=dict)


def load_benchmark(bench_dir) -> Benchmark:
    bench = Path(bench_dir)
    man = read_manifest(bench / "manifest") if (bench / "manifest").exists() else {}
    symbols = SymbolTable(man.get("type_marker", "type"))
    pos = {n: set(load_triples(bench / f, symbols)) for n, f in POSITIVE_FILES.items()}
    neg = {n: set(load_triples(bench / f, symbols)) for n, f in NEGATIVE_FILES.items()}
    return Benchmark(symbols, pos, neg, man)


def evaluate(bench_dir, predictions=None, baseline=None, threshold=None, ks=(1, 3, 10)):
    """Score a predictions file (or a built-in baseline) on a benchmark."""
    b = load_benchmark(bench_dir)
    scored = {n: b.positives[n] | b.negatives[n] for n in ("valid", "test")}
    if baseline == "simpbl":
        pairs = involvement_pairs(b.positives["train"])
        preds = simpbl_predict(sorted(scored["valid"] | scored["test"]), None, pairs)
        boolean = True
    elif baseline is not None:
        raise ValueError(f"unknown baseline {baseline!r}")
    else:
        if predictions is None:
            raise ValueError("give a predictions file or --baseline")
        preds = read_predictions(predictions, b.symbols)
        boolean = None
    known = scored["valid"] | scored["test"]
    stray = [t for t in preds if t not in known]
    if stray:
        names = b.symbols.triple_names(sorted(stray)[0])
        raise InferBenchError(
            f"{len(stray)} predicted triple(s) are in neither the validation nor the "
            f"test sets, e.g. {' '.join(names)}"
        )
    test_preds = {t: preds[t] for t in scored["test"] if t in preds}
    missing = [t for t in scored["test"] if t not in preds]
    valid_preds = {t: preds[t] for t in scored["valid"] if t in preds}
    if valid_preds and len(valid_preds) < len(scored["valid"]) and threshold is None:
        log.warning("validation predictions incomplete; tuning on %d triple(s)", len(valid_preds))
    if missing:
        raise CoverageError([b.symbols.triple_names(t) for t in sorted(missing)])
    vpos = [t for t in b.positives["valid"] if t in valid_preds]
    vneg = [t for t in b.negatives["valid"] if t in valid_preds]
    return evaluate_predictions(
        test_preds, b.positives["test"], b.negatives["test"], valid_preds, vpos, vneg,
        threshold=threshold, ks=tuple(ks), boolean=boolean, symbols=b.symbols,
    )
