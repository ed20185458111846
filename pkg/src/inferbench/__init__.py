"""Rule-driven benchmarks for knowledge graph completion.

Build benchmarks whose test triples follow from training triples by known
Datalog rules, generate matched negative examples, score predictions, and
compare mined rule sets with the rules a benchmark was built from.
"""

from .datalog import (
    Atom,
    Rule,
    apply_once,
    entails,
    find_witnesses,
    materialise,
    parse_rule,
    parse_rules,
)
from .errors import (
    CoverageError,
    InferBenchError,
    ParseError,
    SafetyError,
    ShortfallError,
    SignatureConflictError,
    UndefinedMetricError,
)
from .kg import KnowledgeGraph, SymbolTable, load_kg
from .negatives import build_pools, derive_subrules, gen_pa, gen_qg, gen_rb, gen_rc
from .patterns import builtin_patterns, parse_pattern, rank_rules, select_rules
from .pipeline import BuildConfig, build, evaluate, stats
from .rule_analysis import compare_rules, epsilon_cont, epsilon_ent
from .splits import PositiveSets, build_positive_sets, split_sizes

__version__ = "0.1.0"
