"""Datalog rules over knowledge graphs: syntax, evaluation and entailment."""

from .engine import (
    apply_once,
    apply_once_set,
    count_witnesses,
    find_witnesses,
    has_witness,
    iter_witnesses,
    materialise,
    materialise_index,
    witnesses_for,
)
from .entailment import counterexample, entails, set_partitions
from .syntax import (
    Atom,
    Rule,
    canonical_key,
    load_rules,
    make_rule,
    parse_rule,
    parse_rules,
)

__all__ = [
    "Atom",
    "Rule",
    "apply_once",
    "apply_once_set",
    "canonical_key",
    "count_witnesses",
    "counterexample",
    "entails",
    "find_witnesses",
    "has_witness",
    "iter_witnesses",
    "load_rules",
    "make_rule",
    "materialise",
    "materialise_index",
    "parse_rule",
    "parse_rules",
    "set_partitions",
    "witnesses_for",
]
