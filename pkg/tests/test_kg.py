import random

import pytest

from helpers import random_triples
from inferbench.errors import ParseError, SignatureConflictError
from inferbench.kg import (
    CONSTANT,
    RELATION,
    TYPE,
    KnowledgeGraph,
    SymbolTable,
    load_kg,
    signature,
    write_triples,
)

COLLEAGUES = [
    ("Alex", "IsColleague", "Bob"), ("Bob", "IsColleague", "John"),
    ("Harry", "IsColleague", "James"), ("James", "IsColleague", "Tony"),
    ("Ada", "IsColleague", "Eve"), ("Eve", "IsColleague", "Lucy"),
]


def write(tmp_path, rows, name="kg.tsv"):
    p = tmp_path / name
    p.write_text("".join("\t".join(r) + "\n" for r in rows), encoding="utf-8")
    return p


def test_colleague_kg_signature(tmp_path):
    kg = load_kg(write(tmp_path, COLLEAGUES))
    sig = signature(kg)
    assert len(kg) == 6
    assert {kg.symbols.name(r) for r in sig.relations} == {"IsColleague"}
    assert sig.types == frozenset()
    # nine distinct people appear in the six triples
    assert len(sig.constants) == 9


def test_empty_file(tmp_path):
    kg = load_kg(write(tmp_path, []))
    assert len(kg) == 0
    assert signature(kg) == (frozenset(), frozenset(), frozenset())


def test_duplicates_collapse(tmp_path):
    kg = load_kg(write(tmp_path, [("a", "R", "b")] * 3 + [("b", "R", "a")]))
    assert len(kg) == 2


def test_single_type_triple(tmp_path):
    kg = load_kg(write(tmp_path, [("a", "type", "Person")]))
    sig = signature(kg)
    names = kg.symbols.name
    assert {names(t) for t in sig.types} == {"Person"}
    assert sig.relations == frozenset()
    assert {names(c) for c in sig.constants} == {"a"}


def test_custom_type_marker(tmp_path):
    kg = load_kg(write(tmp_path, [("a", "rdf:type", "Person"), ("a", "type", "b")]),
                 type_marker="rdf:type")
    kinds = sorted(t[1] == TYPE for t in kg)
    assert kinds == [False, True]


def test_wrong_arity_reports_line(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a\tR\tb\nc\tR\n", encoding="utf-8")
    with pytest.raises(ParseError) as e:
        load_kg(p)
    assert e.value.line == 2


def test_constant_used_as_relation(tmp_path):
    with pytest.raises(SignatureConflictError):
        load_kg(write(tmp_path, [("a", "R", "b"), ("b", "a", "c")]))


def test_symbol_table_bijection():
    st = SymbolTable()
    i = st.intern("x", CONSTANT)
    assert st.intern("x", CONSTANT) == i
    assert st.name(i) == "x"
    with pytest.raises(SignatureConflictError):
        st.intern("x", RELATION)


@pytest.mark.parametrize("seed", range(100))
def test_index_matches_scan(seed):
    rng = random.Random(seed)
    st = SymbolTable()
    facts = random_triples(rng, st, rng.randint(0, 40))
    kg = KnowledgeGraph(facts, st)
    preds = {p for _, p, _ in facts}
    consts = {s for s, _, _ in facts} | {o for _, _, o in facts}
    for p in preds:
        assert sorted(kg.by_predicate(p)) == sorted(t for t in facts if t[1] == p)
        for c in consts:
            assert sorted(kg.by_predicate_subject(p, c)) == sorted(
                t for t in facts if t[1] == p and t[0] == c)
            assert sorted(kg.by_predicate_object(p, c)) == sorted(
                t for t in facts if t[1] == p and t[2] == c)
    for c in consts:
        want = {t for t in facts if t[0] == c or (t[1] != TYPE and t[2] == c)}
        assert set(kg.occurrences(c)) == want


def test_round_trip(tmp_path):
    rng = random.Random(3)
    st = SymbolTable()
    facts = random_triples(rng, st, 50)
    write_triples(tmp_path / "out.tsv", facts, st)
    again = load_kg(tmp_path / "out.tsv")
    assert again.names() == {st.triple_names(t) for t in facts}
