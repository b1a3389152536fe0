import json
from math import log, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st

import sftlift as sl
from sftlift import LabeledGraph, PeriodicOrbit, SlidingBlockCode
from sftlift.errors import EmptyAfterTrim, NotIrreducible

from conftest import eig_entropy, label_word_realizable


def graphs_strategy(max_symbols=6, max_labels=4):
    @st.composite
    def build(draw):
        n = draw(st.integers(2, max_symbols))
        syms = [f"s{i}" for i in range(n)]
        n_y = draw(st.integers(1, min(max_labels, n)))
        ys = [str(i) for i in range(n_y)]
        perm = draw(st.permutations(syms))
        edges = set(zip(perm, perm[1:] + perm[:1]))
        extra = draw(st.lists(st.tuples(st.sampled_from(syms), st.sampled_from(syms)),
                              max_size=2 * n))
        edges.update(extra)
        label = {s: draw(st.sampled_from(ys)) for s in syms}
        return LabeledGraph(syms, edges, label, sorted({label[s] for s in syms}))
    return build()


# ----------------------------------------------------------- analyze_graph

def test_full_shift_is_irreducible_period_one():
    report = sl.analyze_graph(sl.full_shift("01"))
    assert report.is_essential and report.is_irreducible
    assert report.periods == (1,)


def test_golden_mean_structure(golden_mean_graph):
    report = sl.analyze_graph(golden_mean_graph)
    assert report.is_irreducible
    assert report.periods == (1,)   # cycles of length 1 and 2 coexist


def test_two_disjoint_loops_not_irreducible():
    g = LabeledGraph(["a", "b"], [("a", "a"), ("b", "b")], {"a": "0", "b": "1"})
    report = sl.analyze_graph(g)
    assert not report.is_irreducible
    assert len(report.components) == 2


def test_trimming_removes_dangling_symbols():
    g = LabeledGraph(["a", "b", "c"], [("a", "a"), ("a", "b"), ("c", "a")],
                     {"a": "0", "b": "0", "c": "0"})
    report = sl.analyze_graph(g)
    assert set(report.trimmed_symbols) == {"b", "c"}
    assert report.essential.x_symbols == ("a",)


def test_empty_after_trim():
    g = LabeledGraph(["a", "b"], [("a", "b")], {"a": "0", "b": "0"})
    with pytest.raises(EmptyAfterTrim):
        sl.analyze_graph(g)


def test_two_cycle_period():
    g = LabeledGraph(["a", "b"], [("a", "b"), ("b", "a")], {"a": "0", "b": "1"})
    assert sl.analyze_graph(g).periods == (2,)


# ----------------------------------------------------------------- entropy

def test_entropy_full_2_shift():
    assert abs(sl.entropy(sl.full_shift("01")) - log(2)) <= 1e-10


def test_entropy_full_5_shift():
    assert abs(sl.entropy(sl.full_shift("01234")) - log(5)) <= 1e-10


def test_entropy_golden_mean(golden_mean_graph):
    golden = (1 + sqrt(5)) / 2
    assert abs(sl.entropy(golden_mean_graph) - log(golden)) <= 1e-10


def test_entropy_requires_irreducible():
    g = LabeledGraph(["a", "b"], [("a", "a"), ("b", "b")], {"a": "0", "b": "1"})
    with pytest.raises(NotIrreducible):
        sl.entropy(g)


@given(graphs_strategy())
def test_entropy_matches_eigenvalue_oracle(g):
    assert abs(sl.entropy(g) - eig_entropy(g)) <= 1e-9


# ---------------------------------------------------------------- recoding

def test_recode_rule102(rule102):
    rec = rule102.recoding
    g = rec.graph
    assert len(g.x_symbols) == 4
    assert len(g.transitions) == 8
    rendered = {"".join(s): g.label[s] for s in g.x_symbols}
    assert rendered == {"00": "0", "01": "1", "10": "1", "11": "0"}
    assert rec.offset == 0


def test_recode_identity_is_isomorphic():
    code = SlidingBlockCode(0, 0, "01", {("0",): "0", ("1",): "1"})
    rec = sl.recode_to_one_block(code)
    assert len(rec.graph.x_symbols) == 2
    assert len(rec.graph.transitions) == 4
    assert {rec.graph.label[s] for s in rec.graph.x_symbols} == {"0", "1"}


def test_recode_difference_mod_3():
    rec = sl.recode_to_one_block(sl.difference_code(3))
    g = rec.graph
    assert len(g.x_symbols) == 9
    for a, b in g.x_symbols:
        assert g.label[(a, b)] == str((int(b) - int(a)) % 3)


def test_entropy_invariant_under_recoding(golden_mean_graph):
    code = SlidingBlockCode(0, 1, "ab",
                            {("a", "a"): "0", ("a", "b"): "1", ("b", "a"): "2"},
                            transitions=golden_mean_graph.transitions)
    rec = sl.recode_to_one_block(code)
    assert abs(sl.entropy(rec.graph) - sl.entropy(golden_mean_graph)) <= 1e-9


@given(graphs_strategy())
def test_recoding_preserves_entropy_random(g):
    code = SlidingBlockCode(0, 1, g.x_symbols,
                            {(a, b): "x" for a, b in g.transitions},
                            transitions=g.transitions)
    rec = sl.recode_to_one_block(code)
    assert abs(sl.entropy(rec.graph) - sl.entropy(g)) <= 1e-9


# ------------------------------------------------------------- determinize

def test_determinize_rule102_image_is_full_shift(rule102):
    aut = sl.determinize(rule102.recoding.graph)
    assert abs(aut.entropy() - log(2)) <= 1e-10
    for length in range(1, 7):
        for word in __import__("itertools").product("01", repeat=length):
            assert aut.accepts(word)


def test_determinize_identity_labeling():
    g = sl.full_shift("01")
    aut = sl.determinize(g)
    assert len(aut.states) == 2
    assert all(len(s) == 1 for s in aut.states)


def test_determinize_constant_label(constant_label_graph):
    aut = sl.determinize(constant_label_graph)
    assert len(aut.states) == 1
    assert abs(aut.entropy() - 0.0) <= 1e-12


@given(graphs_strategy(max_symbols=5, max_labels=3))
def test_determinize_language_matches_graph(g):
    from itertools import product
    aut = sl.determinize(g)
    for length in range(1, 5):
        for word in product(g.y_symbols, repeat=length):
            assert aut.accepts(word) == label_word_realizable(g, word)


def test_determinize_language_exhaustive_length_6(rule102, golden_mean_graph):
    from itertools import product
    for g in (rule102.recoding.graph, golden_mean_graph):
        aut = sl.determinize(g)
        for length in range(1, 7):
            for word in product(g.y_symbols, repeat=length):
                assert aut.accepts(word) == label_word_realizable(g, word)


# ---------------------------------------------------- periodic orbit lists

def test_orbits_full_2_shift():
    orbits = sl.enumerate_periodic_orbits(sl.full_shift("01"), 2)
    assert {o.primitive_word for o in orbits} == {("0",), ("1",), ("0", "1")}


def test_orbits_golden_mean(golden_mean_graph):
    orbits = sl.enumerate_periodic_orbits(golden_mean_graph, 2)
    assert {o.primitive_word for o in orbits} == {("a",), ("a", "b")}


def test_fixed_points_of_full_shift():
    orbits = sl.enumerate_periodic_orbits(sl.full_shift("abcd"), 1)
    assert len(orbits) == 4
    assert all(o.period == 1 for o in orbits)


@given(graphs_strategy(max_symbols=5), st.integers(1, 5))
def test_trace_formula(g, max_p):
    orbits = sl.enumerate_periodic_orbits(g, max_p)
    mat = g.adjacency_matrix()
    power = np.eye(len(g.x_symbols), dtype=np.int64)
    for p in range(1, max_p + 1):
        power = power @ mat
        expected = sum(o.period for o in orbits if p % o.period == 0)
        assert int(np.trace(power)) == expected


def test_periodic_orbit_canonicalization():
    orbit = PeriodicOrbit.from_word("0101")
    assert orbit.primitive_word == ("0", "1")
    assert orbit.period == 2
    assert PeriodicOrbit.from_word("10").primitive_word == ("0", "1")


# -------------------------------------------------------------------- I/O

def test_graph_json_round_trip(golden_mean_graph):
    data = golden_mean_graph.to_json_dict()
    back = LabeledGraph.from_json_dict(json.loads(json.dumps(data)))
    assert back == golden_mean_graph


def test_sliding_block_code_json():
    data = {"memory": 0, "anticipation": 1, "alphabet": ["0", "1"],
            "block_map": {"00": "0", "01": "1", "10": "1", "11": "0"}}
    code = SlidingBlockCode.from_json_dict(data)
    assert code.apply("0110") == ("1", "0", "1")


def test_dot_export(golden_mean_graph):
    dot = sl.to_dot(golden_mean_graph)
    assert dot.startswith("digraph")
    assert '"a" -> "b"' in dot
