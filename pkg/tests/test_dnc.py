import pytest

from roadlabel.dnc import compose, component_kind, decompose, divide_and_conquer, label_components
from roadlabel.labelcore import count_labeled_sections, validate_labeling
from roadlabel.roadgraph import GraphBuilder
from roadlabel.solvers import solve_exact, tree_heuristic
from roadlabel.synth import oracle_instance


def exact(g):
    return solve_exact(None, g)


def composed(g, rules=(1, 2, 3, 4)):
    d = decompose(g, rules)
    return d, compose(d, [exact(c) for c in d.components])


@pytest.mark.parametrize("rule", [1, 2, 3, 4])
@pytest.mark.parametrize("kind", ["grid", "organic"])
def test_single_rule_preserves_optimum(rule, kind):
    for seed in range(15):
        g = oracle_instance(kind, seed)
        _, lab = composed(g, (rule,))
        assert validate_labeling(g, lab) == []
        assert count_labeled_sections(g, lab) == count_labeled_sections(g, exact(g)), (kind, seed)


def test_dead_end_junction_removed_by_rule_two():
    b = GraphBuilder()
    r = b.road("Stub Lane", 4.0)
    b.section([(0, 0), (10, 0)], r)
    b.junction([(10, 0), (12, 0)], r)
    d = decompose(b.build())
    assert d.removed == [(1, 2)]
    assert [component_kind(c) for c in d.components] == ["path"]


def test_long_section_is_halved_and_labeled():
    b = GraphBuilder()
    r = b.road("Long Road", 5.0)
    b.section([(0, 0), (30, 0)], r)
    g = b.build()
    d = decompose(g)
    assert d.long_edges == [0]
    assert len(d.halves) == 2 and len(d.stubs) == 2
    assert sorted(off for _, off in d.halves.values()) == [0.0, 15.0]
    lab = compose(d, label_components(d, exact))
    assert validate_labeling(g, lab) == []
    assert count_labeled_sections(g, lab) == 1


def test_long_edge_label_added_when_parts_empty():
    b = GraphBuilder()
    r = b.road("Long Road", 5.0)
    b.section([(0, 0), (30, 0)], r)
    g = b.build()
    d = decompose(g)
    lab = compose(d, [type(exact(c))() for c in d.components])
    assert lab.meta["long_edge_labels"] == 1
    assert validate_labeling(g, lab) == []


def test_stats_keys_and_counts():
    g = oracle_instance("organic", 3)
    s = decompose(g).stats()
    assert s["components"] == s["components_path"] + s["components_tree"] + s["components_other"]
    assert set(s) >= {"rule1", "rule2", "rule3", "rule4", "long_edges"}


def test_threads_give_same_labeling():
    g = oracle_instance("grid", 6)
    one = divide_and_conquer(g, tree_heuristic, threads=1)
    four = divide_and_conquer(g, tree_heuristic, threads=4)
    assert one.sorted().labels == four.sorted().labels


def test_components_are_independent():
    g = oracle_instance("organic", 8)
    d = decompose(g)
    seen = set()
    for c in d.components:
        ids = set(c.edges)
        assert not ids & seen
        seen |= ids


def test_bent_junction_edge_removed_by_rule_one():
    b = GraphBuilder()
    r = b.road("Bend", 6.0)
    b.section([(0, 0), (10, 0)], r)
    b.junction([(10, 0), (12, 0), (12, 2)], r)
    b.section([(12, 2), (12, 12)], r)
    assert decompose(b.build()).removed == [(1, 1)]


def test_half_touched_by_cross_label_counts_once():
    b = GraphBuilder()
    r = b.road("Long", 6.0)
    b.section([(0, 0), (13, 0)], r)
    b.junction([(13, 0), (14, 0)], r)
    b.section([(14, 0), (17, 0)], r)
    g = b.build()
    d, lab = composed(g)
    assert d.long_edges == [0]
    assert [l.path for l in lab.labels] == [(0, 1, 2)]
    assert validate_labeling(g, lab) == []
    assert count_labeled_sections(g, lab) == 2 == count_labeled_sections(g, exact(g))
