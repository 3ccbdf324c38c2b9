import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinsync.graph import (
    EdgeListError,
    Graph,
    PinSet,
    as_pinset,
    grounded_view,
    load_edge_list,
    parse_edge_list,
    unpinned_components,
    write_edge_list,
)

from _helpers import complete_graph, dense_grounded, path_graph, star_graph, two_triangles


def test_parse_path():
    g = parse_edge_list("0 1\n1 2")
    assert (g.n, g.m) == (3, 2)
    assert g.degrees.tolist() == [1, 2, 1]
    assert g.neighbors(1).tolist() == [0, 2]


def test_parse_dedup_and_self_loops():
    g = parse_edge_list("a b\nb a\na a")
    assert (g.n, g.m) == (2, 1)
    assert g.dropped_duplicates == 1
    assert g.dropped_self_loops == 1
    assert g.labels == ("a", "b")


def test_labels_first_seen_order():
    g = parse_edge_list("# header\n% other comment\nz y\n\ny x\n")
    assert g.labels == ("z", "y", "x")
    assert g.edges.tolist() == [[0, 1], [1, 2]]


def test_parse_bytes_and_binary_stream():
    assert parse_edge_list(b"0 1\n1 2\n") == parse_edge_list("0 1\n1 2\n")
    assert load_edge_list(io.BytesIO(b"0 1\n1 2\n")) == parse_edge_list("0 1\n1 2\n")


@pytest.mark.parametrize("text, lineno", [
    ("0 1\n1 2 3\n", 2),
    ("# c\n0\n", 2),
    ("0 1\n\n1 2\nx\n", 4),
])
def test_malformed_line_reports_line_number(text, lineno):
    with pytest.raises(EdgeListError) as exc:
        parse_edge_list(text)
    assert exc.value.lineno == lineno
    assert f"line {lineno}" in str(exc.value)


@pytest.mark.parametrize("text", ["", "# only a comment\n", "\n\n"])
def test_empty_input_rejected(text):
    with pytest.raises(EdgeListError):
        parse_edge_list(text)


def test_graph_invariants():
    g = parse_edge_list("1 2\n2 3\n3 1\n3 4\n")
    assert g.degrees.sum() == 2 * g.m
    a = g.adjacency.toarray()
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    for i in range(g.n):
        assert np.all(np.diff(g.neighbors(i)) > 0)


def test_graph_is_immutable():
    g = path_graph(4)
    with pytest.raises(ValueError):
        g.degrees[0] = 7
    with pytest.raises(ValueError):
        g.edges[0, 0] = 3


def test_from_edges_rejects_out_of_range():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])


def test_round_trip_file(tmp_path):
    g = parse_edge_list("b c\nc a\nd b\n")
    p = tmp_path / "g.txt"
    write_edge_list(g, p)
    assert load_edge_list(p) == g
    assert load_edge_list(str(p)).labels == ("b", "c", "a", "d")


def test_round_trip_keeps_isolated_nodes():
    g = Graph.from_edges(5, [(0, 3), (3, 4)])
    buf = io.StringIO()
    write_edge_list(g, buf)
    h = parse_edge_list(buf.getvalue())
    assert h == g
    assert h.isolated_nodes().tolist() == [1, 2]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), min_size=1, max_size=60))
def test_round_trip_property(pairs):
    text = "".join(f"n{a} n{b}\n" for a, b in pairs)
    if all(a == b for a, b in pairs):
        g = parse_edge_list(text)
        assert g.m == 0
        return
    g = parse_edge_list(text)
    buf = io.StringIO()
    write_edge_list(g, buf)
    assert parse_edge_list(buf.getvalue()) == g
    assert g.degrees.sum() == 2 * g.m


def test_node_directive_after_edges_rejected():
    with pytest.raises(EdgeListError):
        parse_edge_list("0 1\n# pinsync-nodes: 0 1\n")


def test_pinset_validation():
    with pytest.raises(ValueError):
        PinSet((1, 1))
    with pytest.raises(ValueError):
        PinSet((0, 5)).validate(3)
    p = PinSet((3, 1, 2), "x")
    assert p.prefix(2).members == (3, 1)
    assert list(p) == [3, 1, 2] and 1 in p and len(p) == 3
    assert as_pinset(np.array([2, 0])).members == (2, 0)
    assert as_pinset(None).members == ()


def test_grounded_view_p2():
    v = grounded_view(path_graph(2), [0])
    assert v.unpinned.tolist() == [1]
    assert v.to_dense().tolist() == [[1.0]]


def test_grounded_view_k3():
    v = grounded_view(complete_graph(3), [0])
    assert v.unpinned.tolist() == [1, 2]
    assert v.to_dense().tolist() == [[2, -1], [-1, 2]]
    assert v.index_map.tolist() == [-1, 0, 1]


def test_grounded_view_star():
    v = grounded_view(star_graph(3), [1])
    assert v.unpinned.tolist() == [0, 2, 3]
    assert v.to_dense().tolist() == [[3, -1, -1], [-1, 1, 0], [-1, 0, 1]]
    assert v.diagonal.tolist() == [3, 1, 1]


def test_grounded_view_all_pinned_rejected():
    with pytest.raises(ValueError):
        grounded_view(complete_graph(3), [0, 1, 2])


def test_grounded_view_matvec_matches_definition(rng):
    from pinsync.generators import gen_er
    g = gen_er(40, 0.2, seed=3)
    pins = rng.choice(g.n, size=9, replace=False)
    v = grounded_view(g, pins)
    dense, keep = dense_grounded(g, pins)
    assert keep.tolist() == v.unpinned.tolist()
    x = rng.standard_normal(v.dim)
    assert np.allclose(v.matvec(x), dense @ x, atol=1e-12)
    lifted = v.lift(x)
    assert np.all(lifted[pins] == 0) and np.allclose(lifted[v.unpinned], x)


def test_grounded_quadratic_form_nonnegative(rng):
    from pinsync.generators import gen_ws
    g = gen_ws(30, 4, 0.3, seed=1)
    v = grounded_view(g, [0, 7])
    for _ in range(50):
        x = rng.standard_normal(v.dim)
        assert x @ v.matvec(x) >= -1e-12


def test_components_p3():
    comps = unpinned_components(path_graph(3), [1])
    assert [(c.nodes.tolist(), c.touches_pinned) for c in comps] == [([0], True), ([2], True)]


def test_components_two_triangles():
    comps = unpinned_components(two_triangles(), [0])
    assert [(c.nodes.tolist(), c.touches_pinned) for c in comps] == [
        ([1, 2], True), ([3, 4, 5], False)]


def test_components_nothing_pinned():
    comps = unpinned_components(complete_graph(3), [])
    assert [(c.nodes.tolist(), c.touches_pinned) for c in comps] == [([0, 1, 2], False)]
