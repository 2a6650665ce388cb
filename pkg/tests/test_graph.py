import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatmix.errors import ParseError
from spatmix.graph import (
    build_from_edges,
    build_lattice,
    neighbor_counts,
    read_edge_list,
    write_edge_list,
)


def test_single_edge_symmetry():
    g = build_from_edges(2, [(0, 1)])
    assert g.neighbors(0).tolist() == [1]
    assert g.neighbors(1).tolist() == [0]


def test_path_graph():
    g = build_from_edges(3, [(0, 1), (1, 2)])
    assert g.neighbors(1).tolist() == [0, 2]
    assert g.num_edges == 2


def test_self_loop_rejected():
    with pytest.raises(ValueError, match="self-loop"):
        build_from_edges(3, [(0, 0)])


def test_out_of_range_rejected():
    with pytest.raises(ValueError, match="out of range"):
        build_from_edges(3, [(0, 3)])


def test_duplicate_and_reversed_edges_collapse():
    g1 = build_from_edges(4, [(0, 1), (1, 0), (0, 1), (2, 3)])
    g2 = build_from_edges(4, [(0, 1), (2, 3)])
    assert g1.edges() == g2.edges()


@given(st.integers(3, 12), st.data())
@settings(max_examples=40, deadline=None)
def test_random_edge_lists_give_symmetric_graphs(n, data):
    pairs = data.draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1]),
        max_size=2 * n,
    ))
    g = build_from_edges(n, pairs)
    for i in range(n):
        for j in g.neighbors(i):
            assert i in g.neighbors(j)
        assert i not in g.neighbors(i)


def test_lattice_2x2_rook_degrees():
    g = build_lattice(2, "rook")
    assert g.n == 4
    assert np.all(g.degrees == 2)


def test_lattice_3x3_center_degrees():
    assert build_lattice(3, "rook").degrees[4] == 4
    assert build_lattice(3, "queen").degrees[4] == 8


def test_lattice_degree_bounds():
    rook = build_lattice(6, "rook").degrees
    queen = build_lattice(6, "queen").degrees
    assert rook.min() == 2 and rook.max() == 4
    assert queen.min() == 3 and queen.max() == 8


def test_lattice_side_too_small():
    with pytest.raises(ValueError):
        build_lattice(1)


def test_neighbor_counts_all_same_label():
    g = build_lattice(3, "rook")
    labels = np.ones(9, dtype=int)
    nc = neighbor_counts(g, labels, 2)
    assert nc.same[4, 1] == 4 and nc.other[4, 1] == 0
    assert nc.difference[4, 1] == 4


def test_neighbor_counts_three_of_four():
    g = build_lattice(3, "rook")
    labels = np.ones(9, dtype=int)
    labels[1] = 0  # one of the center's four neighbors moves elsewhere
    nc = neighbor_counts(g, labels, 2)
    assert nc.same[4, 1] - nc.other[4, 1] == 2


def test_neighbor_counts_isolated_node():
    g = build_from_edges(3, [(0, 1)])
    nc = neighbor_counts(g, np.array([0, 1, 0]), 2)
    assert np.all(nc.same[2] == 0) and np.all(nc.other[2] == 0)


def test_neighbor_counts_complement_property():
    rng = np.random.default_rng(5)
    g = build_lattice(5, "queen")
    labels = rng.integers(0, 3, g.n)
    nc = neighbor_counts(g, labels, 3)
    assert np.all(nc.same + nc.other == g.degrees[:, None])
    assert np.all(nc.same.sum(axis=1) == g.degrees)


def test_neighbor_counts_label_out_of_range():
    g = build_lattice(2)
    with pytest.raises(ValueError, match="lie in"):
        neighbor_counts(g, np.array([0, 1, 2, 0]), 2)


def test_edge_list_round_trip(tmp_path):
    g = build_lattice(4, "queen")
    path = tmp_path / "edges.txt"
    write_edge_list(g, path)
    g2 = read_edge_list(path, n=g.n)
    assert g.edges() == g2.edges()


def test_edge_list_comments_and_errors(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# header\n\n0 1\n1 2\n")
    g = read_edge_list(path, n=3)
    assert g.num_edges == 2

    path.write_text("0 1 2\n")
    with pytest.raises(ParseError, match="two indices"):
        read_edge_list(path, n=3)

    path.write_text("0 x\n")
    with pytest.raises(ParseError, match="non-integer"):
        read_edge_list(path, n=3)
