"""Graphs: Perron-Frobenius data, reversal, path counting, square validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biunitary import (
    GraphError,
    LayeredGraph,
    build_dynkin,
    build_trivial,
    count_loops,
    count_paths,
    enumerate_paths,
    perron_frobenius,
    reverse_graph,
    validate_square,
)
from biunitary.graphs import alternating


def path_graph(n: int, name: str = "A") -> LayeredGraph:
    """A_n as a layered graph, odd-numbered vertices on layer 0."""
    verts = [(str(i), 0 if i % 2 == 1 else 1) for i in range(1, n + 1)]
    edges = []
    for i in range(1, n):
        a, b = (i, i + 1) if i % 2 == 1 else (i + 1, i)
        edges.append((f"{name}:{a}-{b}", str(a), str(b)))
    return LayeredGraph(name, verts, edges, 0, 1)


def test_perron_frobenius_a3():
    g = path_graph(3)
    lam, w = perron_frobenius(g, base="1")
    assert abs(lam - math.sqrt(2)) < 1e-12
    assert abs(w["1"] - 1) < 1e-12
    assert abs(w["2"] - math.sqrt(2)) < 1e-12
    assert abs(w["3"] - 1) < 1e-12


def test_perron_frobenius_parallel_edges():
    d = 4
    g = LayeredGraph("P", [("x", 0), ("y", 1)],
                     [(f"e{j}", "x", "y") for j in range(d)], 0, 1)
    lam, w = perron_frobenius(g)
    assert abs(lam - d) < 1e-12
    assert abs(w["x"] - 1) < 1e-12 and abs(w["y"] - 1) < 1e-12


def test_perron_frobenius_star():
    n = 5
    g = LayeredGraph("S", [(f"g{j}", 0) for j in range(n)] + [("c", 1)],
                     [(f"e{j}", f"g{j}", "c") for j in range(n)], 0, 1)
    lam, w = perron_frobenius(g, base="g0")
    assert abs(lam - math.sqrt(n)) < 1e-12
    assert all(abs(w[f"g{j}"] - 1) < 1e-12 for j in range(n))
    assert abs(w["c"] - math.sqrt(n)) < 1e-12
    # default scale without a base vertex: max entry one
    _, w2 = perron_frobenius(g)
    assert abs(max(w2.values()) - 1) < 1e-12


def test_perron_frobenius_rejects_disconnected():
    g = LayeredGraph("D", [("a", 0), ("b", 1), ("c", 0), ("d", 1)],
                     [("e1", "a", "b"), ("e2", "c", "d")], 0, 1)
    with pytest.raises(GraphError):
        perron_frobenius(g)


def test_reverse_is_involutive_and_preserves_ids():
    g = path_graph(3)
    rr = reverse_graph(reverse_graph(g))
    assert rr.edges == g.edges
    assert rr.source_layer == g.source_layer


def test_reverse_parallel_edges_keep_ids():
    g = LayeredGraph("P", [("x", 0), ("y", 1)],
                     [("e0", "x", "y"), ("e1", "x", "y")], 0, 1)
    r = reverse_graph(g)
    assert r.edges == (("e0", "y", "x"), ("e1", "y", "x"))


def test_count_paths_a3_length_two():
    g = path_graph(3)
    counts = count_paths(alternating(g, 2), "1", 2)
    assert counts == {"1": 1, "3": 1}


@pytest.mark.parametrize("n,expected", [(3, [1, 2, 4, 8]), (4, [1, 2, 5, 13])])
def test_count_loops_against_dense_power_oracle(n, expected):
    g = path_graph(n)
    # independent oracle: dense powers of the full undirected adjacency matrix
    adj = np.zeros((n, n), dtype=np.int64)
    for i in range(1, n):
        adj[i - 1, i] = adj[i, i - 1] = 1
    for k, exp in enumerate(expected, start=1):
        want = int(np.linalg.matrix_power(adj, 2 * k)[0, 0])
        assert want == exp
        assert count_loops(alternating(g, 2 * k), "1", 2 * k) == exp


def test_count_loops_matches_dense_powers_on_builder_graphs():
    # oracle equivalence on every builder's horizontal graph
    from conftest import ALL_BUILDERS, make_builder

    for name in ALL_BUILDERS:
        g = make_builder(name).top
        verts = sorted({v for v, _ in g.vertices})
        idx = {v: i for i, v in enumerate(verts)}
        adj = np.zeros((len(verts), len(verts)), dtype=np.int64)
        for _, s, r in g.edges:
            adj[idx[s], idx[r]] += 1
            adj[idx[r], idx[s]] += 1
        for k in (1, 2, 3):
            power = np.linalg.matrix_power(adj, 2 * k)
            for x in set(g.src_vertices):
                got = count_loops(alternating(g, 2 * k), x, 2 * k)
                assert got == int(power[idx[x], idx[x]]), (name, x, k)


def test_enumerate_paths_matches_counts():
    g = path_graph(4)
    for length in (1, 2, 3, 4):
        paths = enumerate_paths(alternating(g, length), g.src_vertices, length)
        total = 0
        for x in g.src_vertices:
            c = count_paths(alternating(g, length), x, length)
            total += sum(c.values())
        assert len(paths) == total
        assert len({p for p, _ in paths}) == len(paths)


def test_validate_square_a3_passes():
    rep = validate_square(build_dynkin("A3").scheme())
    assert rep.passed
    assert rep.max_residual < 1e-12


def test_validate_square_perturbed_weight_fails():
    s = build_dynkin("A3").scheme()
    s.mu["1:2"] += 0.1
    s.mu["3:2"] += 0.1
    rep = validate_square(s)
    assert not rep.passed
    assert 0.05 < rep.max_residual < 0.5


def test_validate_square_trivial():
    rep = validate_square(build_trivial(2).scheme())
    assert rep.passed


@st.composite
def small_bipartite(draw):
    nl = draw(st.integers(1, 3))
    nr = draw(st.integers(1, 3))
    verts = [(f"l{i}", 0) for i in range(nl)] + [(f"r{j}", 1) for j in range(nr)]
    edges = []
    eid = 0
    for i in range(nl):
        for j in range(nr):
            mult = draw(st.integers(0, 2))
            for _ in range(mult):
                edges.append((f"e{eid}", f"l{i}", f"r{j}"))
                eid += 1
    if not edges:
        edges = [("e0", "l0", "r0")]
    return LayeredGraph("H", verts, edges, 0, 1)


@settings(max_examples=40, deadline=None)
@given(small_bipartite())
def test_reverse_involution_property(g):
    assert reverse_graph(reverse_graph(g)).edges == g.edges
