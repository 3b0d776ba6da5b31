"""Layered multigraphs, Perron-Frobenius eigendata, and path counting.

A layered graph is a finite multigraph whose edges all run from one vertex
layer to another (possibly the same) layer.  Four such graphs arranged
around a square, together with a common positive weight vector and the two
Perron-Frobenius eigenvalues, form the :class:`SquareScheme` on which
connections live.

Vertex and edge ids are opaque strings; every basis produced downstream is
ordered lexicographically on these ids, so all matrix representations are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GraphError",
    "LayeredGraph",
    "SquareScheme",
    "SquareReport",
    "reverse_graph",
    "perron_frobenius",
    "validate_square",
    "alternating",
    "count_paths",
    "count_loops",
    "enumerate_paths",
]


class GraphError(ValueError):
    """Malformed graph data or a failed eigenvector computation."""


class LayeredGraph:
    """Finite multigraph with oriented edges from a source layer to a range layer.

    Edges are stored oriented; :meth:`reverse` flips every edge while keeping
    edge ids, which models traversing the same unoriented graph backwards.
    Multi-edges are allowed and counted.  Instances are immutable by
    convention: never mutate the stored tuples.
    """

    def __init__(self, name, vertices, edges, source_layer, range_layer):
        self.name = str(name)
        self.source_layer = source_layer
        self.range_layer = range_layer

        vdict = {}
        for v, layer in vertices:
            v = str(v)
            if v in vdict and vdict[v] != layer:
                raise GraphError(f"vertex {v!r} listed with two layers")
            vdict[v] = layer
        self.vertices = tuple(sorted(vdict.items()))
        self._layer = vdict

        es = []
        seen = set()
        for e, s, r in edges:
            e, s, r = str(e), str(s), str(r)
            if e in seen:
                raise GraphError(f"duplicate edge id {e!r}")
            seen.add(e)
            if s not in vdict or r not in vdict:
                raise GraphError(f"edge {e!r} has an unknown endpoint")
            if vdict[s] != source_layer or vdict[r] != range_layer:
                raise GraphError(f"edge {e!r} does not run source layer -> range layer")
            es.append((e, s, r))
        self.edges = tuple(sorted(es))

        self.src_vertices = tuple(v for v, l in self.vertices if l == source_layer)
        self.rng_vertices = tuple(v for v, l in self.vertices if l == range_layer)
        self._src_index = {v: i for i, v in enumerate(self.src_vertices)}
        self._rng_index = {v: i for i, v in enumerate(self.rng_vertices)}
        self._source = {e: s for e, s, r in self.edges}
        self._range = {e: r for e, s, r in self.edges}
        self._from = {}
        self._between = {}
        for e, s, r in self.edges:
            self._from.setdefault(s, []).append(e)
            self._between.setdefault((s, r), []).append(e)

    # -- basic accessors -------------------------------------------------

    @property
    def n_edges(self):
        return len(self.edges)

    def source(self, edge_id: str) -> str:
        return self._source[edge_id]

    def range(self, edge_id: str) -> str:
        return self._range[edge_id]

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._source

    def edges_from(self, v: str) -> tuple[str, ...]:
        return tuple(self._from.get(v, ()))

    def edges_between(self, s: str, r: str) -> tuple[str, ...]:
        return tuple(self._between.get((s, r), ()))

    def layer_of(self, v: str):
        return self._layer[v]

    def adjacency(self) -> np.ndarray:
        """Multiplicity matrix, rows = source vertices, columns = range vertices."""
        a = np.zeros((len(self.src_vertices), len(self.rng_vertices)), dtype=np.int64)
        for e, s, r in self.edges:
            a[self._src_index[s], self._rng_index[r]] += 1
        return a

    def reverse(self, name: str | None = None) -> "LayeredGraph":
        """The edge-reversed graph; edge ids are preserved."""
        return LayeredGraph(
            name if name is not None else self.name + "~",
            self.vertices,
            [(e, r, s) for e, s, r in self.edges],
            self.range_layer,
            self.source_layer,
        )

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        parent = {v: v for v, _ in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for _, s, r in self.edges:
            parent[find(s)] = find(r)
        roots = {find(v) for v, _ in self.vertices}
        return len(roots) == 1

    def validate(self, min_edges: int = 2) -> None:
        """Raise unless the graph is connected with at least `min_edges` edges."""
        if self.n_edges < min_edges:
            raise GraphError(f"graph {self.name!r} has {self.n_edges} edges, needs >= {min_edges}")
        if not self.is_connected():
            raise GraphError(f"graph {self.name!r} is not connected")

    def structurally_equal(self, other: "LayeredGraph") -> bool:
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and self.source_layer == other.source_layer
            and self.range_layer == other.range_layer
        )

    def __repr__(self):
        return (
            f"LayeredGraph({self.name!r}, {len(self.vertices)} vertices, "
            f"{self.n_edges} edges, layers {self.source_layer}->{self.range_layer})"
        )


def reverse_graph(g: LayeredGraph, name: str | None = None) -> LayeredGraph:
    """Reverse every edge; involutive and id-preserving."""
    return g.reverse(name)


def perron_frobenius(
    g: LayeredGraph,
    tol: float = 1e-14,
    max_iter: int = 100_000,
    base: str | None = None,
) -> tuple[float, dict[str, float]]:
    """Perron-Frobenius eigenvalue and positive two-sided eigenvector of a graph.

    Returns ``(lam, weights)`` with ``sum_x A[x,y] w[x] = lam * w[y]`` and
    ``sum_y A[x,y] w[y] = lam * w[x]``.  The scale is fixed by
    ``weights[base] = 1`` when `base` is a vertex of `g`, otherwise by
    max-entry 1.  Power iteration on A A^T; raises on disconnected input or
    when the iteration cap is hit.
    """
    if not g.vertices or g.n_edges == 0:
        raise GraphError("empty graph")
    if not g.is_connected():
        raise GraphError(f"graph {g.name!r} is disconnected")
    a = g.adjacency().astype(float)
    m = a @ a.T
    v = np.ones(m.shape[0]) / np.sqrt(m.shape[0])
    lam2 = 0.0
    for _ in range(max_iter):
        w = m @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise GraphError("degenerate adjacency: power iteration collapsed")
        w /= nw
        lam2_new = float(w @ (m @ w))
        if abs(lam2_new - lam2) <= tol * max(lam2_new, 1.0) and np.max(np.abs(w - v)) <= 10 * tol:
            v = w
            lam2 = lam2_new
            break
        v = w
        lam2 = lam2_new
    else:
        raise GraphError("Perron-Frobenius iteration did not converge (degenerate input?)")
    lam = float(np.sqrt(lam2))
    u = (a.T @ v) / lam
    weights = {}
    for x, i in zip(g.src_vertices, range(len(v))):
        weights[x] = float(v[i])
    for y, i in zip(g.rng_vertices, range(len(u))):
        weights[y] = float(u[i])
    if base is not None and base in weights:
        scale = weights[base]
    else:
        scale = max(weights.values())
    weights = {k: w / scale for k, w in weights.items()}
    if min(weights.values()) <= 0:
        raise GraphError("eigenvector not strictly positive")
    return lam, weights


# -- the four-graph square ----------------------------------------------


@dataclass
class SquareScheme:
    """Four graphs around a square with common weights and eigenvalues.

    ``g``: top, layer 0 -> 3; ``h``: left, 0 -> 1; ``g_prime``: bottom,
    1 -> 2; ``h_prime``: right, 3 -> 2.  ``gamma1`` is the eigenvalue of the
    horizontal pair (g, g_prime), ``gamma2`` of the vertical pair
    (h, h_prime).  ``mu`` assigns a positive weight to every vertex of all
    four layers; ``base`` is a distinguished vertex of layer 0.
    """

    g: LayeredGraph
    h: LayeredGraph
    g_prime: LayeredGraph
    h_prime: LayeredGraph
    mu: dict[str, float]
    gamma1: float
    gamma2: float
    base: str

    @property
    def v0(self) -> tuple[str, ...]:
        return self.g.src_vertices

    @property
    def v1(self) -> tuple[str, ...]:
        return self.h.rng_vertices

    @property
    def v2(self) -> tuple[str, ...]:
        return self.g_prime.rng_vertices

    @property
    def v3(self) -> tuple[str, ...]:
        return self.g.rng_vertices

    def rescaled(self, factor: float) -> "SquareScheme":
        return SquareScheme(
            self.g, self.h, self.g_prime, self.h_prime,
            {v: factor * m for v, m in self.mu.items()},
            self.gamma1, self.gamma2, self.base,
        )


@dataclass
class SquareReport:
    residuals: dict[str, float] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _eigen_residuals(g: LayeredGraph, mu: dict[str, float], gamma: float) -> tuple[float, float]:
    a = g.adjacency().astype(float)
    vs = np.array([mu[x] for x in g.src_vertices])
    vr = np.array([mu[y] for y in g.rng_vertices])
    r1 = float(np.max(np.abs(a.T @ vs - gamma * vr))) if len(vr) else 0.0
    r2 = float(np.max(np.abs(a @ vr - gamma * vs))) if len(vs) else 0.0
    return r1, r2


def validate_square(s: SquareScheme, tol: float = 1e-9) -> SquareReport:
    """Check the eight eigenvalue equations, positivity, and connectivity."""
    rep = SquareReport()
    pairs = [("g", s.g, s.gamma1), ("g_prime", s.g_prime, s.gamma1),
             ("h", s.h, s.gamma2), ("h_prime", s.h_prime, s.gamma2)]
    for name, graph, gamma in pairs:
        try:
            graph.validate()
            rep.checks[f"{name}_connected"] = True
        except GraphError as err:
            rep.checks[f"{name}_connected"] = False
            rep.messages.append(str(err))
            continue
        r_in, r_out = _eigen_residuals(graph, s.mu, gamma)
        rep.residuals[f"{name}_into_range"] = r_in
        rep.residuals[f"{name}_into_source"] = r_out
        rep.checks[f"{name}_into_range"] = r_in < tol
        rep.checks[f"{name}_into_source"] = r_out < tol
    rep.checks["mu_positive"] = all(m > 0 for m in s.mu.values())
    rep.checks["gamma1_gt_1"] = s.gamma1 > 1.0
    rep.checks["gamma2_gt_1"] = s.gamma2 > 1.0
    rep.checks["base_in_v0"] = s.base in s.v0
    layer_ok = (
        set(s.g.src_vertices) == set(s.h.src_vertices)
        and set(s.h.rng_vertices) == set(s.g_prime.src_vertices)
        and set(s.g.rng_vertices) == set(s.h_prime.src_vertices)
        and set(s.g_prime.rng_vertices) == set(s.h_prime.rng_vertices)
    )
    rep.checks["layers_consistent"] = layer_ok
    return rep


# -- path counting and enumeration ----------------------------------------


def alternating(g: LayeredGraph, length: int) -> list[LayeredGraph]:
    """The graph sequence [g, g~, g, ...] used for back-and-forth paths."""
    rev = g.reverse()
    return [g if i % 2 == 0 else rev for i in range(length)]


def _seq_graph(seq, i: int) -> LayeredGraph:
    return seq[i % len(seq)]


def count_paths(seq, start: str, length: int) -> dict[str, int]:
    """Exact number of paths of `length` steps from `start`, per end vertex.

    Step ``i`` uses ``seq[i % len(seq)]``; consecutive graphs must compose
    (range layer of one = source layer of the next).
    """
    counts = {str(start): 1}
    for i in range(length):
        g = _seq_graph(seq, i)
        if i > 0:
            prev = _seq_graph(seq, i - 1)
            if prev.range_layer != g.source_layer:
                raise GraphError("incompatible layers in graph sequence")
        new: dict[str, int] = {}
        for e, s, r in g.edges:
            c = counts.get(s)
            if c:
                new[r] = new.get(r, 0) + c
        counts = new
    return counts


def count_loops(seq, base: str, length: int) -> int:
    """Exact number of closed paths of `length` steps based at `base`."""
    return count_paths(seq, base, length).get(str(base), 0)


def enumerate_paths(seq, starts, length: int) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """All paths of `length` steps from the given start vertices.

    Returns ``(edge_ids, vertex_sequence)`` pairs sorted by start vertex and
    then lexicographically on the edge id tuple, giving a reproducible basis
    order.
    """
    paths = [((), (str(v),)) for v in sorted(set(map(str, starts)))]
    for i in range(length):
        g = _seq_graph(seq, i)
        new = []
        for edges, verts in paths:
            for e in sorted(g.edges_from(verts[-1])):
                new.append((edges + (e,), verts + (g.range(e),)))
        paths = new
    paths.sort(key=lambda p: (p[1][0], p[0]))
    return paths
