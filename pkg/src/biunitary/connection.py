"""Connections on four-graph squares: values, renormalizations, products, builders.

A connection assigns a complex number to every cell of a square of four
layered graphs.  A cell is a quadruple of composable edges

    left   l: x -> z        top     t: x -> y
    right  r: y -> w        bottom  b: z -> w

with corner vertices x (top-left), y (top-right), z (bottom-left),
w (bottom-right).  Unitarity is a statement about the square matrices
collecting all cell values over a fixed corner pair (x, w); bi-unitarity
additionally requires unitarity after the reflection that exchanges the
roles of horizontal and vertical edges and rescales by weight ratios.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graphs import GraphError, LayeredGraph, SquareScheme, perron_frobenius

__all__ = [
    "ConnectionError",
    "Cell",
    "OrientedCellQuery",
    "Connection",
    "UnitarityReport",
    "BiunitarityReport",
    "check_unitarity",
    "check_biunitarity",
    "renormalize",
    "extended_value",
    "vertical_product",
    "horizontal_product",
    "build_dynkin",
    "build_trivial",
    "build_cyclic_group",
    "build_identity",
    "connection_to_document",
    "connection_from_document",
    "write_connection",
    "read_connection",
    "FORMAT_VERSION",
]

DEFAULT_TOL = 1e-9


class ConnectionError(ValueError):
    """Invalid cell data or incompatible connection operands."""


class Cell(NamedTuple):
    left: str
    top: str
    right: str
    bottom: str


@dataclass(frozen=True)
class OrientedCellQuery:
    """A cell plus traversal direction flags.

    Horizontal edges (top and bottom) may be traversed right-to-left, which
    reads the cell in mirror image; vertical edges (left and right) may be
    traversed bottom-to-top, which reads the cell flipped upside down.  The
    flags must be set pairwise: mixed single-edge reversals do not describe
    a consistent diagram.
    """

    cell: Cell
    top_reversed: bool = False
    bottom_reversed: bool = False
    left_reversed: bool = False
    right_reversed: bool = False


class Connection:
    """A complex-valued cell table on a square of four layered graphs.

    The table is sparse: absent cells have value zero.  Graphs, weights and
    values are immutable by convention.  ``gamma`` and ``base`` are carried
    when the connection sits on a genuine four-layer square scheme and are
    None for derived connections (products, summands).
    """

    def __init__(self, top, left, bottom, right, mu, values,
                 gamma=None, base=None, name=""):
        self.top: LayeredGraph = top
        self.left: LayeredGraph = left
        self.bottom: LayeredGraph = bottom
        self.right: LayeredGraph = right
        self.mu: dict[str, float] = dict(mu)
        self.gamma = gamma
        self.base = base
        self.name = name

        if set(top.src_vertices) != set(left.src_vertices):
            raise ConnectionError("top and left graphs disagree on the x layer")
        if set(top.rng_vertices) != set(right.src_vertices):
            raise ConnectionError("top and right graphs disagree on the y layer")
        if set(left.rng_vertices) != set(bottom.src_vertices):
            raise ConnectionError("left and bottom graphs disagree on the z layer")
        if set(bottom.rng_vertices) != set(right.rng_vertices):
            raise ConnectionError("bottom and right graphs disagree on the w layer")
        for v in self.vertex_ids():
            if v not in self.mu:
                raise ConnectionError(f"missing weight for vertex {v!r}")

        vals = {}
        for key, v in values.items():
            cell = Cell(*key)
            self._check_cell(cell)
            v = complex(v)
            if v != 0:
                vals[cell] = v
        self.values: dict[Cell, complex] = vals
        self._check_dimension_matching()
        self._block_cache: dict[tuple[str, str], np.ndarray] = {}

    # -- structure ---------------------------------------------------------

    def vertex_ids(self):
        out = set()
        for g in (self.top, self.left, self.bottom, self.right):
            out.update(v for v, _ in g.vertices)
        return out

    @property
    def x_vertices(self):
        return self.top.src_vertices

    @property
    def y_vertices(self):
        return self.top.rng_vertices

    @property
    def z_vertices(self):
        return self.bottom.src_vertices

    @property
    def w_vertices(self):
        return self.bottom.rng_vertices

    @property
    def is_a_type(self) -> bool:
        """True when top and bottom graphs coincide (summand-shaped connection)."""
        return self.top.structurally_equal(self.bottom)

    def _check_cell(self, cell: Cell) -> tuple[str, str, str, str]:
        l, t, r, b = cell
        for g, e, role in ((self.left, l, "left"), (self.top, t, "top"),
                           (self.right, r, "right"), (self.bottom, b, "bottom")):
            if not g.has_edge(e):
                raise ConnectionError(f"{role} edge {e!r} not in the {role} graph")
        x, z = self.left.source(l), self.left.range(l)
        if self.top.source(t) != x:
            raise ConnectionError(f"cell {cell}: left and top edges disagree at x")
        y = self.top.range(t)
        if self.right.source(r) != y:
            raise ConnectionError(f"cell {cell}: top and right edges disagree at y")
        if self.bottom.source(b) != z:
            raise ConnectionError(f"cell {cell}: left and bottom edges disagree at z")
        w = self.bottom.range(b)
        if self.right.range(r) != w:
            raise ConnectionError(f"cell {cell}: right and bottom edges disagree at w")
        return x, y, z, w

    def _check_dimension_matching(self) -> None:
        dl = self.left.adjacency()
        db = self.bottom.adjacency()
        dt = self.top.adjacency()
        dr = self.right.adjacency()
        # rows x, cols w; both counts are the sizes of the unitarity blocks
        via_z = dl @ db
        via_y = dt @ dr
        if via_z.shape != via_y.shape or not np.array_equal(via_z, via_y):
            raise ConnectionError("corner-pair dimension matching fails: "
                                  "left*bottom and top*right path counts differ")

    def corners(self, cell: Cell) -> tuple[str, str, str, str]:
        """Corner vertices (x, y, z, w) of a valid cell."""
        return self._check_cell(cell)

    # -- values ------------------------------------------------------------

    def value(self, cell) -> complex:
        cell = Cell(*cell)
        self._check_cell(cell)
        return self.values.get(cell, 0j)

    def cells(self):
        """Iterate over (cell, value) with nonzero value."""
        return self.values.items()

    def cell_matrix(self, t: str, b: str) -> np.ndarray:
        """Values over a fixed top and bottom edge, rows = right edges, cols = left edges."""
        key = (t, b)
        m = self._block_cache.get(key)
        if m is None:
            x, y = self.top.source(t), self.top.range(t)
            z, w = self.bottom.source(b), self.bottom.range(b)
            lefts = self.left.edges_between(x, z)
            rights = self.right.edges_between(y, w)
            m = np.zeros((len(rights), len(lefts)), dtype=complex)
            for j, l in enumerate(lefts):
                for i, r in enumerate(rights):
                    v = self.values.get(Cell(l, t, r, b))
                    if v is not None:
                        m[i, j] = v
            self._block_cache[key] = m
        return m

    def with_mu(self, mu: dict[str, float]) -> "Connection":
        """Same connection with replaced weights (values are untouched)."""
        return Connection(self.top, self.left, self.bottom, self.right, mu,
                          self.values, gamma=self.gamma, base=self.base, name=self.name)

    def scheme(self) -> SquareScheme:
        if self.gamma is None or self.base is None:
            raise ConnectionError("connection does not carry square-scheme data")
        return SquareScheme(self.top, self.left, self.bottom, self.right,
                            dict(self.mu), self.gamma[0], self.gamma[1], self.base)

    def __repr__(self):
        return (f"Connection({self.name!r}, {len(self.values)} cells, "
                f"|x|={len(self.x_vertices)}, |y|={len(self.y_vertices)})")


# -- unitarity ------------------------------------------------------------


@dataclass
class UnitarityReport:
    block_residuals: dict[tuple[str, str], float] = field(default_factory=dict)
    mismatched_blocks: list[tuple[str, str, int, int]] = field(default_factory=list)
    tol: float = DEFAULT_TOL

    @property
    def max_residual(self) -> float:
        return max(self.block_residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.mismatched_blocks and self.max_residual < self.tol


@dataclass
class BiunitarityReport:
    original: UnitarityReport
    primed: UnitarityReport

    @property
    def max_residual(self) -> float:
        return max(self.original.max_residual, self.primed.max_residual)

    @property
    def passed(self) -> bool:
        return self.original.passed and self.primed.passed


def check_unitarity(conn: Connection, tol: float = DEFAULT_TOL) -> UnitarityReport:
    """Unitarity of the corner-pair value matrices.

    For each pair (x, w) the matrix U has rows indexed by composable
    (top, right) edge pairs from x to w and columns by composable
    (left, bottom) pairs; both U U* - 1 and U* U - 1 residuals are recorded
    in max norm.  Non-square blocks are reported, not raised.
    """
    rep = UnitarityReport(tol=tol)
    for x in conn.x_vertices:
        for w in conn.w_vertices:
            rows = [(t, r)
                    for t in conn.top.edges_from(x)
                    for r in conn.right.edges_between(conn.top.range(t), w)]
            cols = [(l, b)
                    for l in conn.left.edges_from(x)
                    for b in conn.bottom.edges_between(conn.left.range(l), w)]
            if not rows and not cols:
                continue
            if len(rows) != len(cols):
                rep.mismatched_blocks.append((x, w, len(rows), len(cols)))
                continue
            u = np.zeros((len(rows), len(cols)), dtype=complex)
            for i, (t, r) in enumerate(rows):
                for j, (l, b) in enumerate(cols):
                    v = conn.values.get(Cell(l, t, r, b))
                    if v is not None:
                        u[i, j] = v
            eye = np.eye(len(rows))
            r1 = float(np.max(np.abs(u @ u.conj().T - eye)))
            r2 = float(np.max(np.abs(u.conj().T @ u - eye)))
            rep.block_residuals[(x, w)] = max(r1, r2)
    return rep


def check_biunitarity(conn: Connection, tol: float = DEFAULT_TOL) -> BiunitarityReport:
    """Unitarity of the connection and of its horizontal reflection."""
    return BiunitarityReport(
        original=check_unitarity(conn, tol),
        primed=check_unitarity(renormalize(conn, "prime"), tol),
    )


# -- renormalizations -------------------------------------------------------


def _mu_factor(conn: Connection, cell: Cell) -> float:
    x, y, z, w = conn.corners(cell)
    mu = conn.mu
    return math.sqrt((mu[x] * mu[w]) / (mu[y] * mu[z]))


def renormalize(conn: Connection, kind: str) -> Connection:
    """Reflected or rotated connections on the rewired graph square.

    ``prime``: horizontal reflection; horizontal edges reversed, vertical
    graphs swapped, values conjugated and rescaled by the weight-ratio
    factor.  ``bar``: vertical reflection; vertical edges reversed,
    horizontal graphs swapped, values conjugated with the same factor.
    ``bar_prime``: half-turn; all edges reversed, values kept as they are.
    ``prime`` and ``bar`` are involutive; ``bar_prime`` equals their
    composition up to relabeling.
    """
    if kind == "prime":
        top, left = conn.top.reverse(), conn.right
        bottom, right = conn.bottom.reverse(), conn.left
        values = {Cell(r, t, l, b): _mu_factor(conn, c) * v.conjugate()
                  for c, v in conn.cells() for (l, t, r, b) in (c,)}
        suffix = "'"
    elif kind == "bar":
        top, left = conn.bottom, conn.left.reverse()
        bottom, right = conn.top, conn.right.reverse()
        values = {Cell(l, b, r, t): _mu_factor(conn, c) * v.conjugate()
                  for c, v in conn.cells() for (l, t, r, b) in (c,)}
        suffix = "~"
    elif kind == "bar_prime":
        top, left = conn.bottom.reverse(), conn.right.reverse()
        bottom, right = conn.top.reverse(), conn.left.reverse()
        values = {Cell(r, b, l, t): v
                  for c, v in conn.cells() for (l, t, r, b) in (c,)}
        suffix = "~'"
    else:
        raise ValueError(f"unknown renormalization kind {kind!r}")
    return Connection(top, left, bottom, right, conn.mu, values,
                      gamma=conn.gamma, base=conn.base, name=conn.name + suffix)


def extended_value(conn: Connection, q: OrientedCellQuery) -> complex:
    """Cell value under the traversal conventions.

    Both horizontal edges traversed reversed reads the cell in mirror image
    and conjugates the value; both vertical edges reversed reads it flipped
    and multiplies by sqrt(mu_x mu_w / (mu_y mu_z)); the rules compose.
    Single-edge reversals are inconsistent and rejected.
    """
    if q.top_reversed != q.bottom_reversed or q.left_reversed != q.right_reversed:
        raise ConnectionError("inconsistent orientation flags: reversals come in pairs")
    v = conn.value(q.cell)
    if q.top_reversed:
        v = v.conjugate()
    if q.left_reversed:
        v *= _mu_factor(conn, Cell(*q.cell))
    return v


# -- products ---------------------------------------------------------------


def _composite_vertical(g1: LayeredGraph, g2: LayeredGraph, name: str) -> LayeredGraph:
    """Length-two composites of two vertical graphs, ids joined with '|'."""
    verts = {}
    for v, layer in g1.vertices:
        if g1.layer_of(v) == g1.source_layer:
            verts[v] = layer
    for v, layer in g2.vertices:
        if g2.layer_of(v) == g2.range_layer:
            if v in verts and verts[v] != layer:
                raise ConnectionError(f"vertex {v!r} appears on two layers in a product")
            verts[v] = layer
    edges = []
    for e1, s1, r1 in g1.edges:
        for e2 in g2.edges_from(r1):
            edges.append((f"{e1}|{e2}", s1, g2.range(e2)))
    return LayeredGraph(name, verts.items(), edges, g1.source_layer, g2.range_layer)


def vertical_product(top: Connection, bottom: Connection, name: str | None = None) -> Connection:
    """Stack two connections; vertical edges compose and the shared horizontal edge is summed."""
    if not top.bottom.structurally_equal(bottom.top):
        raise ConnectionError("vertical product needs top.bottom == bottom.top")
    left = _composite_vertical(top.left, bottom.left, f"({top.left.name}|{bottom.left.name})")
    right = _composite_vertical(top.right, bottom.right, f"({top.right.name}|{bottom.right.name})")
    mu = dict(bottom.mu)
    mu.update(top.mu)

    by_top: dict[str, list[tuple[Cell, complex]]] = {}
    for c2, v2 in bottom.cells():
        by_top.setdefault(c2.top, []).append((c2, v2))
    values: dict[Cell, complex] = {}
    for c1, v1 in top.cells():
        for c2, v2 in by_top.get(c1.bottom, ()):  # shared middle edge
            key = Cell(f"{c1.left}|{c2.left}", c1.top, f"{c1.right}|{c2.right}", c2.bottom)
            values[key] = values.get(key, 0j) + v1 * v2
    return Connection(top.top, left, bottom.bottom, right, mu, values,
                      name=name or f"({top.name}*{bottom.name})")


def horizontal_product(leftc: Connection, rightc: Connection, name: str | None = None) -> Connection:
    """Concatenate two connections side by side; the shared vertical edge is summed."""
    if not leftc.right.structurally_equal(rightc.left):
        raise ConnectionError("horizontal product needs leftc.right == rightc.left")
    top = _composite_vertical(leftc.top, rightc.top, f"({leftc.top.name}|{rightc.top.name})")
    bottom = _composite_vertical(leftc.bottom, rightc.bottom,
                                 f"({leftc.bottom.name}|{rightc.bottom.name})")
    mu = dict(rightc.mu)
    mu.update(leftc.mu)

    by_left: dict[str, list[tuple[Cell, complex]]] = {}
    for c2, v2 in rightc.cells():
        by_left.setdefault(c2.left, []).append((c2, v2))
    values: dict[Cell, complex] = {}
    for c1, v1 in leftc.cells():
        for c2, v2 in by_left.get(c1.right, ()):  # shared middle edge
            key = Cell(c1.left, f"{c1.top}|{c2.top}", c2.right, f"{c1.bottom}|{c2.bottom}")
            values[key] = values.get(key, 0j) + v1 * v2
    return Connection(top, leftc.left, bottom, rightc.right, mu, values,
                      name=name or f"({leftc.name}.{rightc.name})")


# -- builders ---------------------------------------------------------------

_DYNKIN_COXETER = {"A": lambda n: n + 1, "D": lambda n: 2 * n - 2,
                   "E": {6: 12, 7: 18, 8: 30}}


def _dynkin_edges(family: str, n: int) -> list[tuple[str, str]]:
    if family == "A":
        if n < 2:
            raise ValueError("A_n needs n >= 2")
        return [(str(i), str(i + 1)) for i in range(1, n)]
    if family == "D":
        if n < 4:
            raise ValueError("D_n needs n >= 4")
        chain = [(str(i), str(i + 1)) for i in range(1, n - 2)]
        return chain + [(str(n - 2), str(n - 1)), (str(n - 2), str(n))]
    if family == "E":
        if n not in (6, 7, 8):
            raise ValueError("E_n needs n in {6, 7, 8}")
        chain = [(str(i), str(i + 1)) for i in range(1, n - 1)]
        return chain + [("3", str(n))]
    raise ValueError(f"unknown Dynkin family {family!r}")


def _two_color(edges: list[tuple[str, str]]) -> dict[str, int]:
    adj: dict[str, set[str]] = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    color = {"1": 0}
    stack = ["1"]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in color:
                color[u] = 1 - color[v]
                stack.append(u)
    return color


def build_dynkin(diagram: str, base: str | None = None) -> Connection:
    """The standard bi-unitary connection on an A-D-E diagram.

    All four graphs are the diagram; the even two-coloring class (the one
    containing vertex "1") provides layers 0 and 2, the odd class layers
    1 and 3.  Cell values are delta(y, z) eps + sqrt(mu_y mu_z / mu_x mu_w)
    delta(x, w) conj(eps) with eps on the unit circle determined by the
    Coxeter number N, and gamma1 = gamma2 = 2 cos(pi / N).
    """
    d = diagram.replace("_", "").strip().upper()
    family, n = d[0], int(d[1:])
    edges = _dynkin_edges(family, n)
    coxeter = _DYNKIN_COXETER["E"][n] if family == "E" else _DYNKIN_COXETER[family](n)
    color = _two_color(edges)
    even = sorted(v for v, c in color.items() if c == 0)
    odd = sorted(v for v, c in color.items() if c == 1)
    base = str(base) if base is not None else even[0]
    if base not in even:
        raise ValueError(f"base vertex {base!r} is not in the even class {even}")

    # Perron-Frobenius data of the diagram, even side -> odd side
    diagram_graph = LayeredGraph(
        d, [(v, 0) for v in even] + [(v, 1) for v in odd],
        [(f"{a}-{b}", a, b) if color[a] == 0 else (f"{b}-{a}", b, a) for a, b in edges],
        0, 1)
    lam, weights = perron_frobenius(diagram_graph, base=base)

    def vid(layer: int, v: str) -> str:
        return f"{layer}:{v}"

    def graph(gname: str, src_layer: int, rng_layer: int, flip: bool) -> LayeredGraph:
        verts = [(vid(src_layer, v), src_layer) for v in (odd if flip else even)]
        verts += [(vid(rng_layer, v), rng_layer) for v in (even if flip else odd)]
        es = []
        for a, b in edges:
            u, o = (a, b) if color[a] == 0 else (b, a)
            if flip:
                es.append((f"{gname}:{o}-{u}", vid(src_layer, o), vid(rng_layer, u)))
            else:
                es.append((f"{gname}:{u}-{o}", vid(src_layer, u), vid(rng_layer, o)))
        return LayeredGraph(gname, verts, es, src_layer, rng_layer)

    g = graph("G", 0, 3, flip=False)
    h = graph("H", 0, 1, flip=False)
    g_prime = graph("Gp", 1, 2, flip=True)
    h_prime = graph("Hp", 3, 2, flip=True)

    mu = {}
    for layer, cls in ((0, even), (1, odd), (2, even), (3, odd)):
        for v in cls:
            mu[vid(layer, v)] = weights[v]

    eps = 1j * np.exp(1j * math.pi / (2 * coxeter))
    values = {}
    for t_e, t_s, t_r in g.edges:
        x, y = t_s.split(":", 1)[1], t_r.split(":", 1)[1]
        for l_e, l_s, l_r in h.edges:
            if l_s != t_s:
                continue
            z = l_r.split(":", 1)[1]
            for b_e, b_s, b_r in g_prime.edges:
                if b_s != l_r:
                    continue
                w = b_r.split(":", 1)[1]
                r_edges = h_prime.edges_between(t_r, b_r)
                if not r_edges:
                    continue
                (r_e,) = r_edges
                v = 0j
                if y == z:
                    v += eps
                if x == w:
                    v += math.sqrt(weights[y] * weights[z] / (weights[x] * weights[w])) * eps.conjugate()
                if v != 0:
                    values[(l_e, t_e, r_e, b_e)] = v
    return Connection(g, h, g_prime, h_prime, mu, values,
                      gamma=(lam, lam), base=vid(0, base), name=d)


def build_trivial(d: int) -> Connection:
    """One vertex per layer, d parallel edges per graph, delta-valued cells."""
    if d < 2:
        raise ValueError("the trivial connection needs d >= 2 (graphs must have more than one edge)")

    def graph(gname: str, sl: int, rl: int) -> LayeredGraph:
        return LayeredGraph(gname, [(f"{sl}:x", sl), (f"{rl}:x", rl)],
                            [(f"{gname}:{j}", f"{sl}:x", f"{rl}:x") for j in range(d)], sl, rl)

    g, h = graph("G", 0, 3), graph("H", 0, 1)
    g_prime, h_prime = graph("Gp", 1, 2), graph("Hp", 3, 2)
    mu = {f"{layer}:x": 1.0 for layer in range(4)}
    values = {}
    for i in range(d):       # top == bottom index
        for j in range(d):   # left == right index
            values[(f"H:{j}", f"G:{i}", f"Hp:{j}", f"Gp:{i}")] = 1.0
    return Connection(g, h, g_prime, h_prime, mu, values,
                      gamma=(float(d), float(d)), base="0:x", name=f"trivial{d}")


def build_cyclic_group(n: int) -> Connection:
    """Bicharacter connection of the cyclic group Z/n on the star K_{n,1}.

    Outer vertices carry the group elements on layers 0 and 2, the star
    centers sit on layers 1 and 3, and the cell determined by the pair
    (g, h) has value exp(2 pi i g h / n).  The reflected value matrix is the
    discrete Fourier matrix, so the checker certifies the convention.
    """
    if n < 2:
        raise ValueError("cyclic group connection needs n >= 2")

    def star(gname: str, sl: int, rl: int, out_is_src: bool) -> LayeredGraph:
        outs = [(f"{sl if out_is_src else rl}:{g}", sl if out_is_src else rl) for g in range(n)]
        center_layer = rl if out_is_src else sl
        verts = outs + [(f"{center_layer}:c", center_layer)]
        es = []
        for g in range(n):
            if out_is_src:
                es.append((f"{gname}:{g}", f"{sl}:{g}", f"{rl}:c"))
            else:
                es.append((f"{gname}:{g}", f"{sl}:c", f"{rl}:{g}"))
        return LayeredGraph(gname, verts, es, sl, rl)

    g = star("G", 0, 3, out_is_src=True)
    h = star("H", 0, 1, out_is_src=True)
    g_prime = star("Gp", 1, 2, out_is_src=False)
    h_prime = star("Hp", 3, 2, out_is_src=False)
    mu = {f"0:{g_}": 1.0 for g_ in range(n)} | {f"2:{g_}": 1.0 for g_ in range(n)}
    mu["1:c"] = mu["3:c"] = math.sqrt(n)
    values = {}
    for a in range(n):
        for b in range(n):
            values[(f"H:{a}", f"G:{a}", f"Hp:{b}", f"Gp:{b}")] = np.exp(2j * math.pi * a * b / n)
    return Connection(g, h, g_prime, h_prime, mu, values,
                      gamma=(math.sqrt(n), math.sqrt(n)), base="0:0", name=f"Z{n}")


def build_identity(horizontal: LayeredGraph, mu: dict[str, float]) -> Connection:
    """The unit connection over a horizontal graph: one vertical loop per vertex.

    Cells require top == bottom edge and have value one; this is exactly
    bi-unitary and acts as the unit for the vertical product.
    """
    sl, rl = horizontal.source_layer, horizontal.range_layer
    left = LayeredGraph(f"1[{horizontal.name}]L",
                        [(v, sl) for v in horizontal.src_vertices],
                        [(f"1:{v}", v, v) for v in horizontal.src_vertices], sl, sl)
    right = LayeredGraph(f"1[{horizontal.name}]R",
                         [(v, rl) for v in horizontal.rng_vertices],
                         [(f"1:{v}", v, v) for v in horizontal.rng_vertices], rl, rl)
    values = {}
    for e, s, r in horizontal.edges:
        values[(f"1:{s}", e, f"1:{r}", e)] = 1.0
    return Connection(horizontal, left, horizontal, right,
                      {v: mu[v] for v in set(horizontal.src_vertices) | set(horizontal.rng_vertices)},
                      values, name=f"1[{horizontal.name}]")


# -- interchange format ------------------------------------------------------

FORMAT_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def connection_to_document(conn: Connection) -> dict:
    """Serializable document for a connection; decimals carry 17 significant digits."""
    layers = sorted({(v, g.layer_of(v)) for g in (conn.top, conn.left, conn.bottom, conn.right)
                     for v, _ in g.vertices})
    doc = {
        "format": "connection-interchange",
        "version": FORMAT_VERSION,
        "layers": [{"id": v, "layer": layer} for v, layer in layers],
        "graphs": {},
        "mu": {v: _fmt(conn.mu[v]) for v, _ in layers},
        "values": [],
    }
    for role, g in (("top", conn.top), ("left", conn.left),
                    ("bottom", conn.bottom), ("right", conn.right)):
        doc["graphs"][role] = {
            "name": g.name,
            "source_layer": g.source_layer,
            "range_layer": g.range_layer,
            "edges": [{"id": e, "src": s, "dst": r} for e, s, r in g.edges],
        }
    if conn.gamma is not None:
        doc["gamma"] = [_fmt(conn.gamma[0]), _fmt(conn.gamma[1])]
    if conn.base is not None:
        doc["base"] = conn.base
    if conn.name:
        doc["name"] = conn.name
    for cell in sorted(conn.values):
        v = conn.values[cell]
        doc["values"].append({"left": cell.left, "top": cell.top,
                              "right": cell.right, "bottom": cell.bottom,
                              "re": _fmt(v.real), "im": _fmt(v.imag)})
    return doc


def _derive_mu(graphs: dict[str, LayeredGraph], base: str | None) -> dict[str, float]:
    """Glue per-graph Perron-Frobenius vectors into one weight function."""
    mu: dict[str, float] = {}
    for g in (graphs["left"], graphs["top"], graphs["right"], graphs["bottom"]):
        _, w = perron_frobenius(g, base=base if base in {v for v, _ in g.vertices} else None)
        shared = [v for v in w if v in mu]
        scale = mu[shared[0]] / w[shared[0]] if shared else 1.0
        for v, x in w.items():
            mu.setdefault(v, scale * x)
    return mu


def connection_from_document(doc: dict) -> Connection:
    if doc.get("format") != "connection-interchange":
        raise ConnectionError("not a connection interchange document")
    if doc.get("version") != FORMAT_VERSION:
        raise ConnectionError(f"unsupported format version {doc.get('version')!r}")
    layer_of = {rec["id"]: rec["layer"] for rec in doc["layers"]}
    graphs = {}
    for role in ("top", "left", "bottom", "right"):
        spec = doc["graphs"][role]
        vids = {spec["source_layer"], spec["range_layer"]}
        verts = [(v, l) for v, l in layer_of.items() if l in vids]
        graphs[role] = LayeredGraph(spec.get("name", role), verts,
                                    [(e["id"], e["src"], e["dst"]) for e in spec["edges"]],
                                    spec["source_layer"], spec["range_layer"])
    mu = {v: float(s) for v, s in doc.get("mu", {}).items()}
    if not mu:
        # weights are optional in the format: recover them from the graphs
        try:
            mu = _derive_mu(graphs, doc.get("base"))
        except GraphError as err:
            raise ConnectionError(f"document carries no weights and none can be "
                                  f"derived: {err}") from err
    values = {}
    for rec in doc["values"]:
        values[(rec["left"], rec["top"], rec["right"], rec["bottom"])] = \
            complex(float(rec["re"]), float(rec["im"]))
    gamma = None
    if "gamma" in doc:
        gamma = (float(doc["gamma"][0]), float(doc["gamma"][1]))
    return Connection(graphs["top"], graphs["left"], graphs["bottom"], graphs["right"],
                      mu, values, gamma=gamma, base=doc.get("base"), name=doc.get("name", ""))


def write_connection(conn: Connection, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(connection_to_document(conn), f, indent=1, sort_keys=True)
        f.write("\n")


def read_connection(path) -> Connection:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as err:
            raise ConnectionError(f"unreadable connection document: {err}") from err
    return connection_from_document(doc)
