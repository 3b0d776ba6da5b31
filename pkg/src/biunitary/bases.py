"""Loop and string bases over a horizontal graph, and fields of strings.

Strings of length k based at x are pairs of length-k paths from x with a
common endpoint; loops of length 2k based at x are closed alternating paths.
Folding a loop in half gives the bijection between the two bases that the
path-space and string-space operators are conjugate under.
"""

from __future__ import annotations

import math

import numpy as np

from .graphs import LayeredGraph
from .ladders import PathSet

__all__ = ["path_vertices", "StringBasis", "LoopBasis", "Field"]


def path_vertices(g: LayeredGraph, path: tuple[str, ...], start: str) -> tuple[str, ...]:
    """Vertex sequence visited by an alternating path."""
    verts = [start]
    for i, e in enumerate(path):
        verts.append(g.range(e) if i % 2 == 0 else g.source(e))
    return tuple(verts)


class StringBasis:
    """All strings of a fixed length, grouped by base vertex.

    Element order: base vertices sorted, then the two path tuples
    lexicographically.  ``p1_idx`` and ``p2_idx`` index into the length-k
    path list of the underlying :class:`PathSet`.
    """

    def __init__(self, g: LayeredGraph, k: int, pathset: PathSet | None = None):
        if k < 1:
            raise ValueError("string length must be >= 1")
        self.graph = g
        self.k = k
        self.pathset = pathset if pathset is not None else PathSet(g, k)
        if self.pathset.max_len < k:
            raise ValueError("path set too short for this basis")
        paths = self.pathset.paths[k]
        ends = self.pathset.ends[k]
        starts = [g.source(p[0]) for p in paths]

        by_start_end: dict[tuple[str, str], list[int]] = {}
        for i, p in enumerate(paths):
            by_start_end.setdefault((starts[i], ends[i]), []).append(i)
        self.block_paths = {key: np.asarray(v) for key, v in sorted(by_start_end.items())}

        p1, p2, xs, vs = [], [], [], []
        self.grids: dict[tuple[str, str], np.ndarray] = {}
        pos = 0
        self.block_slices: dict[str, slice] = {}
        for x in sorted({s for s, _ in self.block_paths}):
            x_start = pos
            for (s, v), idxs in self.block_paths.items():
                if s != x:
                    continue
                n = len(idxs)
                grid = np.arange(pos, pos + n * n).reshape(n, n)
                self.grids[(x, v)] = grid
                for i in idxs:
                    for j in idxs:
                        p1.append(i)
                        p2.append(j)
                        xs.append(x)
                        vs.append(v)
                pos += n * n
            self.block_slices[x] = slice(x_start, pos)
        self.p1_idx = np.asarray(p1)
        self.p2_idx = np.asarray(p2)
        self.base = tuple(xs)
        self.end = tuple(vs)
        self.dim = pos
        self.base_vertices = tuple(sorted(self.block_slices))

    def index_of(self, p1: tuple[str, ...], p2: tuple[str, ...]) -> int:
        i = self.pathset.index[self.k][p1]
        j = self.pathset.index[self.k][p2]
        hits = np.nonzero((self.p1_idx == i) & (self.p2_idx == j))[0]
        if len(hits) != 1:
            raise KeyError((p1, p2))
        return int(hits[0])

    def identity_vector(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.p1_idx == self.p2_idx] = 1.0
        return v


class LoopBasis:
    """Closed paths of length 2k, index-aligned with the string basis.

    Loop number i is the unfolding of string number i: first leg followed by
    the second leg reversed.  With this alignment the half-folding map is
    the diagonal matrix of ``fold_factor`` = sqrt(mu_start / mu_mid), and
    the loop blocks per base vertex coincide with the string blocks.
    """

    def __init__(self, strings: StringBasis, mu: dict[str, float]):
        self.strings = strings
        self.k = strings.k
        paths = strings.pathset.paths[strings.k]
        loops = []
        for s in range(strings.dim):
            first = paths[strings.p1_idx[s]]
            second = paths[strings.p2_idx[s]]
            loops.append(first + tuple(reversed(second)))
        self.loops = tuple(loops)
        self.base = strings.base
        self.mid = strings.end
        self.dim = strings.dim
        # per loop: index of the first half and of the reversed second half
        self.half1 = strings.p1_idx
        self.half2 = strings.p2_idx
        self.fold_factor = np.asarray(
            [math.sqrt(mu[self.base[i]] / mu[self.mid[i]]) for i in range(self.dim)])
        self.block_slices = strings.block_slices
        self._index = {loop: i for i, loop in enumerate(self.loops)}

    def index_of(self, loop: tuple[str, ...]) -> int:
        return self._index[loop]


class Field:
    """An element of the direct sum of the string algebras over base vertices."""

    def __init__(self, basis: StringBasis, vec: np.ndarray | None = None):
        self.basis = basis
        self.vec = np.zeros(basis.dim, dtype=complex) if vec is None else np.asarray(vec, dtype=complex)

    def copy(self) -> "Field":
        return Field(self.basis, self.vec.copy())

    def matrices(self) -> dict[tuple[str, str], np.ndarray]:
        return {key: self.vec[grid] for key, grid in self.basis.grids.items()}

    @classmethod
    def from_matrices(cls, basis: StringBasis, mats) -> "Field":
        vec = np.zeros(basis.dim, dtype=complex)
        for key, m in mats.items():
            vec[basis.grids[key]] = m
        return cls(basis, vec)

    @classmethod
    def identity(cls, basis: StringBasis) -> "Field":
        return cls(basis, basis.identity_vector())

    def __add__(self, other: "Field") -> "Field":
        return Field(self.basis, self.vec + other.vec)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.basis, self.vec - other.vec)

    def __rmul__(self, scalar) -> "Field":
        return Field(self.basis, scalar * self.vec)

    def __matmul__(self, other: "Field") -> "Field":
        """String-algebra product, blockwise matrix multiplication."""
        out = {}
        mine = self.matrices()
        theirs = other.matrices()
        for key, m in mine.items():
            out[key] = m @ theirs[key]
        return Field.from_matrices(self.basis, out)

    def star(self) -> "Field":
        out = {key: m.conj().T for key, m in self.matrices().items()}
        return Field.from_matrices(self.basis, out)

    def block(self, x: str) -> np.ndarray:
        return self.vec[self.basis.block_slices[x]]
