"""Network topologies: the Wyner line and the hexagonal torus.

User labels follow two conventions.  On the line, users are the integers
``1..K``.  On the torus, a cell is either an axial pair ``(a, b)`` or its
row-major index ``b * W + a``.  Internally every topology keeps a 0-based
adjacency list so schedulers can work on flat numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

WYNER = "wyner"
HEX = "hex"

# axial offsets of the six interfering cells
HEX_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    kind: str
    K: int
    W: int | None = None
    H: int | None = None
    adjacency: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    # -- label conversion -------------------------------------------------
    def index(self, user) -> int:
        """0-based internal index of a user label."""
        if self.kind == WYNER:
            k = int(user)
            if not 1 <= k <= self.K:
                raise TopologyError(f"user {user} outside 1..{self.K}")
            return k - 1
        if isinstance(user, tuple):
            a, b = user
            return (b % self.H) * self.W + (a % self.W)
        idx = int(user)
        if not 0 <= idx < self.K:
            raise TopologyError(f"cell index {user} outside 0..{self.K - 1}")
        return idx

    def label(self, idx: int):
        if self.kind == WYNER:
            return idx + 1
        return idx

    def cell(self, idx: int) -> tuple[int, int]:
        if self.kind != HEX:
            raise TopologyError("axial coordinates only exist on the hex torus")
        return idx % self.W, idx // self.W

    # -- graph queries ----------------------------------------------------
    def neighbors(self, user) -> frozenset:
        """Interference (= cooperation) neighbors, in the same label form as ``user``."""
        nbrs = self.adjacency[self.index(user)]
        if self.kind == HEX and isinstance(user, tuple):
            return frozenset(self.cell(j) for j in nbrs)
        return frozenset(self.label(j) for j in nbrs)

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as label pairs with the smaller label first."""
        out = []
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    out.append((self.label(i), self.label(j)))
        return out

    def edge_array(self) -> np.ndarray:
        """Undirected edges as an (E, 2) array of 0-based indices."""
        pairs = [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]
        return np.array(pairs, dtype=np.int64).reshape(-1, 2)

    def neighbor_matrix(self) -> np.ndarray:
        """(K, deg) index array for regular graphs (the hex torus)."""
        return np.array(self.adjacency, dtype=np.int64)

    def to_json(self) -> dict:
        if self.kind == WYNER:
            header = "users are labelled 1..K along the line"
            dims = {"K": self.K}
        else:
            header = "cells are row-major 0-based indices b*W+a of axial pairs (a,b)"
            dims = {"W": self.W, "H": self.H, "K": self.K}
        return {"kind": self.kind, "indexing": header, **dims, "edges": [list(e) for e in self.edges()]}


def build_wyner(K: int) -> Topology:
    """Open line of ``K`` cells; user ``k`` interferes with ``k-1`` and ``k+1``."""
    if int(K) != K or K < 1:
        raise TopologyError(f"K must be a positive integer, got {K}")
    K = int(K)
    adj = tuple(
        tuple(j for j in (i - 1, i + 1) if 0 <= j < K)
        for i in range(K)
    )
    return Topology(WYNER, K, adjacency=adj)


def build_hex(W: int, H: int) -> Topology:
    """Hexagonal lattice of ``W x H`` cells wrapped into a torus."""
    if int(W) != W or int(H) != H:
        raise TopologyError("torus dimensions must be integers")
    W, H = int(W), int(H)
    if W < 3 or H < 3:
        raise TopologyError(f"torus needs W, H >= 3, got {W}x{H}")
    if (W * H) % 3:
        raise TopologyError(f"W*H = {W * H} is not divisible by 3")
    adj = []
    for b in range(H):
        for a in range(W):
            adj.append(tuple(((b + db) % H) * W + (a + da) % W for da, db in HEX_OFFSETS))
    return Topology(HEX, W * H, W, H, tuple(adj))


def _axial_distance(da: int, db: int) -> int:
    if da * db >= 0:
        return max(abs(da), abs(db))
    return abs(da) + abs(db)


def hop_distance(topo: Topology, j, k) -> int:
    """Number of hops between two users in the cooperation graph."""
    if topo.kind == WYNER:
        return abs(topo.index(j) - topo.index(k))
    a1, b1 = topo.cell(topo.index(j))
    a2, b2 = topo.cell(topo.index(k))
    da0 = (a2 - a1) % topo.W
    db0 = (b2 - b1) % topo.H
    # the torus is the lattice modulo (W, H); check neighbouring translates
    return min(
        _axial_distance(da0 + m * topo.W, db0 + n * topo.H)
        for m in (-1, 0, 1)
        for n in (-1, 0, 1)
    )


@dataclass(frozen=True)
class HexPartition:
    """Three interference-free classes of the torus, labels 1..3 per cell index."""

    color: np.ndarray

    def color_of(self, topo: Topology, cell) -> int:
        return int(self.color[topo.index(cell)])

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.color == c)


def hex_color_partition(topo: Topology) -> HexPartition:
    """Color cell ``(a, b)`` with ``(a + b) mod 3``, labelled 1..3.

    The coloring is proper only when both torus dimensions are multiples
    of 3; otherwise the wrap-around joins cells of equal color, so such
    tori are rejected here.
    """
    if topo.kind != HEX:
        raise TopologyError("coloring is defined for the hex torus only")
    if topo.W % 3 or topo.H % 3:
        raise TopologyError(
            f"{topo.W}x{topo.H} torus: both dimensions must be multiples of 3 for a proper coloring"
        )
    idx = np.arange(topo.K)
    a, b = idx % topo.W, idx // topo.W
    color = ((a + b) % 3 + 1).astype(np.int8)
    color.setflags(write=False)
    return HexPartition(color)


def users(topo: Topology) -> Iterable:
    return (topo.label(i) for i in range(topo.K))
