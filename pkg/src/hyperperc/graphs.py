"""Small named graphs used by the exact-enumeration tools and tests.

Each constructor returns a Graph with straight-line coordinates, so the
planar ones can also be turned into a map via map_from_embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple


@dataclass(frozen=True)
class Graph:
    """Vertex count, edge list, optional straight-line coordinates and an
    optional boundary vertex set (None means every vertex is boundary)."""

    n: int
    edges: Tuple[Tuple[int, int], ...]
    pos: Optional[Tuple[Tuple[float, float], ...]] = None
    boundary: Optional[Tuple[int, ...]] = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def boundary_set(self) -> Tuple[int, ...]:
        if self.boundary is None:
            return tuple(range(self.n))
        return self.boundary


def k2() -> Graph:
    return Graph(2, ((0, 1),), ((0.0, 0.0), (1.0, 0.0)))


def triangle() -> Graph:
    return Graph(3, ((0, 1), (1, 2), (0, 2)),
                 ((0.0, 0.0), (1.0, 0.0), (0.5, 0.9)))


def cycle_n(n: int) -> Graph:
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    edges = tuple((i, (i + 1) % n) for i in range(n))
    pos = tuple((math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n))
                for i in range(n))
    return Graph(n, edges, pos)


def star_n(n: int) -> Graph:
    """Centre 0 joined to leaves 1..n."""
    if n < 1:
        raise ValueError(f"star needs n >= 1 leaves, got {n}")
    edges = tuple((0, i) for i in range(1, n + 1))
    pos = ((0.0, 0.0),) + tuple(
        (math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n))
        for i in range(n))
    return Graph(n + 1, edges, pos)


def path_n(n: int) -> Graph:
    if n < 2:
        raise ValueError(f"path needs n >= 2, got {n}")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)),
                 tuple((float(i), 0.0) for i in range(n)))


def grid(rows: int, cols: int) -> Graph:
    """rows x cols section of the square lattice."""
    if rows < 1 or cols < 1:
        raise ValueError("grid needs positive sides")

    def vid(r: int, c: int) -> int:
        return r * cols + c

    edges: List[Tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    pos = tuple((float(c), float(r)) for r in range(rows) for c in range(cols))
    rim = tuple(vid(r, c) for r in range(rows) for c in range(cols)
                if r in (0, rows - 1) or c in (0, cols - 1))
    return Graph(rows * cols, tuple(edges), pos, boundary=rim)


def two_triangles() -> Graph:
    """Two triangles sharing the edge (0, 1)."""
    return Graph(4, ((0, 1), (0, 2), (1, 2), (0, 3), (1, 3)),
                 ((0.0, 0.0), (1.0, 0.0), (0.5, 0.9), (0.5, -0.9)))


def to_map(g: Graph):
    """Planar map of an embedded graph, rotations read off the coordinates."""
    from .planar_map import map_from_embedding
    return map_from_embedding(g.pos, g.edges)
