"""Combinatorial maps for finite balls of vertex-transitive planar tilings.

A map is stored as a set of darts (directed half-edges).  Dart ``d`` and its
reversal ``d ^ 1`` make up edge ``d >> 1``.  ``next_dart[d]`` is the dart that
follows ``d`` counterclockwise around its tail vertex, so vertices are orbits
of ``next_dart`` and faces are orbits of the face permutation
``next_inv[twin(d)]``.  With that convention a face lies on the left of each
of its darts, interior faces are traversed counterclockwise and the outer
face clockwise.

Face ids of a ball are assigned in construction order with the outer face
last; dual vertex ids reuse primal face ids and dual edge ids reuse primal
edge ids.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import MapMismatch, RadiusTooLarge, UnrealizableTiling

MAX_FACES = 500_000


class Geometry(Enum):
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class GeometryClass:
    """Outcome of classifying a vertex type by angle defect."""

    geometry: Geometry
    curvature_gap: Fraction

    def __str__(self) -> str:
        return f"{self.geometry.value} (gap {self.curvature_gap})"


@dataclass(frozen=True)
class TilingSpec:
    """Cyclic sequence of face sizes around a vertex, e.g. (7, 7, 7) for {7,3}.

    ``regular(p, q)`` builds the spec with q faces of size p at every vertex.
    """

    face_sizes: Tuple[int, ...]

    def __post_init__(self):
        if len(self.face_sizes) < 3:
            raise UnrealizableTiling(
                f"vertex degree {len(self.face_sizes)} < 3")
        for m in self.face_sizes:
            if not isinstance(m, int) or m < 3:
                raise UnrealizableTiling(f"face size {m!r} is not an int >= 3")

    @classmethod
    def regular(cls, p: int, q: int) -> "TilingSpec":
        if q < 3:
            raise UnrealizableTiling(f"vertex degree {q} < 3")
        return cls((p,) * q)

    @property
    def degree(self) -> int:
        return len(self.face_sizes)

    @property
    def is_regular(self) -> bool:
        return len(set(self.face_sizes)) == 1

    @property
    def p(self) -> int:
        if not self.is_regular:
            raise UnrealizableTiling(f"{self} is not of the form {{p,q}}")
        return self.face_sizes[0]

    @property
    def q(self) -> int:
        return self.degree

    def classify(self) -> GeometryClass:
        """Classify by the exact angle defect at a vertex.

        The gap is (d-2)/2 - sum(1/m_i); positive means hyperbolic, zero
        euclidean, negative spherical.  Exact rational arithmetic so ties
        are decided correctly.
        """
        gap = Fraction(self.degree - 2, 2)
        for m in self.face_sizes:
            gap -= Fraction(1, m)
        if gap > 0:
            geom = Geometry.HYPERBOLIC
        elif gap == 0:
            geom = Geometry.EUCLIDEAN
        else:
            geom = Geometry.SPHERICAL
        return GeometryClass(geom, gap)

    def check_realizable(self) -> None:
        """Raise UnrealizableTiling when no edge-to-edge tiling has this type.

        Rule enforced: an odd face must see equal face sizes on its two
        cyclic neighbours, otherwise colours cannot alternate around it.
        """
        d = self.degree
        for i, m in enumerate(self.face_sizes):
            if m % 2 == 1:
                before = self.face_sizes[(i - 1) % d]
                after = self.face_sizes[(i + 1) % d]
                if before != after:
                    raise UnrealizableTiling(
                        f"odd face {m} at position {i} has unequal "
                        f"neighbours {before} and {after}")

    def __str__(self) -> str:
        if self.is_regular:
            return f"{{{self.face_sizes[0]},{self.degree}}}"
        return "(" + ".".join(str(m) for m in self.face_sizes) + ")"


class CombinatorialMap:
    """Planar map given by dart arrays; see the module docstring for the
    orientation conventions."""

    def __init__(self, next_dart, vertex_of, face_of, n_vertices: int,
                 n_edges: int, n_faces: int, boundary_vertices=(),
                 outer_face: Optional[int] = None):
        self.next_dart = np.asarray(next_dart, dtype=np.int64)
        self.vertex_of = np.asarray(vertex_of, dtype=np.int64)
        self.face_of = np.asarray(face_of, dtype=np.int64)
        self.n_vertices = int(n_vertices)
        self.n_edges = int(n_edges)
        self.n_faces = int(n_faces)
        self.boundary_vertices = np.asarray(sorted(boundary_vertices),
                                            dtype=np.int64)
        self.outer_face = None if outer_face is None else int(outer_face)
        self._next_inv: Optional[np.ndarray] = None

    # -- basic accessors ---------------------------------------------------

    @property
    def n_darts(self) -> int:
        return 2 * self.n_edges

    @staticmethod
    def twin(d: int) -> int:
        return d ^ 1

    @staticmethod
    def edge_of(d: int) -> int:
        return d >> 1

    def head(self, d: int) -> int:
        return int(self.vertex_of[d ^ 1])

    @property
    def next_inv(self) -> np.ndarray:
        if self._next_inv is None:
            inv = np.empty_like(self.next_dart)
            inv[self.next_dart] = np.arange(self.n_darts, dtype=np.int64)
            self._next_inv = inv
        return self._next_inv

    def face_next(self, d: int) -> int:
        """Next dart of the face on the left of d."""
        return int(self.next_inv[d ^ 1])

    def face_prev(self, d: int) -> int:
        return int(self.next_dart[d]) ^ 1

    def vertex_darts(self, v: int) -> List[int]:
        """Out-darts of v in counterclockwise rotation order."""
        first = int(np.flatnonzero(self.vertex_of == v)[0])
        out = [first]
        d = int(self.next_dart[first])
        while d != first:
            out.append(d)
            d = int(self.next_dart[d])
        return out

    def face_darts(self, f: int) -> List[int]:
        """Darts of face f in walk order (ccw for interior faces)."""
        first = int(np.flatnonzero(self.face_of == f)[0])
        out = [first]
        d = self.face_next(first)
        while d != first:
            out.append(d)
            d = self.face_next(d)
        return out

    def face_vertices(self, f: int) -> List[int]:
        return [int(self.vertex_of[d]) for d in self.face_darts(f)]

    def degree(self, v: int) -> int:
        return int(np.count_nonzero(self.vertex_of == v))

    def edge_endpoints(self) -> np.ndarray:
        """(E, 2) array; row e holds the tails of darts 2e and 2e+1."""
        return self.vertex_of.reshape(-1, 2)

    def interior_faces(self) -> np.ndarray:
        faces = np.arange(self.n_faces, dtype=np.int64)
        if self.outer_face is None:
            return faces
        return faces[faces != self.outer_face]

    def boundary_edge_mask(self) -> np.ndarray:
        """Bool per edge: True when one side is the outer face."""
        if self.outer_face is None:
            return np.zeros(self.n_edges, dtype=bool)
        sides = self.face_of.reshape(-1, 2)
        return (sides[:, 0] == self.outer_face) | (sides[:, 1] == self.outer_face)

    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = True
        return mask

    # -- integrity ---------------------------------------------------------

    def validate(self) -> None:
        """Check the dart structure end to end; raise MapMismatch on failure."""
        n = self.n_darts
        if n != 2 * self.n_edges or n == 0:
            raise MapMismatch("dart count must be 2 * n_edges and positive")
        for name, arr in (("next_dart", self.next_dart),
                          ("vertex_of", self.vertex_of),
                          ("face_of", self.face_of)):
            if arr.shape != (n,):
                raise MapMismatch(f"{name} has shape {arr.shape}, want ({n},)")
        if not np.array_equal(np.sort(self.next_dart), np.arange(n)):
            raise MapMismatch("next_dart is not a permutation of the darts")
        if not np.array_equal(self.vertex_of[self.next_dart],
                              self.vertex_of):
            raise MapMismatch("next_dart moved a dart to another vertex")
        fn = self.next_inv[np.arange(n) ^ 1]
        if not np.array_equal(self.face_of[fn], self.face_of):
            raise MapMismatch("face permutation changed face label")
        for name, arr, count in (("vertex", self.vertex_of, self.n_vertices),
                                 ("face", self.face_of, self.n_faces)):
            seen = np.unique(arr)
            if seen.size != count or seen[0] != 0 or seen[-1] != count - 1:
                raise MapMismatch(f"{name} ids are not exactly 0..{count - 1}")
        if self._orbit_count(self.next_dart) != self.n_vertices:
            raise MapMismatch("vertex count does not match next orbits")
        if self._orbit_count(fn) != self.n_faces:
            raise MapMismatch("face count does not match face orbits")
        if self.n_vertices - self.n_edges + self.n_faces != 2:
            raise MapMismatch("Euler characteristic is not 2")
        self._check_connected()
        if self.outer_face is not None:
            walk = {int(self.vertex_of[d])
                    for d in np.flatnonzero(self.face_of == self.outer_face)}
            if walk != set(int(v) for v in self.boundary_vertices):
                raise MapMismatch("boundary vertices disagree with outer walk")

    @staticmethod
    def _orbit_count(perm: np.ndarray) -> int:
        seen = np.zeros(perm.size, dtype=bool)
        orbits = 0
        for d in range(perm.size):
            if seen[d]:
                continue
            orbits += 1
            x = d
            while not seen[x]:
                seen[x] = True
                x = int(perm[x])
        return orbits

    def _check_connected(self) -> None:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        ends = self.edge_endpoints()
        ones = np.ones(len(ends), dtype=np.int8)
        adj = coo_matrix((ones, (ends[:, 0], ends[:, 1])),
                         shape=(self.n_vertices, self.n_vertices))
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            raise MapMismatch(f"map has {ncomp} components, want 1")

    def equals(self, other: "CombinatorialMap") -> bool:
        return (self.n_vertices == other.n_vertices
                and self.n_edges == other.n_edges
                and self.n_faces == other.n_faces
                and self.outer_face == other.outer_face
                and np.array_equal(self.next_dart, other.next_dart)
                and np.array_equal(self.vertex_of, other.vertex_of)
                and np.array_equal(self.face_of, other.face_of)
                and np.array_equal(self.boundary_vertices,
                                   other.boundary_vertices))

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        """Plain text form; twin(d) = d^1 and edge(d) = d>>1 are implicit."""
        lines = [f"map {self.n_vertices} {self.n_edges} {self.n_faces}",
                 f"outer {self.outer_face if self.outer_face is not None else '-'}"]
        for d in range(self.n_darts):
            lines.append(f"dart {d} next {self.next_dart[d]} "
                         f"vertex {self.vertex_of[d]} face {self.face_of[d]}")
        lines.append("boundary " + " ".join(str(v)
                                            for v in self.boundary_vertices))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CombinatorialMap":
        header = None
        outer: Optional[int] = None
        nxt = {}
        vof = {}
        fof = {}
        boundary: List[int] = []
        for raw in text.splitlines():
            parts = raw.split()
            if not parts:
                continue
            if parts[0] == "map":
                header = (int(parts[1]), int(parts[2]), int(parts[3]))
            elif parts[0] == "outer":
                outer = None if parts[1] == "-" else int(parts[1])
            elif parts[0] == "dart":
                if (len(parts) != 8 or parts[2] != "next"
                        or parts[4] != "vertex" or parts[6] != "face"):
                    raise MapMismatch(f"bad dart line: {raw!r}")
                d = int(parts[1])
                nxt[d] = int(parts[3])
                vof[d] = int(parts[5])
                fof[d] = int(parts[7])
            elif parts[0] == "boundary":
                boundary = [int(x) for x in parts[1:]]
            else:
                raise MapMismatch(f"unknown line: {raw!r}")
        if header is None:
            raise MapMismatch("missing map header line")
        nv, ne, nf = header
        if sorted(nxt) != list(range(2 * ne)):
            raise MapMismatch("dart ids are not exactly 0..2E-1")
        order = range(2 * ne)
        m = cls(next_dart=[nxt[d] for d in order],
                vertex_of=[vof[d] for d in order],
                face_of=[fof[d] for d in order],
                n_vertices=nv, n_edges=ne, n_faces=nf,
                boundary_vertices=boundary, outer_face=outer)
        m.validate()
        return m


# -- construction of tiling balls -------------------------------------------


class _Builder:
    """Grows a disk one face at a time, keeping per-vertex rotation lists.

    Rotation lists are linear: the gap facing the outer region sits between
    the last and first entries.  The boundary walk therefore leaves v along
    rot[v][-1] and arrives along the reversal of rot[v][0].
    """

    def __init__(self, max_faces: int):
        self.max_faces = max_faces
        self.tails: List[int] = []
        self.rot: List[List[int]] = []
        self.face_count: List[int] = []
        self.face_reps: List[int] = []

    def new_vertex(self) -> int:
        self.rot.append([])
        self.face_count.append(0)
        return len(self.rot) - 1

    def new_edge(self, u: int, v: int) -> int:
        d = len(self.tails)
        self.tails.extend((u, v))
        return d

    def head(self, d: int) -> int:
        return self.tails[d ^ 1]

    def _walk_next(self, d: int) -> int:
        # Face step along the outer side of boundary dart d.
        r = self.rot[self.head(d)]
        return r[(r.index(d ^ 1) - 1) % len(r)]

    def _walk_prev(self, d: int) -> int:
        r = self.rot[self.tails[d]]
        return r[(r.index(d) + 1) % len(r)] ^ 1

    def seed_face(self, p: int) -> None:
        verts = [self.new_vertex() for _ in range(p)]
        cycle = [self.new_edge(verts[i], verts[(i + 1) % p])
                 for i in range(p)]
        for i, v in enumerate(verts):
            self.rot[v] = [cycle[i], cycle[(i - 1) % p] ^ 1]
            self.face_count[v] = 1
        self.face_reps.append(cycle[0])

    def attach_face(self, v: int, p: int, q: int) -> None:
        """Glue one new p-gon into the gap at v, extending the glue path
        through every neighbouring vertex that is one face short of q."""
        if len(self.face_reps) >= self.max_faces:
            raise RadiusTooLarge(f"more than {self.max_faces} faces")
        path = [self.rot[v][-1]]
        while self.face_count[self.tails[path[0]]] == q - 1:
            if len(path) >= p - 1:
                raise MapMismatch("glue path swallowed the whole face")
            path.insert(0, self._walk_prev(path[0]))
        while self.face_count[self.head(path[-1])] == q - 1:
            if len(path) >= p - 1:
                raise MapMismatch("glue path swallowed the whole face")
            path.append(self._walk_next(path[-1]))
        g = len(path)
        touched = [self.tails[path[0]]] + [self.head(d) for d in path]
        if len(set(touched)) != g + 1:
            raise MapMismatch("glue path revisits a vertex")
        for w in touched[1:-1]:
            if self.face_count[w] != q - 1:
                raise MapMismatch("interior glue vertex not one face short")

        u0, ug = touched[0], touched[-1]
        chain = [ug] + [self.new_vertex() for _ in range(p - g - 1)] + [u0]
        new = [self.new_edge(chain[i], chain[i + 1])
               for i in range(p - g)]
        r = self.rot[ug]
        r.insert(r.index(path[-1] ^ 1), new[0])
        for i, w in enumerate(chain[1:-1]):
            self.rot[w] = [new[i + 1], new[i] ^ 1]
        r = self.rot[u0]
        r.insert(r.index(path[0]) + 1, new[-1] ^ 1)
        for w in touched:
            self.face_count[w] += 1
        for w in chain[1:-1]:
            self.face_count[w] = 1
        self.face_reps.append(path[0])

    def finish(self) -> CombinatorialMap:
        n_darts = len(self.tails)
        nxt = np.empty(n_darts, dtype=np.int64)
        for r in self.rot:
            for i, d in enumerate(r):
                nxt[d] = r[(i + 1) % len(r)]
        nxt_inv = np.empty_like(nxt)
        nxt_inv[nxt] = np.arange(n_darts)

        face_of = np.full(n_darts, -1, dtype=np.int64)
        for fid, rep in enumerate(self.face_reps):
            d = rep
            while face_of[d] == -1:
                face_of[d] = fid
                d = int(nxt_inv[d ^ 1])
            if d != rep:
                raise MapMismatch("face orbit does not close on its label")
        outer_id = len(self.face_reps)
        rest = np.flatnonzero(face_of == -1)
        if rest.size:
            d = int(rest[0])
            size = 0
            while face_of[d] == -1:
                face_of[d] = outer_id
                d = int(nxt_inv[d ^ 1])
                size += 1
            if size != rest.size:
                raise MapMismatch("outer darts split into several faces")

        q_full = max(len(r) for r in self.rot)
        boundary = [v for v, c in enumerate(self.face_count) if c < q_full]
        m = CombinatorialMap(
            next_dart=nxt, vertex_of=self.tails, face_of=face_of,
            n_vertices=len(self.rot), n_edges=n_darts // 2,
            n_faces=outer_id + (1 if rest.size else 0),
            boundary_vertices=boundary,
            outer_face=outer_id if rest.size else None)
        m.validate()
        return m


def classify(spec: TilingSpec) -> GeometryClass:
    """Exact rational curvature classification of a vertex type."""
    return spec.classify()


@dataclass(frozen=True)
class BallSpec:
    """A tiling together with the face-distance radius of the ball."""

    tiling: TilingSpec
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"radius {self.radius} < 0")


def build_ball(spec, radius: Optional[int] = None,
               max_faces: int = MAX_FACES) -> CombinatorialMap:
    """Ball of the regular tiling {p,q} out to face distance ``radius``.

    Accepts a BallSpec, or a TilingSpec with the radius passed separately.
    Faces are adjacent when they share a vertex; layer k completes every
    vertex present at the end of layer k-1 to its full q faces.  Raises
    UnrealizableTiling for vertex types this builder does not handle and
    RadiusTooLarge when the face cap is hit.
    """
    if isinstance(spec, BallSpec):
        if radius is not None:
            raise ValueError("radius is part of the BallSpec")
        spec, radius = spec.tiling, spec.radius
    if radius is None or radius < 0:
        raise ValueError(f"radius {radius} must be a nonnegative integer")
    spec.check_realizable()
    if not spec.is_regular:
        raise UnrealizableTiling(
            f"{spec} is realizable but only {{p,q}} balls can be built here")
    geom = spec.classify()
    if geom.geometry is Geometry.SPHERICAL:
        raise UnrealizableTiling(
            f"{spec} closes up into a sphere; it has no infinite ball")
    p, q = spec.p, spec.q
    b = _Builder(max_faces)
    b.seed_face(p)
    for _ in range(radius):
        known = len(b.rot)
        for v in range(known):
            while b.face_count[v] < q:
                b.attach_face(v, p, q)
    return b.finish()


# -- constructors from other encodings ---------------------------------------


def _build_from_rotations(neighbors: Sequence[Sequence[int]]):
    """Map from ccw neighbour lists of a simple graph.

    Returns (map_without_outer, edge_index) where edge_index maps the
    sorted endpoint pair to the edge id.
    """
    edge_index: Dict[Tuple[int, int], int] = {}
    for u, around in enumerate(neighbors):
        if len(set(around)) != len(around):
            raise MapMismatch(f"repeated neighbour at vertex {u}")
        for v in around:
            if v == u:
                raise MapMismatch(f"loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key not in edge_index:
                edge_index[key] = len(edge_index)
    for (u, v) in list(edge_index):
        if u not in neighbors[v] or v not in neighbors[u]:
            raise MapMismatch(f"edge {(u, v)} is not symmetric")

    def dart_id(u: int, v: int) -> int:
        key = (min(u, v), max(u, v))
        return 2 * edge_index[key] + (0 if u < v else 1)

    n_darts = 2 * len(edge_index)
    nxt = np.empty(n_darts, dtype=np.int64)
    vof = np.empty(n_darts, dtype=np.int64)
    for u, around in enumerate(neighbors):
        darts = [dart_id(u, v) for v in around]
        for i, d in enumerate(darts):
            vof[d] = u
            nxt[d] = darts[(i + 1) % len(darts)]
    nxt_inv = np.empty_like(nxt)
    nxt_inv[nxt] = np.arange(n_darts)

    face_of = np.full(n_darts, -1, dtype=np.int64)
    nf = 0
    for d0 in range(n_darts):
        if face_of[d0] != -1:
            continue
        d = d0
        while face_of[d] == -1:
            face_of[d] = nf
            d = int(nxt_inv[d ^ 1])
        nf += 1
    m = CombinatorialMap(next_dart=nxt, vertex_of=vof, face_of=face_of,
                         n_vertices=len(neighbors),
                         n_edges=len(edge_index), n_faces=nf)
    return m, edge_index


def _with_outer(m: CombinatorialMap, outer_dart: int) -> CombinatorialMap:
    """Relabel faces so the face left of outer_dart gets the last id."""
    old = int(m.face_of[outer_dart])
    perm = np.arange(m.n_faces, dtype=np.int64)
    perm[old + 1:] -= 1
    perm[old] = m.n_faces - 1
    boundary = np.unique(m.vertex_of[m.face_of == old])
    return CombinatorialMap(next_dart=m.next_dart, vertex_of=m.vertex_of,
                            face_of=perm[m.face_of],
                            n_vertices=m.n_vertices, n_edges=m.n_edges,
                            n_faces=m.n_faces,
                            boundary_vertices=boundary,
                            outer_face=m.n_faces - 1)


def map_from_rotation_lists(neighbors: Sequence[Sequence[int]],
                            outer_dart: Optional[int] = None) -> CombinatorialMap:
    """Build a map from ccw neighbour lists; faces come out of the rotation
    system.  Pass ``outer_dart`` to name the outer face (it gets the last
    face id and defines the boundary vertices)."""
    m, _ = _build_from_rotations(neighbors)
    if outer_dart is not None:
        m = _with_outer(m, outer_dart)
    m.validate()
    return m


def map_from_embedding(points: Sequence[Tuple[float, float]],
                       edges: Iterable[Tuple[int, int]]) -> CombinatorialMap:
    """Map of a straight-line plane graph; the outer face is recognised by
    its negative signed area."""
    pts = np.asarray(points, dtype=float)
    nbrs: List[List[int]] = [[] for _ in range(len(pts))]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    for u in range(len(pts)):
        nbrs[u].sort(key=lambda v: math.atan2(pts[v][1] - pts[u][1],
                                              pts[v][0] - pts[u][0]))
    m, _ = _build_from_rotations(nbrs)
    outer_dart = None
    for f in range(m.n_faces):
        walk = m.face_darts(f)
        area = 0.0
        for d in walk:
            a = pts[m.vertex_of[d]]
            b = pts[m.head(d)]
            area += a[0] * b[1] - b[0] * a[1]
        if area < 0:
            if outer_dart is not None:
                raise MapMismatch("two faces walk clockwise; embedding bad")
            outer_dart = walk[0]
    if outer_dart is None:
        raise MapMismatch("no clockwise face; embedding bad")
    m = _with_outer(m, outer_dart)
    m.validate()
    return m


# -- dual map ----------------------------------------------------------------


def dual(m: CombinatorialMap) -> CombinatorialMap:
    """Dual map on the same darts: dual vertices are primal faces (same ids,
    including the outer-face vertex), dual edge ids equal primal edge ids.

    The dual of the dual is the original map with every dart replaced by its
    twin.  For a ball, the outer-face vertex is recorded as the single
    boundary vertex of the dual and the dual has no outer face.
    """
    n = m.n_darts
    ids = np.arange(n, dtype=np.int64)
    dual_next = m.next_inv[ids ^ 1]
    dm = CombinatorialMap(
        next_dart=dual_next,
        vertex_of=m.face_of.copy(),
        face_of=m.vertex_of[ids ^ 1],
        n_vertices=m.n_faces, n_edges=m.n_edges, n_faces=m.n_vertices,
        boundary_vertices=() if m.outer_face is None else (m.outer_face,),
        outer_face=None)
    dm.validate()
    return dm


# -- superposition -----------------------------------------------------------


@dataclass
class Superposition:
    """Joint map of a ball and its interior dual.

    Vertices of ``bar``: primal vertices keep their ids, interior face f
    becomes V + f, the midpoint of edge e becomes V + F_int + e.  Every
    primal edge contributes its two halves; a dual edge contributes halves
    only when both sides are interior faces, so midpoints of boundary edges
    have degree 2.
    """

    base: CombinatorialMap
    bar: CombinatorialMap
    bar_dual: CombinatorialMap
    midpoint_of_edge: np.ndarray
    primal_half_edges: np.ndarray   # (E, 2) bar edge ids: tail half, head half
    dual_half_edges: np.ndarray     # (E, 2) bar edge ids or -1 on the boundary
    strict_interior_face: np.ndarray  # bool per bar face

    @property
    def n_face_vertices(self) -> int:
        return self.base.n_faces - 1


def superpose(m: CombinatorialMap) -> Superposition:
    """Build the superposition of a ball with its interior dual."""
    if m.outer_face is None:
        raise MapMismatch("superposition needs a map with an outer face")
    V, E = m.n_vertices, m.n_edges
    n_int = m.n_faces - 1
    if m.outer_face != n_int:
        raise MapMismatch("outer face must carry the last face id")

    def face_vertex(f: int) -> int:
        return V + f

    def midpoint(e: int) -> int:
        return V + n_int + e

    nbrs: List[List[int]] = [[] for _ in range(V + n_int + E)]
    boundary_edge = m.boundary_edge_mask()
    for v in range(V):
        nbrs[v] = [midpoint(d >> 1) for d in m.vertex_darts(v)]
    for f in range(n_int):
        around = [midpoint(d >> 1) for d in m.face_darts(f)
                  if not boundary_edge[d >> 1]]
        if not around:
            raise MapMismatch(
                f"face {f} touches no interior edge; ball too small")
        nbrs[face_vertex(f)] = around
    for e in range(E):
        d = 2 * e
        around = [m.head(d)]
        if not boundary_edge[e]:
            around.append(face_vertex(int(m.face_of[d])))
        around.append(int(m.vertex_of[d]))
        if not boundary_edge[e]:
            around.append(face_vertex(int(m.face_of[d ^ 1])))
        nbrs[midpoint(e)] = around

    bar_raw, edge_index = _build_from_rotations(nbrs)
    outer_primal_dart = int(np.flatnonzero(m.face_of == m.outer_face)[0])
    u = int(m.vertex_of[outer_primal_dart])
    me = midpoint(outer_primal_dart >> 1)
    key = (min(u, me), max(u, me))
    bar_outer_dart = 2 * edge_index[key] + (0 if u < me else 1)
    bar = _with_outer(bar_raw, bar_outer_dart)
    bar.validate()

    def bar_edge(a: int, b: int) -> int:
        return edge_index[(min(a, b), max(a, b))]

    primal_half = np.empty((E, 2), dtype=np.int64)
    dual_half = np.full((E, 2), -1, dtype=np.int64)
    for e in range(E):
        d = 2 * e
        primal_half[e, 0] = bar_edge(int(m.vertex_of[d]), midpoint(e))
        primal_half[e, 1] = bar_edge(m.head(d), midpoint(e))
        if not boundary_edge[e]:
            dual_half[e, 0] = bar_edge(face_vertex(int(m.face_of[d])),
                                       midpoint(e))
            dual_half[e, 1] = bar_edge(face_vertex(int(m.face_of[d ^ 1])),
                                       midpoint(e))
    if bar.n_edges != 2 * E + 2 * int(np.count_nonzero(~boundary_edge)):
        raise MapMismatch("superposition edge count is off")

    bar_boundary = np.zeros(V + n_int + E, dtype=bool)
    bar_boundary[m.boundary_vertices] = True
    for e in np.flatnonzero(boundary_edge):
        bar_boundary[midpoint(int(e))] = True
    strict = np.zeros(bar.n_faces, dtype=bool)
    for f in range(bar.n_faces):
        if f == bar.outer_face:
            continue
        strict[f] = not any(bar_boundary[int(bar.vertex_of[d])]
                            for d in bar.face_darts(f))

    return Superposition(
        base=m, bar=bar, bar_dual=dual(bar),
        midpoint_of_edge=np.array([midpoint(e) for e in range(E)],
                                  dtype=np.int64),
        primal_half_edges=primal_half, dual_half_edges=dual_half,
        strict_interior_face=strict)


# -- geometric realisation -----------------------------------------------


def _reflect(a: complex, b: complex, pts: np.ndarray,
             hyperbolic: bool) -> np.ndarray:
    """Reflect pts across the (geodesic) line through a and b."""
    cross = a.real * b.imag - a.imag * b.real
    if not hyperbolic or abs(cross) < 1e-12:
        u = (b - a) / abs(b - a)
        return a + u * u * np.conj(pts - a)
    # circle orthogonal to the unit circle through a and b
    mat = 2.0 * np.array([[a.real, a.imag], [b.real, b.imag]])
    rhs = np.array([abs(a) ** 2 + 1.0, abs(b) ** 2 + 1.0])
    cx, cy = np.linalg.solve(mat, rhs)
    c = complex(cx, cy)
    r2 = abs(c) ** 2 - 1.0
    if r2 <= 0:
        raise MapMismatch("reflection circle does not cut the disk")
    return c + r2 / np.conj(pts - c)


def embed(m: CombinatorialMap, q: Optional[int] = None) -> np.ndarray:
    """Vertex coordinates for a {p,q} ball: Poincare disk when hyperbolic,
    plane when euclidean.  Face 0 is centred at the origin and faces are
    laid out by reflecting across shared edges.

    q is inferred as the largest vertex degree unless given (a radius-0
    ball has no interior vertex, so pass it there).
    """
    sizes = {len(m.face_darts(f)) for f in m.interior_faces()}
    if len(sizes) != 1:
        raise MapMismatch(f"face sizes {sizes} are not a single p")
    p = sizes.pop()
    if q is None:
        q = max(m.degree(v) for v in range(m.n_vertices))
    if q < 3:
        raise MapMismatch("cannot infer q from degrees; pass q explicitly")
    ratio = math.cos(math.pi / q) / math.sin(math.pi / p)
    hyperbolic = ratio > 1.0 + 1e-12
    if hyperbolic:
        # Circumradius of a {p,q} face: cosh rho = cot(pi/p) cot(pi/q),
        # the hypotenuse of the right triangle with angles pi/p, pi/q.
        rho = math.acosh(1.0 / (math.tan(math.pi / p) * math.tan(math.pi / q)))
        r = math.tanh(0.5 * rho)
    else:
        r = 1.0

    coords = np.full(m.n_vertices, np.nan + 0j, dtype=complex)
    start = m.face_darts(0)
    for k, d in enumerate(start):
        coords[m.vertex_of[d]] = r * cmath.exp(2j * math.pi * k / p)
    seen = {0}
    queue = deque([0])
    while queue:
        f = queue.popleft()
        walk = m.face_darts(f)
        tails = [int(m.vertex_of[d]) for d in walk]
        for k0, d in enumerate(walk):
            f2 = int(m.face_of[d ^ 1])
            if f2 in seen or f2 == m.outer_face:
                continue
            seen.add(f2)
            queue.append(f2)
            a, b = coords[m.vertex_of[d]], coords[m.head(d)]
            mirrored = _reflect(complex(a), complex(b),
                                coords[tails], hyperbolic)
            other = m.face_darts(f2)
            shift = other.index(d ^ 1)
            # The mirror sends the i-th corner after d in f to the corner
            # (1 - i) after the reversed dart in f2.
            for i in range(p):
                t = int(m.vertex_of[other[(shift + (1 - i)) % p]])
                if np.isnan(coords[t].real):
                    coords[t] = mirrored[(k0 + i) % p]
    if np.isnan(coords.real).any():
        raise MapMismatch("embedding did not reach every vertex")
    return np.column_stack([coords.real, coords.imag])
