"""Site and bond configurations on a map, and their cluster structure.

States and bond variables are uint8 arrays of 0/1.  Cluster labels are
canonical: components are numbered by their smallest vertex, in increasing
order, so equal configurations always produce identical labelings.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np

from .errors import MapMismatch, StructureViolation
from .planar_map import CombinatorialMap


class SpinBoundary(Enum):
    FREE = "free"
    PLUS = "plus"
    MINUS = "minus"


class BondBoundary(Enum):
    FREE = "free"
    WIRED = "wired"


def _check_binary(arr: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise StructureViolation(f"{what} must be 0/1 valued")
    return arr


@dataclass
class SiteConfig:
    """0/1 state per vertex; for spins, 1 encodes +1 and 0 encodes -1."""

    map: CombinatorialMap
    states: np.ndarray
    boundary: SpinBoundary = SpinBoundary.FREE

    def __post_init__(self):
        self.states = _check_binary(self.states, "site states")
        if self.states.shape != (self.map.n_vertices,):
            raise MapMismatch("state vector does not match vertex count")

    def spins(self) -> np.ndarray:
        """States as +-1 integers."""
        return self.states.astype(np.int8) * 2 - 1

    def copy(self) -> "SiteConfig":
        return SiteConfig(self.map, self.states.copy(), self.boundary)

    def to_text(self) -> str:
        digits = "".join(str(int(b)) for b in self.states)
        return f"sites {len(self.states)} {self.boundary.value}\n{digits}\n"

    @classmethod
    def from_text(cls, m: CombinatorialMap, text: str) -> "SiteConfig":
        fields = text.split()
        if len(fields) != 4 or fields[0] != "sites":
            raise MapMismatch("not a site config text block")
        n, bc, bits = int(fields[1]), fields[2], fields[3]
        if n != m.n_vertices or len(bits) != n:
            raise MapMismatch("site config text does not match the map")
        states = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        return cls(m, states.copy(), SpinBoundary(bc))


@dataclass
class BondConfig:
    """0/1 open indicator per edge."""

    map: CombinatorialMap
    open_edges: np.ndarray
    boundary: BondBoundary = BondBoundary.FREE

    def __post_init__(self):
        self.open_edges = _check_binary(self.open_edges, "bond states")
        if self.open_edges.shape != (self.map.n_edges,):
            raise MapMismatch("bond vector does not match edge count")

    def copy(self) -> "BondConfig":
        return BondConfig(self.map, self.open_edges.copy(), self.boundary)

    def to_text(self) -> str:
        digits = "".join(str(int(b)) for b in self.open_edges)
        return (f"bonds {len(self.open_edges)} {self.boundary.value}\n"
                f"{digits}\n")

    @classmethod
    def from_text(cls, m: CombinatorialMap, text: str) -> "BondConfig":
        fields = text.split()
        if len(fields) != 4 or fields[0] != "bonds":
            raise MapMismatch("not a bond config text block")
        n, bc, bits = int(fields[1]), fields[2], fields[3]
        if n != m.n_edges or len(bits) != n:
            raise MapMismatch("bond config text does not match the map")
        open_edges = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        return cls(m, open_edges.copy(), BondBoundary(bc))


class DisjointSet:
    """Union-find with the smallest element as the root of every set."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = int(self.parent[root])
        while self.parent[x] != root:
            self.parent[x], x = root, int(self.parent[x])
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra

    def roots(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(len(self.parent))],
                        dtype=np.int64)


@dataclass
class ClusterLabeling:
    """Canonical component labels plus per-cluster summaries.

    labels[v] is -1 for vertices outside the support (site case only);
    sizes[c] and touches_boundary[c] are indexed by label.
    """

    labels: np.ndarray
    n_clusters: int
    sizes: np.ndarray
    touches_boundary: np.ndarray

    def size_histogram(self) -> Dict[int, int]:
        vals, counts = np.unique(self.sizes, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    def boundary_cluster_count(self) -> int:
        return int(self.touches_boundary.sum())


def _labeling_from_roots(roots: np.ndarray, support: np.ndarray,
                         boundary_mask: np.ndarray) -> ClusterLabeling:
    labels = np.full(roots.shape, -1, dtype=np.int64)
    idx = np.flatnonzero(support)
    if idx.size == 0:
        return ClusterLabeling(labels, 0, np.zeros(0, dtype=np.int64),
                               np.zeros(0, dtype=bool))
    # roots are minima of their component, so sorting them by vertex id
    # gives the canonical order
    uniq, inv = np.unique(roots[idx], return_inverse=True)
    labels[idx] = inv
    sizes = np.bincount(inv, minlength=uniq.size).astype(np.int64)
    touches = np.zeros(uniq.size, dtype=bool)
    on_boundary = idx[boundary_mask[idx]]
    touches[labels[on_boundary]] = True
    return ClusterLabeling(labels, int(uniq.size), sizes, touches)


def site_clusters(cfg: SiteConfig, value: int = 1) -> ClusterLabeling:
    """Components of the subgraph induced by vertices in the given state."""
    if value not in (0, 1):
        raise StructureViolation(f"site state {value} is not 0/1")
    m = cfg.map
    support = cfg.states == value
    ds = DisjointSet(m.n_vertices)
    ends = m.edge_endpoints()
    both = support[ends[:, 0]] & support[ends[:, 1]]
    for u, v in ends[both]:
        ds.union(int(u), int(v))
    return _labeling_from_roots(ds.roots(), support, m.boundary_vertex_mask())


def bond_clusters(cfg: BondConfig) -> ClusterLabeling:
    """Components of the open subgraph, over all vertices.

    Isolated vertices count as clusters of size one.  Under wired boundary
    conditions all boundary vertices are merged before any edge is read, so
    they always form a single cluster.
    """
    m = cfg.map
    ds = DisjointSet(m.n_vertices)
    if cfg.boundary is BondBoundary.WIRED:
        bv = m.boundary_vertices
        for v in bv[1:]:
            ds.union(int(bv[0]), int(v))
    ends = m.edge_endpoints()
    for e in np.flatnonzero(cfg.open_edges):
        ds.union(int(ends[e, 0]), int(ends[e, 1]))
    support = np.ones(m.n_vertices, dtype=bool)
    return _labeling_from_roots(ds.roots(), support, m.boundary_vertex_mask())


def count_open_clusters(cfg: BondConfig) -> int:
    """k(xi): open components including isolated vertices (and with the
    boundary glued when wired)."""
    return bond_clusters(cfg).n_clusters


@dataclass(frozen=True)
class ClusterReport:
    """Per-state cluster summary of one configuration.

    sizes lists state-0 clusters first, then state-1, each block in
    canonical label order, so equal configurations serialize identically.
    For bond configurations everything lives under state 1 (the open
    subgraph) and sizes counts vertices per open component.  proxy_triple
    is (s0, s1, k_plus) when contour data has been attached.
    """

    cluster_count_by_state: Dict[int, int]
    sizes: list
    boundary_touching_by_state: Dict[int, int]
    proxy_triple: Optional[tuple] = None

    def to_json_dict(self) -> dict:
        return {
            "cluster_count_by_state":
                {str(k): v for k, v in self.cluster_count_by_state.items()},
            "sizes": list(self.sizes),
            "boundary_touching_by_state":
                {str(k): v for k, v in
                 self.boundary_touching_by_state.items()},
            "proxy_triple": (None if self.proxy_triple is None
                             else list(self.proxy_triple)),
        }


def label_site_clusters(cfg: SiteConfig) -> ClusterReport:
    """Maximal monochromatic connected vertex sets, both states at once."""
    lab0 = site_clusters(cfg, 0)
    lab1 = site_clusters(cfg, 1)
    return ClusterReport(
        cluster_count_by_state={0: lab0.n_clusters, 1: lab1.n_clusters},
        sizes=[int(s) for s in lab0.sizes] + [int(s) for s in lab1.sizes],
        boundary_touching_by_state={0: lab0.boundary_cluster_count(),
                                    1: lab1.boundary_cluster_count()})


def label_bond_clusters(cfg: BondConfig) -> ClusterReport:
    """Open components, isolated vertices included; wired pre-merges the
    boundary into one component."""
    lab = bond_clusters(cfg)
    return ClusterReport(
        cluster_count_by_state={0: 0, 1: lab.n_clusters},
        sizes=[int(s) for s in lab.sizes],
        boundary_touching_by_state={0: 0,
                                    1: lab.boundary_cluster_count()})
