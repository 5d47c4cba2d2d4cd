"""Derived bond configurations of a site configuration and their contours.

A site configuration omega on the ball induces four bond configurations:
phi on G (open on agreement edges), phi_plus on the dual (open where phi is
closed), bar_phi on the superposition graph (each half-edge copies the edge
it is half of) and the interface eta on the superposition dual (open exactly
where bar_phi is closed on the crossed edge).  Around every interior edge
the four quadrilateral sides split two/two between the primal and dual
halves, and complementarity forces the eta-degree of every fully interior
quadrilateral to be exactly 2, which is why eta decomposes into cycles and
boundary-to-boundary paths.

Contours are maximal connected sets of open edges; isolated vertices carry
no contour.  Counts that feed the infinite-cluster proxies live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .clusters import (BondConfig, ClusterReport, SiteConfig, site_clusters)
from .errors import MapMismatch, StructureViolation
from .planar_map import CombinatorialMap, Superposition, dual, superpose

CYCLE = "Cycle"
BOUNDARY_PATH = "BoundaryPath"
OTHER = "Other"


@dataclass(frozen=True)
class ContourReport:
    """Contour census of one bond configuration.

    component_shapes is ordered by the smallest vertex id in each contour;
    boundary_touching counts contours containing at least one vertex of the
    boundary zone of the graph they live on (whatever its classification).
    """

    contour_count: int
    boundary_touching: int
    component_shapes: List[str]

    def to_json_dict(self) -> dict:
        return {"contour_count": self.contour_count,
                "boundary_touching": self.boundary_touching,
                "component_shapes": list(self.component_shapes)}


@dataclass
class DerivedConfigs:
    """The four bond configurations induced by one site configuration."""

    phi: BondConfig
    phi_plus: BondConfig
    bar_phi: BondConfig
    eta: BondConfig
    maps: Superposition


class _Tables:
    """Precomputed index tables for one base map, cached on the map."""

    def __init__(self, m: CombinatorialMap):
        self.map = m
        self.sup = superpose(m)
        self.dual_map = dual(m)
        self.ends = m.edge_endpoints()
        self.interior_edge = ~m.boundary_edge_mask()
        bvm = m.boundary_vertex_mask()

        # edges around each interior face, concatenated, for parity sums
        ids: List[int] = []
        ptr = [0]
        for f in range(m.n_faces - (1 if m.outer_face is not None else 0)):
            ids.extend(CombinatorialMap.edge_of(d) for d in m.face_darts(f))
            ptr.append(len(ids))
        self.face_edge_ids = np.array(ids, dtype=np.int64)
        self.face_edge_ptr = np.array(ptr, dtype=np.int64)

        # faces incident to a boundary vertex (the dual boundary zone)
        n_int_faces = len(self.face_edge_ptr) - 1
        self.face_touches_boundary = np.zeros(n_int_faces, dtype=bool)
        for f in range(n_int_faces):
            if any(bvm[v] for v in m.face_vertices(f)):
                self.face_touches_boundary[f] = True

        # dual edges between interior faces, with their face endpoints
        self.dual_int_edges = np.flatnonzero(self.interior_edge)
        fo = m.face_of
        self.dual_int_ends = np.column_stack(
            (fo[2 * self.dual_int_edges], fo[2 * self.dual_int_edges + 1]))

        bar = self.sup.bar
        strict = self.sup.strict_interior_face
        self.strict_ids = np.flatnonzero(strict)
        quad = np.empty((len(self.strict_ids), 4), dtype=np.int64)
        for i, f in enumerate(self.strict_ids):
            sides = [CombinatorialMap.edge_of(d) for d in bar.face_darts(f)]
            if len(sides) != 4:
                raise StructureViolation(
                    f"interior superposition face {f} is not a quadrilateral")
            quad[i] = sides
        self.quad_edges = quad

        bd = self.sup.bar_dual
        self.bar_dual_ends = bd.edge_endpoints()
        # zone for eta: quadrilaterals meeting the ball boundary, plus the
        # outer face vertex of the superposition dual
        self.eta_zone = ~strict.copy()

    def half_edge_ids(self):
        sup = self.sup
        prim = sup.primal_half_edges
        du = sup.dual_half_edges
        return prim, du


def tables_for(m: CombinatorialMap) -> _Tables:
    cached = getattr(m, "_contour_tables", None)
    if cached is None:
        cached = _Tables(m)
        m._contour_tables = cached
    return cached


def derive(omega: SiteConfig,
           maps: Optional[Superposition] = None) -> DerivedConfigs:
    """Build phi, phi_plus, bar_phi and eta from a site configuration.

    phi_plus is the edgewise complement of phi under the identity edge
    bijection e <-> e+ (so complementarity holds on every edge; only the
    interior portion is structural).  All four configs have free boundary.
    """
    t = tables_for(omega.map)
    if maps is not None and maps.base is not omega.map:
        raise MapMismatch("superposition was built from a different map")
    m = omega.map
    states = omega.states
    phi = (states[t.ends[:, 0]] == states[t.ends[:, 1]]).astype(np.uint8)
    phi_plus = (1 - phi).astype(np.uint8)

    prim, du = t.half_edge_ids()
    bar_open = np.zeros(t.sup.bar.n_edges, dtype=np.uint8)
    bar_open[prim[:, 0]] = phi
    bar_open[prim[:, 1]] = phi
    ii = t.interior_edge
    bar_open[du[ii, 0]] = phi_plus[ii]
    bar_open[du[ii, 1]] = phi_plus[ii]
    eta = (1 - bar_open).astype(np.uint8)

    return DerivedConfigs(
        phi=BondConfig(m, phi),
        phi_plus=BondConfig(t.dual_map, phi_plus),
        bar_phi=BondConfig(t.sup.bar, bar_open),
        eta=BondConfig(t.sup.bar_dual, eta),
        maps=t.sup)


def face_parity_check(omega: SiteConfig) -> bool:
    """True iff every interior face bounds an even number of edges whose
    endpoints disagree."""
    t = tables_for(omega.map)
    states = omega.states
    disagree = (states[t.ends[:, 0]] != states[t.ends[:, 1]]).astype(np.int64)
    sums = np.add.reduceat(disagree[t.face_edge_ids], t.face_edge_ptr[:-1])
    return bool((sums % 2 == 0).all())


def _contour_census(n_nodes: int, ends: np.ndarray, open_mask: np.ndarray,
                    zone: np.ndarray) -> Tuple[ContourReport, np.ndarray,
                                               np.ndarray]:
    """Classify the components of the open subgraph given by open_mask.

    Isolated vertices are not contours.  Returns the report plus the
    per-node component labels (-1 off the contours) and per-contour sizes
    in edges.  A contour is a Cycle when all its vertices have degree 2,
    BoundaryPath when it meets the zone, Other otherwise.
    """
    eu = ends[open_mask, 0]
    ev = ends[open_mask, 1]
    deg = np.bincount(eu, minlength=n_nodes) + np.bincount(ev,
                                                           minlength=n_nodes)
    if len(eu) == 0:
        return (ContourReport(0, 0, []),
                np.full(n_nodes, -1, dtype=np.int64),
                np.zeros(0, dtype=np.int64))
    adj = coo_matrix((np.ones(len(eu), dtype=np.int8), (eu, ev)),
                     shape=(n_nodes, n_nodes))
    _, raw = connected_components(adj, directed=False)
    support = deg > 0
    idx = np.flatnonzero(support)
    # canonical labels: components ordered by smallest member id
    uniq, inv = np.unique(raw[idx], return_inverse=True)
    k = len(uniq)
    labels = np.full(n_nodes, -1, dtype=np.int64)
    labels[idx] = inv

    min_deg = np.full(k, np.iinfo(np.int64).max, dtype=np.int64)
    max_deg = np.zeros(k, dtype=np.int64)
    np.minimum.at(min_deg, inv, deg[idx])
    np.maximum.at(max_deg, inv, deg[idx])
    touches = np.zeros(k, dtype=bool)
    np.logical_or.at(touches, inv, zone[idx])
    edge_counts = np.bincount(labels[eu], minlength=k)

    shapes = []
    for c in range(k):
        if min_deg[c] == 2 and max_deg[c] == 2:
            shapes.append(CYCLE)
        elif touches[c]:
            shapes.append(BOUNDARY_PATH)
        else:
            shapes.append(OTHER)
    report = ContourReport(contour_count=k,
                           boundary_touching=int(touches.sum()),
                           component_shapes=shapes)
    return report, labels, edge_counts


def eta_structure_check(cfgs: DerivedConfigs) -> ContourReport:
    """Assert the interface structure and classify its contours.

    Every fully interior quadrilateral must have eta-degree exactly 2;
    a violation raises StructureViolation naming the vertex.  Contours
    through the boundary zone come back as BoundaryPath (truncations of
    the bi-infinite paths), the rest must be cycles.
    """
    t = tables_for(cfgs.maps.base)
    eta = cfgs.eta.open_edges
    deg = eta[t.quad_edges].sum(axis=1)
    bad = np.flatnonzero(deg != 2)
    if bad.size:
        v = int(t.strict_ids[bad[0]])
        raise StructureViolation(
            f"eta degree {int(deg[bad[0]])} != 2 at interior vertex {v}")
    report, _, _ = _contour_census(
        cfgs.maps.bar_dual.n_vertices, t.bar_dual_ends,
        eta.astype(bool), _eta_zone(t))
    return report


def _eta_zone(t: _Tables) -> np.ndarray:
    # one flag per superposition face = per vertex of its dual; the outer
    # face is never strict, so the zone already covers it
    return t.eta_zone


def eta_contours(cfgs: DerivedConfigs) -> Tuple[ContourReport, np.ndarray,
                                                np.ndarray]:
    """eta census with the per-node labels and per-contour edge counts."""
    t = tables_for(cfgs.maps.base)
    return _contour_census(cfgs.maps.bar_dual.n_vertices, t.bar_dual_ends,
                           cfgs.eta.open_edges.astype(bool), _eta_zone(t))


def phi_contours(omega: SiteConfig) -> ContourReport:
    """Contours of the agreement configuration phi on G; the boundary zone
    is the set of boundary vertices."""
    t = tables_for(omega.map)
    states = omega.states
    open_mask = states[t.ends[:, 0]] == states[t.ends[:, 1]]
    report, _, _ = _contour_census(omega.map.n_vertices, t.ends, open_mask,
                                   omega.map.boundary_vertex_mask())
    return report


def phi_plus_contours(omega: SiteConfig) -> ContourReport:
    """Contours of phi_plus restricted to edges between interior faces.

    The outer face carries no contour vertex (its incident dual edges are
    excluded); a contour touches the boundary when it contains a face
    incident to a boundary vertex of G.
    """
    t = tables_for(omega.map)
    states = omega.states
    e = t.dual_int_edges
    open_mask = states[t.ends[e, 0]] != states[t.ends[e, 1]]
    report, _, _ = _contour_census(len(t.face_touches_boundary),
                                   t.dual_int_ends, open_mask,
                                   t.face_touches_boundary)
    return report


def proxy_triple(omega: SiteConfig) -> Tuple[int, int, int]:
    """(s0, s1, k_plus): boundary-touching 0-clusters, 1-clusters and
    phi_plus-contours, the finite-ball stand-ins for the infinite counts."""
    s0 = site_clusters(omega, 0).boundary_cluster_count()
    s1 = site_clusters(omega, 1).boundary_cluster_count()
    k_plus = phi_plus_contours(omega).boundary_touching
    return s0, s1, int(k_plus)


def attach_proxy(report: ClusterReport, omega: SiteConfig) -> ClusterReport:
    """Copy of a cluster report with the proxy triple filled in."""
    return ClusterReport(
        cluster_count_by_state=dict(report.cluster_count_by_state),
        sizes=list(report.sizes),
        boundary_touching_by_state=dict(report.boundary_touching_by_state),
        proxy_triple=proxy_triple(omega))


def boundary_singleton_count(omega: SiteConfig) -> int:
    """Boundary vertices whose every neighbor holds the opposite state.

    These are the degenerate clusters: they count in the s-proxies but
    carry no phi-contour, so they are excluded from the k = s0 + s1
    identity and reported separately.
    """
    t = tables_for(omega.map)
    states = omega.states
    agree = states[t.ends[:, 0]] == states[t.ends[:, 1]]
    deg_same = np.bincount(t.ends[agree].ravel(),
                           minlength=omega.map.n_vertices)
    return int((omega.map.boundary_vertex_mask() & (deg_same == 0)).sum())


def phi_contour_identity(omega: SiteConfig) -> Tuple[int, int, int]:
    """(boundary-touching phi-contours, s0 + s1, degenerate singletons).

    The first two agree exactly whenever the third is zero: every cluster
    of two or more vertices carries exactly one contour of agreement
    edges, and singleton clusters carry none.
    """
    rep = phi_contours(omega)
    s0, s1, _ = proxy_triple(omega)
    return rep.boundary_touching, s0 + s1, boundary_singleton_count(omega)
