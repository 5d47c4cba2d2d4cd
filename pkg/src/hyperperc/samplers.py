"""Monte Carlo dynamics and closed-form coupling thresholds.

Scalar sweeps mutate a config in place and are written for clarity; the
*_chain_batch functions run many independent chains in numpy arrays and are
what the large goodness-of-fit checks use.  Both routes are cross-checked
against each other in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .clusters import (BondBoundary, BondConfig, SiteConfig, SpinBoundary,
                       bond_clusters)
from .errors import DomainError, TooLarge
from .planar_map import CombinatorialMap


@dataclass(frozen=True)
class RngSpec:
    """Reproducible generator id.

    (seed, stream_id) is entropy-mixed through numpy's SeedSequence into a
    PCG64 state, so distinct stream_ids yield independent-quality streams
    and identical pairs replay the exact sample sequence.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((self.seed, self.stream_id))))

    def child(self, k: int) -> "RngSpec":
        return RngSpec(self.seed, self.stream_id + k)


@dataclass(frozen=True)
class CouplingParams:
    """The knobs the domination bounds talk about.

    J is the Ising coupling, p the FK edge weight (when both are given they
    must satisfy p = 1 - e^{-2J}), q the cluster weight, d the degree of the
    transitive tiling, K the coupling of the dual XOR pair and h the height
    parameter the threshold equations solve for.  Only J and d are required.
    """

    J: float
    d: int
    p: Optional[float] = None
    q: float = 2.0
    K: Optional[float] = None
    h: Optional[float] = None

    def __post_init__(self):
        if self.J < 0:
            raise DomainError(f"coupling J={self.J} < 0")
        if self.d < 1:
            raise DomainError(f"degree d={self.d} < 1")
        if self.q < 1:
            raise DomainError(f"cluster weight q={self.q} < 1")
        if self.h is not None and self.h < 0:
            raise DomainError(f"height h={self.h} < 0")
        if self.p is not None:
            if not 0.0 <= self.p <= 1.0:
                raise DomainError(f"edge weight p={self.p} outside [0, 1]")
            linked = 1.0 - math.exp(-2.0 * self.J)
            if abs(self.p - linked) > 1e-12:
                raise DomainError(
                    f"p={self.p} violates p = 1 - e^(-2J) = {linked}")

    @classmethod
    def from_coupling(cls, J: float, d: int, q: float = 2.0
                      ) -> "CouplingParams":
        return cls(J=J, d=d, p=1.0 - math.exp(-2.0 * J), q=q)

    @classmethod
    def from_edge_weight(cls, p: float, d: int, q: float = 2.0
                         ) -> "CouplingParams":
        if not 0.0 <= p < 1.0:
            raise DomainError(f"edge weight p={p} outside [0, 1)")
        return cls(J=-0.5 * math.log(1.0 - p), d=d, p=p, q=q)


def _adjacency(m: CombinatorialMap) -> Tuple[np.ndarray, np.ndarray]:
    """CSR neighbour lists, cached on the map."""
    cached = getattr(m, "_adjacency", None)
    if cached is None:
        counts = np.bincount(m.vertex_of, minlength=m.n_vertices)
        indptr = np.zeros(m.n_vertices + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        order = np.argsort(m.vertex_of, kind="stable")
        indices = m.vertex_of[order ^ 1]
        cached = (indptr, indices)
        m._adjacency = cached
    return cached


def apply_spin_boundary(cfg: SiteConfig) -> None:
    """Clamp boundary vertices to the value the boundary condition fixes."""
    if cfg.boundary is SpinBoundary.PLUS:
        cfg.states[cfg.map.boundary_vertices] = 1
    elif cfg.boundary is SpinBoundary.MINUS:
        cfg.states[cfg.map.boundary_vertices] = 0


# -- direct sampling ---------------------------------------------------------


def sample_bernoulli(m: CombinatorialMap, p: float,
                     rng: np.random.Generator) -> SiteConfig:
    """i.i.d. vertex states, open with probability p, free boundary."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"site density {p} outside [0, 1]")
    states = (rng.random(m.n_vertices) < p).astype(np.uint8)
    return SiteConfig(m, states)


def sample_bernoulli_bonds(m: CombinatorialMap, p: float,
                           rng: np.random.Generator,
                           boundary: BondBoundary = BondBoundary.FREE,
                           ) -> BondConfig:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"bond density {p} outside [0, 1]")
    open_edges = (rng.random(m.n_edges) < p).astype(np.uint8)
    return BondConfig(m, open_edges, boundary)


# -- single-chain sweeps -----------------------------------------------------


def glauber_sweep(cfg: SiteConfig, coupling: float,
                  rng: np.random.Generator,
                  boundary: Optional[SpinBoundary] = None) -> SiteConfig:
    """One deterministic-scan heat-bath sweep of the Ising measure at the
    given coupling, in place.  Clamped boundary vertices are skipped.
    Passing boundary overrides the condition stored on cfg."""
    if coupling < 0:
        raise DomainError(f"coupling {coupling} < 0")
    if boundary is not None:
        cfg.boundary = boundary
    m = cfg.map
    indptr, indices = _adjacency(m)
    apply_spin_boundary(cfg)
    skip = np.zeros(m.n_vertices, dtype=bool)
    if cfg.boundary is not SpinBoundary.FREE:
        skip[m.boundary_vertices] = True
    states = cfg.states
    for v in range(m.n_vertices):
        if skip[v]:
            continue
        nb = indices[indptr[v]:indptr[v + 1]]
        field = 2 * int(states[nb].sum()) - len(nb)
        p_plus = 1.0 / (1.0 + math.exp(-2.0 * coupling * field))
        states[v] = 1 if rng.random() < p_plus else 0
    return cfg


def fk_heatbath_sweep(cfg: BondConfig, p: float, q: float,
                      rng: np.random.Generator,
                      boundary: Optional[BondBoundary] = None) -> BondConfig:
    """One deterministic-scan single-bond heat-bath sweep of the
    random-cluster measure, in place.  The bond opens with probability p
    when its endpoints are joined off the bond, else p / (p + q(1-p));
    wired glueing is part of the connectivity."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"bond density {p} outside (0, 1)")
    if q < 1:
        raise DomainError(f"cluster weight {q} must be >= 1")
    if boundary is not None:
        cfg.boundary = boundary
    m = cfg.map
    ends = m.edge_endpoints()
    for e in range(m.n_edges):
        cfg.open_edges[e] = 0
        lab = bond_clusters(cfg)
        joined = lab.labels[ends[e, 0]] == lab.labels[ends[e, 1]]
        prob = p if joined else p / (p + q * (1.0 - p))
        cfg.open_edges[e] = 1 if rng.random() < prob else 0
    return cfg


def edwards_sokal_color(cfg: BondConfig,
                        rng: np.random.Generator) -> SiteConfig:
    """Colour the open clusters of a q=2 bond configuration with independent
    uniform spins.  Under wiring the glued boundary cluster draws a single
    spin like any other, so the output is the symmetric mixture of the two
    clamped measures."""
    lab = bond_clusters(cfg)
    coin = (rng.random(lab.n_clusters) < 0.5).astype(np.uint8)
    return SiteConfig(cfg.map, coin[lab.labels])


def swendsen_wang_sweep(cfg: SiteConfig, coupling: float,
                        rng: np.random.Generator,
                        boundary: Optional[SpinBoundary] = None) -> SiteConfig:
    """One cluster sweep, in place: open agreeing edges with probability
    1 - e^{-2J}, then resample cluster spins.  Clusters holding a clamped
    vertex keep the clamped sign."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    if coupling < 0:
        raise DomainError(f"coupling {coupling} < 0")
    if boundary is not None:
        cfg.boundary = boundary
    m = cfg.map
    apply_spin_boundary(cfg)
    p_open = 1.0 - math.exp(-2.0 * coupling)
    ends = m.edge_endpoints()
    agree = cfg.states[ends[:, 0]] == cfg.states[ends[:, 1]]
    opened = agree & (rng.random(m.n_edges) < p_open)
    rows = ends[opened, 0]
    cols = ends[opened, 1]
    adj = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                     shape=(m.n_vertices, m.n_vertices))
    _, labels = connected_components(adj, directed=False)
    n_comp = int(labels.max()) + 1 if m.n_vertices else 0
    coin = (rng.random(n_comp) < 0.5).astype(np.uint8)
    if cfg.boundary is not SpinBoundary.FREE:
        forced = 1 if cfg.boundary is SpinBoundary.PLUS else 0
        clamped_labels = np.unique(labels[m.boundary_vertices])
        coin[clamped_labels] = forced
    cfg.states[:] = coin[labels]
    return cfg


# -- vectorized multi-chain versions ----------------------------------------


def glauber_chain_batch(m: CombinatorialMap, coupling: float, n_chains: int,
                        n_sweeps: int, rng: np.random.Generator,
                        boundary: SpinBoundary = SpinBoundary.FREE,
                        init: Optional[np.ndarray] = None) -> np.ndarray:
    """Run independent Glauber chains; returns (n_chains, V) end states."""
    indptr, indices = _adjacency(m)
    if init is None:
        states = (rng.random((n_chains, m.n_vertices)) < 0.5).astype(np.uint8)
    else:
        states = np.array(init, dtype=np.uint8)
        if states.shape != (n_chains, m.n_vertices):
            states = np.broadcast_to(states, (n_chains, m.n_vertices)).copy()
    skip = np.zeros(m.n_vertices, dtype=bool)
    if boundary is not SpinBoundary.FREE:
        states[:, m.boundary_vertices] = (
            1 if boundary is SpinBoundary.PLUS else 0)
        skip[m.boundary_vertices] = True
    scan = [v for v in range(m.n_vertices) if not skip[v]]
    nb_of = {v: indices[indptr[v]:indptr[v + 1]] for v in scan}
    for _ in range(n_sweeps):
        for v in scan:
            nb = nb_of[v]
            field = 2 * states[:, nb].sum(axis=1, dtype=np.int64) - len(nb)
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * coupling * field))
            states[:, v] = rng.random(n_chains) < p_plus
    return states


def _min_label_components(open_edges: np.ndarray, ends: np.ndarray,
                          n_vertices: int,
                          glue: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-row component labels by min-label diffusion.

    open_edges is (rows, E) boolean; glue lists vertices merged in every
    row.  Returned labels are the least vertex id in each component.
    """
    rows = open_edges.shape[0]
    labels = np.broadcast_to(np.arange(n_vertices, dtype=np.int64),
                             (rows, n_vertices)).copy()
    if glue is not None and len(glue) > 1:
        labels[:, glue] = int(glue.min())
    while True:
        before = labels.copy()
        for e in range(len(ends)):
            u, v = int(ends[e, 0]), int(ends[e, 1])
            sel = open_edges[:, e]
            low = np.minimum(labels[sel, u], labels[sel, v])
            labels[sel, u] = low
            labels[sel, v] = low
        if glue is not None and len(glue) > 1:
            low = labels[:, glue].min(axis=1)
            labels[:, glue] = low[:, None]
        if np.array_equal(before, labels):
            return labels


def _uniform_spin_per_label(labels: np.ndarray,
                            rng: np.random.Generator) -> np.ndarray:
    coin = (rng.random(labels.shape) < 0.5).astype(np.uint8)
    return np.take_along_axis(coin, labels, axis=1)


def swendsen_wang_chain_batch(m: CombinatorialMap, coupling: float,
                              n_chains: int, n_sweeps: int,
                              rng: np.random.Generator,
                              boundary: SpinBoundary = SpinBoundary.FREE,
                              init: Optional[np.ndarray] = None) -> np.ndarray:
    ends = m.edge_endpoints()
    p_open = 1.0 - math.exp(-2.0 * coupling)
    if init is None:
        states = (rng.random((n_chains, m.n_vertices)) < 0.5).astype(np.uint8)
    else:
        states = np.broadcast_to(np.asarray(init, dtype=np.uint8),
                                 (n_chains, m.n_vertices)).copy()
    bnd = m.boundary_vertices
    if boundary is not SpinBoundary.FREE:
        states[:, bnd] = 1 if boundary is SpinBoundary.PLUS else 0
    for _ in range(n_sweeps):
        agree = states[:, ends[:, 0]] == states[:, ends[:, 1]]
        opened = agree & (rng.random((n_chains, m.n_edges)) < p_open)
        labels = _min_label_components(opened, ends, m.n_vertices)
        fresh = _uniform_spin_per_label(labels, rng)
        if boundary is not SpinBoundary.FREE:
            forced = np.zeros_like(fresh, dtype=bool)
            np.put_along_axis(forced, labels[:, bnd], True, axis=1)
            forced = np.take_along_axis(forced, labels, axis=1)
            fresh = np.where(forced,
                             1 if boundary is SpinBoundary.PLUS else 0,
                             fresh).astype(np.uint8)
        states = fresh
    return states


def edwards_sokal_color_batch(m: CombinatorialMap, open_edges: np.ndarray,
                              rng: np.random.Generator,
                              boundary: BondBoundary = BondBoundary.FREE,
                              ) -> np.ndarray:
    """Colour (rows, E) bond configurations; wired rows glue the boundary
    into one cluster before colouring."""
    ends = m.edge_endpoints()
    glue = m.boundary_vertices if boundary is BondBoundary.WIRED else None
    labels = _min_label_components(open_edges.astype(bool), ends,
                                   m.n_vertices, glue)
    return _uniform_spin_per_label(labels, rng)


def _connected_off_edge_table(m: CombinatorialMap,
                              wired: bool) -> np.ndarray:
    """conn[s, e]: endpoints of e joined by the open set s with e removed.

    Entries where bit e is set in s are filled but never queried.  Exact
    table, so 2^E rows; refuses maps with more than 16 edges.
    """
    E, V = m.n_edges, m.n_vertices
    if E > 16:
        raise TooLarge(f"{E} edges exceed the 16-edge table cap")
    ends = m.edge_endpoints()
    n_masks = 1 << E
    masks = np.arange(n_masks, dtype=np.int64)
    open_edges = ((masks[:, None] >> np.arange(E)) & 1).astype(bool)
    glue = m.boundary_vertices if wired else None
    labels = _min_label_components(open_edges, ends, V, glue)
    conn = np.empty((n_masks, E), dtype=bool)
    for e in range(E):
        conn[:, e] = labels[:, ends[e, 0]] == labels[:, ends[e, 1]]
    return conn


def fk_chain_batch(m: CombinatorialMap, p: float, q: float, n_chains: int,
                   n_sweeps: int, rng: np.random.Generator,
                   boundary: BondBoundary = BondBoundary.FREE,
                   init: Optional[np.ndarray] = None) -> np.ndarray:
    """Independent single-bond heat-bath chains; returns (n_chains, E) 0/1.

    Uses an exact connectivity table, so it carries the same 16-edge cap.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"bond density {p} outside (0, 1)")
    if q <= 0:
        raise DomainError(f"cluster weight {q} must be positive")
    E = m.n_edges
    conn = _connected_off_edge_table(m, boundary is BondBoundary.WIRED)
    if init is None:
        bits = (rng.random((n_chains, E)) < 0.5).astype(np.int64)
    else:
        bits = np.broadcast_to(np.asarray(init, dtype=np.int64),
                               (n_chains, E)).copy()
    masks = (bits << np.arange(E)).sum(axis=1)
    p_cut = p / (p + q * (1.0 - p))
    for _ in range(n_sweeps):
        for e in range(E):
            off = masks & ~(1 << e)
            prob = np.where(conn[off, e], p, p_cut)
            opened = rng.random(n_chains) < prob
            masks = np.where(opened, off | (1 << e), off)
    return ((masks[:, None] >> np.arange(E)) & 1).astype(np.uint8)


# -- closed-form thresholds ---------------------------------------------------


def ising_height_from_site_threshold(pc: float) -> float:
    """Half log-odds of a strictly subcritical site threshold."""
    if not 0.0 < pc < 0.5:
        raise DomainError(f"site threshold {pc} not in (0, 1/2)")
    return 0.5 * math.log((1.0 - pc) / pc)


def xor_height_from_site_threshold(pc: float) -> float:
    """arccosh(1 / sqrt(2 pc)) for a strictly subcritical site threshold."""
    if not 0.0 < pc < 0.5:
        raise DomainError(f"site threshold {pc} not in (0, 1/2)")
    return math.acosh(1.0 / math.sqrt(2.0 * pc))


def max_coupling(height: float, degree: int) -> float:
    """Largest coupling whose two-point window stays inside the height."""
    if degree < 1:
        raise DomainError(f"degree {degree} < 1")
    if height <= 0:
        raise DomainError(f"height {height} must be positive")
    return height / degree


def wired_threshold_lower_bound(pc: float, degree: int) -> float:
    """1 - ((1-pc)/pc)^(1/d); needs the free threshold to be at least 1/2."""
    if not 0.5 <= pc < 1.0:
        raise DomainError(f"site threshold {pc} not in [1/2, 1)")
    if degree < 1:
        raise DomainError(f"degree {degree} < 1")
    return 1.0 - ((1.0 - pc) / pc) ** (1.0 / degree)


def coupling_from_wired_threshold(p: float) -> float:
    """J with 1 - e^{-2J} equal to the wired threshold bound."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"threshold {p} not in (0, 1)")
    return 0.5 * math.log(1.0 / (1.0 - p))


def ising_two_point_window(coupling: float, degree: int
                           ) -> Tuple[float, float]:
    """Bounds on the agreement probability across an edge of a degree-d
    vertex at the given coupling; collapses to (1/2, 1/2) at J = 0."""
    if degree < 1:
        raise DomainError(f"degree {degree} < 1")
    if coupling < 0:
        raise DomainError(f"coupling {coupling} < 0")
    z = 2.0 * math.cosh(degree * coupling)
    return (math.exp(-degree * coupling) / z,
            math.exp(degree * coupling) / z)


def xor_two_point_window(coupling: float, degree: int
                         ) -> Tuple[float, float]:
    """Same bounds for the product of two independent copies."""
    if degree < 1:
        raise DomainError(f"degree {degree} < 1")
    if coupling < 0:
        raise DomainError(f"coupling {coupling} < 0")
    z = (2.0 * math.cosh(degree * coupling)) ** 2
    lo = 2.0 / z
    hi = (math.exp(2.0 * degree * coupling)
          + math.exp(-2.0 * degree * coupling)) / z
    return lo, hi


@dataclass(frozen=True)
class ThresholdReport:
    """Every closed-form quantity derivable from one site threshold plus the
    couplings in hand.  A field is None when the threshold sits outside that
    formula's side condition (the underlying function raises DomainError)."""

    site_threshold: float
    params: CouplingParams
    h_ising: Optional[float]
    h_xor: Optional[float]
    j_max_ising: Optional[float]
    j_max_xor: Optional[float]
    wired_lower_bound: Optional[float]
    j_bound_wired: Optional[float]
    ising_window: Tuple[float, float]
    xor_window: Tuple[float, float]


def thresholds(params: CouplingParams, p_c_site: float,
               p_c_wired: Optional[float] = None) -> ThresholdReport:
    """Evaluate the whole family of domination thresholds at once.

    p_c_wired feeds the bound J < 1/2 log(1/(1-p)); when it is not supplied
    the wired lower bound derived from p_c_site stands in (making the J
    bound conservative).  Formulas whose side condition fails come back as
    None; the domination windows depend only on (J, d) and always exist.
    """
    if not 0.0 < p_c_site < 1.0:
        raise DomainError(f"site threshold {p_c_site} not in (0, 1)")

    def attempt(fn, *args):
        try:
            return fn(*args)
        except DomainError:
            return None

    h_i = attempt(ising_height_from_site_threshold, p_c_site)
    h_x = attempt(xor_height_from_site_threshold, p_c_site)
    wl = attempt(wired_threshold_lower_bound, p_c_site, params.d)
    pw = p_c_wired if p_c_wired is not None else wl
    jw = None if pw is None else attempt(coupling_from_wired_threshold, pw)
    return ThresholdReport(
        site_threshold=p_c_site, params=params,
        h_ising=h_i, h_xor=h_x,
        j_max_ising=None if h_i is None else h_i / params.d,
        j_max_xor=None if h_x is None else h_x / params.d,
        wired_lower_bound=wl,
        j_bound_wired=jw,
        ising_window=ising_two_point_window(params.J, params.d),
        xor_window=xor_two_point_window(params.J, params.d))
