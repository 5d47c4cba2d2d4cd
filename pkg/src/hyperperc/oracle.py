"""Exact enumeration on tiny graphs.

Everything here is brute force on purpose: partition functions, marginals,
total-variation distances and the Holley certificate are computed from
complete state tables so the samplers and the coupling have something
uncompromising to be measured against.  Configurations are bitmasks with
bit v = state of site v; measures over a sublattice keep the clamped bits
fixed inside every stored configuration.

Weights are accumulated as shifted exponentials (a single max-subtraction
before exponentiation), which keeps large couplings finite without any
loss of relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numba import njit

from .clusters import BondBoundary, SpinBoundary
from .errors import NonPositive, SupportMismatch, TooLarge
from .graphs import Graph
from .planar_map import CombinatorialMap

GraphLike = Union[CombinatorialMap, Graph]


def _graph_data(g: GraphLike) -> Tuple[int, np.ndarray, np.ndarray]:
    """(n_vertices, edge array (E,2), boundary vertex ids)."""
    if isinstance(g, Graph):
        ends = np.array(g.edges, dtype=np.int64).reshape(-1, 2)
        return g.n, ends, np.array(g.boundary_set(), dtype=np.int64)
    return (g.n_vertices, g.edge_endpoints(),
            np.asarray(g.boundary_vertices, dtype=np.int64))


@dataclass(frozen=True)
class ExactMeasure:
    """A probability table over bitmask configurations.

    configs[i] is the full configuration whose free bits spell out i, so
    index arithmetic on the free lattice is direct.  support and weights
    expose the table in that canonical order.
    """

    n_sites: int
    free_sites: Tuple[int, ...]
    configs: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise NonPositive(f"weights sum to {total}, not 1")

    @property
    def support(self) -> np.ndarray:
        return self.configs

    @property
    def weights(self) -> np.ndarray:
        return self.probs

    def marginal(self, site: int) -> float:
        """P(bit at site = 1)."""
        on = (self.configs >> site) & 1
        return float(self.probs[on == 1].sum())

    def magnetization(self) -> float:
        """Expected mean of the +-1 values over all sites."""
        acc = 0.0
        for v in range(self.n_sites):
            acc += 2.0 * self.marginal(v) - 1.0
        return acc / self.n_sites

    def expectation(self, values: np.ndarray) -> float:
        """E[values[config index]] over the free lattice."""
        return float((self.probs * values).sum())


def _measure_from_log_weights(n_sites: int, free: Sequence[int],
                              configs: np.ndarray,
                              logw: np.ndarray) -> ExactMeasure:
    w = np.exp(logw - logw.max())
    return ExactMeasure(n_sites, tuple(int(v) for v in free), configs,
                        w / w.sum())


def _free_configs(n: int, free: Sequence[int],
                  clamp_mask: int) -> np.ndarray:
    k = len(free)
    idx = np.arange(1 << k, dtype=np.int64)
    full = np.full(1 << k, clamp_mask, dtype=np.int64)
    for j, v in enumerate(free):
        full |= ((idx >> j) & 1) << v
    return full


def enumerate_ising(g: GraphLike, J: float,
                    boundary: SpinBoundary = SpinBoundary.FREE
                    ) -> ExactMeasure:
    """Exact Boltzmann distribution with weight exp(J * sum of sigma sigma').

    Boundary vertices are clamped under plus/minus conditions and drop out
    of the free lattice; at most 16 free vertices.
    """
    n, ends, bnd = _graph_data(g)
    if boundary is SpinBoundary.FREE:
        free = list(range(n))
        clamp_mask = 0
    else:
        bset = set(int(v) for v in bnd)
        free = [v for v in range(n) if v not in bset]
        clamp_mask = 0
        if boundary is SpinBoundary.PLUS:
            for v in bset:
                clamp_mask |= 1 << v
    if len(free) > 16:
        raise TooLarge(f"{len(free)} free vertices exceed the 16 cap")
    configs = _free_configs(n, free, clamp_mask)
    energy = np.zeros(len(configs), dtype=np.float64)
    for u, v in ends:
        agree = ((configs >> int(u)) & 1) == ((configs >> int(v)) & 1)
        energy += np.where(agree, 1.0, -1.0)
    return _measure_from_log_weights(n, free, configs, J * energy)


def _component_count_table(n: int, ends: np.ndarray, n_edges: int,
                           glue: Optional[np.ndarray]) -> np.ndarray:
    """k(xi) for every edge bitmask, isolated vertices included."""
    n_masks = 1 << n_edges
    out = np.empty(n_masks, dtype=np.uint8)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    base_k = n
    if glue is not None and len(glue) > 1:
        for v in glue[1:]:
            ra, rb = find(int(glue[0])), find(int(v))
            if ra != rb:
                parent[rb] = ra
                base_k -= 1
    base_parent = list(parent)
    eu = [int(u) for u, _ in ends]
    ev = [int(v) for _, v in ends]
    for mask in range(n_masks):
        parent[:] = base_parent
        k = base_k
        m = mask
        while m:
            e = (m & -m).bit_length() - 1
            m &= m - 1
            ra, rb = find(eu[e]), find(ev[e])
            if ra != rb:
                parent[rb] = ra
                k -= 1
        out[mask] = k
    return out


def enumerate_fk(g: GraphLike, p: float, q: float,
                 boundary: BondBoundary = BondBoundary.FREE) -> ExactMeasure:
    """Exact random-cluster measure, weight p^open (1-p)^closed q^k.

    k counts open components over all vertices; wired glues the boundary
    set into one vertex first.  At most 16 edges (the coupling check owns
    the larger compiled path)."""
    n, ends, bnd = _graph_data(g)
    E = len(ends)
    if E > 16:
        raise TooLarge(f"{E} edges exceed the 16-edge enumeration cap")
    if not 0.0 <= p <= 1.0:
        raise NonPositive(f"density {p} outside [0, 1]")
    if q <= 0.0:
        raise NonPositive(f"cluster weight {q} not positive")
    glue = bnd if boundary is BondBoundary.WIRED else None
    ktab = _component_count_table(n, ends, E, glue)
    masks = np.arange(1 << E, dtype=np.int64)
    pop = _popcount_table(E).astype(np.float64)
    # all factors lie in (0, q^n]; no log-space needed
    w = p ** pop * (1.0 - p) ** (E - pop) * q ** ktab.astype(np.float64)
    return ExactMeasure(E, tuple(range(E)), masks, w / w.sum())


# -- the coupling, composed numerically ---------------------------------------


def _popcount_table(n_bits: int) -> np.ndarray:
    pop = np.zeros(1 << n_bits, dtype=np.uint8)
    for i in range(n_bits):
        pop[(1 << i):(1 << (i + 1))] = pop[:1 << i] + 1
    return pop


def _colorings_of_fk(n: int, ends: np.ndarray, p: float, q: float,
                     glue: Optional[np.ndarray]) -> np.ndarray:
    """Distribution over spin bitmasks obtained by coloring each open
    cluster uniformly, pure python route (edges <= 16)."""
    E = len(ends)
    fk = enumerate_fk(Graph(n, tuple(tuple(e) for e in ends),
                            boundary=tuple(range(n)) if glue is None
                            else tuple(int(v) for v in glue)),
                      p, q,
                      BondBoundary.FREE if glue is None
                      else BondBoundary.WIRED)
    # per-mask component labels, then one coin per component
    out = np.zeros(1 << n, dtype=np.float64)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    eu = [int(u) for u, _ in ends]
    ev = [int(v) for _, v in ends]
    for mask in range(1 << E):
        parent[:] = range(n)
        if glue is not None and len(glue) > 1:
            for v in glue[1:]:
                ra, rb = find(int(glue[0])), find(int(v))
                if ra != rb:
                    parent[rb] = ra
        m = mask
        while m:
            e = (m & -m).bit_length() - 1
            m &= m - 1
            ra, rb = find(eu[e]), find(ev[e])
            if ra != rb:
                parent[rb] = ra
        roots = [find(v) for v in range(n)]
        comp_ids = sorted(set(roots))
        k = len(comp_ids)
        pr = float(fk.probs[mask]) / (2.0 ** k)
        if pr == 0.0:
            continue
        # every joint +-1 assignment to components, spread to vertices
        index_of = {r: i for i, r in enumerate(comp_ids)}
        vbit = [index_of[r] for r in roots]
        for coins in range(1 << k):
            sigma = 0
            for v in range(n):
                if (coins >> vbit[v]) & 1:
                    sigma |= 1 << v
            out[sigma] += pr
    return out


def _colorings_of_fk_compiled(n: int, ends: np.ndarray, p: float, q: float,
                              glue: Optional[np.ndarray],
                              cache_on=None) -> np.ndarray:
    """Same distribution through the compiled route, for up to 24 edges
    and 16 vertices.

    A coloring of an open set xi is compatible with sigma exactly when xi
    sits inside the agreement set of sigma, and each of the k(xi) clusters
    then has its color forced, so

        P(sigma) = sum over xi subset A(sigma) of w(xi) (1/2)^k(xi).

    The table of those subset sums over every possible A is a single
    zeta-transform pass over the edge-mask lattice.
    """
    E = len(ends)
    if E > 24 or n > 16:
        raise TooLarge(f"({n} vertices, {E} edges) beyond the compiled cap")

    glue_arr = (np.asarray(glue, dtype=np.int64) if glue is not None
                else np.empty(0, dtype=np.int64))
    eu = ends[:, 0].astype(np.int64)
    ev = ends[:, 1].astype(np.int64)

    ktab = _k_table_cached(cache_on, n, eu, ev, glue_arr)
    pop = _popcount_table(E).astype(np.float64)
    halves = np.array([(q / 2.0) ** k for k in range(n + 1)])
    f = p ** pop * (1.0 - p) ** (E - pop) * halves[ktab]
    _subset_sums(f, E)
    raw = _gather_by_agreement(eu, ev, glue_arr, n, f)
    return raw / raw.sum()


def _k_table_cached(cache_on, n: int, eu: np.ndarray, ev: np.ndarray,
                    glue: np.ndarray) -> np.ndarray:
    """Component-count table, memoized on the source object per glue set
    (the table depends on the graph and boundary, never on p or q)."""
    if cache_on is None:
        return _k_table(n, eu, ev, glue)
    key = tuple(int(v) for v in glue)
    cache = getattr(cache_on, "_oracle_ktab", None)
    if cache is None:
        cache = {}
        try:
            object.__setattr__(cache_on, "_oracle_ktab", cache)
        except (AttributeError, TypeError):
            return _k_table(n, eu, ev, glue)
    if key not in cache:
        cache[key] = _k_table(n, eu, ev, glue)
    return cache[key]


@njit(cache=True)
def _k_table(nv, eu, ev, glue):
    """k(xi) for every edge bitmask.

    Depth-first walk over include/exclude decisions per edge with a
    rollback union-find (union by size, no path compression), so each of
    the 2^E masks costs one union instead of a rebuild."""
    E = len(eu)
    out = np.empty(1 << E, dtype=np.uint8)
    parent = np.arange(nv, dtype=np.int64)
    size = np.ones(nv, dtype=np.int64)
    k = nv
    for i in range(1, len(glue)):
        a = glue[0]
        while parent[a] != a:
            a = parent[a]
        b = glue[i]
        while parent[b] != b:
            b = parent[b]
        if a != b:
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
            k -= 1

    phase = np.zeros(E + 1, dtype=np.int64)
    merged_child = np.empty(E, dtype=np.int64)
    merged_root = np.empty(E, dtype=np.int64)
    mask = 0
    e = 0
    while e >= 0:
        if e == E:
            out[mask] = k
            e -= 1
            continue
        ph = phase[e]
        if ph == 0:
            # descend with edge e closed
            phase[e] = 1
            e += 1
            phase[e] = 0
        elif ph == 1:
            # descend with edge e open
            phase[e] = 2
            a = eu[e]
            while parent[a] != a:
                a = parent[a]
            b = ev[e]
            while parent[b] != b:
                b = parent[b]
            if a != b:
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
                merged_child[e] = b
                merged_root[e] = a
                k -= 1
            else:
                merged_child[e] = -1
            mask |= 1 << e
            e += 1
            phase[e] = 0
        else:
            # unwind edge e
            mask ^= 1 << e
            b = merged_child[e]
            if b >= 0:
                parent[b] = b
                size[merged_root[e]] -= size[b]
                k += 1
            e -= 1
    return out


@njit(cache=True)
def _subset_sums(f, n_bits):
    """In place: f[A] <- sum of f[S] over subsets S of A."""
    for e in range(n_bits):
        bit = 1 << e
        for m in range(1 << n_bits):
            if m & bit:
                f[m] += f[m ^ bit]


@njit(cache=True)
def _gather_by_agreement(eu, ev, glue, nv, table):
    """out[sigma] = table[agreement edge set of sigma], zero when sigma is
    not constant on the glue set."""
    E = len(eu)
    out = np.zeros(1 << nv, dtype=np.float64)
    for sigma in range(1 << nv):
        ok = True
        for i in range(1, len(glue)):
            if ((sigma >> glue[0]) & 1) != ((sigma >> glue[i]) & 1):
                ok = False
                break
        if not ok:
            continue
        agree = 0
        for e in range(E):
            if ((sigma >> eu[e]) & 1) == ((sigma >> ev[e]) & 1):
                agree |= 1 << e
        out[sigma] = table[agree]
    return out


@dataclass(frozen=True)
class TVReport:
    """Total-variation distance between the composed coupling and the spin
    measure it must reproduce."""

    tv: float
    p: float
    boundary: str
    n_sites: int

    def __str__(self) -> str:
        return (f"coupling TV distance {self.tv:.3e} "
                f"(p={self.p}, {self.boundary}, {self.n_sites} sites)")


def coupling_check(g: GraphLike, p: float,
                   boundary: BondBoundary = BondBoundary.FREE) -> TVReport:
    """Measure the exactness of the bond-to-spin coupling.

    Composes the exact random-cluster measure at (p, q=2) with uniform
    cluster coloring and compares, in total variation, against the exact
    spin measure at J = -log(1-p)/2: the free case against the free
    measure, the wired case against the even mixture of the two clamped
    measures.  Every distribution is enumerated, nothing is simplified.
    """
    n, ends, bnd = _graph_data(g)
    E = len(ends)
    glue = bnd if boundary is BondBoundary.WIRED else None
    if E <= 14:
        colored = _colorings_of_fk(n, ends, p, 2.0, glue)
    else:
        colored = _colorings_of_fk_compiled(n, ends, p, 2.0, glue,
                                            cache_on=g)

    J = -0.5 * math.log(1.0 - p)
    if boundary is BondBoundary.FREE:
        mu = enumerate_ising(g, J, SpinBoundary.FREE)
        target = np.zeros(1 << n, dtype=np.float64)
        target[mu.configs] = mu.probs
    else:
        mu_p = enumerate_ising(g, J, SpinBoundary.PLUS)
        mu_m = enumerate_ising(g, J, SpinBoundary.MINUS)
        target = np.zeros(1 << n, dtype=np.float64)
        np.add.at(target, mu_p.configs, 0.5 * mu_p.probs)
        np.add.at(target, mu_m.configs, 0.5 * mu_m.probs)
    tv = 0.5 * float(np.abs(colored - target).sum())
    return TVReport(tv=tv, p=p, boundary=boundary.value, n_sites=n)


def es_bond_marginals(g: GraphLike, p: float,
                      boundary: BondBoundary = BondBoundary.FREE
                      ) -> Tuple[np.ndarray, np.ndarray]:
    """Per-edge open probability from the two sides of the coupling.

    Left: the exact random-cluster marginal.  Right: p times the agreement
    probability of the matching spin measure (the conditional bond law
    given the spins opens agreeing edges independently)."""
    n, ends, bnd = _graph_data(g)
    fk = enumerate_fk(g, p, 2.0, boundary)
    left = np.array([fk.marginal(e) for e in range(len(ends))])

    J = -0.5 * math.log(1.0 - p)
    if boundary is BondBoundary.FREE:
        measures = [(1.0, enumerate_ising(g, J, SpinBoundary.FREE))]
    else:
        measures = [(0.5, enumerate_ising(g, J, SpinBoundary.PLUS)),
                    (0.5, enumerate_ising(g, J, SpinBoundary.MINUS))]
    right = np.zeros(len(ends))
    for wgt, mu in measures:
        for e, (u, v) in enumerate(ends):
            agree = (((mu.configs >> int(u)) & 1)
                     == ((mu.configs >> int(v)) & 1))
            right[e] += wgt * p * float(mu.probs[agree].sum())
    return left, right


# -- domination certificates ---------------------------------------------------


@dataclass(frozen=True)
class CertReport:
    """Outcome of the lattice-condition certificate.

    margin is the minimum of mu2(a|b) mu1(a&b) - mu1(a) mu2(b) over all
    pairs; a strictly negative margin comes with the witnessing pair of
    free-lattice patterns."""

    passed: bool
    margin: float
    n_free: int
    witness: Optional[Tuple[int, int]] = None


def holley_check(mu1: ExactMeasure, mu2: ExactMeasure) -> CertReport:
    """Certify mu1 below mu2 via the pairwise lattice condition.

    Requires both measures on the same full free lattice with strictly
    positive weights; a pass is a proof of stochastic domination.
    """
    if mu1.free_sites != mu2.free_sites or len(mu1.probs) != len(mu2.probs):
        raise SupportMismatch("measures live on different lattices")
    n = len(mu1.free_sites)
    if n > 10:
        raise TooLarge(f"{n} free sites exceed the 10-site pair check")
    if (mu1.probs <= 0).any() or (mu2.probs <= 0).any():
        raise NonPositive("lattice condition needs strictly positive weights")
    size = 1 << n
    b = np.arange(size, dtype=np.int64)
    margin = np.inf
    witness = None
    for a in range(size):
        lhs = mu2.probs[a | b] * mu1.probs[a & b]
        rhs = mu1.probs[a] * mu2.probs[b]
        gap = lhs - rhs
        i = int(np.argmin(gap))
        if gap[i] < margin:
            margin = float(gap[i])
            witness = (a, int(b[i]))
    passed = margin >= -1e-15
    return CertReport(passed=passed, margin=margin, n_free=n,
                      witness=None if passed else witness)


@dataclass(frozen=True)
class DominationReport:
    passed: bool
    mode: str
    max_violation: float
    witness_event: Optional[Tuple[int, ...]] = None


def domination_evidence(mu1: ExactMeasure, mu2: ExactMeasure,
                        mode: str = "auto") -> DominationReport:
    """Check mu1(A) <= mu2(A) for increasing events A.

    Exhaustive mode walks every up-set of the free lattice (5 sites at
    most); marginal mode settles for the single-site and magnetization
    inequalities, which are necessary conditions only.
    """
    if mu1.free_sites != mu2.free_sites or len(mu1.probs) != len(mu2.probs):
        raise SupportMismatch("measures live on different lattices")
    n = len(mu1.free_sites)
    if mode == "auto":
        mode = "exhaustive" if n <= 5 else "marginal"
    if mode == "marginal":
        worst = 0.0
        for j in range(n):
            on = ((np.arange(1 << n) >> j) & 1) == 1
            worst = max(worst, float(mu1.probs[on].sum()
                                     - mu2.probs[on].sum()))
        return DominationReport(passed=worst <= 1e-12, mode="marginal",
                                max_violation=worst)
    if n > 5:
        raise TooLarge(f"{n} free sites exceed the exhaustive up-set cap")

    size = 1 << n
    supersets: List[List[int]] = [[] for _ in range(size)]
    for x in range(size):
        for j in range(n):
            if not (x >> j) & 1:
                supersets[x].append(x | (1 << j))
    order = sorted(range(size), key=lambda x: -bin(x).count("1"))

    p1 = mu1.probs
    p2 = mu2.probs
    best = {"viol": 0.0, "event": None}

    in_set = np.zeros(size, dtype=bool)

    def walk(i: int, s1: float, s2: float):
        if i == len(order):
            if s1 - s2 > best["viol"]:
                best["viol"] = s1 - s2
                best["event"] = tuple(int(x) for x in np.flatnonzero(in_set))
            return
        x = order[i]
        walk(i + 1, s1, s2)
        if all(in_set[y] for y in supersets[x]):
            in_set[x] = True
            walk(i + 1, s1 + float(p1[x]), s2 + float(p2[x]))
            in_set[x] = False

    walk(0, 0.0, 0.0)
    viol = best["viol"]
    return DominationReport(passed=viol <= 1e-12, mode="exhaustive",
                            max_violation=viol,
                            witness_event=best["event"])


def product_measure(n: int, density: float) -> ExactMeasure:
    """Independent sites, each open with the given density."""
    if not 0.0 < density < 1.0:
        raise NonPositive(f"density {density} not in (0, 1)")
    configs = np.arange(1 << n, dtype=np.int64)
    pop = _popcount_table(n).astype(np.float64)
    probs = density ** pop * (1.0 - density) ** (n - pop)
    return ExactMeasure(n, tuple(range(n)), configs, probs)


def xor_measure(mu: ExactMeasure) -> ExactMeasure:
    """Distribution of the pointwise product of two independent draws.

    In bit form the product of +-1 values is the XNOR, so the table is the
    XNOR-convolution of the measure with itself."""
    if mu.free_sites != tuple(range(mu.n_sites)):
        raise SupportMismatch("product measure needs a fully free lattice")
    n = mu.n_sites
    if n > 12:
        raise TooLarge(f"{n} sites exceed the 12-site convolution cap")
    size = 1 << n
    mask = size - 1
    idx = np.arange(size, dtype=np.int64)
    out = np.zeros(size, dtype=np.float64)
    for a in range(size):
        x = (~(idx ^ a)) & mask
        np.add.at(out, x, float(mu.probs[a]) * mu.probs[idx])
    return ExactMeasure(n, tuple(range(n)), idx.copy(), out)
