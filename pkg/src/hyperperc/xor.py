"""Products of independent spin configurations and planar duality.

The product model's partition function has two exact finite-volume
representations: the brute-force double spin sum, and a coupled expansion
over pairs of even subgraphs, one living on the graph and one on its dual
(outer face included), required to share no edge.  Equating the two is the
sharpest correctness test in the package, so both are implemented from
scratch and compared at tight tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .clusters import SiteConfig, SpinBoundary
from .errors import DomainError, MapMismatch, TooLarge
from .graphs import Graph
from .planar_map import CombinatorialMap, dual

SELF_DUAL_COUPLING = 0.5 * math.log(1.0 + math.sqrt(2.0))


@dataclass
class XorConfig:
    """Two spin configurations and their pointwise product."""

    sigma1: SiteConfig
    sigma2: SiteConfig
    sigma_xor: SiteConfig

    def __post_init__(self):
        expect = 1 - (self.sigma1.states ^ self.sigma2.states)
        if not np.array_equal(self.sigma_xor.states, expect):
            raise MapMismatch("product configuration is not the product")


def xor_of(s1: SiteConfig, s2: SiteConfig) -> XorConfig:
    """Pointwise product of two spin configurations on the same map.

    In the 0/1 encoding the product of +-1 spins is the XNOR of the bits.
    Equal clamped boundaries multiply to an all-plus boundary.
    """
    if s1.map is not s2.map:
        raise MapMismatch("configurations live on different maps")
    if s1.boundary is not s2.boundary:
        raise MapMismatch("configurations carry different boundary classes")
    bits = (1 - (s1.states ^ s2.states)).astype(np.uint8)
    bc = (SpinBoundary.FREE if s1.boundary is SpinBoundary.FREE
          else SpinBoundary.PLUS)
    return XorConfig(s1, s2, SiteConfig(s1.map, bits, bc))


def dual_coupling(K: float) -> float:
    """J with e^{-2J} = (1 - e^{-2K}) / (1 + e^{-2K}).

    Equivalently J = -1/2 log(tanh K); a strictly decreasing involution on
    positive couplings, with fixed point log(1 + sqrt 2)/2.
    """
    if K <= 0:
        raise DomainError(f"coupling {K} must be positive")
    return -0.5 * math.log(math.tanh(K))


def contour_weights(J: float) -> Tuple[float, float]:
    """(dual weight, primal weight) per contour edge at coupling J,
    written exactly as the duality identity states them."""
    e4 = math.exp(-4.0 * J)
    return 2.0 * math.exp(-2.0 * J) / (1.0 + e4), (1.0 - e4) / (1.0 + e4)


def _edge_list(lam: Union[CombinatorialMap, Graph]
               ) -> Tuple[int, Sequence[Tuple[int, int]]]:
    if isinstance(lam, Graph):
        return lam.n, lam.edges
    return lam.n_vertices, [tuple(uv) for uv in lam.edge_endpoints()]


def z_double_ising(lam: Union[CombinatorialMap, Graph], J: float) -> float:
    """Partition function of two independent spin copies, free boundary.

    The double sum over (sigma3, sigma4) factorizes exactly into the square
    of the single-copy sum, which is enumerated over all 2^V states.
    """
    n, edges = _edge_list(lam)
    if n > 14:
        raise TooLarge(f"{n} vertices exceed the 14-vertex enumeration cap")
    states = np.arange(1 << n, dtype=np.int64)
    energy = np.zeros(1 << n, dtype=np.float64)
    for u, v in edges:
        agree = ((states >> u) & 1) == ((states >> v) & 1)
        energy += np.where(agree, 1.0, -1.0)
    z1 = float(np.exp(J * energy).sum())
    return z1 * z1


def cycle_space_masks(n: int, edges: Sequence[Tuple[int, int]]) -> List[int]:
    """All even subgraphs as edge bitmasks, via fundamental cycles.

    A spanning forest is grown first; each chord closes one basis cycle,
    and the space is the XOR span of the basis (2^(E - V + #components)
    masks, the empty set included).
    """
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree_adj: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    chords: List[int] = []
    for e, (u, v) in enumerate(edges):
        ru, rv = find(u), find(v)
        if ru == rv:
            chords.append(e)
        else:
            parent[ru] = rv
            tree_adj[u].append((v, e))
            tree_adj[v].append((u, e))

    def tree_path_mask(u: int, v: int) -> int:
        seen = {u: (None, None)}
        queue = [u]
        while queue:
            x = queue.pop()
            if x == v:
                break
            for y, e in tree_adj[x]:
                if y not in seen:
                    seen[y] = (x, e)
                    queue.append(y)
        mask = 0
        x = v
        while seen[x][0] is not None:
            mask ^= 1 << seen[x][1]
            x = seen[x][0]
        return mask

    basis = [tree_path_mask(u, v) ^ (1 << e)
             for e in chords
             for u, v in [edges[e]]]
    masks = [0]
    for b in basis:
        masks += [m ^ b for m in masks]
    return masks


def z_contour_expansion(lam: CombinatorialMap, J: float) -> float:
    """The same partition function as a sum over disjoint contour pairs.

    Pairs (P, P*) run over even subgraphs of the map and of its dual (the
    outer face is a dual vertex) sharing no edge, weighted per edge by
    contour_weights(J).  The prefactor is pinned by rewriting the double
    spin sum through the product variable tau = sigma3*sigma4: summing out
    sigma3 at fixed tau gives 2^V cosh(2J)^{#agreements of tau} times the
    even-subgraph sum on the tau-agreement set, and the tau-sum runs 2-to-1
    over even dual subgraphs, leaving C1 = 2^(V+1) cosh(2J)^E.  The J->0
    and J->infinity limits (4^V and 4 e^{2JE}) confirm the constant.
    """
    E = lam.n_edges
    if E > 12:
        raise TooLarge(f"{E} edges exceed the 12-edge expansion cap")
    V = lam.n_vertices
    ends = lam.edge_endpoints()
    dm = dual(lam)
    dual_ends = dm.edge_endpoints()

    primal = cycle_space_masks(V, [tuple(uv) for uv in ends])
    dual_sets = cycle_space_masks(dm.n_vertices,
                                  [tuple(uv) for uv in dual_ends])
    w_star, w = contour_weights(J)
    total = 0.0
    for s in dual_sets:
        ws = w_star ** int(bin(s).count("1"))
        for p in primal:
            if p & s == 0:
                total += ws * w ** int(bin(p).count("1"))
    c1 = 2.0 ** (V + 1) * math.cosh(2.0 * J) ** E
    return c1 * total
