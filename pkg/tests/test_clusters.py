from collections import deque

import numpy as np
import pytest

from hyperperc.clusters import (BondBoundary, BondConfig, SiteConfig,
                                SpinBoundary, bond_clusters,
                                count_open_clusters, label_bond_clusters,
                                label_site_clusters, site_clusters)
from hyperperc.errors import MapMismatch, StructureViolation
from hyperperc.planar_map import TilingSpec, build_ball


def ball(p, q, r):
    return build_ball(TilingSpec.regular(p, q), r)


def bfs_labels(n, edges, support):
    """Reference labeling: BFS components of the induced subgraph, numbered
    by smallest vertex in increasing order.  Vertices outside support get
    label -1."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        if support[u] and support[v]:
            adj[u].append(v)
            adj[v].append(u)
    labels = np.full(n, -1, dtype=np.int64)
    nxt = 0
    for s in range(n):
        if not support[s] or labels[s] >= 0:
            continue
        labels[s] = nxt
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if labels[w] < 0:
                    labels[w] = nxt
                    dq.append(w)
        nxt += 1
    return labels


MAPS = [ball(3, 7, 2), ball(4, 4, 2)]


class TestSiteClusters:
    @pytest.mark.parametrize("m", MAPS, ids=["hept2", "square2"])
    def test_matches_bfs_oracle(self, m):
        rng = np.random.default_rng(101)
        ends = [(int(u), int(v)) for u, v in m.edge_endpoints()]
        for _ in range(300):
            x = (rng.random(m.n_vertices) < rng.random()).astype(np.uint8)
            lab = site_clusters(SiteConfig(m, x), 1)
            ref = bfs_labels(m.n_vertices, ends, x.astype(bool))
            assert np.array_equal(lab.labels, ref)
            assert lab.n_clusters == (ref.max() + 1 if ref.size else 0)

    @pytest.mark.parametrize("m", MAPS, ids=["hept2", "square2"])
    def test_sizes_and_boundary_flags(self, m):
        rng = np.random.default_rng(55)
        bmask = m.boundary_vertex_mask()
        for _ in range(50):
            x = (rng.random(m.n_vertices) < 0.5).astype(np.uint8)
            lab = site_clusters(SiteConfig(m, x), 1)
            assert lab.sizes.sum() == x.sum()
            assert np.all(lab.sizes >= 1)
            for c in range(lab.n_clusters):
                members = np.flatnonzero(lab.labels == c)
                assert lab.sizes[c] == members.size
                assert lab.touches_boundary[c] == bool(bmask[members].any())

    def test_canonical_label_order(self):
        m = MAPS[0]
        rng = np.random.default_rng(7)
        x = (rng.random(m.n_vertices) < 0.4).astype(np.uint8)
        lab = site_clusters(SiteConfig(m, x), 1)
        minima = [int(np.flatnonzero(lab.labels == c).min())
                  for c in range(lab.n_clusters)]
        assert minima == sorted(minima)

    def test_state_zero_is_complement(self):
        m = MAPS[1]
        rng = np.random.default_rng(3)
        x = (rng.random(m.n_vertices) < 0.5).astype(np.uint8)
        lab0 = site_clusters(SiteConfig(m, x), 0)
        lab1 = site_clusters(SiteConfig(m, 1 - x), 1)
        assert np.array_equal(lab0.labels, lab1.labels)

    def test_constant_config(self):
        m = MAPS[0]
        lab = site_clusters(SiteConfig(m, np.ones(m.n_vertices, np.uint8)), 1)
        assert lab.n_clusters == 1
        assert lab.sizes.tolist() == [m.n_vertices]
        assert lab.touches_boundary.tolist() == [True]
        empty = site_clusters(SiteConfig(m, np.ones(m.n_vertices, np.uint8)),
                              0)
        assert empty.n_clusters == 0
        assert empty.sizes.size == 0

    def test_bad_value_rejected(self):
        m = MAPS[0]
        cfg = SiteConfig(m, np.zeros(m.n_vertices, np.uint8))
        with pytest.raises(StructureViolation):
            site_clusters(cfg, 2)


class TestBondClusters:
    @pytest.mark.parametrize("m", MAPS, ids=["hept2", "square2"])
    def test_free_matches_bfs_oracle(self, m):
        rng = np.random.default_rng(202)
        ends = m.edge_endpoints()
        for _ in range(300):
            w = (rng.random(m.n_edges) < rng.random()).astype(np.uint8)
            lab = bond_clusters(BondConfig(m, w))
            open_ends = [(int(u), int(v)) for (u, v), o in zip(ends, w) if o]
            ref = bfs_labels(m.n_vertices, open_ends,
                             np.ones(m.n_vertices, bool))
            assert np.array_equal(lab.labels, ref)

    @pytest.mark.parametrize("m", MAPS, ids=["hept2", "square2"])
    def test_wired_glues_boundary(self, m):
        rng = np.random.default_rng(404)
        for _ in range(100):
            w = (rng.random(m.n_edges) < 0.4).astype(np.uint8)
            lab = bond_clusters(BondConfig(m, w, BondBoundary.WIRED))
            bl = lab.labels[m.boundary_vertices]
            assert np.all(bl == bl[0])
            # gluing can only merge clusters
            free = bond_clusters(BondConfig(m, w))
            assert lab.n_clusters <= free.n_clusters

    def test_all_closed_counts(self):
        m = MAPS[0]
        b = len(m.boundary_vertices)
        shut = np.zeros(m.n_edges, np.uint8)
        assert count_open_clusters(BondConfig(m, shut)) == m.n_vertices
        wired = BondConfig(m, shut, BondBoundary.WIRED)
        assert count_open_clusters(wired) == m.n_vertices - b + 1

    def test_all_open_is_one_cluster(self):
        m = MAPS[1]
        full = BondConfig(m, np.ones(m.n_edges, np.uint8))
        assert count_open_clusters(full) == 1

    def test_isolated_vertices_counted(self):
        m = MAPS[1]
        lab = bond_clusters(BondConfig(m, np.zeros(m.n_edges, np.uint8)))
        assert lab.sizes.tolist() == [1] * m.n_vertices


class TestConfigText:
    @pytest.mark.parametrize("bc", list(SpinBoundary))
    def test_site_round_trip(self, bc):
        m = MAPS[0]
        rng = np.random.default_rng(11)
        x = (rng.random(m.n_vertices) < 0.5).astype(np.uint8)
        cfg = SiteConfig(m, x, bc)
        back = SiteConfig.from_text(m, cfg.to_text())
        assert np.array_equal(back.states, x)
        assert back.boundary is bc

    @pytest.mark.parametrize("bc", list(BondBoundary))
    def test_bond_round_trip(self, bc):
        m = MAPS[1]
        rng = np.random.default_rng(12)
        w = (rng.random(m.n_edges) < 0.5).astype(np.uint8)
        cfg = BondConfig(m, w, bc)
        back = BondConfig.from_text(m, cfg.to_text())
        assert np.array_equal(back.open_edges, w)
        assert back.boundary is bc

    def test_spins_encoding(self):
        m = MAPS[1]
        x = np.zeros(m.n_vertices, np.uint8)
        x[0] = 1
        s = SiteConfig(m, x).spins()
        assert s[0] == 1 and set(s[1:]) == {-1}

    def test_wrong_length_rejected(self):
        m, m2 = MAPS
        x = np.zeros(m.n_vertices, np.uint8)
        with pytest.raises(MapMismatch):
            SiteConfig(m2, x)
        with pytest.raises(MapMismatch):
            SiteConfig.from_text(m2, SiteConfig(m, x).to_text())

    def test_nonbinary_rejected(self):
        m = MAPS[0]
        x = np.zeros(m.n_vertices, np.uint8)
        x[3] = 2
        with pytest.raises(StructureViolation):
            SiteConfig(m, x)
        with pytest.raises(StructureViolation):
            BondConfig(m, np.full(m.n_edges, 9, np.uint8))

    def test_bad_header_rejected(self):
        m = MAPS[0]
        text = SiteConfig(m, np.zeros(m.n_vertices, np.uint8)).to_text()
        with pytest.raises(MapMismatch):
            SiteConfig.from_text(m, text.replace("sites", "sties", 1))
        with pytest.raises(MapMismatch):
            BondConfig.from_text(m, text)


class TestReports:
    def test_site_report_consistent(self):
        m = MAPS[0]
        rng = np.random.default_rng(21)
        x = (rng.random(m.n_vertices) < 0.5).astype(np.uint8)
        cfg = SiteConfig(m, x)
        rep = label_site_clusters(cfg)
        lab0, lab1 = site_clusters(cfg, 0), site_clusters(cfg, 1)
        assert rep.cluster_count_by_state == {0: lab0.n_clusters,
                                              1: lab1.n_clusters}
        assert rep.sizes == (lab0.sizes.tolist() + lab1.sizes.tolist())
        assert sum(rep.sizes) == m.n_vertices
        assert rep.proxy_triple is None

    def test_bond_report_counts_all_vertices(self):
        m = MAPS[1]
        rng = np.random.default_rng(22)
        w = (rng.random(m.n_edges) < 0.3).astype(np.uint8)
        rep = label_bond_clusters(BondConfig(m, w))
        assert sum(rep.sizes) == m.n_vertices
        assert rep.cluster_count_by_state[0] == 0

    def test_json_dict_shape(self):
        m = MAPS[1]
        rep = label_site_clusters(
            SiteConfig(m, np.zeros(m.n_vertices, np.uint8)))
        d = rep.to_json_dict()
        assert set(d) == {"cluster_count_by_state", "sizes",
                          "boundary_touching_by_state", "proxy_triple"}
        assert set(d["cluster_count_by_state"]) == {"0", "1"}
        assert d["proxy_triple"] is None

    def test_equal_configs_equal_reports(self):
        m = MAPS[0]
        rng = np.random.default_rng(23)
        x = (rng.random(m.n_vertices) < 0.5).astype(np.uint8)
        a = label_site_clusters(SiteConfig(m, x))
        b = label_site_clusters(SiteConfig(m, x.copy()))
        assert a.to_json_dict() == b.to_json_dict()

    def test_size_histogram(self):
        m = MAPS[1]
        lab = bond_clusters(BondConfig(m, np.zeros(m.n_edges, np.uint8)))
        assert lab.size_histogram() == {1: m.n_vertices}
