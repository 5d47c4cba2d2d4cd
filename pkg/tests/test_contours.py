from collections import Counter

import numpy as np
import pytest

from hyperperc.clusters import SiteConfig, site_clusters
from hyperperc.contours import (BOUNDARY_PATH, CYCLE, attach_proxy,
                                boundary_singleton_count, derive,
                                eta_contours, eta_structure_check,
                                face_parity_check, phi_contour_identity,
                                phi_contours, phi_plus_contours,
                                proxy_triple)
from hyperperc.clusters import label_site_clusters
from hyperperc.errors import MapMismatch
from hyperperc.graphs import grid, to_map
from hyperperc.planar_map import TilingSpec, build_ball, superpose

HEPT2 = build_ball(TilingSpec.regular(3, 7), 2)
SQUARE2 = build_ball(TilingSpec.regular(4, 4), 2)
GRID33 = to_map(grid(3, 3))


def random_configs(m, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield SiteConfig(m, (rng.random(m.n_vertices)
                             < rng.random()).astype(np.uint8))


class TestDerive:
    @pytest.mark.parametrize("m", [HEPT2, SQUARE2], ids=["hept", "square"])
    def test_complementarity(self, m):
        for omega in random_configs(m, 100, 31):
            cfgs = derive(omega)
            assert np.all(cfgs.phi.open_edges
                          + cfgs.phi_plus.open_edges == 1)

    def test_phi_is_agreement(self):
        ends = HEPT2.edge_endpoints()
        for omega in random_configs(HEPT2, 30, 32):
            phi = derive(omega).phi.open_edges
            agree = omega.states[ends[:, 0]] == omega.states[ends[:, 1]]
            assert np.array_equal(phi.astype(bool), agree)

    def test_half_edges_copy_their_edge(self):
        t_sup = superpose(HEPT2)
        prim = t_sup.primal_half_edges
        for omega in random_configs(HEPT2, 20, 33):
            cfgs = derive(omega)
            phi, bar = cfgs.phi.open_edges, cfgs.bar_phi.open_edges
            assert np.array_equal(bar[prim[:, 0]], phi)
            assert np.array_equal(bar[prim[:, 1]], phi)

    def test_eta_complements_bar_phi(self):
        for omega in random_configs(SQUARE2, 20, 34):
            cfgs = derive(omega)
            assert np.all(cfgs.bar_phi.open_edges
                          + cfgs.eta.open_edges == 1)

    def test_carrier_maps(self):
        omega = SiteConfig(HEPT2, np.ones(HEPT2.n_vertices, np.uint8))
        cfgs = derive(omega)
        assert cfgs.phi.map is HEPT2
        assert cfgs.phi.open_edges.shape == (HEPT2.n_edges,)
        assert cfgs.phi_plus.open_edges.shape == (HEPT2.n_edges,)
        assert cfgs.bar_phi.map is cfgs.maps.bar
        assert cfgs.eta.map is cfgs.maps.bar_dual

    def test_foreign_superposition_rejected(self):
        omega = SiteConfig(HEPT2, np.ones(HEPT2.n_vertices, np.uint8))
        with pytest.raises(MapMismatch):
            derive(omega, maps=superpose(SQUARE2))


class TestFaceParity:
    @pytest.mark.parametrize("m", [HEPT2, SQUARE2, GRID33],
                             ids=["hept", "square", "grid"])
    def test_always_even(self, m):
        assert all(face_parity_check(omega)
                   for omega in random_configs(m, 150, 41))


class TestEtaStructure:
    @pytest.mark.parametrize("m", [HEPT2, SQUARE2], ids=["hept", "square"])
    def test_random_configs_decompose(self, m):
        for omega in random_configs(m, 150, 51):
            rep = eta_structure_check(derive(omega))
            assert set(rep.component_shapes) <= {CYCLE, BOUNDARY_PATH}

    def test_constant_config_rings_every_face(self):
        # all-equal states leave the dual half of every edge closed, so eta
        # is one ring per interior face; rings at the rim lose their outer
        # quads and shrink to doubled edges
        omega = SiteConfig(HEPT2, np.ones(HEPT2.n_vertices, np.uint8))
        cfgs = derive(omega)
        rep = eta_structure_check(cfgs)
        n_int = len(HEPT2.interior_faces())
        assert rep.contour_count == n_int == 61
        assert rep.component_shapes == [CYCLE] * n_int
        _, _, edge_counts = eta_contours(cfgs)
        assert Counter(edge_counts.tolist()) == {2: 33, 3: 28}

    def test_single_flip_census(self):
        # flipping one interior vertex of degree 7 splices the 7 face rings
        # around it into one 7-ring and one 14-ring
        m = build_ball(TilingSpec.regular(3, 7), 3)
        x = np.ones(m.n_vertices, np.uint8)
        x[0] = 0
        cfgs = derive(SiteConfig(m, x))
        rep = eta_structure_check(cfgs)
        assert set(rep.component_shapes) == {CYCLE}
        _, _, edge_counts = eta_contours(cfgs)
        assert Counter(edge_counts.tolist()) == {2: 87, 3: 87, 7: 1, 14: 1}

    def test_checkerboard_on_grid(self):
        states = np.fromiter(((r + c) % 2 for r in range(3)
                              for c in range(3)), np.uint8)
        omega = SiteConfig(GRID33, states)
        rep = eta_structure_check(derive(omega))
        assert set(rep.component_shapes) <= {CYCLE, BOUNDARY_PATH}
        assert phi_contours(omega).contour_count == 0
        assert np.all(derive(omega).phi_plus.open_edges == 1)


class TestPhiContours:
    def test_constant(self):
        omega = SiteConfig(HEPT2, np.zeros(HEPT2.n_vertices, np.uint8))
        rep = phi_contours(omega)
        assert rep.contour_count == 1
        assert rep.component_shapes == [BOUNDARY_PATH]
        assert phi_plus_contours(omega).contour_count == 0

    def test_single_flip_dual_ring(self):
        x = np.ones(HEPT2.n_vertices, np.uint8)
        x[0] = 0
        rep = phi_plus_contours(SiteConfig(HEPT2, x))
        assert rep.contour_count == 1
        assert rep.component_shapes == [CYCLE]
        assert rep.boundary_touching == 0

    @pytest.mark.parametrize("m", [HEPT2, SQUARE2], ids=["hept", "square"])
    def test_identity_with_singletons(self, m):
        # every boundary-touching cluster of two or more vertices carries
        # exactly one contour; singletons carry none
        for omega in random_configs(m, 150, 61):
            bt, s_total, singles = phi_contour_identity(omega)
            assert bt == s_total - singles
            if singles == 0:
                assert bt == s_total

    def test_singleton_count_definition(self):
        ends = HEPT2.edge_endpoints()
        bmask = HEPT2.boundary_vertex_mask()
        for omega in random_configs(HEPT2, 40, 62):
            got = boundary_singleton_count(omega)
            agree = omega.states[ends[:, 0]] == omega.states[ends[:, 1]]
            deg = np.zeros(HEPT2.n_vertices, np.int64)
            np.add.at(deg, ends[agree].ravel(), 1)
            assert got == int(((deg == 0) & bmask).sum())


class TestProxy:
    def test_constant_triple(self):
        omega = SiteConfig(HEPT2, np.ones(HEPT2.n_vertices, np.uint8))
        assert proxy_triple(omega) == (0, 1, 0)

    def test_triple_matches_components(self):
        for omega in random_configs(SQUARE2, 60, 71):
            s0, s1, k_plus = proxy_triple(omega)
            assert s0 == site_clusters(omega, 0).boundary_cluster_count()
            assert s1 == site_clusters(omega, 1).boundary_cluster_count()
            assert k_plus == phi_plus_contours(omega).boundary_touching

    def test_attach_proxy(self):
        omega = SiteConfig(HEPT2, np.zeros(HEPT2.n_vertices, np.uint8))
        base = label_site_clusters(omega)
        rep = attach_proxy(base, omega)
        assert rep.proxy_triple == proxy_triple(omega)
        assert rep.sizes == base.sizes
        assert rep.cluster_count_by_state == base.cluster_count_by_state
        assert base.proxy_triple is None
