import math

import numpy as np
import pytest

from hyperperc.clusters import BondBoundary, SpinBoundary
from hyperperc.errors import NonPositive, SupportMismatch, TooLarge
from hyperperc.graphs import (Graph, grid, k2, star_n, to_map, triangle,
                              two_triangles)
from hyperperc.oracle import (CertReport, ExactMeasure, TVReport,
                              _colorings_of_fk, _colorings_of_fk_compiled,
                              coupling_check, domination_evidence,
                              enumerate_fk, enumerate_ising,
                              es_bond_marginals, holley_check,
                              product_measure, xor_measure)
from hyperperc.planar_map import TilingSpec, build_ball
from hyperperc.samplers import ising_two_point_window


class TestExactMeasure:
    def test_accessors(self):
        mu = ExactMeasure(2, (0, 1), np.arange(4),
                          np.array([0.1, 0.2, 0.3, 0.4]))
        assert mu.marginal(0) == pytest.approx(0.6)
        assert mu.marginal(1) == pytest.approx(0.7)
        assert mu.magnetization() == pytest.approx(0.3)
        assert mu.expectation(np.array([1.0, 0.0, 0.0, 1.0])) == \
            pytest.approx(0.5)

    def test_unnormalized_rejected(self):
        with pytest.raises(NonPositive):
            ExactMeasure(1, (0,), np.arange(2), np.array([0.5, 0.6]))


class TestEnumerateIsing:
    def test_k2_agreement(self):
        for J in (0.0, 0.3, 1.2):
            mu = enumerate_ising(k2(), J)
            agree = mu.probs[0b00] + mu.probs[0b11]
            assert agree == pytest.approx(1.0 / (1.0 + math.exp(-2.0 * J)),
                                          abs=1e-14)

    def test_zero_coupling_uniform(self):
        mu = enumerate_ising(triangle(), 0.0)
        assert np.allclose(mu.probs, 1.0 / 8, atol=1e-15)

    def test_star_conditional_hits_window(self):
        # center conditioned on unanimous leaves sits exactly on the
        # two-point window endpoints
        d, J = 4, 0.35
        mu = enumerate_ising(star_n(d), J)
        lo, hi = ising_two_point_window(J, d)
        leaves_mask = ((1 << (d + 1)) - 1) & ~1
        up = mu.probs[leaves_mask | 1] / (mu.probs[leaves_mask | 1]
                                          + mu.probs[leaves_mask])
        down = mu.probs[1] / (mu.probs[1] + mu.probs[0])
        assert up == pytest.approx(hi, abs=1e-14)
        assert down == pytest.approx(lo, abs=1e-14)

    def test_clamped_boundaries(self):
        m = build_ball(TilingSpec.regular(4, 4), 1)
        J = 0.5
        mu_p = enumerate_ising(m, J, SpinBoundary.PLUS)
        mu_m = enumerate_ising(m, J, SpinBoundary.MINUS)
        bnd = m.boundary_vertices
        assert all(((mu_p.configs >> int(v)) & 1).all() for v in bnd)
        assert all(((mu_m.configs >> int(v)) & 1 == 0).all() for v in bnd)
        assert mu_p.magnetization() == pytest.approx(
            -mu_m.magnetization(), abs=1e-12)
        for v in range(m.n_vertices):
            if v not in mu_p.free_sites:
                continue
            assert mu_p.marginal(v) > 0.5

    def test_too_many_free_sites(self):
        with pytest.raises(TooLarge):
            enumerate_ising(build_ball(TilingSpec.regular(3, 7), 2), 0.3)


class TestEnumerateFK:
    def test_single_edge_closed_forms(self):
        for p in (0.2, 0.5, 0.8):
            free = enumerate_fk(k2(), p, 2.0)
            assert free.marginal(0) == pytest.approx(p / (2.0 - p),
                                                     abs=1e-14)
            wired = enumerate_fk(k2(), p, 2.0, BondBoundary.WIRED)
            assert wired.marginal(0) == pytest.approx(p, abs=1e-14)

    def test_q1_is_bernoulli_product(self):
        g = two_triangles()
        p = 0.37
        free = enumerate_fk(g, p, 1.0)
        wired = enumerate_fk(g, p, 1.0, BondBoundary.WIRED)
        pop = np.array([bin(m).count("1") for m in range(1 << g.m)])
        want = p ** pop * (1 - p) ** (g.m - pop)
        assert np.allclose(free.probs, want, atol=1e-15)
        assert np.allclose(wired.probs, want, atol=1e-15)

    def test_integer_q_matches_potts(self):
        # sum over q-colorings of prod_e ((1-p) + p [colors agree])
        # equals the random-cluster normalization, mask by mask
        g = triangle()
        p, q = 0.45, 3
        mu = enumerate_fk(g, p, float(q))
        z_rc = 0.0
        for mask in range(1 << g.m):
            o = bin(mask).count("1")
            k = 0
            parent = list(range(g.n))

            def find(x):
                while parent[x] != x:
                    x = parent[x]
                return x

            for e, (u, v) in enumerate(g.edges):
                if (mask >> e) & 1:
                    ru, rv = find(u), find(v)
                    if ru != rv:
                        parent[rv] = ru
            k = len({find(v) for v in range(g.n)})
            z_rc += p ** o * (1 - p) ** (g.m - o) * q ** k
        z_potts = 0.0
        for coloring in range(q ** g.n):
            colors = [(coloring // q ** v) % q for v in range(g.n)]
            w = 1.0
            for u, v in g.edges:
                w *= (1 - p) + p * (colors[u] == colors[v])
            z_potts += w
        assert z_rc == pytest.approx(z_potts, rel=1e-12)
        assert mu.probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_densities(self):
        g = triangle()
        assert enumerate_fk(g, 0.0, 2.0).probs[0] == pytest.approx(1.0)
        full = enumerate_fk(g, 1.0, 2.0)
        assert full.probs[(1 << g.m) - 1] == pytest.approx(1.0)

    def test_domain_checks(self):
        with pytest.raises(TooLarge):
            enumerate_fk(build_ball(TilingSpec.regular(3, 7), 2), 0.5, 2.0)
        with pytest.raises(NonPositive):
            enumerate_fk(triangle(), 1.2, 2.0)
        with pytest.raises(NonPositive):
            enumerate_fk(triangle(), 0.5, 0.0)


class TestCoupling:
    GRAPHS = [k2(), triangle(), star_n(4), two_triangles(), grid(2, 2)]

    @pytest.mark.parametrize("bc", [BondBoundary.FREE, BondBoundary.WIRED])
    def test_tv_vanishes(self, bc):
        for g in self.GRAPHS:
            for p in (0.2, 0.5, 0.8):
                rep = coupling_check(g, p, bc)
                assert rep.tv < 1e-12, (g.n, p, bc)

    def test_routes_agree(self):
        # python route against the compiled zeta-transform route
        g = two_triangles()
        ends = np.array(g.edges, dtype=np.int64)
        for glue in (None, np.array(g.boundary_set(), dtype=np.int64)):
            for p in (0.25, 0.6):
                a = _colorings_of_fk(g.n, ends, p, 2.0, glue)
                b = _colorings_of_fk_compiled(g.n, ends, p, 2.0, glue)
                assert np.max(np.abs(a - b)) < 1e-14

    def test_report_format(self):
        rep = coupling_check(k2(), 0.4)
        assert isinstance(rep, TVReport)
        assert "coupling TV distance" in str(rep)
        assert rep.n_sites == 2 and rep.boundary == "free"

    @pytest.mark.parametrize("bc", [BondBoundary.FREE, BondBoundary.WIRED])
    def test_bond_marginals_agree(self, bc):
        for g in (triangle(), two_triangles()):
            left, right = es_bond_marginals(g, 0.45, bc)
            assert np.max(np.abs(left - right)) < 1e-12


class TestHolley:
    def test_product_measures_ordered(self):
        lo, hi = product_measure(4, 0.3), product_measure(4, 0.6)
        rep = holley_check(lo, hi)
        assert isinstance(rep, CertReport)
        assert rep.passed and rep.witness is None
        back = holley_check(hi, lo)
        assert not back.passed
        assert back.margin < 0 and back.witness is not None

    def test_fk_monotone_in_density(self):
        lo = enumerate_fk(triangle(), 0.3, 2.0)
        hi = enumerate_fk(triangle(), 0.55, 2.0)
        assert holley_check(lo, hi).passed
        # Holley is a proof of domination; the exhaustive check must concur
        assert domination_evidence(lo, hi, mode="exhaustive").passed

    def test_lattice_mismatch(self):
        with pytest.raises(SupportMismatch):
            holley_check(product_measure(3, 0.4), product_measure(4, 0.4))

    def test_zero_weights_rejected(self):
        degenerate = enumerate_fk(triangle(), 0.0, 2.0)
        with pytest.raises(NonPositive):
            holley_check(degenerate, degenerate)

    def test_too_many_sites(self):
        big = product_measure(11, 0.4)
        with pytest.raises(TooLarge):
            holley_check(big, big)


class TestDomination:
    def test_temperatures_incomparable(self):
        # free measures at different couplings agree on every marginal but
        # differ on correlations, so neither direction dominates
        cold = enumerate_ising(k2(), 0.8)
        warm = enumerate_ising(k2(), 0.2)
        fwd = domination_evidence(cold, warm, mode="exhaustive")
        rev = domination_evidence(warm, cold, mode="exhaustive")
        assert not fwd.passed and not rev.passed
        assert fwd.witness_event == (3,)
        want = float(cold.probs[3] - warm.probs[3])
        assert fwd.max_violation == pytest.approx(want, abs=1e-14)

    def test_witness_is_an_up_set(self):
        rep = domination_evidence(enumerate_ising(k2(), 0.2),
                                  enumerate_ising(k2(), 0.8),
                                  mode="exhaustive")
        assert not rep.passed
        ev = set(rep.witness_event)
        for x in ev:
            for j in range(2):
                if not (x >> j) & 1:
                    assert (x | (1 << j)) in ev

    def test_marginal_mode(self):
        lo, hi = product_measure(8, 0.3), product_measure(8, 0.6)
        assert domination_evidence(lo, hi).mode == "marginal"
        assert domination_evidence(lo, hi).passed
        rep = domination_evidence(hi, lo)
        assert not rep.passed
        assert rep.max_violation == pytest.approx(0.3, abs=1e-12)

    def test_exhaustive_cap(self):
        big = product_measure(6, 0.4)
        with pytest.raises(TooLarge):
            domination_evidence(big, big, mode="exhaustive")

    def test_magnetization_ordering(self):
        m = to_map(grid(3, 3))
        for J in (0.1, 0.5, 1.0):
            mag = {bc: enumerate_ising(m, J, bc).magnetization()
                   for bc in SpinBoundary}
            assert mag[SpinBoundary.MINUS] < mag[SpinBoundary.FREE] \
                < mag[SpinBoundary.PLUS]
            assert mag[SpinBoundary.FREE] == pytest.approx(0.0, abs=1e-12)


class TestProductAndXor:
    def test_product_marginals(self):
        mu = product_measure(5, 0.37)
        for v in range(5):
            assert mu.marginal(v) == pytest.approx(0.37, abs=1e-13)

    def test_xor_of_product(self):
        rho = 0.3
        mu = xor_measure(product_measure(4, rho))
        same = rho * rho + (1 - rho) * (1 - rho)
        for v in range(4):
            assert mu.marginal(v) == pytest.approx(same, abs=1e-13)

    def test_xor_matches_brute_force(self):
        mu = enumerate_ising(triangle(), 0.4)
        got = xor_measure(mu)
        n = 3
        want = np.zeros(1 << n)
        for a in range(1 << n):
            for b in range(1 << n):
                x = (~(a ^ b)) & ((1 << n) - 1)
                want[x] += mu.probs[a] * mu.probs[b]
        assert np.allclose(got.probs, want, atol=1e-14)

    def test_xor_magnetization_squares(self):
        # E[sigma1 sigma2] at a site is E[sigma]^2 by independence
        mu = enumerate_ising(to_map(grid(3, 3)), 0.4, SpinBoundary.PLUS)
        # clamped lattice is not fully free, so the convolution refuses
        with pytest.raises(SupportMismatch):
            xor_measure(mu)
        free = enumerate_ising(triangle(), 0.7)
        x = xor_measure(free)
        for v in range(3):
            s = 2.0 * free.marginal(v) - 1.0
            assert 2.0 * x.marginal(v) - 1.0 == pytest.approx(s * s,
                                                              abs=1e-13)

    def test_caps(self):
        with pytest.raises(TooLarge):
            xor_measure(product_measure(13, 0.5))
        with pytest.raises(NonPositive):
            product_measure(3, 0.0)
