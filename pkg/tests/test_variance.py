import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from motifboot.estimators import BootstrapConfig, DegenerateDensity, exact_count, transitivity_gradient
from motifboot.graph import Graph
from motifboot.motif import cycle, edge, triangle, vee, wheel
from motifboot.variance import (CovarianceMatrix, ScopeError, _uniform_pairs, bootstrap_covariance,
                                bootstrap_variance, correction_x, correction_y, count_covariance, covariance_matrix,
                                delta_variance, empirical_covariance, empirical_variance, merged_pair_counts,
                                pair_counts)

from conftest import complete_graph, er_graph


def brute_pairs(g, r1, r2):
    """Ordered pairs of copies by shared-vertex count, from explicit copy lists."""
    A = g.adjacency_matrix()

    def copies(r):
        out = set()
        for perm in itertools.permutations(range(g.n), r.p):
            if all(A[perm[a], perm[b]] for a, b in r.edges):
                out.add((frozenset(perm), frozenset(frozenset((perm[a], perm[b])) for a, b in r.edges)))
        return [v for v, _ in out]

    c1, c2 = copies(r1), copies(r2)
    cnt = np.zeros(max(r1.p, r2.p) + 1)
    for v1 in c1:
        for v2 in c2:
            cnt[len(v1 & v2)] += 1
    return cnt, len(c1), len(c2)


def test_correction_x():
    n = 10 ** 6
    exact = 1 - Fraction((n - 3) * (n - 4) * (n - 5), n * (n - 1) * (n - 2))
    assert correction_x(n, 3) == pytest.approx(float(exact), rel=1e-9)
    assert correction_x(n, 3) == pytest.approx(9e-6, rel=1e-3)
    for n in range(2, 21):
        assert correction_x(n, 1) == pytest.approx(1 / n, rel=1e-12)
        for p in range(1, n // 2 + 1):
            exact = 1 - math.factorial(n - p) ** 2 / (math.factorial(n) * math.factorial(n - 2 * p))
            assert correction_x(n, p) == pytest.approx(exact, rel=1e-12, abs=1e-15)
    assert correction_y(9, 2, 3) == pytest.approx(
        1 - math.factorial(7) * math.factorial(6) / (math.factorial(9) * math.factorial(4)), rel=1e-12)
    with pytest.raises(ValueError, match="host too small"):
        correction_x(5, 3)


def test_pair_counts_brute_force(rng):
    pats = [vee(), triangle(), edge(), wheel(1, 3)]
    for _ in range(3):
        g = er_graph(8, 0.5, rng)
        pc = pair_counts(g, pats)
        pm, _ = merged_pair_counts(g, pats, overlaps="all")
        for j, l in itertools.product(range(len(pats)), repeat=2):
            cnt, n1, _ = brute_pairs(g, pats[j], pats[l])
            for k in range(1, min(pats[j].p, pats[l].p) + 1):
                assert pc.pairs[k][j, l] == cnt[k]
                assert pm.pairs[k][j, l] == cnt[k]
            assert pc.N[j] == n1


def test_covariance_unbiased_exhaustive():
    # average over every graph on 6 vertices, weighted by its G(6, 0.35) probability
    n, pe = 6, 0.35
    pairs = list(itertools.combinations(range(n), 2))
    pats = [edge(), vee(), triangle()]
    EN, ENN, EC = np.zeros(3), np.zeros((3, 3)), np.zeros((3, 3))
    for mask in range(1 << len(pairs)):
        es = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        w = pe ** len(es) * (1 - pe) ** (len(pairs) - len(es))
        pc = pair_counts(Graph.from_edges(n, es), pats)
        EN += w * pc.N
        ENN += w * np.outer(pc.N, pc.N)
        EC += w * count_covariance(pc, n, "all")
    cov = ENN - np.outer(EN, EN)
    assert np.abs(EC - cov).max() <= 1e-11 * np.abs(cov).max()


def test_complete_graph_has_zero_variance():
    g = complete_graph(7)
    for r in (edge(), vee(), triangle()):
        assert abs(empirical_variance(g, r).sigma2) < 1e-9


def test_literal_triangle_k6():
    # leading terms on K6: 20 triangles, 9 others share one vertex with each, x = 1 - 3!^2/6!
    g = complete_graph(6)
    x = 1 - 36 / 720
    cov_n = (20 * 9 + 20 - x * 400) / (1 - x)
    hand = 6 * cov_n / 20 ** 2
    for method in ("merged", "moments"):
        est = empirical_variance(g, triangle(), overlaps="leading", density="fixed", method=method)
        assert est.sigma2 == pytest.approx(hand, rel=1e-12)
        assert est.correction == pytest.approx(x, rel=1e-12)


def test_star_host_only_vee_terms():
    star = Graph.from_edges(7, [(0, i) for i in range(1, 7)])
    est = empirical_variance(star, vee(), overlaps="leading", density="fixed", method="merged")
    assert set(est.terms) == {"vee|vee"}
    counted = {k: v for k, v in est.meta["merged"].items() if v["count"] > 0}
    assert counted and all("triangle" not in k for k in counted)
    assert np.isfinite(est.sigma2)


def test_covariance_vs_variance_relation(rng):
    g = er_graph(12, 0.5, rng)
    r = vee()
    var = empirical_variance(g, r, overlaps="leading", density="fixed")
    cov = empirical_covariance(g, r, r, overlaps="leading", density="fixed")
    pc = pair_counts(g, [r])
    x = correction_x(g.n, r.p)
    scale = 1.0 / (r.placements(g.n) * var.meta["rho_hat"] ** r.e)
    gap = g.n * scale ** 2 * pc.pairs[r.p][0, 0] / (1 - x)
    assert var.sigma2 - cov.sigma2 == pytest.approx(gap, rel=1e-10)


def test_edge_vee_on_path():
    g = Graph.from_edges(6, [(i, i + 1) for i in range(5)])
    cov = empirical_covariance(g, edge(), vee(), overlaps="all", density="fixed")
    cnt, n_e, n_v = brute_pairs(g, edge(), vee())
    y = correction_y(6, 2, 3)
    rho = 5 / 15
    C = (cnt[1:].sum() - y * n_e * n_v) / (1 - y)
    hand = 6 * C / (edge().placements(6) * rho * vee().placements(6) * rho ** 2)
    assert cov.sigma2 == pytest.approx(hand, rel=1e-12)


def test_scope_and_degenerate():
    g = er_graph(10, 0.5, np.random.default_rng(0))
    paw = wheel(1, 2).__class__.from_edges([(0, 1), (1, 2), (2, 0), (2, 3)])
    with pytest.raises(ScopeError):
        empirical_variance(g, paw)
    with pytest.raises(DegenerateDensity):
        empirical_variance(Graph.from_edges(10, []), edge())
    with pytest.raises(DegenerateDensity):
        empirical_covariance(Graph.from_edges(10, []), edge(), vee())


def test_degenerate_bootstrap_equality(rng):
    g = er_graph(20, 0.3, rng)
    for r in (vee(), triangle(), cycle(4)):
        ex = empirical_variance(g, r)
        for cfg in (BootstrapConfig.subgraph((1,) * r.p, 2, seed=3), BootstrapConfig.uniform(g.n, 2, seed=3)):
            bv = bootstrap_variance(g, r, cfg)
            assert bv.sigma2 == ex.sigma2 and bv.resampling == 0.0
    ec = empirical_covariance(g, vee(), triangle())
    bc = bootstrap_covariance(g, vee(), triangle(), BootstrapConfig.subgraph((1, 1, 1), 2))
    assert bc.sigma2 == ec.sigma2


def test_uniform_pairs_exhaustive(rng):
    g = er_graph(8, 0.5, rng)
    pats = [vee(), edge()]
    m = 6
    subsets = list(itertools.combinations(range(8), m))
    pc = _uniform_pairs(g, pats, BootstrapConfig.uniform(m, 2), subsets=subsets)
    ex = pair_counts(g, pats)
    assert np.allclose(pc.N, ex.N, rtol=1e-12)
    for k in range(1, 4):
        assert np.allclose(pc.pairs[k], ex.pairs[k], rtol=1e-12, atol=1e-9)


def test_subgraph_pairs_unbiased(rng):
    g = er_graph(11, 0.45, rng)
    pats = [vee(), triangle(), edge()]
    ex = pair_counts(g, pats)
    R = 600
    vals = []
    for r in range(R):
        pc = pair_counts(g, pats, BootstrapConfig.subgraph((1, 0.7, 0.5), B=3, seed=r))
        vals.append(np.concatenate([pc.N, pc.NN.ravel()] + [a.ravel() for a in pc.pairs[1:]]))
    vals = np.array(vals)
    target = np.concatenate([ex.N, np.outer(ex.N, ex.N).ravel()] + [a.ravel() for a in ex.pairs[1:]])
    se = vals.std(axis=0, ddof=1) / np.sqrt(R)
    z = (vals.mean(axis=0) - target) / np.where(se > 0, se, 1)
    assert np.abs(z).max() < 4.5


def test_covariance_matrix_structure(rng):
    g = er_graph(40, 0.2, rng)
    cm = covariance_matrix(g, [vee(), triangle()])
    assert np.allclose(cm.sigma, cm.sigma.T)
    assert cm.sigma[0, 0] == pytest.approx(empirical_variance(g, vee()).sigma2, rel=1e-12)
    assert cm.sigma[0, 1] == pytest.approx(empirical_covariance(g, vee(), triangle()).sigma2, rel=1e-12)
    assert cm.estimates[1] == pytest.approx(exact_count(g, triangle()).normalized, rel=1e-12)
    bad = CovarianceMatrix(cm.motifs, np.array([[1.0, 2.0], [2.0, 1.0]]), cm.estimates, np.zeros((2, 2)))
    fixed = bad.psd()
    assert fixed.repaired and np.linalg.eigvalsh(fixed.sigma).min() > -1e-12


def test_delta_variance():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert delta_variance([1, 1], S, [0, 0]) == 0.0
    assert delta_variance([1, 1], S, [1, 0]) == 2.0
    g = transitivity_gradient(1.0, 1.0)
    assert delta_variance([1, 1], S, g) == pytest.approx((2.0 - 2 * 0.5 + 1.0) / 16)
    with pytest.raises(ValueError):
        delta_variance([1, 1, 1], S, [1, 0])
    with pytest.raises(ValueError):
        delta_variance([1, 1], S, [np.inf, 0])


def test_normalisation_convention_cancels(rng):
    # scaling every count and its placement normaliser by the same factor leaves sigma2 unchanged
    g = er_graph(30, 0.25, rng)
    pc = pair_counts(g, [vee()])
    x = correction_x(g.n, 3)
    M = vee().placements(g.n)
    for c in (1.0, 2.0, 1 / 6):
        A = sum(a[0, 0] for a in pc.pairs[1:]) * c * c
        NN = pc.NN[0, 0] * c * c
        s2 = g.n * (A - x * NN) / (1 - x) / (c * M) ** 2
        if c == 1.0:
            base = s2
        assert s2 == pytest.approx(base, rel=1e-12)
    assert base == pytest.approx(empirical_variance(g, vee(), density="fixed").sigma2 *
                                 (g.num_edges * 2 / (g.n * (g.n - 1))) ** 4, rel=1e-10)


def test_sbm_cycle4_bootstrap_ratio():
    from motifboot.models import reference_sbm, sample_sbm

    n = 2000
    g = sample_sbm(n, reference_sbm(n), rng=[4, 0])
    ev = empirical_variance(g, cycle(4))
    bv = bootstrap_variance(g, cycle(4), BootstrapConfig.subgraph((1, 1, 0.5, 0.5), 2, seed=1))
    assert 0.8 <= bv.sigma2 / ev.sigma2 <= 1.25
