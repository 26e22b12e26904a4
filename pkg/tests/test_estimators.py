import itertools
import math

import numpy as np
import pytest

from motifboot.estimators import (BootstrapConfig, DegenerateDensity, exact_count, edge_density, subgraph_bootstrap,
                                  transitivity, transitivity_from, transitivity_gradient, uniform_bootstrap)
from motifboot.graph import Graph, induced_subgraph
from motifboot.motif import cycle, edge, triangle, vee, wheel

from conftest import complete_graph, cycle_graph, er_graph


def test_edge_density():
    assert edge_density(complete_graph(5)) == 1.0
    assert edge_density(cycle_graph(4)) == pytest.approx(2 / 3)
    assert edge_density(Graph.from_edges(10, [])) == 0.0
    with pytest.raises(ValueError):
        edge_density(Graph.from_edges(1, []))


def test_exact_examples():
    assert exact_count(complete_graph(3), triangle()).value == 1.0
    c4 = cycle_graph(4)
    assert exact_count(c4, edge()).value == pytest.approx(2 / 3)
    assert exact_count(c4, vee()).value == pytest.approx(1 / 3)
    assert exact_count(c4, edge()).normalized == pytest.approx(1.0)
    with pytest.raises(DegenerateDensity):
        exact_count(Graph.from_edges(5, []), edge())
    with pytest.raises(ValueError):
        exact_count(c4, wheel(1, 4))


def test_scale_contract(rng):
    g = er_graph(15, 0.4, rng)
    for r in (edge(), vee(), triangle(), cycle(4)):
        est = exact_count(g, r)
        assert 0 <= est.value <= 1
        assert est.normalized == pytest.approx(est.value / est.rho_hat ** r.e, rel=1e-14)


def test_config_validation():
    with pytest.raises(ValueError):
        BootstrapConfig("uniform", 2, 0, m=None)
    with pytest.raises(ValueError):
        BootstrapConfig.subgraph((1, 0), 2)
    with pytest.raises(ValueError):
        BootstrapConfig.uniform(10, 0)
    with pytest.raises(ValueError):
        BootstrapConfig("other")
    cfg = BootstrapConfig.subgraph((1, 0.5), 3)
    assert cfg.q_for(4) == (1.0, 0.5, 0.5, 0.5)
    assert cfg.q_for(1) == (1.0,)


def test_uniform_complete_host():
    res = uniform_bootstrap(complete_graph(6), triangle(), BootstrapConfig.uniform(4, 5, seed=2))
    assert (res.iterates == 1.0).all() and res.value == 1.0


def test_degenerate_identity(rng):
    g = er_graph(14, 0.35, rng)
    for r in (edge(), vee(), triangle(), cycle(4), wheel(1, 3)):
        ex = exact_count(g, r)
        for est in (uniform_bootstrap(g, r, BootstrapConfig.uniform(g.n, 3, seed=1)),
                    subgraph_bootstrap(g, r, BootstrapConfig.subgraph((1,) * r.p, 3, seed=1))):
            assert est.value == ex.value and est.normalized == ex.normalized


def test_uniform_exhaustive_chord():
    g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4)])
    r = edge()
    vals = [exact_count(induced_subgraph(g, s), r, allow_degenerate=True).value
            for s in itertools.combinations(range(5), 3)]
    assert np.mean(vals) == pytest.approx(exact_count(g, r).value, abs=1e-15)


def test_subgraph_coin_oracle():
    # 4-cycle, vee, q = (1, 1, 0.5): the 4 leaves are kept independently
    g = cycle_graph(4)
    r = vee()
    M = r.placements(4)
    mean = sum(math.comb(4, k) * 0.5 ** 4 * (k / (0.5 * M)) for k in range(5))
    assert mean == pytest.approx(1 / 3, abs=1e-15)
    draws = [subgraph_bootstrap(g, r, BootstrapConfig.subgraph((1, 1, 0.5), 1, seed=s)).value for s in range(400)]
    assert set(np.round(np.array(draws) * 0.5 * M).astype(int)) <= set(range(5))
    assert abs(np.mean(draws) - 1 / 3) < 4 * np.std(draws) / 20


def test_subgraph_single_leaf():
    vals = {subgraph_bootstrap(complete_graph(3), triangle(), BootstrapConfig.subgraph((0.5, 1, 1), 1, seed=s)).value
            for s in range(50)}
    assert vals == {0.0, 2.0}


def test_subgraph_warning_and_validation(rng):
    g = er_graph(12, 0.3, rng)
    res = subgraph_bootstrap(g, triangle(), BootstrapConfig.subgraph((0.1, 0.1, 0.1), 2, seed=0))
    assert res.warnings and "few sampled leaves" in res.warnings[0]
    with pytest.raises(ValueError):
        subgraph_bootstrap(g, triangle(), BootstrapConfig.subgraph((1, 1), 2))
    with pytest.raises(ValueError):
        uniform_bootstrap(g, triangle(), BootstrapConfig.uniform(2, 2))


def test_determinism(rng):
    g = er_graph(30, 0.2, rng)
    cfg = BootstrapConfig.subgraph((1, 0.5, 0.5), 4, seed=7)
    a, b = subgraph_bootstrap(g, vee(), cfg), subgraph_bootstrap(g, vee(), cfg)
    assert np.array_equal(a.iterates, b.iterates)
    cfg = BootstrapConfig.uniform(12, 4, seed=7)
    assert np.array_equal(uniform_bootstrap(g, vee(), cfg).iterates, uniform_bootstrap(g, vee(), cfg).iterates)


def test_transitivity_examples():
    assert transitivity(complete_graph(6)) == pytest.approx(0.5)
    tree = Graph.from_edges(5, [(0, 1), (0, 2), (2, 3), (2, 4)])
    assert transitivity(tree) == 0.0
    k4e = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    rho = 5 / 6
    # vees are paths of length two: sum of C(d, 2) over degrees (3, 3, 2, 2) = 8 of 12 placements
    n_vee = sum(math.comb(int(d), 2) for d in k4e.degrees)
    assert n_vee == 8
    a, b = rho ** -3 * 0.5, rho ** -2 * n_vee / 12
    assert transitivity(k4e) == pytest.approx(a / (a + b), rel=1e-14)
    assert transitivity((0.5, 8 / 12, rho)) == pytest.approx(a / (a + b), rel=1e-14)
    with pytest.raises(ValueError):
        transitivity_from(0.0, 0.0, 0.5)


def test_transitivity_gradient():
    assert np.allclose(transitivity_gradient(1.0, 1.0), [0.25, -0.25])
    with pytest.raises(ValueError):
        transitivity_gradient(0.0, 0.0)
