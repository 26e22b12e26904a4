import itertools

import numpy as np
import pytest

from motifboot.estimators import edge_density, exact_count
from motifboot.models import (GraphonSpec, SbmSpec, constant_graphon, highschool_sbm, pfa_graphon, reference_sbm,
                              sample_graphon, sample_sbm, sbm_moment)
from motifboot.motif import cycle, edge, triangle, vee, wheel


def test_spec_validation():
    with pytest.raises(ValueError):
        SbmSpec((0.5, 0.5), ((0.4, 0.5), (0.4, 0.7)))
    with pytest.raises(ValueError):
        SbmSpec((0.6, 0.6), ((0.1, 0.1), (0.1, 0.1)))
    with pytest.raises(ValueError):
        SbmSpec((1.0,), ((2.0,),), 1.0)
    with pytest.raises(ValueError):
        GraphonSpec(lambda u, v: u * 0 + 1, 0.0)
    spec = reference_sbm(2000, 0.5)
    assert spec.S[0][1] == spec.S[1][0] == 0.45
    assert spec.s_n == pytest.approx(5 * 0.5 * np.sqrt(2000) / 2000)


def test_er_block_model():
    n, p = 300, 0.05
    spec = SbmSpec((1.0,), ((1.0,),), p)
    rhos = np.array([edge_density(sample_sbm(n, spec, [1, k])) for k in range(100)])
    se = np.sqrt(p * (1 - p) / (n * (n - 1) / 2) / len(rhos))
    assert abs(rhos.mean() - p) < 4 * se


def test_reference_mean_degree():
    n = 2000
    spec = reference_sbm(n, 0.5)
    degs = [2 * sample_sbm(n, spec, [2, k]).num_edges / n for k in range(20)]
    assert np.mean(degs) == pytest.approx((n - 1) * spec.rho, rel=0.01)


def test_single_block_labels():
    spec = SbmSpec((1.0, 0.0), ((0.2, 0.1), (0.1, 0.3)))
    g, labels = sample_sbm(400, spec, 3, return_labels=True)
    assert (labels == 0).all()
    assert edge_density(g) == pytest.approx(0.2, abs=4 * np.sqrt(0.2 * 0.8 / (400 * 399 / 2)))


def test_block_rates():
    spec = SbmSpec((0.5, 0.5), ((0.02, 0.1), (0.1, 0.3)))
    g, lab = sample_sbm(600, spec, 4, return_labels=True)
    e = g.edges()
    a, b = lab[e[:, 0]], lab[e[:, 1]]
    n0, n1 = (lab == 0).sum(), (lab == 1).sum()
    for (x, y), pairs in {(0, 0): n0 * (n0 - 1) / 2, (1, 1): n1 * (n1 - 1) / 2, (0, 1): n0 * n1}.items():
        k = ((a == x) & (b == y) | (a == y) & (b == x)).sum()
        f = spec.F[x, y]
        assert abs(k / pairs - f) < 5 * np.sqrt(f * (1 - f) / pairs)


def test_constant_graphon_matches_er():
    n, rho = 200, 0.08
    a = [edge_density(sample_graphon(n, constant_graphon(rho), [5, k])) for k in range(200)]
    b = [edge_density(sample_sbm(n, SbmSpec((1.0,), ((1.0,),), rho), [6, k])) for k in range(200)]
    se = np.sqrt(np.var(a, ddof=1) / 200 + np.var(b, ddof=1) / 200)
    assert abs(np.mean(a) - np.mean(b)) < 4 * se
    assert abs(np.mean(a) - rho) < 4 * np.std(a) / np.sqrt(200)


def test_pfa_degree():
    n, lam = 3000, 10.0
    gs = [sample_graphon(n, pfa_graphon(lam / n), [7, k]) for k in range(5)]
    mean_deg = np.mean([2 * g.num_edges / n for g in gs])
    assert mean_deg == pytest.approx(lam, rel=0.1)
    er = sample_graphon(n, constant_graphon(lam / n), 8)
    assert gs[0].degrees.max() > 3 * er.degrees.max()


def test_graphon_latent_and_cap():
    g, xi = sample_graphon(100, pfa_graphon(0.5), 9, return_latent=True)
    assert xi.shape == (100,) and ((xi >= 0) & (xi < 1)).all()
    h = pfa_graphon(0.5).h(np.array([0.999999]), np.array([0.999999]))
    assert h[0] == 1.0
    with pytest.raises(ValueError):
        GraphonSpec(lambda u, v: np.full(np.broadcast(u, v).shape, np.nan), 0.1).h(np.zeros(2), np.zeros(2))


def test_moment_identities():
    er = SbmSpec((1.0,), ((1.0,),), 0.3)
    for r in (edge(), vee(), triangle(), cycle(4), wheel(1, 3)):
        assert sbm_moment(r, er) == pytest.approx(1.0, rel=1e-12)
    for spec in (reference_sbm(1000), highschool_sbm()):
        assert sbm_moment(edge(), spec) == pytest.approx(1.0, rel=1e-12)


def test_moment_vee_triple_loop():
    spec = highschool_sbm()
    pi, F, rho = np.array(spec.pi), spec.F, spec.rho
    tot = sum(pi[a] * pi[b] * pi[c] * F[a, b] * F[a, c] for a, b, c in itertools.product(range(2), repeat=3))
    assert sbm_moment(vee(), spec) == pytest.approx(tot / rho ** 2, rel=1e-12)


def test_highschool_triangle():
    assert 0.005 <= sbm_moment(triangle(), highschool_sbm()) <= 0.015


def test_monte_carlo_mean_approaches_moment():
    n = 2000
    spec = reference_sbm(n, 0.5)
    for r in (edge(), vee(), triangle()):
        vals = np.array([exact_count(sample_sbm(n, spec, [10, k]), r).normalized for k in range(40)])
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        target = sbm_moment(r, spec)
        assert abs(vals.mean() - target) < 4 * se + 1e-12 * target


def test_moment_limit():
    spec = SbmSpec(tuple([0.1] * 10), tuple(tuple(0.1 for _ in range(10)) for _ in range(10)))
    with pytest.raises(ValueError):
        sbm_moment(wheel(1, 6), spec)
