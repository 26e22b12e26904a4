"""Confidence intervals and normal-theory tests for normalised counts.

Variances are on the ``sqrt(n)`` scale throughout: an interval is
``est +- z * sqrt(sigma2 / n)``. Negative variance estimates are clamped to
zero and flagged ``degenerate``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .estimators import BootstrapConfig, edge_density, transitivity_gradient
from .motif import MotifPattern, triangle, vee
from .variance import _check_scope, covariance_matrix, delta_variance
from .models import GraphonSpec, SbmSpec, sample_graphon, sample_sbm, sbm_moment

log = logging.getLogger(__name__)

ALTERNATIVES = ("two-sided", "less", "greater")
MIN_REPS = 50
SCALE = "sqrt(n)"


def _z_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    return float(stats.norm.ppf(0.5 + level / 2.0))


def _clamp(sigma2: float) -> tuple[float, bool]:
    if not np.isfinite(sigma2):
        raise ValueError(f"variance is not finite: {sigma2}")
    if sigma2 < 0.0:
        return 0.0, True
    return float(sigma2), False


def _p_value(z: float, alternative: str) -> float:
    if alternative == "less":
        return float(stats.norm.cdf(z))
    if alternative == "greater":
        return float(stats.norm.sf(z))
    if alternative == "two-sided":
        return float(min(1.0, 2.0 * stats.norm.sf(abs(z))))
    raise ValueError(f"alternative must be one of {ALTERNATIVES}")


def _z(diff: float, se: float) -> float:
    if se > 0.0:
        return diff / se
    if diff == 0.0:
        return 0.0
    return math.copysign(math.inf, diff)


def confidence_interval(est: float, sigma2: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Normal interval ``est +- z * sqrt(sigma2 / n)``; negative ``sigma2`` counts as 0."""
    z = _z_level(level)
    if n < 1:
        raise ValueError("n must be at least 1")
    s2, _ = _clamp(sigma2)
    half = z * math.sqrt(s2 / n)
    return est - half, est + half


@dataclass
class TestResult:
    """Outcome of a z (or chi-square) test.

    ``statistic`` is z for the scalar tests and the quadratic form for
    ``multivariate_test``, whose reference law is chi-square on ``df``.
    """

    statistic: float
    p_value: float
    alternative: str
    estimates: list
    variances: list
    n: int
    n2: int | None = None
    df: int | None = None
    degenerate: bool = False
    reference: str = "normal"
    notes: list = field(default_factory=list)

    __test__ = False  # keep pytest from collecting this class

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value, "alternative": self.alternative,
                "estimates": self.estimates, "variances": self.variances, "n": self.n, "n2": self.n2,
                "df": self.df, "degenerate": self.degenerate, "reference": self.reference,
                "scale": SCALE, "notes": list(self.notes)}


def one_sample_test(est: float, sigma2: float, n: int, null_value: float,
                    alternative: str = "two-sided") -> TestResult:
    """``z = sqrt(n) (est - null) / sqrt(sigma2)``."""
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    s2, clamped = _clamp(sigma2)
    z = _z(est - null_value, math.sqrt(s2 / n))
    res = TestResult(z, _p_value(z, alternative), alternative, [est, null_value], [sigma2], n,
                     degenerate=clamped or s2 == 0.0)
    if clamped:
        res.notes.append("negative variance clamped to 0")
    return res


def two_sample_test(est1: float, sigma2_1: float, n1: int, est2: float, sigma2_2: float, n2: int,
                    alternative: str = "two-sided") -> TestResult:
    """``z = (est1 - est2) / sqrt(sigma2_1 / n1 + sigma2_2 / n2)``.

    With ``sigma2_2 = 0`` this is the one-sample test against ``est2``.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    a, c1 = _clamp(sigma2_1)
    b, c2 = _clamp(sigma2_2)
    se = math.sqrt(a / n1 + b / n2)
    z = _z(est1 - est2, se)
    res = TestResult(z, _p_value(z, alternative), alternative, [est1, est2], [sigma2_1, sigma2_2], n1, n2,
                     degenerate=c1 or c2 or se == 0.0)
    if c1 or c2:
        res.notes.append("negative variance clamped to 0")
    return res


def multivariate_test(estimates, targets, sigma, n: int, rtol: float = 1e-10) -> TestResult:
    """Wald statistic ``n (T - P)^T Sigma^+ (T - P)`` against chi-square(rank).

    ``sigma`` may be a ``CovarianceMatrix`` (its total, PSD-repaired) or a
    plain array. The pseudo-inverse uses eigenvalues above ``rtol`` times the
    largest; a difference with weight outside that support is flagged.
    """
    d = np.asarray(estimates, dtype=float).ravel() - np.asarray(targets, dtype=float).ravel()
    if hasattr(sigma, "psd"):
        S = sigma.psd().sigma
    else:
        S = np.asarray(sigma, dtype=float)
        S = (S + S.T) / 2
    if S.shape != (d.size, d.size):
        raise ValueError(f"covariance is {S.shape}, expected {(d.size, d.size)}")
    vals, vecs = np.linalg.eigh(S)
    top = vals.max(initial=0.0)
    keep = vals > rtol * top if top > 0 else np.zeros(vals.size, dtype=bool)
    rank = int(keep.sum())
    notes = []
    proj = vecs.T @ d
    outside = float(np.linalg.norm(proj[~keep]))
    degenerate = rank < d.size
    if rank == 0:
        notes.append("zero covariance")
        stat = 0.0 if outside == 0.0 else math.inf
        p = 1.0 if outside == 0.0 else 0.0
    else:
        stat = float(n * np.sum(proj[keep] ** 2 / vals[keep]))
        p = float(stats.chi2.sf(stat, rank))
        if outside > 1e-8 * max(1.0, float(np.linalg.norm(d))):
            notes.append(f"difference has norm {outside:.3g} outside the covariance support")
    return TestResult(stat, p, "chi-square", d.tolist(), np.diag(S).tolist(), n, df=rank,
                      degenerate=degenerate, reference="chi2", notes=notes)


def transitivity_estimate(g, cfg: BootstrapConfig | None = None) -> tuple[float, float, dict]:
    """Transitivity ``a / (a + b)`` of normalised triangle and vee counts and its delta-method variance."""
    cm = covariance_matrix(g, [triangle(), vee()], cfg)
    a, b = cm.estimates
    if not a + b > 0:
        raise ValueError("no connected triples")
    sigma2 = delta_variance(cm.estimates, cm, transitivity_gradient(a, b))
    return float(a / (a + b)), sigma2, cm.to_dict()


# ---------------------------------------------------------------------------
# coverage experiments


@dataclass
class CoverageReport:
    model: dict
    motif: str
    grid: list
    reps: int
    coverage: list
    mean_width: list
    targets: list
    level: float
    seed: int
    scheme: dict
    degenerate: list = field(default_factory=list)   # reps per cell with a zero-width interval
    skipped: list = field(default_factory=list)      # reps per cell drawn without edges

    def rows(self) -> list:
        return [{"n": n, "reps": self.reps, "coverage": c, "mean_width": w, "seed": self.seed}
                for n, c, w in zip(self.grid, self.coverage, self.mean_width)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["n", "reps", "coverage", "mean_width", "seed"], lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"model": self.model, "motif": self.motif, "grid": list(self.grid), "reps": self.reps,
                "coverage": self.coverage, "mean_width": self.mean_width, "targets": self.targets,
                "level": self.level, "seed": self.seed, "scheme": self.scheme,
                "degenerate": self.degenerate, "skipped": self.skipped, "scale": SCALE}


def simulate(spec, n: int, rng):
    if isinstance(spec, SbmSpec):
        return sample_sbm(n, spec, rng)
    if isinstance(spec, GraphonSpec):
        return sample_graphon(n, spec, rng)
    raise TypeError(f"unsupported model spec {type(spec).__name__}")


def _spec_at(spec, n: int):
    # a callable builds the spec for each n (the block scale usually depends on n)
    return spec(n) if callable(spec) and not isinstance(spec, (SbmSpec, GraphonSpec)) else spec


def _one_rep(spec, r: MotifPattern, n: int, cfg, seed: int, i: int, rep: int, level: float, target: float):
    g = simulate(spec, n, [seed, i, rep])
    if edge_density(g) == 0.0:
        return None
    c = cfg if cfg is None else BootstrapConfig(cfg.scheme, cfg.B, cfg.seed + rep, cfg.m, cfg.q)
    cm = covariance_matrix(g, [r], c)
    est = float(cm.estimates[0])
    s2 = float(cm.total[0, 0])
    lo, hi = confidence_interval(est, s2, n, level)
    tol = 1e-12 * max(1.0, abs(target))
    return (lo - tol <= target <= hi + tol), hi - lo, s2 <= 0.0


def monte_carlo_reference(spec, r: MotifPattern, n: int, reps: int, seed: int = 0) -> float:
    """Mean of exact normalised counts over ``reps`` draws."""
    from .estimators import exact_count

    vals = [exact_count(simulate(spec, n, [seed, 1 << 20, k]), r).normalized for k in range(reps)]
    return float(np.mean(vals))


def coverage_experiment(spec, r: MotifPattern, grid, reps: int, cfg: BootstrapConfig | None = None,
                        level: float = 0.95, seed: int = 0, threads: int = 1, reference_reps: int | None = None,
                        progress=None) -> CoverageReport:
    """Empirical coverage of ``level`` intervals for ``T(R)`` over a grid of ``n``.

    ``spec`` is an ``SbmSpec``, a ``GraphonSpec``, or a callable ``n -> spec``.
    The target is ``sbm_moment`` for block models and, otherwise, a
    Monte-Carlo mean of exact counts over ``reference_reps`` (default
    ``10 * reps``) draws at the largest ``n``. Draw ``rep`` of cell ``i`` is
    seeded by ``(seed, i, rep)``, so results do not depend on ``threads``.
    """
    _check_scope(r)
    _z_level(level)
    grid = [int(n) for n in grid]
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if reps < MIN_REPS:
        log.warning("only %d reps per cell; coverage will be noisy", reps)
    specs = [_spec_at(spec, n) for n in grid]
    if isinstance(specs[0], SbmSpec):
        targets = [sbm_moment(r, s) for s in specs]
    else:
        ref = monte_carlo_reference(specs[-1], r, grid[-1], reference_reps or 10 * reps, seed)
        targets = [ref] * len(grid)
    coverage, width, degenerate, skipped = [], [], [], []
    for i, (n, s, target) in enumerate(zip(grid, specs, targets)):
        def job(rep, i=i, n=n, s=s, target=target):
            return _one_rep(s, r, n, cfg, seed, i, rep, level, target)

        if threads > 1:
            with ThreadPoolExecutor(threads) as ex:
                out = list(ex.map(job, range(reps)))
        else:
            out = [job(rep) for rep in range(reps)]
        ok = [o for o in out if o is not None]
        skipped.append(len(out) - len(ok))
        coverage.append(float(np.mean([o[0] for o in ok])) if ok else math.nan)
        width.append(float(np.mean([o[1] for o in ok])) if ok else math.nan)
        degenerate.append(int(sum(o[2] for o in ok)))
        if progress is not None:
            progress(n, coverage[-1], width[-1])
    model = specs[-1].to_dict()
    scheme = {"scheme": "exact"} if cfg is None else cfg.describe()
    return CoverageReport(model, r.name, grid, reps, coverage, width, targets, level, seed, scheme,
                          degenerate, skipped)
