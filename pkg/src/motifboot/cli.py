"""Command-line front end.

Every command prints one JSON document ``{"manifest": ..., "result": ...}``
to stdout (or ``--out``); short human-readable summaries go to stderr.
``replay`` re-runs the command recorded in a manifest.

Exit codes: 0 success, 2 usage or parse error, 3 degenerate statistic,
4 internal error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .estimators import BootstrapConfig, DegenerateDensity, bootstrap_count, exact_count
from .graph import EdgeListError, Graph, load_edge_list, write_edge_list
from .inference import (coverage_experiment, one_sample_test, multivariate_test, transitivity_estimate,
                        two_sample_test)
from .models import (GraphonSpec, SbmSpec, constant_graphon, highschool_sbm, pfa_graphon, reference_sbm,
                     sample_graphon, sample_sbm, sbm_moment)
from .motif import PatternError, parse_motif
from .variance import ScopeError, covariance_matrix

log = logging.getLogger("motifboot")

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    argv: list
    params: dict
    seed: int | None
    version: str = __version__
    inputs: dict = field(default_factory=dict)     # path -> sha256
    started: str = ""
    duration_s: float = 0.0

    def to_dict(self) -> dict:
        return {"command": self.command, "argv": self.argv, "params": self.params, "seed": self.seed,
                "version": self.version, "inputs": self.inputs,
                "timing": {"started": self.started, "duration_s": self.duration_s}}


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


# ---------------------------------------------------------------------------
# argument helpers


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _matrix(text: str) -> tuple:
    """``a,b;c,d`` -> ((a, b), (c, d))."""
    return tuple(_floats(row) for row in text.split(";"))


def _load(path: str, n: int | None, manifest: RunManifest) -> Graph:
    manifest.inputs[path] = _digest(path)
    with open(path) as f:
        g, report = load_edge_list(f)
    if report.duplicates or report.self_loops:
        log.info("%s: %d duplicate edge(s), %d self-loop(s) dropped", path, report.duplicates, report.self_loops)
    if n is not None:
        # isolated vertices cannot appear in an edge list
        if n < g.n:
            raise UsageError(f"--n {n} is below the {g.n} vertices in {path}")
        if n > g.n:
            g = Graph(n, np.concatenate([g.indptr, np.full(n - g.n, g.indptr[-1])]), g.indices)
    return g


def _scheme(args) -> BootstrapConfig | None:
    scheme = getattr(args, "scheme", None)
    m, q = getattr(args, "m", None), getattr(args, "q", None)
    if scheme is None:
        if m is not None and q is not None:
            raise UsageError("give either --m or --q, not both")
        scheme = "uniform" if m is not None else "subgraph" if q is not None else None
    if scheme is None:
        return None
    if scheme == "uniform":
        if m is None or q is not None:
            raise UsageError("uniform scheme takes --m and no --q")
        return BootstrapConfig.uniform(m, args.B, args.seed)
    if q is None or m is not None:
        raise UsageError("subgraph scheme takes --q and no --m")
    return BootstrapConfig.subgraph(q, args.B, args.seed)


def _model(args, n: int):
    model = args.model
    if model == "sbm":
        pi = args.pi or (0.5, 0.5)
        S = args.S or ((0.4, 0.45), (0.45, 0.7))
        if args.s_n is not None:
            return SbmSpec(pi, S, args.s_n)
        return reference_sbm(n, args.nu, S, pi)
    if model == "highschool":
        return highschool_sbm()
    if model in ("pfa", "er"):
        if args.rho is None and args.degree is None:
            raise UsageError(f"model {model} needs --rho or --degree")
        rho = args.rho if args.rho is not None else args.degree / n
        return pfa_graphon(rho) if model == "pfa" else constant_graphon(rho)
    raise UsageError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_count(args, man):
    g = _load(args.graph, args.n, man)
    res = exact_count(g, parse_motif(args.motif))
    print(f"{res.motif.name}: P={res.value:.6g} T={res.normalized:.6g} rho={res.rho_hat:.6g}", file=sys.stderr)
    return res.to_dict()


def cmd_bootstrap(args, man):
    g = _load(args.graph, args.n, man)
    r = parse_motif(args.motif)
    cfg = _scheme(args)
    if cfg is None:
        raise UsageError("bootstrap needs --m or --q")
    if cfg.scheme == "uniform" and cfg.m < r.p:
        raise UsageError(f"--m {cfg.m} is below the pattern size {r.p}")
    if cfg.scheme == "subgraph":
        if len(cfg.q) != r.p:
            raise UsageError(f"--q needs {r.p} entries for {r.name}")
    res = bootstrap_count(g, r, cfg)
    if args.iterates:
        with open(args.iterates, "w") as f:
            f.write("iterate,value\n")
            for b, v in enumerate(res.iterates):
                f.write(f"{b},{float(v)!r}\n")
    print(f"{r.name}: P={res.value:.6g} T={res.normalized:.6g} ({cfg.scheme}, B={cfg.B})", file=sys.stderr)
    return res.to_dict()


def cmd_variance(args, man):
    g = _load(args.graph, args.n, man)
    pats = [parse_motif(m) for m in args.motif]
    cm = covariance_matrix(g, pats, _scheme(args), args.overlaps, args.density, args.method)
    for j, r in enumerate(pats):
        print(f"{r.name}: T={cm.estimates[j]:.6g} sigma2={cm.sigma[j, j]:.6g} "
              f"resampling={cm.resampling[j, j]:.3g}", file=sys.stderr)
    return cm.to_dict()


def _graph_stat(g, motif_text, cfg):
    if motif_text == "transitivity":
        est, s2, _ = transitivity_estimate(g, cfg)
        return est, s2
    cm = covariance_matrix(g, [parse_motif(motif_text)], cfg)
    return float(cm.estimates[0]), float(cm.total[0, 0])


def cmd_test(args, man):
    cfg = _scheme(args)
    if args.two_sample:
        if args.graph and args.graph2:
            g1, g2 = _load(args.graph, args.n, man), _load(args.graph2, None, man)
            e1, s1 = _graph_stat(g1, args.motif[0], cfg)
            e2, s2 = _graph_stat(g2, args.motif[0], cfg)
            n1, n2 = g1.n, g2.n
        elif None not in (args.estimate, args.sigma2, args.n, args.estimate2, args.sigma2_2, args.n2):
            e1, s1, n1, e2, s2, n2 = args.estimate, args.sigma2, args.n, args.estimate2, args.sigma2_2, args.n2
        else:
            raise UsageError("two-sample test needs --graph/--graph2 or all of --estimate, --sigma2, --n, "
                             "--estimate2, --sigma2-2, --n2")
        res = two_sample_test(e1, s1, n1, e2, s2, n2, args.alternative)
    else:
        if args.null is None:
            raise UsageError("one-sample test needs --null")
        if args.graph:
            g = _load(args.graph, args.n, man)
            if len(args.null) > 1 or len(args.motif) > 1:
                if len(args.null) != len(args.motif):
                    raise UsageError("--null needs one value per --motif")
                cm = covariance_matrix(g, [parse_motif(m) for m in args.motif], cfg)
                return multivariate_test(cm.estimates, args.null, cm, g.n).to_dict()
            est, s2 = _graph_stat(g, args.motif[0], cfg)
            n = g.n
        elif None not in (args.estimate, args.sigma2, args.n):
            est, s2, n = args.estimate, args.sigma2, args.n
        else:
            raise UsageError("one-sample test needs --graph or --estimate, --sigma2 and --n")
        res = one_sample_test(est, s2, n, args.null[0], args.alternative)
    print(f"z={res.statistic:.4g} p={res.p_value:.4g} ({res.alternative})", file=sys.stderr)
    return res.to_dict()


def cmd_simulate(args, man):
    spec = _model(args, args.n)
    rng = np.random.default_rng(args.seed)
    if isinstance(spec, SbmSpec):
        g, labels = sample_sbm(args.n, spec, rng, return_labels=True)
        extra = {"labels": labels.tolist()} if args.debug else {}
    else:
        g, xi = sample_graphon(args.n, spec, rng, return_latent=True)
        extra = {"latent": xi.tolist()} if args.debug else {}
    if args.graph_out:
        with open(args.graph_out, "w") as f:
            f.write(f"# n={g.n} model={spec.to_dict()['model']} seed={args.seed}\n")
            write_edge_list(g, f)
    isolated = int(np.sum(g.degrees == 0))
    if isolated:
        log.warning("%d isolated vertices are not written to the edge list; pass --n %d when loading",
                    isolated, g.n)
    print(f"n={g.n} edges={g.num_edges} mean degree={2 * g.num_edges / g.n:.3f}", file=sys.stderr)
    out = {"model": spec.to_dict(), "n": g.n, "edges": g.num_edges, "isolated": isolated,
           "graph": args.graph_out, **extra}
    if isinstance(spec, SbmSpec) and args.motif:
        out["moments"] = {m: sbm_moment(parse_motif(m), spec) for m in args.motif}
    return out


def cmd_coverage(args, man):
    r = parse_motif(args.motif[0])
    cfg = _scheme(args)
    spec = (lambda n: _model(args, n)) if args.model == "sbm" and args.s_n is None else _model(args, args.grid[-1])

    def progress(n, c, w):
        print(f"n={n}: coverage={c:.3f} mean width={w:.4g}", file=sys.stderr)

    rep = coverage_experiment(spec, r, args.grid, args.reps, cfg, args.level, args.seed, args.threads,
                              progress=progress)
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(rep.to_csv())
    return rep.to_dict()


def cmd_replay(args, man):
    with open(args.manifest) as f:
        doc = json.load(f)
    m = doc.get("manifest", doc)
    for path, digest in m.get("inputs", {}).items():
        if _digest(path) != digest:
            raise UsageError(f"input {path} changed since the manifest was written")
    argv = list(m["argv"])
    # the replay writes where it is told, not where the original run did
    while "--out" in argv:
        i = argv.index("--out")
        del argv[i:i + 2]
    argv = [a for a in argv if not a.startswith("--out=")]
    if args.out:
        argv += ["--out", args.out]
    return None, argv


# ---------------------------------------------------------------------------
# parser


def _add_graph(p, required=True):
    p.add_argument("--graph", required=required, help="edge-list file")
    p.add_argument("--n", type=int, help="vertex count, when the file omits isolated vertices")


def _add_scheme(p):
    p.add_argument("--scheme", choices=["uniform", "subgraph"])
    p.add_argument("--m", type=int, help="uniform scheme: subsample size")
    p.add_argument("--q", type=_floats, help="subgraph scheme: retention probabilities q1,...,qp")
    p.add_argument("--B", type=int, default=1, help="bootstrap iterates")
    p.add_argument("--seed", type=int, default=0)


def _add_model(p):
    p.add_argument("--model", choices=["sbm", "highschool", "pfa", "er"], default="sbm")
    p.add_argument("--pi", type=_floats, help="block probabilities")
    p.add_argument("--S", type=_matrix, help="shape matrix, rows separated by ';'")
    p.add_argument("--nu", type=float, default=0.5, help="block scale s_n = 5 nu sqrt(n) / n")
    p.add_argument("--s-n", dest="s_n", type=float, help="fixed block scale, overrides --nu")
    p.add_argument("--rho", type=float, help="graphon sparsity scale")
    p.add_argument("--degree", type=float, help="graphon expected degree, rho = degree / n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("-v", "--verbose", action="store_true")
    ap = argparse.ArgumentParser(prog="motifboot", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    p = sub.add_parser("count", help="exact count statistic")
    _add_graph(p)
    p.add_argument("--motif", required=True)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bootstrap", help="bootstrap count estimate")
    _add_graph(p)
    p.add_argument("--motif", required=True)
    _add_scheme(p)
    p.add_argument("--iterates", help="CSV file for per-iterate values")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("variance", help="variance / covariance of normalised counts")
    _add_graph(p)
    p.add_argument("--motif", action="append", required=True, help="repeat for a covariance matrix")
    _add_scheme(p)
    p.add_argument("--overlaps", choices=["all", "leading"], default="all")
    p.add_argument("--density", choices=["adjusted", "fixed"], default="adjusted")
    p.add_argument("--method", choices=["moments", "merged"], default="moments")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("test", help="one-sample, two-sample or multivariate test")
    _add_graph(p, required=False)
    p.add_argument("--graph2")
    p.add_argument("--motif", action="append", default=None, help="motif or 'transitivity'")
    _add_scheme(p)
    p.add_argument("--two-sample", action="store_true")
    p.add_argument("--null", type=_floats, help="null value(s), one per motif")
    p.add_argument("--alternative", choices=["two-sided", "less", "greater"], default="two-sided")
    p.add_argument("--estimate", type=float)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--estimate2", type=float)
    p.add_argument("--sigma2-2", dest="sigma2_2", type=float)
    p.add_argument("--n2", type=int)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="draw a random graph")
    _add_model(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--graph-out", help="edge-list file to write")
    p.add_argument("--motif", action="append", help="report the block-model moment of this motif")
    p.add_argument("--debug", action="store_true", help="include block labels or latent positions")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coverage", help="coverage of normal intervals over a grid of n")
    _add_model(p)
    p.add_argument("--motif", action="append", required=True)
    p.add_argument("--grid", type=_ints, required=True)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--csv", help="CSV file for the per-n table")
    p.add_argument("--scheme", choices=["uniform", "subgraph"])
    p.add_argument("--m", type=int)
    p.add_argument("--q", type=_floats)
    p.add_argument("--B", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest", help="JSON output of an earlier run")
    p.set_defaults(func=cmd_replay)
    return ap


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "test" and not args.motif:
        args.motif = ["triangle"]
    man = RunManifest(args.command, argv, _jsonable(_params(args)), getattr(args, "seed", None),
                      started=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    t0 = time.perf_counter()
    try:
        result = args.func(args, man)
        if args.command == "replay":
            return main(result[1])
    except DegenerateDensity as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (UsageError, EdgeListError, PatternError, ScopeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    man.duration_s = round(time.perf_counter() - t0, 6)
    text = json.dumps({"manifest": man.to_dict(), "result": _jsonable(result)}, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
