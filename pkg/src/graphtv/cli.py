"""Command-line front end: spectral constants, denoising, experiments.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure
(non-convergence or generation failure).  Every run writes a
``manifest.json`` next to its outputs echoing the fully resolved
configuration, sufficient to re-run identically.

Vector files hold one number per line; ``#`` starts a comment.
"""
from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from . import __version__
from . import experiments as E
from . import graphs as G
from . import spectral as spec
from . import tvsolver as tv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def read_vector(path) -> np.ndarray:
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                vals.append(float(line))
    return np.asarray(vals, dtype=float)


def write_vector(path, vec, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for v in np.asarray(vec, dtype=float):
            fh.write(f"{float(v)!r}\n")


def _write_manifest(directory, payload: dict) -> None:
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = {"tool": "graphtv", "version": __version__, **payload}
    (directory / "manifest.json").write_text(json.dumps(payload, indent=1, sort_keys=True),
                                             encoding="utf-8")


# ---------------------------------------------------------------------------
# graph construction from flags


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True,
                   choices=["path", "grid", "hypercube", "complete", "star",
                            "cycle-power", "erdos-renyi", "random-regular", "custom"])
    p.add_argument("--n", type=int, help="vertex count (path/complete/star/cycle-power/random)")
    p.add_argument("--d", type=int, help="dimension (grid/hypercube) or degree (random-regular)")
    p.add_argument("--N", type=int, dest="side", help="grid side length")
    p.add_argument("--k", type=int, help="cycle power")
    p.add_argument("--p", type=float, help="Erdos-Renyi edge probability")
    p.add_argument("--seed", type=int, default=0, help="seed for random families")
    p.add_argument("--edges", help="edge-list file for --graph custom")
    p.add_argument("--augmented", action="store_true",
                   help="anchored path difference matrix instead of the path graph")


def _graph_from_args(args):
    """Returns (graph_or_None, D, family_label)."""
    g = args.graph
    if g == "path":
        _req(args.n, "--n")
        if args.augmented:
            return None, G.build_augmented_path(args.n), "augmented_path"
        gr = G.build_path(args.n)
    elif g == "grid":
        _req(args.d, "--d")
        _req(args.side, "--N")
        gr = G.build_grid(args.d, args.side)
    elif g == "hypercube":
        _req(args.d, "--d")
        gr = G.build_hypercube(args.d)
    elif g == "complete":
        _req(args.n, "--n")
        gr = G.build_complete(args.n)
    elif g == "star":
        _req(args.n, "--n")
        gr = G.build_star(args.n)
    elif g == "cycle-power":
        _req(args.n, "--n")
        _req(args.k, "--k")
        gr = G.build_cycle_power(args.n, args.k)
    elif g == "erdos-renyi":
        _req(args.n, "--n")
        _req(args.p, "--p")
        gr = G.build_erdos_renyi(args.n, args.p, args.seed)
    elif g == "random-regular":
        _req(args.n, "--n")
        _req(args.d, "--d")
        gr = G.build_random_regular(args.n, args.d, args.seed)
    else:  # custom
        _req(args.edges, "--edges")
        gr = G.read_edge_list(args.edges, n=args.n)
    return gr, G.incidence(gr), gr.family


class UsageError(ValueError):
    pass


def _req(value, flag: str) -> None:
    if value is None:
        raise UsageError(f"missing required flag {flag}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectral(args) -> int:
    gr, D, family = _graph_from_args(args)
    if gr is None:
        report = spec.spectral_report_from_matrix(D, family=family)
    else:
        method = args.method
        if method == "auto":
            method = "structured" if gr.family in ("grid", "hypercube") else "dense"
        report = spec.spectral_report(gr, method=method)
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report.to_json_dict(), indent=1, sort_keys=True),
                   encoding="utf-8")
    _write_manifest(out.parent, {"command": "spectral", "args": _resolved(args),
                                 "outputs": [out.name]})
    return EXIT_OK


def _lambda_from_args(args, graph, D) -> float:
    if args.lambda_value is not None:
        return float(args.lambda_value)
    rule = tv.LambdaRule(args.lambda_rule, sigma=args.sigma, delta=args.delta,
                         constant_c=args.constant_c)
    rho = None
    if rule.rule == "theorem_general":
        rho = E.rho_estimate(graph) if graph is not None else \
            spec.spectral_report_from_matrix(D).rho
    return float(tv.lambda_value(rule, graph, rho=rho))


def cmd_denoise(args) -> int:
    gr, D, family = _graph_from_args(args)
    y = read_vector(args.y)
    if y.shape[0] != D.shape[1]:
        raise UsageError(f"y has {y.shape[0]} entries but the graph has {D.shape[1]} vertices")
    lam = _lambda_from_args(args, gr, D)
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)

    if args.oracle == "taut-string":
        if family != "path":
            raise UsageError("--oracle taut-string requires --graph path (not augmented)")
        theta = tv.denoise_path_exact(y, lam)
        problem = tv.DenoiseProblem(y, D, lam)
        z, resid = tv.kkt_certificate(problem, theta)
        diag = {
            "lambda": lam, "objective": tv.objective_value(y, D, lam, theta),
            "stationarity_residual": resid, "dual_feasibility": float(np.max(np.abs(z))) if len(z) else 0.0,
            "iterations": 0, "converged": True, "solver": "taut_string",
        }
        converged = True
    else:
        result = tv.denoise(tv.DenoiseProblem(y, D, lam),
                            tv.SolverOptions(tol=args.tol, max_iter=args.max_iter))
        theta = result.theta_hat
        diag = {
            "lambda": lam, "objective": result.objective,
            "stationarity_residual": result.stationarity_residual,
            "dual_feasibility": result.dual_feasibility,
            "iterations": result.iterations, "converged": result.converged,
            "solver": "dual_fista",
        }
        converged = result.converged
    write_vector(out, theta, comment=f"theta_hat, lambda={lam!r}")
    out.with_suffix(out.suffix + ".report.json").write_text(
        json.dumps(diag, indent=1, sort_keys=True), encoding="utf-8")
    _write_manifest(out.parent, {"command": "denoise", "args": _resolved(args),
                                 "outputs": [out.name, out.name + ".report.json"]})
    return EXIT_OK if converged else EXIT_NUMERICAL


def cmd_experiment(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise UsageError("experiment needs exactly one of --config or --preset")
    if args.preset is not None:
        configs = E.preset_configs(args.preset)
    else:
        raw = json.loads(pathlib.Path(args.config).read_text(encoding="utf-8"))
        raw = raw if isinstance(raw, list) else [raw]
        configs = [E.ExperimentConfig.from_json_dict(d) for d in raw]

    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_records = []
    for cfg in configs:
        records = E.run_experiment(cfg, threads=args.threads)
        all_records.extend(records)
        ns, means, errs = E.summarize_for_plot(records)
        fit = None
        if len(ns) >= 2 and all(m > 0 for m in means):
            fit = E.fit_rate(records, "power_law")
        E.write_plot_data(out_dir / f"{cfg.name}.tsv", ns, means, errs, fit=fit)
    E.write_records(out_dir, all_records)
    _write_manifest(out_dir, {
        "command": "experiment", "threads": args.threads,
        "configs": [cfg.to_json_dict() for cfg in configs],
        "outputs": ["records.csv", "records.json"] + [f"{cfg.name}.tsv" for cfg in configs],
    })
    if not all(r.converged for r in all_records):
        return EXIT_NUMERICAL
    return EXIT_OK


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphtv",
                                 description="Graph TV denoising: constants, solver, experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("spectral", help="compute rho/kappa constants for a graph")
    _add_graph_args(ps)
    ps.add_argument("--method", choices=["auto", "dense", "structured"], default="auto")
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_spectral)

    pd = sub.add_parser("denoise", help="TV-denoise a vector on a graph")
    _add_graph_args(pd)
    pd.add_argument("--y", required=True, help="observation vector file")
    pd.add_argument("--lambda-rule", dest="lambda_rule", default="theorem_general",
                    choices=list(tv.LAMBDA_RULES))
    pd.add_argument("--sigma", type=float, default=1.0)
    pd.add_argument("--delta", type=float, default=0.1)
    pd.add_argument("--constant-c", dest="constant_c", type=float, default=1.0)
    pd.add_argument("--lambda-value", dest="lambda_value", type=float,
                    help="explicit lambda (overrides the rule)")
    pd.add_argument("--oracle", choices=["taut-string"],
                    help="use the exact path oracle instead of the iterative solver")
    pd.add_argument("--tol", type=float, default=1e-6)
    pd.add_argument("--max-iter", dest="max_iter", type=int, default=50000)
    pd.add_argument("--out", required=True)
    pd.set_defaults(func=cmd_denoise)

    pe = sub.add_parser("experiment", help="run a Monte Carlo experiment bundle")
    pe.add_argument("--config", help="JSON config (one object or a list)")
    pe.add_argument("--preset",
                    choices=["island-fig2", "island-fig3", "holder-2d",
                             "cartoon-2d", "isotonic-2d"])
    pe.add_argument("--out", required=True, help="output directory")
    pe.add_argument("--threads", type=int, default=1,
                    help="worker processes (output bytes are thread-count independent)")
    pe.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"graphtv: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        print(f"graphtv: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except G.GraphGenerationError as exc:
        print(f"graphtv: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
