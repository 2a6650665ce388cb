"""Command-line driver: fit, sweep, simulate, study, eval.

Exit codes: 0 success, 2 usage error, 3 file parse error, 4 dimension or
consistency error, 5 numeric failure.  All randomized commands take
``--seed`` and produce byte-identical outputs when it is fixed.  The
environment variables SPATMIX_SEED and SPATMIX_THREADS override the default
seed and worker count.
"""

import argparse
import csv
import dataclasses
import os
import sys
from importlib.metadata import PackageNotFoundError, version as _pkg_version
from pathlib import Path

import numpy as np

from . import graph as graph_mod
from . import io as io_mod
from . import metrics, plots, selection, simulate
from .em import FitConfig, fit
from .errors import NumericError, ParseError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CONSISTENCY = 4
EXIT_NUMERIC = 5


def _version():
    try:
        return _pkg_version("spatmix")
    except PackageNotFoundError:
        return "unknown"


def _default_seed():
    return int(os.environ.get("SPATMIX_SEED", "0"))


def _default_threads():
    return int(os.environ.get("SPATMIX_THREADS", "1"))


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _add_fit_options(p, with_k=True):
    if with_k:
        p.add_argument("--k", type=int, required=True, help="number of components")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: SPATMIX_SEED or 0)")
    p.add_argument("--no-spatial", action="store_true", help="fit the independent mixture instead")
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--patience", type=int, default=50,
                   help="stop after this many iterations without a larger log-likelihood")
    p.add_argument("--n-starts", type=int, default=20)
    p.add_argument("--short-run-iter", type=int, default=10)
    p.add_argument("--field-sweeps", type=int, default=1)
    p.add_argument("--gibbs-method", choices=("newton", "anneal"), default="newton")
    p.add_argument("--long", action="store_true", help="counts file is in long form")


def _fit_config(args, K=None):
    return FitConfig(
        K=K if K is not None else args.k,
        spatial=not args.no_spatial,
        max_iter=args.max_iter,
        patience=args.patience,
        n_starts=args.n_starts,
        short_run_iter=args.short_run_iter,
        field_sweeps=args.field_sweeps,
        gibbs_method=args.gibbs_method,
        seed=args.seed if args.seed is not None else _default_seed(),
    )


def _load_dataset(args):
    data, region_ids, categories = io_mod.read_counts(args.data, long_form=args.long)
    g = graph_mod.read_edge_list(args.graph, n=data.n)
    return data, g, region_ids, categories


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spatmix",
        description="Cluster graph-indexed count data with a spatially coupled multinomial mixture.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one model and write a result file")
    p_fit.add_argument("data", help="counts CSV (region, category columns)")
    p_fit.add_argument("graph", help="edge-list text file")
    _add_fit_options(p_fit)
    p_fit.add_argument("--out", default="fit_result.json", help="result file path")

    p_sweep = sub.add_parser("sweep", help="fit a range of K and select by BIC")
    p_sweep.add_argument("data")
    p_sweep.add_argument("graph")
    _add_fit_options(p_sweep, with_k=False)
    p_sweep.add_argument("--k-min", type=int, required=True)
    p_sweep.add_argument("--k-max", type=int, required=True)
    p_sweep.add_argument("--out-dir", default="sweep_out")
    p_sweep.add_argument("--no-plot", action="store_true", help="skip the BIC figure")

    p_sim = sub.add_parser("simulate", help="write one synthetic lattice dataset")
    p_sim.add_argument("--side", type=int, default=10)
    p_sim.add_argument("--scheme", choices=("rook", "queen"), default="rook")
    p_sim.add_argument("--j", type=int, default=10, help="number of categories")
    p_sim.add_argument("--m", type=int, default=100, help="total count per region")
    p_sim.add_argument("--beta", type=_float_list, default=[0.0, 0.1],
                       help="interaction strengths, e.g. 0,0.1")
    p_sim.add_argument("--alpha", type=_float_list, default=None)
    p_sim.add_argument("--burn-in", type=int, default=500)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out-dir", default="sim_out")

    p_study = sub.add_parser("study", help="replicated recovery study over lattice/beta cells")
    p_study.add_argument("--sides", type=_int_list, default=[8, 10, 20])
    p_study.add_argument("--betas", type=_float_list, default=[0.01, 0.1, 0.2],
                         help="interaction strength of the second component per cell")
    p_study.add_argument("--reps", type=int, default=100)
    p_study.add_argument("--j", type=int, default=10)
    p_study.add_argument("--m", type=int, default=100)
    p_study.add_argument("--burn-in", type=int, default=500)
    p_study.add_argument("--seed", type=int, default=None)
    p_study.add_argument("--threads", type=int, default=None,
                         help="worker processes (default: SPATMIX_THREADS or 1)")
    p_study.add_argument("--gibbs-method", choices=("newton", "anneal"), default="newton")
    p_study.add_argument("--out-dir", default="study_out")
    p_study.add_argument("--no-plot", action="store_true", help="skip the ARI boxplot figure")

    p_eval = sub.add_parser("eval", help="clustering / spatial diagnostics")
    eval_sub = p_eval.add_subparsers(dest="metric", required=True)

    p_ari = eval_sub.add_parser("ari", help="adjusted Rand index of two labelings")
    p_ari.add_argument("first", help="label CSV (region,label) or result JSON")
    p_ari.add_argument("second")

    p_moran = eval_sub.add_parser("moran", help="Moran's I of a region variable")
    p_moran.add_argument("data", help="CSV with the variable, or counts CSV with --mean-age")
    p_moran.add_argument("graph")
    p_moran.add_argument("--column", default=None, help="numeric column to test")
    p_moran.add_argument("--mean-age", action="store_true",
                         help="reduce count columns to a mean age first")
    p_moran.add_argument("--midpoints", type=_float_list, default=None)
    p_moran.add_argument("--long", action="store_true")
    p_moran.add_argument("--row-standardize", action="store_true")
    p_moran.add_argument("--permutations", type=int, default=0)
    p_moran.add_argument("--seed", type=int, default=None)

    return parser


def _cmd_fit(args):
    data, g, region_ids, categories = _load_dataset(args)
    cfg = _fit_config(args)
    result = fit(data, g, cfg)
    io_mod.write_result(args.out, result, region_ids, categories,
                        extra={"config": dataclasses.asdict(cfg),
                               "data_file": os.path.basename(args.data),
                               "graph_file": os.path.basename(args.graph)})
    print(f"K={result.K} loglik={result.best_loglik:.4f} d={result.d} "
          f"bic={result.bic:.4f} converged={result.converged}")
    print(f"result written to {args.out}")
    return EXIT_OK


def _sweep_rows(sweep_result):
    rows = []
    for rec in sweep_result.records:
        rows.append({
            "K": rec.K,
            "status": "ok" if rec.ok else "error",
            "loglik": "" if rec.loglik is None else repr(float(rec.loglik)),
            "d": "" if rec.d is None else rec.d,
            "bic": "" if rec.bic is None else repr(float(rec.bic)),
            "selected": int(rec.K == sweep_result.selected_K),
            "error": rec.error or "",
        })
    return rows


def _cmd_sweep(args):
    if args.k_min > args.k_max:
        raise ValueError(f"--k-min {args.k_min} exceeds --k-max {args.k_max}")
    data, g, region_ids, categories = _load_dataset(args)
    cfg = _fit_config(args, K=args.k_min)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = selection.sweep(data, g, range(args.k_min, args.k_max + 1), cfg)

    rows = _sweep_rows(result)
    with open(out_dir / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    for rec in result.records:
        if rec.ok:
            io_mod.write_result(out_dir / f"fit_k{rec.K}.json", rec.fit, region_ids, categories)
    if not args.no_plot:
        plots.bic_curve(result, out_dir / "sweep_bic.png")

    print(f"{'K':>3} {'status':>7} {'loglik':>14} {'d':>5} {'bic':>14} selected")
    for rec in result.records:
        if rec.ok:
            mark = "*" if rec.K == result.selected_K else ""
            print(f"{rec.K:>3} {'ok':>7} {rec.loglik:>14.4f} {rec.d:>5} {rec.bic:>14.4f} {mark}")
        else:
            print(f"{rec.K:>3} {'error':>7} {rec.error}")
    if result.selected_K is not None:
        print(f"selected K = {result.selected_K}")
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def _cmd_simulate(args):
    seed = args.seed if args.seed is not None else _default_seed()
    beta = np.asarray(args.beta, dtype=float)
    if beta.size != 2:
        raise ValueError("the built-in emission table covers two components; "
                         "--beta needs exactly two values, e.g. 0,0.1")
    alpha = None if args.alpha is None else np.asarray(args.alpha, dtype=float)
    cfg = simulate.SimConfig(
        side=args.side, K=2, J=args.j, m=args.m,
        beta=beta, alpha=alpha, burn_in=args.burn_in, seed=seed, scheme=args.scheme,
    )
    data, truth, g = simulate.simulate_dataset(cfg, np.random.SeedSequence([seed, 0]))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    io_mod.write_counts(out_dir / "counts.csv", data)
    io_mod.write_labels(out_dir / "labels.csv", truth)
    graph_mod.write_edge_list(g, out_dir / "edges.txt")
    print(f"simulated {data.n} regions ({args.side}x{args.side} {args.scheme} lattice), "
          f"J={data.J}, m={args.m}")
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def _cmd_study(args):
    seed = args.seed if args.seed is not None else _default_seed()
    threads = args.threads if args.threads is not None else _default_threads()
    cfgs = simulate.study_cells(
        sides=args.sides, betas=args.betas, replicates=args.reps,
        J=args.j, m=args.m, burn_in=args.burn_in, master_seed=seed,
    )
    fit_cfg = simulate.study_fit_config(K=2, gibbs_method=args.gibbs_method)
    report = simulate.run_study(cfgs, fit_cfg=fit_cfg, n_jobs=max(1, threads))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = report.summary_rows()
    with open(out_dir / "study_report.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    with open(out_dir / "study_ari.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["side", "beta", "replicate", "ari"])
        for cell in report.cells:
            for rep, value in enumerate(cell.aris):
                writer.writerow([cell.cfg.side, repr(float(cell.cfg.beta[-1])), rep, repr(float(value))])
    failures = [(c.cfg.side, float(c.cfg.beta[-1]), rep, msg)
                for c in report.cells for rep, msg in c.failures]
    if failures:
        with open(out_dir / "study_failures.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["side", "beta", "replicate", "error"])
            writer.writerows(failures)
    if not args.no_plot:
        plots.ari_boxplot(report, out_dir / "study_ari_boxplot.png")

    print(f"{'side':>5} {'beta':>6} {'reps':>5} {'min':>7} {'q1':>7} {'median':>7} {'q3':>7} {'max':>7}")
    for row in rows:
        print(f"{row['side']:>5} {row['beta']:>6g} {row['replicates']:>5} "
              f"{row['min']:>7.3f} {row['q1']:>7.3f} {row['median']:>7.3f} "
              f"{row['q3']:>7.3f} {row['max']:>7.3f}")
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def _read_labeling(path):
    if str(path).endswith(".json"):
        doc = io_mod.read_result(path)
        if "labels" not in doc:
            raise ParseError(f"{path}: result file has no labels")
        return np.asarray(doc["labels"])
    _, labels = io_mod.read_labels(path)
    return labels


def _cmd_eval_ari(args):
    a = _read_labeling(args.first)
    b = _read_labeling(args.second)
    print(f"ari {metrics.ari(a, b):.6f}")
    return EXIT_OK


def _cmd_eval_moran(args):
    if args.mean_age:
        data, _, _ = io_mod.read_counts(args.data, long_form=args.long)
        midpoints = (np.asarray(args.midpoints, dtype=float) if args.midpoints
                     else metrics.default_age_midpoints(data.J))
        x = metrics.mean_ages(data, midpoints)
        n = data.n
    else:
        if args.column is None:
            raise ValueError("give either --column NAME or --mean-age")
        _, x = io_mod.read_column(args.data, args.column)
        n = x.size
    g = graph_mod.read_edge_list(args.graph, n=n)
    if args.permutations:
        seed = args.seed if args.seed is not None else _default_seed()
        res = metrics.moran_permutation_test(
            x, g, n_permutations=args.permutations, seed=seed,
            row_standardize=args.row_standardize,
        )
        print(f"moran_i {res.I:.6f}")
        print(f"p_value {res.p_value:.6f} ({res.n_permutations} permutations)")
    else:
        value = metrics.morans_i(x, g, row_standardize=args.row_standardize)
        print(f"moran_i {value:.6f}")
    return EXIT_OK


_HANDLERS = {
    "fit": _cmd_fit,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "study": _cmd_study,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "eval":
            handler = _cmd_eval_ari if args.metric == "ari" else _cmd_eval_moran
            return handler(args)
        return _HANDLERS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
