"""Experiment runner CLI.

Subcommands:
    generate  write a seeded synthetic benchmark directory
    run       run one method (ppgl / igl / global) against a dataset
    grid      sweep (beta, nu, lambda) for ppgl and rank by F-score
    report    aggregate metrics.csv files from result directories

Exit codes: 0 on success, 2 on configuration errors, 3 when a solver
finished under its non-convergence flag.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .baselines import solve_global, solve_igl
from .config import ConfigError, ExperimentConfig, config_text, load_config
from .datagen import generate_dataset, load_dataset, write_dataset
from .evaluation import metrics_row, read_metrics_csv, score_run, write_metrics_csv
from .federation import run_federation, write_trace_csv
from .graphs import save_edgelist

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

METHODS = ("ppgl", "igl", "global")


def _resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config is not None:
        cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seed": args.seed}).validate()
    return cfg


def _write_config_copy(cfg: ExperimentConfig, outdir: Path) -> None:
    (outdir / "config.txt").write_text(config_text(cfg), encoding="ascii")


def cmd_generate(args) -> int:
    cfg = _resolve_config(args)
    family, datasets = generate_dataset(
        d=cfg.d, n_clients=cfg.clients, q=cfg.q, n_samples=cfg.samples_per_client(),
        sigma_r=cfg.sigma_r, weight_threshold=cfg.weight_threshold,
        sigma_w=cfg.sigma_w, seed=cfg.seed)
    out = Path(args.out)
    params = {"d": cfg.d, "sigma_r": cfg.sigma_r, "weight_threshold": cfg.weight_threshold,
              "sigma_w": cfg.sigma_w, "seed": cfg.seed}
    write_dataset(out, family, datasets, params)
    _write_config_copy(cfg, out)
    logger.info("dataset written to %s (%d clients, q=%g)", out, cfg.clients, cfg.q)
    return EXIT_OK


def _seed_n_q(manifest):
    counts = manifest["n_samples"]
    n_label = counts[0] if len(set(counts)) == 1 else "|".join(str(c) for c in counts)
    return manifest.get("seed"), n_label, manifest["q"]


def cmd_run(args) -> int:
    cfg = _resolve_config(args)
    family, datasets, manifest = load_dataset(args.dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config_copy(cfg, out)
    hp = cfg.hyperparams()
    seed, n_label, q = _seed_n_q(manifest)
    status = []
    rows = []
    exit_code = EXIT_OK

    if args.method == "ppgl":
        locals_w, w_con, run = run_federation(
            datasets, hp, seed=seed, scheduler=cfg.scheduler, gamma_cap=cfg.gamma_cap)
        for i, g in enumerate(locals_w):
            save_edgelist(g, out / f"graph_client_{i}.edges")
        save_edgelist(w_con, out / "graph_consensus.edges")
        write_trace_csv(run, out / "trace.csv")
        score = score_run(locals_w, w_con, family, cfg.edge_threshold)
        rows.append(metrics_row("ppgl-l", seed, n_label, q, score.local_avg))
        rows.append(metrics_row("ppgl-c", seed, n_label, q, score.consensus))
        status.append(f"ppgl rounds={hp.rounds}")
    elif args.method == "igl":
        solutions = solve_igl(datasets, hp, cfg.tol, cfg.max_iter)
        for i, sol in enumerate(solutions):
            save_edgelist(sol.w, out / f"graph_client_{i}.edges")
            status.append(f"client_{i} converged={sol.converged} iterations={sol.iterations}")
            if not sol.converged:
                exit_code = EXIT_NOT_CONVERGED
        score = score_run([s.w for s in solutions], None, family, cfg.edge_threshold)
        rows.append(metrics_row("igl", seed, n_label, q, score.local_avg))
    else:
        sol = solve_global(datasets, hp, cfg.tol, cfg.max_iter)
        save_edgelist(sol.w, out / "graph_global.edges")
        status.append(f"global converged={sol.converged} iterations={sol.iterations}")
        if not sol.converged:
            exit_code = EXIT_NOT_CONVERGED
        score = score_run([sol.w] * family.n_clients, None, family, cfg.edge_threshold)
        rows.append(metrics_row("global", seed, n_label, q, score.local_avg))

    write_metrics_csv(out / "metrics.csv", rows)
    (out / "status.txt").write_text("\n".join(status) + "\n", encoding="ascii")
    for row in rows:
        logger.info("%s: fs=%s re=%s", row["method"], row["fs"], row["re"])
    if exit_code == EXIT_NOT_CONVERGED:
        logger.warning("at least one solve hit the iteration cap")
    return exit_code


GRID_COLUMNS = ["beta", "nu", "lambda", "fs_local", "fs_consensus", "re_local",
                "re_consensus"]


def cmd_grid(args) -> int:
    cfg = _resolve_config(args)
    family, datasets, manifest = load_dataset(args.dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config_copy(cfg, out)
    seed, _, _ = _seed_n_q(manifest)
    betas = cfg.beta_grid or (cfg.beta,)
    results = []
    for beta in betas:
        for nu in cfg.nu_grid:
            for lam in cfg.lambda_grid:
                point = ExperimentConfig(
                    **{**cfg.__dict__, "beta": beta, "nu": nu, "lambda_": lam}).validate()
                hp = point.hyperparams()
                locals_w, w_con, _ = run_federation(
                    datasets, hp, seed=seed, scheduler=cfg.scheduler,
                    gamma_cap=cfg.gamma_cap)
                score = score_run(locals_w, w_con, family, cfg.edge_threshold)
                results.append({
                    "beta": repr(beta), "nu": repr(nu), "lambda": repr(lam),
                    "fs_local": repr(score.local_avg.fs),
                    "fs_consensus": repr(score.consensus.fs),
                    "re_local": repr(score.local_avg.re),
                    "re_consensus": repr(score.consensus.re),
                })
                logger.info("grid beta=%g nu=%g lambda=%g -> fs_local=%s fs_con=%s",
                            beta, nu, lam, results[-1]["fs_local"],
                            results[-1]["fs_consensus"])
    with open(out / "grid.csv", "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=GRID_COLUMNS)
        writer.writeheader()
        writer.writerows(results)
    best_local = max(results, key=lambda r: float(r["fs_local"]))
    best_con = max(results, key=lambda r: float(r["fs_consensus"]))
    with open(out / "selection.csv", "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=["selected_by"] + GRID_COLUMNS)
        writer.writeheader()
        writer.writerow({"selected_by": "fs_local", **best_local})
        writer.writerow({"selected_by": "fs_consensus", **best_con})
    logger.info("best by local FS: beta=%s nu=%s lambda=%s (fs=%s)",
                best_local["beta"], best_local["nu"], best_local["lambda"],
                best_local["fs_local"])
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    for directory in args.results:
        path = Path(directory) / "metrics.csv"
        if not path.exists():
            raise ConfigError(f"no metrics.csv under {directory}")
        rows.extend(read_metrics_csv(path))
    groups = {}
    for row in rows:
        groups.setdefault((row["method"], row["N"], row["q"]), []).append(row)
    out_rows = []
    for (method, n_label, q), grp in sorted(groups.items()):
        fs = np.array([float(r["fs"]) for r in grp])
        re = np.array([float(r["re"]) for r in grp])
        out_rows.append({
            "method": method, "N": n_label, "q": q, "runs": len(grp),
            "fs_mean": repr(float(fs.mean())), "fs_std": repr(float(fs.std())),
            "re_mean": repr(float(re.mean())), "re_std": repr(float(re.std())),
        })
    fieldnames = ["method", "N", "q", "runs", "fs_mean", "fs_std", "re_mean", "re_std"]
    if args.out:
        with open(args.out, "w", newline="", encoding="ascii") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(out_rows)
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(out_rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedgl", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a synthetic benchmark directory")
    p_gen.add_argument("--config", help="experiment config file")
    p_gen.add_argument("--seed", type=int, help="override the config seed")
    p_gen.add_argument("--out", required=True, help="output dataset directory")
    p_gen.set_defaults(func=cmd_generate)

    p_run = sub.add_parser("run", help="run one method against a dataset")
    p_run.add_argument("dataset", help="dataset directory from 'generate'")
    p_run.add_argument("--config", help="experiment config file")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--method", required=True, choices=METHODS)
    p_run.add_argument("--out", required=True, help="results directory")
    p_run.set_defaults(func=cmd_run)

    p_grid = sub.add_parser("grid", help="grid-search (beta, nu, lambda) for ppgl")
    p_grid.add_argument("dataset", help="dataset directory from 'generate'")
    p_grid.add_argument("--config", help="experiment config file")
    p_grid.add_argument("--seed", type=int, help="override the config seed")
    p_grid.add_argument("--out", required=True, help="results directory")
    p_grid.set_defaults(func=cmd_grid)

    p_rep = sub.add_parser("report", help="aggregate metrics from result directories")
    p_rep.add_argument("results", nargs="+", help="result directories")
    p_rep.add_argument("--out", help="write the aggregate CSV here (default stdout)")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
