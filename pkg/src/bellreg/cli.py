"""Batch front door: fit / simulate / gof / compare subcommands.

Every run writes report.json (all structured results plus the seed, a config
hash, retained-draw counts, and acceptance rates), publication-style table_*.csv
files, and per-chain dumps chain_<model>_<c>.csv under --out.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 convergence
failure (any R-hat above 1.1 in compare, unless --allow-nonconverged).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .inference import chisq_gof, criteria_report, summarize
from .model import Dataset, FlatNormalPrior, GPrior, NumericalError
from .sampler import ChainSet, McmcConfig, ProposalSpec, gelman_rubin_all, run_chains, save_chain_csv
from .datasets import load_dataset
from .simulation import run_simulation_study
from .special import build_log_bell_table

RHAT_GATE = 1.1

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_CONVERGENCE = 4


def _r(v) -> str:
    """Full-precision decimal repr that round-trips through float()."""
    return repr(float(v))


def _config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _mcmc_config(args) -> McmcConfig:
    return McmcConfig(
        n_iter=args.iters, burn_in=args.burnin, thin=args.thin,
        n_chains=args.chains, seed=args.seed,
        proposal=ProposalSpec(covariance_shape=args.proposal_shape),
    )


def _prior_for(args, p: int):
    if args.prior == "gprior":
        return GPrior(a_mu=args.a_mu, b_mu=args.b_mu, p=p)
    return FlatNormalPrior(tau=args.tau)


def _fit_one(kind: str, args, dataset: Dataset, config: McmcConfig):
    table = None
    if kind == "bell":
        table = build_log_bell_table(int(dataset.y.max()) + 16)
    prior = _prior_for(args, dataset.p)
    chains = run_chains(kind, prior, dataset, config, table)
    report = summarize(chains, level=args.level)
    criteria = criteria_report(kind, dataset, chains, table)
    rhat = gelman_rubin_all(chains) if config.n_chains >= 2 else None
    return {
        "chains": chains,
        "summary": report,
        "criteria": criteria,
        "rhat": rhat,
    }


def _fit_payload(kind: str, fit: dict) -> dict:
    chains: ChainSet = fit["chains"]
    return {
        "model": kind,
        "posterior": fit["summary"].to_dict(),
        "criteria": fit["criteria"].to_dict(),
        "rhat": None if fit["rhat"] is None else fit["rhat"].tolist(),
        "accept_rates": chains.accept_rates.tolist(),
        "retained_per_chain": chains.n_retained,
        "proposal_scales": chains.sigmas.tolist(),
        "warnings": chains.warnings,
    }


def _dump_chains(outdir: Path, kind: str, chains: ChainSet):
    for c in range(chains.n_chains):
        save_chain_csv(outdir / f"chain_{kind}_{c}.csv", chains, c)


def _write_posterior_csv(outdir: Path, fits: dict):
    with open(outdir / "table_posterior.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "parameter", "mean", "median", "psd",
                         "hpd_lower", "hpd_upper"])
        for kind, fit in fits.items():
            rep = fit["summary"]
            for j in range(len(rep.mean)):
                writer.writerow([
                    kind, f"beta_{j}", _r(rep.mean[j]), _r(rep.median[j]),
                    _r(rep.psd[j]), _r(rep.hpd_lower[j]), _r(rep.hpd_upper[j]),
                ])


def _write_criteria_csv(outdir: Path, fits: dict):
    with open(outdir / "table_criteria.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "lmpl", "dic", "eaic", "ebic"])
        for kind, fit in fits.items():
            cr = fit["criteria"]
            writer.writerow([kind, _r(cr.lmpl), _r(cr.dic), _r(cr.eaic), _r(cr.ebic)])


def _write_gof_csv(outdir: Path, gofs: dict):
    kinds = list(gofs)
    with open(outdir / "table_gof.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["count", "observed"] + [f"expected_{k}" for k in kinds])
        first = gofs[kinds[0]]
        for i, lab in enumerate(first.labels):
            writer.writerow([lab, int(first.observed[i])]
                            + [_r(gofs[k].expected[i]) for k in kinds])
        writer.writerow(["chi2", ""] + [_r(gofs[k].statistic) for k in kinds])
        writer.writerow(["p_value", ""] + [_r(gofs[k].p_value) for k in kinds])
        writer.writerow(["df", ""] + [gofs[k].df for k in kinds])


def _load(args) -> Dataset:
    covs = args.covariates.split(",") if args.covariates else None
    return load_dataset(args.data, response_column=args.response,
                        covariate_columns=covs, add_intercept=not args.no_intercept,
                        standardize=args.standardize)


def _emit_report(outdir: Path, payload: dict):
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2)


def cmd_fit(args) -> int:
    dataset = _load(args)
    config = _mcmc_config(args)
    kinds = ["bell", "poisson"] if args.model == "both" else [args.model]
    fits = {k: _fit_one(k, args, dataset, config) for k in kinds}
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": "fit",
        "seed": args.seed,
        "config_hash": _config_hash(vars(args)),
        "n": dataset.n,
        "p": dataset.p,
        "fits": {k: _fit_payload(k, f) for k, f in fits.items()},
    }
    _emit_report(outdir, payload)
    _write_posterior_csv(outdir, fits)
    _write_criteria_csv(outdir, fits)
    for k, f in fits.items():
        _dump_chains(outdir, k, f["chains"])
    for k, f in fits.items():
        print(f"[{k}] posterior summary:")
        print(f["summary"].format_table())
    return EXIT_OK


def cmd_gof(args) -> int:
    dataset = _load(args)
    kinds = ["bell", "poisson"] if args.model == "both" else [args.model]
    cells = tuple(int(c) for c in args.cells.split(","))
    gofs = {k: chisq_gof(dataset.y, k, cells=cells) for k in kinds}
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": "gof",
        "seed": args.seed,
        "config_hash": _config_hash(vars(args)),
        "n": dataset.n,
        "gof": {k: g.to_dict() for k, g in gofs.items()},
    }
    _emit_report(outdir, payload)
    _write_gof_csv(outdir, gofs)
    for k, g in gofs.items():
        print(f"[{k}]")
        print(g.format_table())
    return EXIT_OK


def cmd_compare(args) -> int:
    dataset = _load(args)
    config = _mcmc_config(args)
    fits = {k: _fit_one(k, args, dataset, config) for k in ("bell", "poisson")}
    cells = tuple(int(c) for c in args.cells.split(","))
    gofs = {k: chisq_gof(dataset.y, k, cells=cells) for k in ("bell", "poisson")}
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": "compare",
        "seed": args.seed,
        "config_hash": _config_hash(vars(args)),
        "n": dataset.n,
        "p": dataset.p,
        "fits": {k: _fit_payload(k, f) for k, f in fits.items()},
        "gof": {k: g.to_dict() for k, g in gofs.items()},
    }
    _emit_report(outdir, payload)
    _write_posterior_csv(outdir, fits)
    _write_criteria_csv(outdir, fits)
    _write_gof_csv(outdir, gofs)
    for k, f in fits.items():
        _dump_chains(outdir, k, f["chains"])
        print(f"[{k}] criteria:")
        print(f["criteria"].format_table())

    rhats = [float(np.max(f["rhat"])) for f in fits.values()
             if f["rhat"] is not None]
    if rhats and max(rhats) > RHAT_GATE and not args.allow_nonconverged:
        print(f"convergence gate failed: max R-hat = {max(rhats):.3f} > {RHAT_GATE}",
              file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _mcmc_config(args)
    cells = run_simulation_study(
        ns=tuple(int(v) for v in args.sizes.split(",")),
        ps=tuple(int(v) for v in args.dims.split(",")),
        priors=tuple(args.priors.split(",")),
        n_reps=args.reps, config=config, master_seed=args.seed,
        tau=args.tau, a_mu=args.a_mu, b_mu=args.b_mu, level=args.level,
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": "simulate",
        "seed": args.seed,
        "config_hash": _config_hash(vars(args)),
        "cells": [c.to_dict() for c in cells],
    }
    _emit_report(outdir, payload)
    with open(outdir / "table_estimates.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "p", "prior", "parameter", "true", "estimate",
                         "psd", "hpd_lower", "hpd_upper", "coverage"])
        for cell in cells:
            for j in range(cell.p):
                writer.writerow([
                    cell.n, cell.p, cell.prior, f"beta_{j}", _r(cell.truth[j]),
                    _r(cell.estimate[j]), _r(cell.psd[j]),
                    _r(cell.hpd_lower[j]), _r(cell.hpd_upper[j]),
                    _r(cell.coverage[j]),
                ])
    with open(outdir / "table_errors.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "p", "prior", "mse", "mae"])
        for cell in cells:
            writer.writerow([cell.n, cell.p, cell.prior, _r(cell.mse), _r(cell.mae)])
    for cell in cells:
        print(f"n={cell.n} p={cell.p} prior={cell.prior}: "
              f"mse={cell.mse:.4f} mae={cell.mae:.4f}")
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("--out", default="bellreg_out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", default=None,
                        help="JSON file of defaults for any flag (CLI overrides)")


def _add_data_opts(parser):
    parser.add_argument("--data", required=True, help="input CSV path")
    parser.add_argument("--response", default="y", help="response column name")
    parser.add_argument("--covariates", default=None,
                        help="comma-separated covariate columns (default: all others)")
    parser.add_argument("--no-intercept", action="store_true")
    parser.add_argument("--standardize", action="store_true",
                        help="center/scale covariates before fitting")


def _add_model_opts(parser, with_both=True):
    choices = ["bell", "poisson"] + (["both"] if with_both else [])
    parser.add_argument("--model", choices=choices, default="both" if with_both else "bell")
    parser.add_argument("--prior", choices=["gprior", "flat"], default="gprior")
    parser.add_argument("--tau", type=float, default=100.0)
    parser.add_argument("--a-mu", type=float, default=1.0, dest="a_mu")
    parser.add_argument("--b-mu", type=float, default=1.0, dest="b_mu")
    parser.add_argument("--level", type=float, default=0.95)


def _add_mcmc_opts(parser):
    parser.add_argument("--iters", type=int, default=50_000)
    parser.add_argument("--burnin", type=int, default=10_000)
    parser.add_argument("--thin", type=int, default=20)
    parser.add_argument("--chains", type=int, default=2)
    parser.add_argument("--proposal-shape", choices=["gram", "identity"],
                        default="gram", dest="proposal_shape")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellreg",
        description="Bayesian Bell/Poisson count regression",
    )
    parser._commands = {}
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one or both models to a CSV")
    _add_data_opts(p_fit)
    _add_model_opts(p_fit)
    _add_mcmc_opts(p_fit)
    _add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_gof = sub.add_parser("gof", help="marginal chi-square goodness of fit")
    _add_data_opts(p_gof)
    p_gof.add_argument("--model", choices=["bell", "poisson", "both"], default="both")
    p_gof.add_argument("--cells", default="0,1,2,3,4",
                       help="comma-separated counts; one tail cell is added")
    _add_common(p_gof)
    p_gof.set_defaults(func=cmd_gof)

    p_cmp = sub.add_parser("compare", help="fit both models, criteria + GOF")
    _add_data_opts(p_cmp)
    _add_model_opts(p_cmp, with_both=False)
    _add_mcmc_opts(p_cmp)
    p_cmp.add_argument("--cells", default="0,1,2,3,4")
    p_cmp.add_argument("--allow-nonconverged", action="store_true",
                       help="do not fail on R-hat above the gate")
    _add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_sim = sub.add_parser("simulate", help="replication study on synthetic data")
    p_sim.add_argument("--sizes", default="50,100,200")
    p_sim.add_argument("--dims", default="3,6")
    p_sim.add_argument("--priors", default="gprior,flat")
    p_sim.add_argument("--reps", type=int, default=20)
    p_sim.add_argument("--tau", type=float, default=100.0)
    p_sim.add_argument("--a-mu", type=float, default=1.0, dest="a_mu")
    p_sim.add_argument("--b-mu", type=float, default=1.0, dest="b_mu")
    p_sim.add_argument("--level", type=float, default=0.95)
    _add_mcmc_opts(p_sim)
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    parser._commands = {"fit": p_fit, "gof": p_gof, "compare": p_cmp,
                        "simulate": p_sim}
    return parser


def _apply_config_file(parser, args, argv):
    """Config-file values become defaults; explicit CLI flags still win."""
    if not getattr(args, "config", None):
        return args
    with open(args.config) as fh:
        overrides = json.load(fh)
    unknown = [k for k in overrides if not hasattr(args, k)]
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    parser._commands[args.command].set_defaults(**overrides)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(parser, args, argv)
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
