"""Command-line interface: simulate, fit, benchmark, pandemic-demo.

CSV conventions: UTF-8 with a mandatory header row; the outcome column is
``y``, binomial data add a trials column ``n``, every other numeric column
is a covariate.  An intercept column is appended automatically unless
``--no-intercept-append`` is given.  All outputs echo the seed and the full
configuration for reproducibility.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np
from scipy.special import expit

from . import baselines, binary, binomial, mnl, ssm
from .diagnostics import inefficiency
from .errors import InputError, PgbayesError
from .model import (
    BinaryData,
    BinomialData,
    Draws,
    McmcConfig,
    MultinomialData,
    Priors,
    TimeSeriesData,
    simulate_dataset,
)
from .pandemic import pandemic_series, pandemic_years
from .rng import RngStream

MODELS = ("logit", "probit", "mnl", "binomial", "ssm-logit", "ssm-probit")
SAMPLERS = ("upg", "upg-scale", "upg-none", "ac", "ps", "amh")


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def read_dataset(path: str, model: str, append_intercept: bool = True):
    """Load a dataset CSV for the given model."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        rows = list(reader)
    if "y" not in header:
        raise InputError(f"{path}: missing outcome column 'y'")
    if not rows:
        raise InputError(f"{path}: no data rows")
    try:
        values = np.array([[float(v) for v in row] for row in rows])
    except ValueError as err:
        bad = next(i for i, row in enumerate(rows)
                   if any(_not_float(v) for v in row))
        raise InputError(f"{path}: malformed value in data row {bad}: {err}") from None
    if values.shape[1] != len(header):
        bad = next(i for i, row in enumerate(rows) if len(row) != len(header))
        raise InputError(f"{path}: wrong number of fields in data row {bad}")
    cols = {name: values[:, i] for i, name in enumerate(header)}
    y = cols.pop("y")
    trials = cols.pop("n", None)
    covariates = [name for name in header if name in cols]
    x = (np.column_stack([cols[name] for name in covariates])
         if covariates else np.empty((y.size, 0)))
    names = list(covariates)
    if append_intercept:
        x = np.column_stack([x, np.ones(y.size)])
        names.append("intercept")
    if x.shape[1] == 0:
        raise InputError(f"{path}: no covariate columns and intercept disabled")

    if model in ("logit", "probit"):
        return BinaryData(x=x, y=_int_col(y, path)), names
    if model in ("ssm-logit", "ssm-probit"):
        return TimeSeriesData(x=x, y=_int_col(y, path)), names
    if model == "mnl":
        yi = _int_col(y, path)
        return MultinomialData(x=x, y=yi, m=int(yi.max()) if yi.max() >= 1 else 1), names
    if model == "binomial":
        if trials is None:
            raise InputError(f"{path}: binomial data needs a trials column 'n'")
        return BinomialData(x=x, y=_int_col(y, path),
                            trials=_int_col(trials, path)), names
    raise InputError(f"unknown model {model!r}")


def _not_float(v: str) -> bool:
    try:
        float(v)
        return False
    except ValueError:
        return True


def _int_col(col: np.ndarray, path: str) -> np.ndarray:
    out = col.astype(np.int64)
    if np.any(out != col):
        bad = int(np.argmax(out != col))
        raise InputError(f"{path}: non-integer outcome in data row {bad}")
    return out


def write_dataset(path: str, data, names=None):
    """Write a dataset CSV (excluding the intercept column)."""
    x = data.x[:, :-1]
    header = [f"x{j}" for j in range(x.shape[1])] if names is None else names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if isinstance(data, BinomialData):
            writer.writerow(["y", "n"] + header)
            for i in range(data.n):
                writer.writerow([data.y[i], data.trials[i]]
                                + [f"{v:.17g}" for v in x[i]])
        else:
            writer.writerow(["y"] + header)
            for i in range(data.n):
                writer.writerow([data.y[i]] + [f"{v:.17g}" for v in x[i]])


def write_draws(path: str, draws: Draws):
    gamma = np.atleast_2d(draws.gamma.T).T
    delta = np.atleast_2d(draws.delta.T).T
    g_names = ["gamma"] if gamma.shape[1] == 1 else [f"gamma{k+1}" for k in range(gamma.shape[1])]
    d_names = ["delta"] if delta.shape[1] == 1 else [f"delta{k+1}" for k in range(delta.shape[1])]
    table = np.column_stack([draws.beta, gamma, delta])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(draws.names + g_names + d_names) + "\n")
        np.savetxt(fh, table, fmt="%.17g", delimiter=",")


# ---------------------------------------------------------------------------
# Fitting dispatch
# ---------------------------------------------------------------------------


def fit_draws(data, model: str, sampler: str, prior: Priors,
              config: McmcConfig, rng: RngStream | None = None) -> Draws:
    """Run one (model, sampler) combination."""
    if sampler.startswith("upg"):
        boost = {"upg": "full", "upg-scale": "scale", "upg-none": "none"}[sampler]
        config = McmcConfig(draws=config.draws, burnin=config.burnin,
                            seed=config.seed, boost=boost,
                            link="probit" if "probit" in model else "logit")
        if model in ("logit", "probit"):
            return binary.run_chain(data, prior, config, rng)
        if model == "mnl":
            return mnl.run_chain(data, prior, config, rng)
        if model == "binomial":
            return binomial.run_chain(data, prior, config, rng)
        if model.startswith("ssm"):
            return ssm.run_chain(data, prior, config, rng)
    if sampler == "ac":
        if model != "probit":
            raise InputError("the plain DA baseline applies to probit models only")
        return baselines.run_albert_chib(data, prior, config, rng)
    if sampler == "ps":
        if model == "logit":
            return baselines.run_ps_logit(data, prior, config, rng)
        if model == "mnl":
            return baselines.run_ps_mnl(data, prior, config, rng)
        raise InputError("the marginal-model PG baseline applies to logit/mnl only")
    if sampler == "amh":
        if model.startswith("ssm"):
            raise InputError("the adaptive MH baseline does not cover state-space models")
        return baselines.run_amh(data, prior, config, rng=rng,
                                 model=model if model != "probit" else "probit")
    raise InputError(f"unknown sampler {sampler!r} for model {model!r}")


def _diag_payload(draws: Draws, config: McmcConfig, prior: Priors) -> dict:
    per_coef = {}
    for j, name in enumerate(draws.names):
        chain = draws.beta[:, j]
        if np.var(chain) == 0:
            continue
        per_coef[name] = inefficiency(chain).to_dict()
    return {
        "coefficients": per_coef,
        "seed": config.seed,
        "config": {"draws": config.draws, "burnin": config.burnin,
                   "boost": config.boost, "link": config.link},
        "prior": {"a0": np.asarray(prior.a0).tolist(), "g0": prior.g0,
                  "d0": prior.d0, "D0": prior.big_d0, "c0": prior.c0,
                  "C0": prior.big_c0},
        "meta": draws.meta,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    rng = RngStream(args.seed)
    beta = np.array([float(v) for v in args.beta.split(",")]) if args.beta else None
    d = beta.size // (args.m if args.model == "mnl" else 1) if beta is not None else args.d
    data = simulate_dataset(args.model, args.n, rng, d=d, beta=beta,
                            intercept=args.intercept, m=args.m,
                            trials=args.trials, one_success=args.one_success)
    write_dataset(args.output, data)
    print(f"wrote {args.output}: model={args.model} N={data.n} d={data.dim}")
    return 0


def cmd_fit(args) -> int:
    prior = _prior_from_args(args)
    config = McmcConfig(draws=args.draws, burnin=args.burnin, seed=args.seed,
                        boost="full",
                        link="probit" if "probit" in args.model else "logit")
    data, names = read_dataset(args.input, args.model,
                               append_intercept=not args.no_intercept_append)
    draws = fit_draws(data, args.model, args.sampler, prior, config)
    if args.model in ("logit", "probit", "binomial"):
        draws.names = names
    elif args.model == "mnl":
        draws.names = [f"cat{k}_{nm}" for k in range(1, data.m + 1) for nm in names]
    write_draws(args.draws_out, draws)
    with open(args.diag_out, "w", encoding="utf-8") as fh:
        json.dump(_diag_payload(draws, config, prior), fh, indent=2)
    print(f"wrote {args.draws_out} and {args.diag_out}")
    return 0


def cmd_benchmark(args) -> int:
    prior = _prior_from_args(args)
    samplers = args.samplers.split(",")
    values = [float(v) for v in args.values.split(",")]
    rows = []
    rng = RngStream(args.seed)
    config = McmcConfig(draws=args.draws, burnin=args.burnin, seed=args.seed)
    for rep in range(args.replications):
        for vi, value in enumerate(values):
            scen_rng = rng.fork(rep * 1000 + vi)
            data = _benchmark_data(args, value, scen_rng.fork(0))
            for si, sampler in enumerate(samplers):
                t0 = time.perf_counter()
                draws = fit_draws(data, args.model, sampler, prior, config,
                                  rng=scen_rng.fork(1 + si))
                seconds = time.perf_counter() - t0
                stats = inefficiency(_intercept_chain(draws, args.model, data))
                rows.append((args.model, sampler, args.grid, value, rep,
                             stats.if_factor, stats.ess, seconds))
    _write_benchmark(args.output, rows, args.summarize)
    print(f"wrote {args.output} ({len(rows)} rows)")
    return 0


def _benchmark_data(args, value, rng):
    if args.grid == "intercept":
        return simulate_dataset(args.model, args.n, rng, d=args.d,
                                intercept=value, m=args.m, trials=args.trials)
    if args.grid == "one-success-n":
        return simulate_dataset(args.model, int(value), rng, d=args.d,
                                m=args.m, trials=args.trials, one_success=True)
    if args.grid == "categories":
        return simulate_dataset("mnl", args.n, rng, d=args.d, m=int(value) - 1,
                                one_success=True)
    if args.grid == "trials":
        return simulate_dataset("binomial", args.n, rng, d=args.d,
                                intercept=args.intercept, trials=int(value))
    raise InputError(f"unknown grid {args.grid!r}")


def _intercept_chain(draws: Draws, model: str, data) -> np.ndarray:
    # the intercept IF; for mnl this is category 1's intercept (column d-1
    # in the category-major layout)
    return draws.beta[:, data.dim - 1]


def _write_benchmark(path, rows, summarize):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if summarize:
            writer.writerow(["model", "sampler", "grid", "value",
                             "median_if", "median_ess", "median_seconds"])
            keys = sorted({(r[0], r[1], r[2], r[3]) for r in rows},
                          key=lambda k: (k[1], k[3]))
            for key in keys:
                sel = [r for r in rows if (r[0], r[1], r[2], r[3]) == key]
                writer.writerow(list(key)
                                + [f"{np.median([r[c] for r in sel]):.6g}"
                                   for c in (5, 6, 7)])
        else:
            writer.writerow(["model", "sampler", "grid", "value", "replication",
                             "if", "ess", "seconds"])
            for r in rows:
                writer.writerow([r[0], r[1], r[2], r[3], r[4],
                                 f"{r[5]:.6g}", f"{r[6]:.6g}", f"{r[7]:.6g}"])


def cmd_pandemic_demo(args) -> int:
    prior = _prior_from_args(args)
    data = pandemic_series()
    years = pandemic_years()
    draws_count = 500_000 if args.full else args.draws
    results = {}
    for label, sampler in (("boosted", "upg"), ("unboosted", "upg-none")):
        config = McmcConfig(draws=draws_count, burnin=args.burnin,
                            seed=args.seed, link="logit")
        draws = fit_draws(data, "ssm-logit", sampler, prior, config)
        level = draws.beta[:, 1: data.t + 1]             # state at t=1..T
        prob = expit(level)
        results[label] = {
            "if": np.array([inefficiency(level[:, t]).if_factor
                            for t in range(data.t)]),
            "quantiles": np.quantile(prob, [0.10, 0.50, 0.90], axis=0),
        }
        del draws, level, prob
    with open(args.path_out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "y", "q10", "median", "q90"])
        q = results["boosted"]["quantiles"]
        for t in range(data.t):
            writer.writerow([years[t], data.y[t], f"{q[0, t]:.6g}",
                             f"{q[1, t]:.6g}", f"{q[2, t]:.6g}"])
    with open(args.if_out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "if_boosted", "if_unboosted"])
        for t in range(data.t):
            writer.writerow([years[t],
                             f"{results['boosted']['if'][t]:.6g}",
                             f"{results['unboosted']['if'][t]:.6g}"])
    frac = float(np.mean(results["boosted"]["if"] <= results["unboosted"]["if"]))
    print(f"wrote {args.path_out} and {args.if_out}; "
          f"boosted IF <= unboosted IF at {frac:.1%} of time points")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _prior_from_args(args) -> Priors:
    overrides = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            payload = json.load(fh)
        overrides.update(payload.get("prior", payload))
    mapping = {"a0": "a0", "g0": "g0", "d0": "d0", "D0": "big_d0",
               "c0": "c0", "C0": "big_c0", "p_init": "p_init"}
    kwargs = {mapping[k]: v for k, v in overrides.items() if k in mapping}
    for cli_key in ("a0", "g0"):
        v = getattr(args, cli_key, None)
        if v is not None:
            kwargs[cli_key] = v
    return Priors(**kwargs)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON file with prior overrides")
    p.add_argument("--a0", type=float, default=None,
                   help="diagonal coefficient prior variance")
    p.add_argument("--g0", type=float, default=None,
                   help="threshold prior scale factor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgbayes",
        description="Boosted Polya-Gamma Gibbs samplers for discrete outcomes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a dataset CSV")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--beta", help="comma-separated true coefficients")
    p.add_argument("--intercept", type=float, default=None)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--one-success", action="store_true")
    p.add_argument("--output", "-o", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model to a dataset CSV")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--sampler", choices=SAMPLERS, default="upg")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--burnin", type=int, default=2_000)
    p.add_argument("--no-intercept-append", action="store_true")
    p.add_argument("--draws-out", default="draws.csv")
    p.add_argument("--diag-out", default="diag.json")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("benchmark", help="run an efficiency benchmark grid")
    p.add_argument("--model", choices=("logit", "probit", "mnl", "binomial"),
                   required=True)
    p.add_argument("--samplers", default="upg,ps",
                   help="comma-separated sampler list")
    p.add_argument("--grid", choices=("intercept", "one-success-n",
                                      "categories", "trials"), required=True)
    p.add_argument("--values", required=True, help="comma-separated grid values")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--intercept", type=float, default=-3.0)
    p.add_argument("--replications", "-R", type=int, default=10)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--burnin", type=int, default=2_000)
    p.add_argument("--summarize", action="store_true")
    p.add_argument("--output", "-o", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("pandemic-demo",
                       help="fit the bundled pandemic series, boosted vs not")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--burnin", type=int, default=10_000)
    p.add_argument("--full", action="store_true",
                   help="use the full 500k-draw chain")
    p.add_argument("--path-out", default="pandemic_path.csv")
    p.add_argument("--if-out", default="pandemic_if.csv")
    _add_common(p)
    p.set_defaults(func=cmd_pandemic_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PgbayesError as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
