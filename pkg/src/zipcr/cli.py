"""Command-line front end.

``zipcr run`` fits ZIPCR and/or ZICR to a CSV of lifetimes and writes:

* ``fit_report.json``   estimates, standard errors, Wald intervals, z-ratios,
  log-likelihood, AIC, BIC, convergence and per-group outcomes;
* ``group_outcomes.csv`` fitted (gamma0, gamma1) per covariate pattern;
* ``curves/<stratum>.csv`` Kaplan-Meier and fitted survival points;
* ``summary.txt``       plain-text estimate tables;
* ``run_metadata.json`` timestamp and environment (the only file that varies
  between identical runs).

``zipcr simulate`` writes a synthetic portfolio in the same CSV schema.
"""
import argparse
import csv
import datetime
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, bank_portfolio
from ._backend import backend_name
from .data import Dataset, ParameterVector
from .estimator import ConfigError, OptimizerConfig, fit, group_outcomes, information_criteria
from .km import fitted_curve, kaplan_meier
from .models import ModelVariant, link_weights, population_survival
from .simulate import SimulationDesign, calibrate_censor_time, simulate

log = logging.getLogger("zipcr")

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2
MAX_STRATA = 20
CURVE_POINTS = 201


class IngestError(ValueError):
    pass


@dataclass
class RunConfig:
    input_path: str
    output_dir: str = "zipcr_out"
    model: str = "zipcr"
    time_column: str = "time"
    event_column: str = "event"
    covariate_columns: list = field(default_factory=list)
    cure_covariate_columns: list = None
    categorical_columns: list = field(default_factory=list)
    confidence_level: float = 0.95
    seed: int = 0
    optimizer: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in ("zipcr", "zicr", "both"):
            raise ConfigError(f"model must be zipcr, zicr or both, got {self.model!r}")
        if not 0 < self.confidence_level < 1:
            raise ConfigError("confidence level must lie in (0, 1)")

    @property
    def variants(self):
        if self.model == "both":
            return [ModelVariant.ZIPCR, ModelVariant.ZICR]
        return [ModelVariant.parse(self.model)]

    def optimizer_config(self):
        settings = {"seed": self.seed}
        settings.update(self.optimizer)
        return OptimizerConfig.from_mapping(settings)


# --- ingest -----------------------------------------------------------------------


def _parse_float(text, line, column):
    try:
        return float(text)
    except ValueError:
        raise IngestError(f"line {line}: column {column!r} is not a number: {text!r}")


def _expand_dummies(name, values):
    levels = sorted(set(values))
    reference = levels[-1]
    cols = [f"d{name}{lvl}" for lvl in levels if lvl != reference]
    matrix = np.array([[1.0 if v == lvl else 0.0 for lvl in levels if lvl != reference] for v in values])
    return cols, matrix.reshape(len(values), len(cols))


def _covariate_block(rows, columns, categorical, first_line):
    names, blocks = [], []
    for col in columns:
        raw = [r[col] for r in rows]
        numeric = True
        for v in raw:
            try:
                float(v)
            except ValueError:
                numeric = False
                break
        if col in categorical or not numeric:
            cols, mat = _expand_dummies(col, raw)
        else:
            cols = [col]
            mat = np.array([_parse_float(v, first_line + i, col) for i, v in enumerate(raw)])[:, None]
        names.extend(cols)
        blocks.append(mat)
    if not blocks:
        return names, np.empty((len(rows), 0))
    return names, np.hstack(blocks)


def ingest(path, config):
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    Columns listed in ``config.categorical_columns``, and covariate columns
    holding non-numeric values, are expanded to 0/1 dummies named
    ``d<column><level>``; the lexicographically last level is the reference.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError(f"{path} is empty")
        header = [h.strip() for h in reader.fieldnames]
        reader.fieldnames = header
        rows = list(reader)
    if not rows:
        raise IngestError(f"{path} has a header but no data rows")

    cure_cols = config.cure_covariate_columns
    needed = [config.time_column, config.event_column, *config.covariate_columns, *(cure_cols or [])]
    missing = [c for c in needed if c not in header]
    if missing:
        raise IngestError(f"columns not found in {path}: {missing}")

    first_line = 2
    times, events = [], []
    for i, row in enumerate(rows):
        line = first_line + i
        for col in needed:
            if row.get(col) is None or row[col].strip() == "":
                raise IngestError(f"line {line}: missing value in column {col!r}")
            row[col] = row[col].strip()
        t = _parse_float(row[config.time_column], line, config.time_column)
        if not math.isfinite(t) or t < 0:
            raise IngestError(f"line {line}: time must be a nonnegative number, got {t}")
        e = _parse_float(row[config.event_column], line, config.event_column)
        if e not in (0.0, 1.0):
            raise IngestError(f"line {line}: event must be 0 or 1, got {row[config.event_column]!r}")
        times.append(t)
        events.append(int(e))

    categorical = set(config.categorical_columns)
    names, x_zero = _covariate_block(rows, config.covariate_columns, categorical, first_line)
    x_cure = None
    if cure_cols is not None:
        cure_names, x_cure = _covariate_block(rows, cure_cols, categorical, first_line)
        if x_cure.shape != x_zero.shape:
            raise IngestError("zero and cure covariate sets must expand to the same number of columns")
        names = [f"{a}|{b}" if a != b else a for a, b in zip(names, cure_names)]
    return Dataset(times, events, x_zero, x_cure, names=names)


# --- report formatting ------------------------------------------------------------


def _num(x):
    """Round to 10 significant digits; NaN and infinities become null."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.10g}")


def report_criteria(log_lik, k, n):
    """Rounded (log_lik, aic, bic) such that AIC/BIC recompute exactly from the stored log_lik."""
    ll = _num(log_lik)
    aic, bic = information_criteria(ll, k, n)
    return ll, _num(aic), _num(bic)


def _stratum_label(names, x_zero, x_cure):
    if not names:
        return "all"
    parts = [f"{nm}={_fmt_cov(v)}" for nm, v in zip(names, x_zero)]
    if not np.array_equal(x_zero, x_cure):
        parts += [f"cure:{nm}={_fmt_cov(v)}" for nm, v in zip(names, x_cure)]
    return "_".join(parts)


def _fmt_cov(v):
    return f"{v:g}"


def _safe_filename(label):
    return re.sub(r"[^A-Za-z0-9=._-]+", "-", label)


def _group_rows(data, result):
    rows = []
    params = result.estimates
    groups = data.groups()
    weights = group_outcomes(params, [(xz, xc) for xz, xc, _ in groups])
    for (xz, xc, mask), w in zip(groups, weights):
        sub = data.subset(mask)
        summ = sub.summary()
        rows.append(
            {
                "group": _stratum_label(data.names, xz, xc),
                "covariates": [_num(v) for v in xz],
                "n": summ["n"],
                "gamma0": _num(w.gamma0),
                "gamma1": _num(w.gamma1),
                "observed_zero_fraction": _num(summ["zeros"] / summ["n"]),
                "observed_censored_fraction": _num(summ["censored"] / summ["n"]),
            }
        )
    return rows


def fit_report(data, result):
    ll, aic, bic = report_criteria(result.log_lik, result.k, result.n)
    est = result.estimates.to_array()
    return {
        "model": result.variant.value,
        "n": result.n,
        "k": result.k,
        "parameters": result.labels,
        "estimates": [_num(v) for v in est],
        "std_errors": [_num(v) for v in result.std_errors],
        "ci": [[_num(lo), _num(hi)] for lo, hi in zip(result.ci_lower, result.ci_upper)],
        "confidence_level": result.level,
        "z_ratios": [_num(v) for v in result.z_ratios],
        "log_lik": ll,
        "aic": aic,
        "bic": bic,
        "converged": result.converged,
        "iterations": result.iterations,
        "underflow_rows": result.underflow_rows,
        "hessian_condition": _num(result.hessian_condition),
        "bound_hit": result.bound_hit,
        "message": result.message,
        "group_outcomes": _group_rows(data, result),
    }


def _comparison(reports):
    out = {}
    for crit in ("aic", "bic"):
        values = {r["model"]: r[crit] for r in reports}
        out[crit] = values
        out[f"preferred_by_{crit}"] = min(values, key=values.get)
    return out


def summary_text(reports, comparison=None):
    lines = []
    for rep in reports:
        lines.append(f"Maximum likelihood estimates: {rep['model'].upper()} (n={rep['n']}, k={rep['k']})")
        lines.append(f"{'Parameter':<28}{'Estimate':>14}{'Std. error':>14}{'|est|/se':>12}")
        lines.append("-" * 68)
        for name, e, s, z in zip(rep["parameters"], rep["estimates"], rep["std_errors"], rep["z_ratios"]):
            fmt = lambda v, w, d: f"{v:>{w}.{d}f}" if v is not None else f"{'nan':>{w}}"
            lines.append(f"{name:<28}{fmt(e, 14, 4)}{fmt(s, 14, 4)}{fmt(z, 12, 4)}")
        lines.append("-" * 68)
        lines.append(f"log-likelihood {rep['log_lik']:.2f}   AIC {rep['aic']:.2f}   BIC {rep['bic']:.2f}")
        lines.append(f"converged: {rep['converged']} ({rep['message']})")
        lines.append("")
        lines.append(f"{'Group':<28}{'n':>8}{'gamma0 %':>12}{'gamma1 %':>12}")
        for g in rep["group_outcomes"]:
            lines.append(f"{g['group']:<28}{g['n']:>8}{100 * g['gamma0']:>12.4f}{100 * g['gamma1']:>12.4f}")
        lines.append("")
    if comparison:
        for crit in ("aic", "bic"):
            best = comparison[f"preferred_by_{crit}"]
            cells = [
                f"{m.upper()} {v:.2f}{' <- smaller' if m == best else ''}"
                for m, v in comparison[crit].items()
            ]
            lines.append(f"{crit.upper()}: " + "; ".join(cells))
    return "\n".join(lines).rstrip() + "\n"


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _curve_rows(curve, kind, label):
    return [(repr(float(t)), repr(_num(s)), kind, label) for t, s in zip(curve.times, curve.survival)]


def _averaged_fitted(data, result, grid):
    # population-average of the subject-level fitted curves
    params = result.estimates
    total = np.zeros(grid.size)
    for xz, xc, mask in data.groups():
        w = link_weights(xz, params.coeffs, xc)
        total += mask.sum() * np.atleast_1d(population_survival(grid, w, params.weibull, result.variant))
    return total / data.n


def write_curves(out_dir, data, results):
    curve_dir = Path(out_dir) / "curves"
    curve_dir.mkdir(parents=True, exist_ok=True)
    t_max = float(data.time.max()) or 1.0
    grid = np.linspace(0.0, t_max, CURVE_POINTS)
    header = ("time", "survival", "kind", "label")

    strata = [("all", data, None)]
    groups = data.groups()
    if 1 < len(groups) <= MAX_STRATA:
        strata += [(_stratum_label(data.names, xz, xc), data.subset(m), (xz, xc)) for xz, xc, m in groups]
    elif len(groups) > MAX_STRATA:
        log.warning("%d covariate patterns; writing the pooled curve only", len(groups))

    written = []
    for label, sub, pattern in strata:
        rows = _curve_rows(kaplan_meier(sub, label), "empirical", "kaplan-meier")
        for res in results:
            if pattern is None:
                surv = _averaged_fitted(data, res, grid)
                rows += [(repr(float(t)), repr(_num(s)), "fitted", res.variant.value) for t, s in zip(grid, surv)]
            else:
                curve = fitted_curve(res, pattern[0], res.variant, grid, res.variant.value, x_cure=pattern[1])
                rows += _curve_rows(curve, "fitted", res.variant.value)
        path = curve_dir / f"{_safe_filename(label)}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        written.append(path)
    return written


def write_group_outcomes(path, reports):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["model", "group", "n", "gamma0", "gamma1", "observed_zero_fraction", "observed_censored_fraction"]
        )
        for rep in reports:
            for g in rep["group_outcomes"]:
                writer.writerow(
                    [rep["model"], g["group"], g["n"], g["gamma0"], g["gamma1"],
                     g["observed_zero_fraction"], g["observed_censored_fraction"]]
                )


def run(config):
    """Fit the requested model(s) and write all report files.

    Returns 0 when every fit converged, 2 when any did not, 1 on input or
    configuration errors.
    """
    try:
        data = ingest(config.input_path, config)
        opt = config.optimizer_config()
    except (IngestError, ConfigError, ValueError, TypeError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT

    warnings_out = []
    if not np.any(data.time == 0):
        warnings_out.append("no zero-time observations")
    if np.any((data.time == 0) & (data.event == 0)):
        warnings_out.append("zero-time rows with event=0 were treated as zero-class observations")

    results = []
    try:
        for variant in config.variants:
            log.info("fitting %s on n=%d", variant.value.upper(), data.n)
            results.append(fit(data, variant, config=opt, level=config.confidence_level))
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_INPUT

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = [fit_report(data, r) for r in results]
    comparison = _comparison(reports) if len(reports) > 1 else None
    if comparison is None:
        document = dict(reports[0])
        document["warnings"] = warnings_out
    else:
        document = {
            "model": "both",
            "n": data.n,
            "fits": reports,
            "comparison": comparison,
            "warnings": warnings_out,
        }
    _write_json(out_dir / "fit_report.json", document)
    write_group_outcomes(out_dir / "group_outcomes.csv", reports)
    write_curves(out_dir, data, results)
    text = summary_text(reports, comparison)
    if warnings_out:
        text += "".join(f"warning: {w}\n" for w in warnings_out)
    (out_dir / "summary.txt").write_text(text, encoding="utf-8")
    _write_json(
        out_dir / "run_metadata.json",
        {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "version": __version__,
            "backend": backend_name(),
            "input": str(config.input_path),
        },
    )
    for w in warnings_out:
        log.warning("%s", w)
    sys.stdout.write(text)
    return EXIT_OK if all(r.converged for r in results) else EXIT_NOT_CONVERGED


# --- simulate ---------------------------------------------------------------------


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def write_dataset_csv(path, data, group_index=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        lead = ["group"] if group_index is not None else []
        writer.writerow(lead + ["time", "event", *data.names])
        for i in range(data.n):
            row = [int(group_index[i])] if group_index is not None else []
            row += [repr(float(data.time[i])), int(data.event[i])]
            row += [f"{v:g}" for v in data.x_zero[i]]
            writer.writerow(row)


def simulate_command(args):
    variant = ModelVariant.parse(args.model)
    sizes = [int(v) for v in args.group_sizes.split(",")]
    covs = [_floats(block) for block in args.group_covariates.split(";")]
    names = args.covariate_names.split(",") if args.covariate_names else None
    if args.params:
        params = ParameterVector.from_array(_floats(args.params))
    else:
        params = bank_portfolio.estimates_for(variant)
    if args.censor_time is not None:
        cutoff = args.censor_time
    else:
        cutoff = calibrate_censor_time(sizes, covs, params, variant, args.censored_fraction)
    design = SimulationDesign(sizes, covs, params, cutoff, seed=args.seed, names=names)
    data = simulate(design, variant)
    group_index = np.repeat(np.arange(1, len(sizes) + 1), sizes)
    write_dataset_csv(args.out, data, group_index)
    summ = data.summary()
    print(
        f"wrote {args.out}: n={summ['n']} zeros={summ['zeros']} events={summ['events']} "
        f"censored={summ['censored']} cutoff={cutoff:.6g}"
    )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="zipcr", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="fit ZIPCR/ZICR to a CSV dataset")
    r.add_argument("--input", required=True)
    r.add_argument("--model", choices=["zipcr", "zicr", "both"], default="zipcr")
    r.add_argument("--time-col", default="time")
    r.add_argument("--event-col", default="event")
    r.add_argument("--covariates", default="", help="comma-separated covariate columns")
    r.add_argument("--cure-covariates", default=None, help="separate columns for the cure part")
    r.add_argument("--categorical", default="", help="columns to expand into dummies")
    r.add_argument("--level", type=float, default=0.95)
    r.add_argument("--out", default="zipcr_out")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--optimizer-config", default=None, help="JSON file of optimizer settings")

    s = sub.add_parser("simulate", help="write a synthetic portfolio CSV")
    s.add_argument("--out", required=True)
    s.add_argument("--model", choices=["zipcr", "zicr"], default="zipcr")
    s.add_argument("--group-sizes", default=",".join(map(str, bank_portfolio.GROUP_SIZES)))
    s.add_argument(
        "--group-covariates",
        default=";".join(",".join(f"{v:g}" for v in row) for row in bank_portfolio.PROFILE_DUMMIES),
        help="semicolon-separated covariate patterns, e.g. '1,0;0,1;0,0'",
    )
    s.add_argument("--covariate-names", default=",".join(bank_portfolio.COVARIATE_NAMES))
    s.add_argument("--params", default=None, help="flat parameter vector; defaults to the bank-portfolio estimates")
    cut = s.add_mutually_exclusive_group()
    cut.add_argument("--censor-time", type=float, default=None)
    cut.add_argument("--censored-fraction", type=float, default=bank_portfolio.CENSORED_FRACTION)
    s.add_argument("--seed", type=int, default=0)
    return parser


def _split(text):
    return [c.strip() for c in text.split(",") if c.strip()] if text else []


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    if args.command == "simulate":
        try:
            return simulate_command(args)
        except ValueError as exc:
            log.error("%s", exc)
            return EXIT_INPUT

    optimizer = {}
    if args.optimizer_config:
        try:
            optimizer = json.loads(Path(args.optimizer_config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            log.error("cannot read optimizer config %s: %s", args.optimizer_config, exc)
            return EXIT_INPUT
    try:
        config = RunConfig(
            input_path=args.input,
            output_dir=args.out,
            model=args.model,
            time_column=args.time_col,
            event_column=args.event_col,
            covariate_columns=_split(args.covariates),
            cure_covariate_columns=_split(args.cure_covariates) if args.cure_covariates else None,
            categorical_columns=_split(args.categorical),
            confidence_level=args.level,
            seed=args.seed,
            optimizer=optimizer,
        )
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
