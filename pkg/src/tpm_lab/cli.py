"""Scenario runner: verify / jarzynski / sweep / sample over JSON configs.

Commands exit 0 on pass, 1 when the checked identity fails its tolerance,
2 on config errors, 3 on validation errors (a stable contract for CI).
The data stream (CSV or JSON) goes to --out or stdout; diagnostic flags
(NOT-FULL-SUPPORT, NON-UNITAL, DEGENERATE-SPECTRUM) go to stderr via
logging and are never mixed into the data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigError, ValidationError
from .sampler import (
    EstimatorReport,
    estimate_exponential_average,
    sample_trajectories,
)
from .scenarios import (
    ROLE_SAMPLER,
    BuiltScenario,
    ScenarioConfig,
    build_scenario,
    derive_seed,
    load_scenario,
    sweep_configs,
)
from .tpm import (
    compare_mi_to_dissipation,
    joint_distribution,
    mutual_information_table,
    work_statistics,
)

__all__ = [
    "ReportRow",
    "REPORT_COLUMNS",
    "evaluate_scenario",
    "run_verify",
    "run_sweep",
    "run_sample",
    "rows_to_csv",
    "rows_to_json",
    "main",
]

log = logging.getLogger("tpm_lab")

DEFAULT_VERIFY_TOL = 1e-10
DEFAULT_JARZYNSKI_TOL = 1e-8
# Thresholds for stderr diagnostics only; they gate no computation.
NOT_FULL_SUPPORT_FLAG = 1e-10
NON_UNITAL_FLAG = 1e-8

EXIT_PASS = 0
EXIT_IDENTITY_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_VALIDATION_ERROR = 3


@dataclass(frozen=True)
class ReportRow:
    """One scenario's worth of verification numbers, in column order."""

    name: str
    dim: int
    beta: float
    exp_avg_mi: float
    support_defect: float
    avg_mi: float
    jarzynski_lhs: float
    jarzynski_rhs: float
    jarzynski_defect: float
    unitality_residual: float
    colsum_max_dev: float
    factorization_residual: float
    mi_vs_dissipation_gap: float


REPORT_COLUMNS = tuple(f.name for f in fields(ReportRow))


def evaluate_scenario(built: BuiltScenario) -> ReportRow:
    """Compute every report column for one built scenario."""
    config = built.config
    jd = joint_distribution(built.experiment,
                            support_epsilon=built.support_epsilon)
    mi = mutual_information_table(jd)
    ws = work_statistics(jd, built.first_energies, built.second_energies,
                         config.beta,
                         built.first_ensemble.partition_function,
                         built.second_ensemble.partition_function)
    gap = compare_mi_to_dissipation(mi, ws)

    if mi.support_defect > NOT_FULL_SUPPORT_FLAG:
        log.warning("NOT-FULL-SUPPORT scenario=%s support_defect=%.6g",
                    config.name, mi.support_defect)
    unitality = built.experiment.channel.unitality_residual
    if unitality > NON_UNITAL_FLAG:
        log.warning("NON-UNITAL scenario=%s unitality_residual=%.6g",
                    config.name, unitality)
    max_rank = max(built.experiment.first_measurement.max_rank,
                   built.experiment.second_measurement.max_rank)
    if max_rank > 1:
        log.warning("DEGENERATE-SPECTRUM scenario=%s max_projector_rank=%d",
                    config.name, max_rank)

    colsums = ws.conditional_colsums
    colsum_max_dev = (float(np.max(np.abs(colsums - 1.0)))
                      if colsums.size else 0.0)
    return ReportRow(
        name=config.name, dim=config.dim, beta=config.beta,
        exp_avg_mi=mi.exp_average, support_defect=mi.support_defect,
        avg_mi=mi.average_mi,
        jarzynski_lhs=ws.jarzynski_lhs, jarzynski_rhs=ws.jarzynski_rhs,
        jarzynski_defect=ws.jarzynski_defect,
        unitality_residual=unitality, colsum_max_dev=colsum_max_dev,
        factorization_residual=jd.factorization_residual,
        mi_vs_dissipation_gap=gap)


def run_verify(config: ScenarioConfig) -> ReportRow:
    """Build a scenario and compute its full report row."""
    return evaluate_scenario(build_scenario(config))


def verify_passed(row: ReportRow, tol: float = DEFAULT_VERIFY_TOL) -> bool:
    """Exponential-average pass rule: bookkeeping holds and MI ≥ 0."""
    return (abs(row.exp_avg_mi + row.support_defect - 1.0) <= tol
            and row.avg_mi >= -tol)


def jarzynski_passed(row: ReportRow,
                     tol: float = DEFAULT_JARZYNSKI_TOL) -> bool:
    return abs(row.jarzynski_defect) <= tol


def run_sweep(config: ScenarioConfig, parameter: str,
              values) -> list[ReportRow]:
    """One report row per sweep value, in input order.

    Each point runs with a deterministic seed derived from the base seed
    and the point index, so sweep output is reproducible regardless of any
    future execution-order changes. An empty value list yields an empty
    report.
    """
    return [run_verify(variant)
            for variant in sweep_configs(config, parameter, values)]


def run_sample(config: ScenarioConfig, count: int,
               weight: str = "mi") -> EstimatorReport:
    """Monte Carlo estimate of an exponential average on one scenario.

    ``weight="mi"`` estimates ⟨e^{−I}⟩ against the engine's exact
    exponential average; ``weight="work"`` uses βW so the sample mean
    estimates ⟨e^{−βW}⟩, compared against the exact work average (which
    equals Z'/Z whenever the Jarzynski conditions hold).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if weight not in ("mi", "work"):
        raise ValueError(f"weight must be 'mi' or 'work', got {weight!r}")
    if count == 1:
        log.warning("count=1: std_error is degenerate (reported as 0)")
    built = build_scenario(config)
    jd = joint_distribution(built.experiment,
                            support_epsilon=built.support_epsilon)
    if weight == "mi":
        mi = mutual_information_table(jd)
        weight_table = mi.i_table
        exact = mi.exp_average
    else:
        ws = work_statistics(jd, built.first_energies, built.second_energies,
                             config.beta,
                             built.first_ensemble.partition_function,
                             built.second_ensemble.partition_function)
        weight_table = config.beta * ws.work_table
        exact = ws.jarzynski_lhs
    rng = np.random.default_rng(derive_seed(config.seed, ROLE_SAMPLER))
    samples = sample_trajectories(jd, count, rng)
    return estimate_exponential_average(samples, weight_table, exact=exact)


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def rows_to_csv(rows: list[ReportRow]) -> str:
    """CSV report: UTF-8, header in field order, 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow([_format_value(getattr(row, name))
                         for name in REPORT_COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: list[ReportRow]) -> str:
    payload = [{name: getattr(row, name) for name in REPORT_COLUMNS}
               for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def parse_report_csv(text: str) -> list[ReportRow]:
    """Inverse of :func:`rows_to_csv` (used for round-trip checks)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != REPORT_COLUMNS:
        raise ValueError(f"unexpected CSV header: {header}")
    rows = []
    for record in reader:
        if not record:
            continue
        values = dict(zip(REPORT_COLUMNS, record))
        rows.append(ReportRow(
            name=values["name"], dim=int(values["dim"]),
            **{name: float(values[name]) for name in REPORT_COLUMNS
               if name not in ("name", "dim")}))
    return rows


def _estimate_to_json(config: ScenarioConfig, weight: str,
                      report: EstimatorReport) -> str:
    payload = {
        "scenario": config.name,
        "weight": weight,
        "sample_count": report.sample_count,
        "mean": report.mean,
        "std_error": report.std_error,
        "exact_value": report.exact_value,
        "z_score": report.z_score,
    }
    return json.dumps(payload, indent=2) + "\n"


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load_config(args) -> ScenarioConfig:
    config = load_scenario(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tpm-lab",
        description="Exact and Monte Carlo checks of exponential averages "
                    "in two-point-measurement experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="scenario JSON file")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    common.add_argument("--out", default=None,
                        help="write the report here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="report format (default csv)")

    sub = parser.add_subparsers(dest="command", required=True)
    p_verify = sub.add_parser(
        "verify", parents=[common],
        help="check ⟨e^{-I}⟩ bookkeeping and MI non-negativity")
    p_verify.add_argument("--tol", type=float, default=DEFAULT_VERIFY_TOL)
    p_jarzynski = sub.add_parser(
        "jarzynski", parents=[common],
        help="check ⟨e^{-βW}⟩ = Z'/Z")
    p_jarzynski.add_argument("--tol", type=float,
                             default=DEFAULT_JARZYNSKI_TOL)
    p_sweep = sub.add_parser(
        "sweep", parents=[common],
        help="re-run a scenario over a parameter grid")
    p_sweep.add_argument("--param", required=True,
                         choices=("beta", "channel_param", "dim"))
    p_sweep.add_argument("--values", nargs="*", type=float, default=[],
                         help="sweep values (may be empty)")
    p_sample = sub.add_parser(
        "sample", parents=[common],
        help="Monte Carlo estimate of an exponential average")
    p_sample.add_argument("--count", type=int, required=True)
    p_sample.add_argument("--weight", choices=("mi", "work"), default="mi")
    return parser


def _dispatch(args) -> int:
    config = _load_config(args)
    if args.command in ("verify", "jarzynski"):
        row = run_verify(config)
        text = (rows_to_csv([row]) if args.format == "csv"
                else rows_to_json([row]))
        _write_output(text, args.out)
        if args.command == "verify":
            ok = verify_passed(row, args.tol)
            check = "exponential-average bookkeeping"
        else:
            ok = jarzynski_passed(row, args.tol)
            check = "Jarzynski equality"
        if ok:
            log.info("PASS %s: %s", config.name, check)
            return EXIT_PASS
        log.error("FAIL %s: %s (tol %g)", config.name, check, args.tol)
        return EXIT_IDENTITY_FAILURE
    if args.command == "sweep":
        rows = run_sweep(config, args.param, list(args.values))
        text = (rows_to_csv(rows) if args.format == "csv"
                else rows_to_json(rows))
        _write_output(text, args.out)
        return EXIT_PASS
    report = run_sample(config, args.count, args.weight)
    _write_output(_estimate_to_json(config, args.weight, report), args.out)
    return EXIT_PASS


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG_ERROR
    except ValidationError as exc:
        log.error("validation error: %s", exc)
        return EXIT_VALIDATION_ERROR
    except OverflowError as exc:
        log.error("overflow: %s", exc)
        return EXIT_VALIDATION_ERROR
    except ValueError as exc:
        log.error("invalid request: %s", exc)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
