"""Command-line front end: ``glfod {stats,fit,spectra,calibrate,plan,run}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .calibration import calibrate_step, fuse
from .config import KEYS, RunConfig, load_config
from .data import SensorDataset, select_degree, sensor_stats
from .errors import ConfigError, FodError, GainUnreachableError, ParseError
from .pipeline import ERROR, GAIN_UNREACHABLE, OK, PRECISION_UNREACHABLE, run_pipeline, verify_report
from .reports import (
    Bundle,
    Table,
    calibration_tables,
    fit_tables,
    parse_dataset,
    render_fig2_polylines,
    run_tables,
    settings_table,
    spectra_plot,
    stats_tables,
    verification_table,
)
from .transmission import iterations_needed

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECISION = 3
EXIT_GAIN = 4
EXIT_INTERNAL = 5

_STATUS_EXIT = {
    OK: EXIT_OK,
    PRECISION_UNREACHABLE: EXIT_PRECISION,
    GAIN_UNREACHABLE: EXIT_GAIN,
    ERROR: EXIT_INTERNAL,
}

log = logging.getLogger("glfod")


class PrecisionFailure(FodError):
    pass


def _dataset(cfg: RunConfig) -> SensorDataset:
    if cfg.input is None:
        raise ConfigError("input is required for this command")
    try:
        return parse_dataset(cfg.input)
    except OSError as exc:
        raise ParseError(f"cannot read {cfg.input}: {exc}") from exc


def _base(cfg: RunConfig, dataset: SensorDataset):
    stats = sensor_stats(dataset)
    return stats, [settings_table(cfg.to_lines())] + stats_tables(dataset, stats)


def _fit(cfg: RunConfig, stats):
    return select_degree(stats.points, cfg.degree_cap, stats.true_value)


def cmd_stats(cfg: RunConfig) -> Bundle:
    dataset = _dataset(cfg)
    _, tables = _base(cfg, dataset)
    return Bundle(tuple(tables))


def cmd_fit(cfg: RunConfig) -> Bundle:
    dataset = _dataset(cfg)
    stats, tables = _base(cfg, dataset)
    return Bundle(tuple(tables + fit_tables(_fit(cfg, stats))))


def cmd_spectra(cfg: RunConfig) -> Bundle:
    if cfg.omega_points < 2 or not cfg.omega_max > 0:
        raise ConfigError("omega_points must be >= 2 and omega_max > 0")
    omegas = np.linspace(0.0, cfg.omega_max, cfg.omega_points)
    return Bundle((settings_table(cfg.to_lines()),), (spectra_plot(cfg.orders, omegas),))


def _calibrate(cfg: RunConfig, model, stats):
    if cfg.target_std is None:
        raise ConfigError("target_std is required")
    try:
        return calibrate_step(
            model, stats, cfg.nu, cfg.target_std, h0=cfg.h0, shrink=cfg.shrink,
            slack=cfg.slack, max_iters=cfg.max_iters, schedule=cfg.schedule,
        )
    except FodError as exc:
        raise PrecisionFailure(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_calibrate(cfg: RunConfig) -> tuple[int, Bundle]:
    dataset = _dataset(cfg)
    stats, tables = _base(cfg, dataset)
    selection = _fit(cfg, stats)
    trace = _calibrate(cfg, selection.model, stats)
    cal_tables, plots = calibration_tables(trace, selection.model, stats, cfg.nu, dataset.sensor_ids)
    steps = cfg.steps or tuple(s.h for s in trace.steps)
    plots.append(render_fig2_polylines(selection.model, cfg.nu, steps, stats.window))
    bundle = Bundle(tuple(tables + fit_tables(selection) + cal_tables), tuple(plots))
    return (EXIT_OK if trace.converged else EXIT_PRECISION), bundle


def cmd_plan(cfg: RunConfig) -> tuple[int, Bundle]:
    target = cfg.gain_target()
    tables = [settings_table(cfg.to_lines())]
    if cfg.k is not None:
        k = cfg.k
    else:
        dataset = _dataset(cfg)
        stats, base = _base(cfg, dataset)
        tables = base
        model = _fit(cfg, stats).model
        trace = _calibrate(cfg, model, stats)
        if not trace.converged:
            raise PrecisionFailure("step calibration did not reach the precision target")
        k = fuse(model, stats, cfg.nu, trace.final_h).amplification
    rows = [("k", k), ("target_gain", target.value)]
    try:
        m = iterations_needed(k, target.value)
    except GainUnreachableError as exc:
        rows.append(("status", f"gain-unreachable: {exc}"))
        return EXIT_GAIN, Bundle(tuple(tables + [Table("plan", ("quantity", "value"), tuple(rows), "Gain planning")]))
    power = 1.0
    for _ in range(m):
        power *= k
    rows += [("iterations", m), ("planned_gain", power)]
    return EXIT_OK, Bundle(tuple(tables + [Table("plan", ("quantity", "value"), tuple(rows), "Gain planning")]))


def cmd_run(cfg: RunConfig) -> tuple[int, Bundle]:
    dataset = _dataset(cfg)
    pcfg = cfg.pipeline_config()
    report = run_pipeline(dataset, pcfg)
    tables, plots = run_tables(report, dataset)
    tables = [settings_table(cfg.to_lines())] + tables
    if report.ok:
        tables.append(verification_table(verify_report(report, pcfg)))
        steps = cfg.steps or tuple(s.h for s in report.calibration.steps)
        plots.append(render_fig2_polylines(report.model, pcfg.nu, steps, report.stats.window))
    return _STATUS_EXIT[report.status], Bundle(tuple(tables), tuple(plots))


COMMANDS = {
    "stats": cmd_stats,
    "fit": cmd_fit,
    "spectra": cmd_spectra,
    "calibrate": cmd_calibrate,
    "plan": cmd_plan,
    "run": cmd_run,
}


def execute(command: str, cfg: RunConfig) -> int:
    """Run one command, write its bundle, and return the exit code."""
    try:
        result = COMMANDS[command](cfg)
    except (ConfigError, ParseError) as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except PrecisionFailure as exc:
        log.error("%s", exc)
        return EXIT_PRECISION
    except FodError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INTERNAL
    code, bundle = result if isinstance(result, tuple) else (EXIT_OK, result)
    bundle.write(cfg.output)
    log.info("wrote %s", Path(cfg.output) / "summary.txt")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glfod",
        description="Grünwald-Letnikov fractional-order signal conditioning for multi-sensor data.",
        epilog="Exit codes: 0 ok, 2 parse/config, 3 precision unreachable, 4 gain unreachable, 5 internal.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("-q", "--quiet", action="store_true")
        for key in KEYS:
            p.add_argument(f"--{key.replace('_', '-')}", dest=f"opt_{key}", metavar=key.upper())
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(name)s: %(message)s")
    overrides = {k: getattr(args, f"opt_{k}") for k in KEYS if getattr(args, f"opt_{k}") is not None}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    return execute(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
