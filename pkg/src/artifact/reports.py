"""Dataset files, report tables, plot data, and bundle output."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import comb, rgamma

from .calibration import CalibrationTrace, fuse
from .data import DegreeSelection, PolynomialModel, SensorDataset, SensorStats
from .errors import InsufficientDataError, ParseError
from .operator import GlPlan, gl_apply_model, spectral_response, term_count
from .pipeline import PipelineReport, VerificationSummary


def fmt(value) -> str:
    """Shortest round-tripping text for a cell; shared by files and summary."""
    if isinstance(value, (bool, np.bool_)):
        return "yes" if value else "no"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def parse_dataset(path: str | Path) -> SensorDataset:
    """Read a header row of sensor labels followed by comma-separated readings."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("missing header row", line=1)
    labels = [c.strip() for c in lines[0].split(",")]
    if any(not c for c in labels):
        raise ParseError("empty sensor label", line=1)
    if len(labels) < 2:
        raise ParseError(f"need at least 2 sensors, got {len(labels)}", line=1)
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(labels):
            raise ParseError(f"expected {len(labels)} cells, got {len(cells)}", line=lineno)
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise ParseError(f"non-numeric cell in {line!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in row):
            raise ParseError("non-finite reading", line=lineno)
        rows.append(row)
    if len(rows) < 2:
        raise ParseError(f"need at least 2 readings per sensor, got {len(rows)}", line=len(lines) + 1)
    try:
        return SensorDataset(tuple(labels), np.array(rows))
    except InsufficientDataError as exc:
        raise ParseError(str(exc)) from exc


def format_dataset(dataset: SensorDataset) -> str:
    out = [",".join(dataset.sensor_ids)]
    out += [",".join(fmt(v) for v in row) for row in dataset.readings]
    return "\n".join(out) + "\n"


def write_dataset(dataset: SensorDataset, path: str | Path) -> None:
    atomic_write(Path(path), format_dataset(dataset))


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class Table:
    """A named grid of cells, written as ``table_<name>.csv`` or ``plot_<name>.tsv``."""

    name: str
    header: tuple[str, ...]
    rows: tuple[tuple, ...]
    title: str = ""

    def cells(self) -> list[list[str]]:
        return [list(self.header)] + [[fmt(v) for v in row] for row in self.rows]

    def to_text(self, delimiter: str) -> str:
        buf = io.StringIO()
        csv.writer(buf, delimiter=delimiter, lineterminator="\n").writerows(self.cells())
        return buf.getvalue()

    def render(self) -> str:
        cells = self.cells()
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.header))]
        lines = [self.title or self.name]
        for k, row in enumerate(cells):
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


@dataclass(frozen=True)
class Bundle:
    tables: tuple[Table, ...] = ()
    plots: tuple[Table, ...] = ()
    headline: tuple[str, ...] = ()

    def files(self) -> dict[str, str]:
        out = {f"table_{t.name}.csv": t.to_text(",") for t in self.tables}
        out.update({f"plot_{p.name}.tsv": p.to_text("\t") for p in self.plots})
        out["summary.txt"] = self.summary()
        return dict(sorted(out.items()))

    def summary(self) -> str:
        parts = list(self.headline) + [t.render() for t in self.tables]
        if self.plots:
            parts.append("plot data: " + ", ".join(f"plot_{p.name}.tsv" for p in self.plots))
        return "\n\n".join(parts) + "\n"

    def write(self, outdir: str | Path) -> list[Path]:
        outdir = Path(outdir)
        written = []
        for name, text in self.files().items():
            atomic_write(outdir / name, text)
            written.append(outdir / name)
        return written


def stats_tables(dataset: SensorDataset, stats: SensorStats) -> list[Table]:
    rows = tuple(
        (label, float(m), float(s))
        for label, m, s in zip(dataset.sensor_ids, stats.per_sensor_mean, stats.per_sensor_std)
    )
    return [
        Table("sensors", ("sensor", "mean", "std"), rows, "Per-sensor statistics"),
        Table(
            "dataset",
            ("quantity", "value"),
            (("true_value", stats.true_value), ("system_std", stats.system_std)),
            "Dataset statistics",
        ),
    ]


def fit_tables(selection: DegreeSelection) -> list[Table]:
    deg_rows = [(d, e, "chosen" if d == selection.chosen_degree else "") for d, e in sorted(selection.total_error_by_degree.items())]
    deg_rows += [(d, None, "excluded: " + why) for d, why in sorted(selection.excluded.items())]
    model = selection.model
    return [
        Table("degree", ("degree", "total_error", "status"), tuple(sorted(deg_rows, key=lambda r: r[0])), "Degree selection"),
        Table(
            "model",
            ("power", "coefficient"),
            tuple(enumerate(model.coefficients)),
            "Fitted model coefficients",
        ),
    ]


def calibration_tables(
    trace: CalibrationTrace, model: PolynomialModel, stats: SensorStats, nu: float, labels: Sequence[str]
) -> tuple[list[Table], list[Table]]:
    probes = tuple(
        (i, s.h, s.n, s.std, s.amplification, s.admissible, s.h == trace.final_h and trace.converged)
        for i, s in enumerate(trace.steps)
    )
    fusion_rows = []
    for i, step in enumerate(trace.steps):
        res = fuse(model, stats, nu, step.h)
        for label, x, f, v in zip(labels, res.impact, res.fused_values, res.normalized_values):
            fusion_rows.append((i, step.h, label, float(x), float(f), float(v)))
    tables = [
        Table(
            "calibration",
            ("probe", "h", "terms", "std", "amplification", "admissible", "selected"),
            probes,
            "Step calibration",
        ),
        Table("fusion", ("probe", "h", "sensor", "impact", "fused", "normalized"), tuple(fusion_rows), "Fused values per probe"),
    ]
    plots = [Table("calibration", ("h", "std", "amplification"), tuple((s.h, s.std, s.amplification) for s in trace.steps))]
    return tables, plots


def spectra_plot(orders: Sequence[float], omegas: Sequence[float]) -> Table:
    """Amplitude and phase columns for each order over ``omegas``."""
    curves = {nu: spectral_response(nu, omegas) for nu in orders}
    header = ["omega"] + [f"amplitude_{fmt(float(nu))}" for nu in orders] + [f"phase_{fmt(float(nu))}" for nu in orders]
    rows = []
    for i, w in enumerate(omegas):
        rows.append(
            (float(w),)
            + tuple(curves[nu][i].amplitude for nu in orders)
            + tuple(curves[nu][i].phase for nu in orders)
        )
    return Table("spectra", tuple(header), tuple(rows))


def exact_memory_derivative(model: PolynomialModel, nu: float, memory: float, x: float) -> float:
    """Exact order-``nu`` derivative of the polynomial with lower terminal ``x - memory``."""
    t0 = x - memory
    coeffs = model.coefficients
    total = []
    for j in range(len(coeffs)):
        d_j = math.fsum(c * comb(k, j, exact=True) * t0 ** (k - j) for k, c in enumerate(coeffs) if k >= j)
        total.append(d_j * math.gamma(j + 1) * float(rgamma(j + 1 - nu)) * memory ** (j - nu))
    return math.fsum(total)


def render_fig2_polylines(
    model: PolynomialModel,
    nu: float,
    steps: Sequence[float],
    window: tuple[float, float] | None = None,
) -> Table:
    """Operator polylines at several steps next to the exact curve.

    Each step ``h`` contributes its node values ``x = a + i*h`` inside the
    window; cells off a step's grid are left blank. The exact column is the
    limit of the fixed-memory operator as ``h -> 0``.
    """
    a, b = window if window is not None else (model.domain_lo, model.domain_hi)
    hs = [float(h) for h in steps]
    if not hs or any(h <= 0 for h in hs) or len(set(hs)) != len(hs):
        raise ValueError("steps must be positive and distinct")
    memory = b - a
    node_values: list[dict[float, float]] = []
    grid: dict[float, float] = {}
    for h in hs:
        plan = GlPlan.build(nu, h, a, b)
        xs = a + np.arange(term_count(a, b, h) + 1) * h
        vals = np.atleast_1d(gl_apply_model(model, plan, xs))
        nodes = {}
        for x, v in zip(xs, vals):
            key = round(float(x), 12)
            grid.setdefault(key, float(x))
            nodes[key] = float(v)
        node_values.append(nodes)
    header = ("x", "true") + (("fitted",) if len(hs) == 1 else tuple(f"fitted_{fmt(h)}" for h in hs))
    rows = []
    for key in sorted(grid):
        x = grid[key]
        rows.append((x, exact_memory_derivative(model, nu, memory, x)) + tuple(n.get(key) for n in node_values))
    return Table("fig2", header, tuple(rows))


def polyline_deviation(table: Table) -> list[float]:
    """Max ``|fitted - true|`` per fitted column of a polyline table."""
    out = []
    for col in range(2, len(table.header)):
        devs = [abs(r[col] - r[1]) for r in table.rows if r[col] is not None]
        out.append(max(devs))
    return out


def run_tables(report: PipelineReport, dataset: SensorDataset) -> tuple[list[Table], list[Table]]:
    """Every table a pipeline report can supply, in a fixed order."""
    cfg = report.config
    tables: list[Table] = []
    plots: list[Table] = []
    if report.stats is not None:
        tables += stats_tables(dataset, report.stats)
    if report.selection is not None:
        tables += fit_tables(report.selection)
    if report.calibration is not None:
        t, p = calibration_tables(report.calibration, report.model, report.stats, cfg.nu, dataset.sensor_ids)
        tables += t
        plots += p
    plan = report.transmission
    if report.fusion is not None:
        rows = [
            ("pass0_gain", report.fusion.amplification),
            ("target_gain", cfg.gain.value),
        ]
        if cfg.gain.derived:
            rows += [("distance", cfg.gain.distance), ("segment", cfg.gain.segment_length), ("attenuation", cfg.gain.attenuation)]
        if report.iterations is not None:
            k = report.fusion.amplification
            rows += [("iterations", report.iterations), ("planned_gain", k ** report.iterations)]
        tables.append(Table("plan", ("quantity", "value"), tuple(rows), "Gain planning"))
    if plan is not None:
        pass_rows = tuple((p.index, p.gain, p.std, p.mean) for p in plan.passes)
        tables.append(Table("passes", ("pass", "gain", "std", "mean"), pass_rows, "Per-pass gain and deviation"))
        plots.append(Table("passes", ("pass", "gain"), tuple((p.index, p.gain) for p in plan.passes)))
        final_rows = tuple(
            (label, float(x), float(v0), float(v))
            for label, x, v0, v in zip(dataset.sensor_ids, plan.fusion.impact, plan.fusion.normalized_values, plan.final_values)
        )
        tables.append(Table("final", ("sensor", "impact", "pass0_normalized", "final"), final_rows, "Final values"))
    result = [("status", report.status)]
    if report.failed_stage:
        result.append(("failed_stage", report.failed_stage))
    if report.message:
        result.append(("message", report.message))
    result += [
        ("nu", cfg.nu),
        ("target_std", cfg.target_std),
        ("target_gain", cfg.gain.value),
        ("chosen_h", report.chosen_h),
        ("iterations", report.iterations),
        ("total_gain", report.total_gain),
        ("pre_std", report.pre_std),
        ("post_std", report.post_std),
    ]
    result += [("note", n) for n in report.notes]
    tables.append(Table("result", ("quantity", "value"), tuple(result), "Result"))
    return tables, plots


def settings_table(lines: Sequence[str]) -> Table:
    rows = tuple(tuple(line.split("=", 1)) for line in lines)
    return Table("settings", ("key", "value"), rows, "Settings")


def verification_table(summary: VerificationSummary) -> Table:
    rows = tuple((c.name, "pass" if c.passed else "fail", c.detail) for c in summary.checks)
    return Table("verification", ("check", "outcome", "detail"), rows, "Independent verification")
