"""Report emission: delimiter-separated tables and accuracy curves.

Output is deterministic byte for byte: rows are ordered by their
configuration key, numbers are formatted through one code path, and the
SVG renderer below is hand-rolled (no plotting library) precisely so
that rerunning a sweep reproduces identical curve files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import ResultsError
from .results import (
    KEY_FIELDS,
    ResultsTable,
    RunRecord,
    aggregate_improvements,
    mean_accuracy,
)

REPORT_FORMATS = ("tsv", "csv")

_AXES = ("alpha", "m")


@dataclass(frozen=True)
class CurvePoint:
    x: float
    accuracy: float
    n_seeds: int


@dataclass(frozen=True)
class CurveSeries:
    method: str
    shots: str
    points: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class CurveData:
    x_axis: str
    series: tuple[CurveSeries, ...]
    baselines: tuple[tuple[str, float], ...]  # (shots regime, reference accuracy)


def curve(table: ResultsTable, x_axis: str, **filters) -> CurveData:
    """Accuracy against alpha or M, one series per (method, shots) pair.

    Accuracies are seed-means; baseline rows become horizontal reference
    values keyed by shots regime.
    """
    if x_axis not in _AXES:
        raise ResultsError(f"x_axis must be one of {_AXES}, got {x_axis!r}")
    rows = table.filter(**filters).rows

    series_rows: dict[tuple[str, str], dict[float, list[RunRecord]]] = {}
    baseline_rows: dict[str, list[RunRecord]] = {}
    for rec in rows:
        if rec.method == "baseline":
            baseline_rows.setdefault(rec.shots, []).append(rec)
            continue
        x = float(getattr(rec, x_axis))
        series_rows.setdefault((rec.method, rec.shots), {}).setdefault(x, []).append(rec)

    series = []
    for method, shots in sorted(series_rows):
        by_x = series_rows[(method, shots)]
        points = tuple(
            CurvePoint(x=x, accuracy=float(mean_accuracy(by_x[x])), n_seeds=len(by_x[x]))
            for x in sorted(by_x)
        )
        series.append(CurveSeries(method=method, shots=shots, points=points))
    baselines = tuple(
        (shots, float(mean_accuracy(recs))) for shots, recs in sorted(baseline_rows.items())
    )
    return CurveData(x_axis=x_axis, series=tuple(series), baselines=baselines)


def peak(series: CurveSeries) -> tuple[float, float]:
    """(x, accuracy) of the series maximum; earlier x wins ties."""
    if not series.points:
        raise ResultsError("empty series has no peak")
    best = max(series.points, key=lambda p: (p.accuracy, -p.x))
    return best.x, best.accuracy


# -- tables -------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, "g")
    return str(value)


def emit_report(
    table: ResultsTable,
    fmt: str = "tsv",
    group_by: Sequence[str] = (),
    methods: Sequence[str] = ("GIA", "SGIA"),
) -> str:
    """Render rows plus improvement summaries; deterministic for fixed input."""
    if fmt not in REPORT_FORMATS:
        raise ResultsError(f"unknown report format {fmt!r}; supported: {REPORT_FORMATS}")
    if not table.rows:
        raise ResultsError("empty results table")
    sep = "\t" if fmt == "tsv" else ","

    columns = list(KEY_FIELDS) + ["best_accuracy"]
    lines = [sep.join(columns)]
    for rec in sorted(table.rows, key=lambda r: repr(r.key)):
        lines.append(sep.join(_fmt(getattr(rec, col)) for col in columns))

    summary, warnings = aggregate_improvements(table, group_by=group_by, methods=methods)
    lines.append("")
    for warning in warnings:
        lines.append(f"# warning: {warning}")
    for row in summary:
        group = " ".join(f"{field}={_fmt(value)}" for field, value in row.group) or "all"
        lines.append(
            sep.join(
                ["mean_improvement", row.method, group, str(row.count), str(row.mean_improvement)]
            )
        )
    return "\n".join(lines) + "\n"


# -- SVG curves ---------------------------------------------------------------

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 16, 48
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _coord(v: float) -> str:
    return format(v, ".2f")


def render_curve_svg(data: CurveData, title: str = "") -> str:
    """Plot curves with baseline reference lines; pure-text SVG output."""
    xs = [p.x for s in data.series for p in s.points]
    ys = [p.accuracy for s in data.series for p in s.points]
    ys += [acc for _, acc in data.baselines]
    if not xs or not ys:
        raise ResultsError("no points to plot")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    pad = (y_hi - y_lo) * 0.08 or 0.5
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x: float) -> float:
        return _ML + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MT + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{_ML}" y="{_MT - 4}" font-size="12">{title}</text>')

    for tick in range(5):
        y = y_lo + (y_hi - y_lo) * tick / 4
        out.append(
            f'<line x1="{_ML - 4}" y1="{_coord(py(y))}" x2="{_ML}" y2="{_coord(py(y))}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_ML - 8}" y="{_coord(py(y) + 4)}" text-anchor="end">{format(y, ".1f")}</text>'
        )
    tick_xs = sorted({p.x for s in data.series for p in s.points})
    for x in tick_xs:
        out.append(
            f'<line x1="{_coord(px(x))}" y1="{_H - _MB}" x2="{_coord(px(x))}" y2="{_H - _MB + 4}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_coord(px(x))}" y="{_H - _MB + 16}" text-anchor="middle">{format(x, "g")}</text>'
        )
    out.append(
        f'<text x="{_ML + plot_w / 2:.0f}" y="{_H - 12}" text-anchor="middle">{data.x_axis}</text>'
    )

    for i, (shots, acc) in enumerate(data.baselines):
        y = _coord(py(acc))
        out.append(
            f'<line x1="{_ML}" y1="{y}" x2="{_W - _MR}" y2="{y}" stroke="#888888" stroke-dasharray="5 3"/>'
        )
        out.append(f'<text x="{_W - _MR - 4}" y="{_coord(py(acc) - 4)}" text-anchor="end" fill="#888888">baseline shots={shots}</text>')

    for i, s in enumerate(data.series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_coord(px(p.x))},{_coord(py(p.accuracy))}" for p in s.points)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for p in s.points:
            out.append(
                f'<circle cx="{_coord(px(p.x))}" cy="{_coord(py(p.accuracy))}" r="2.5" fill="{color}"/>'
            )
        peak_x, peak_y = peak(s)
        out.append(
            f'<circle cx="{_coord(px(peak_x))}" cy="{_coord(py(peak_y))}" r="5" fill="none" stroke="{color}"/>'
        )
        label_y = _MT + 14 * (i + 1)
        out.append(
            f'<text x="{_W - _MR - 4}" y="{label_y}" text-anchor="end" fill="{color}">'
            f"{s.method} shots={s.shots}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_curve_svg(data: CurveData, path: str | Path, title: str = "") -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(render_curve_svg(data, title=title), encoding="utf-8")
