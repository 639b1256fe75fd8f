"""CSV and SVG writers for reports. Both are byte-deterministic for fixed input."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .report import ExperimentReport

PALETTE = ("#1f4e79", "#c0392b", "#2e7d32", "#8e44ad", "#d68910", "#17202a")


def format_value(v) -> str:
    """17 significant digits for floats so a re-parse is bit-exact."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        text = format(v, ".17g")
        # keep floats distinguishable from integers (and -0.0 from 0) on re-parse
        return text if any(c in text for c in ".e") else text + ".0"
    return str(v)


def parse_value(text: str):
    """Inverse of :func:`format_value` for numbers and booleans; other text is returned as is."""
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_csv(report: ExperimentReport, path: str | Path) -> Path:
    """Write the report table: header, then one row per line, newline-terminated."""
    path = Path(path)
    try:
        path.write_text(csv_text(report.columns, report.rows))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[parse_value(c) for c in row] for row in reader]


def emit_summary(reports: list[ExperimentReport], path: str | Path) -> Path:
    rows = []
    for r in reports:
        loc, mag = r.violations[0] if r.violations else ("", 0.0)
        rows.append((r.name, r.verdict, len(r.rows), len(r.violations), loc, mag,
                     r.provenance.get("config_hash", "")))
    path = Path(path)
    path.write_text(csv_text(("report", "verdict", "rows", "violations", "first_violation", "magnitude",
                              "config_hash"), rows))
    return path


def emit_metadata(report: ExperimentReport, path: str | Path) -> Path:
    """Inputs, provenance, notes and artifacts as sorted JSON."""
    payload = {
        "name": report.name,
        "verdict": report.verdict,
        "inputs": report.inputs,
        "provenance": report.provenance,
        "notes": report.notes,
        "artifacts": report.artifacts,
        "violations": report.violations,
    }
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1, default=_json_default) + "\n")
    return path


def _json_default(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def slug(name: str) -> str:
    s = re.sub(r"[^A-Za-z0-9.]+", "_", name).strip("_")
    return s[:120] or "report"


# ------------------------------------------------------------------ SVG

def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(v: float) -> str:
    return format(v, ".4g")


def svg_chart(series: list[tuple[str, np.ndarray, np.ndarray]], title: str = "", xlabel: str = "",
              ylabel: str = "", hlines: tuple[float, ...] = (), width: int = 640, height: int = 400) -> str:
    """Standalone SVG line chart. ``series`` is a list of ``(label, x, y)``; an empty list draws axes only."""
    left, right, top, bottom = 64, 150, 36, 48
    pw, ph = width - left - right, height - top - bottom
    xs = [np.asarray(x, float) for _, x, _ in series]
    ys = [np.asarray(y, float) for _, _, y in series]
    finite = lambda arrs: np.concatenate([a[np.isfinite(a)] for a in arrs]) if arrs else np.array([])  # noqa: E731
    fx, fy = finite(xs), np.concatenate([finite(ys), np.asarray(hlines, float)])
    x0, x1 = (float(fx.min()), float(fx.max())) if fx.size else (0.0, 1.0)
    y0, y1 = (float(fy.min()), float(fy.max())) if fy.size else (0.0, 1.0)
    if x1 <= x0:
        x0, x1 = x0 - 0.5, x0 + 0.5
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y0 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{top + ph + 16}" text-anchor="middle">{_tick_label(t)}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{left - 4}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{py(t) + 4:.2f}" text-anchor="end">{_tick_label(t)}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {top + ph / 2:.2f})">{escape(ylabel)}</text>')
    for h in hlines:
        out.append(f'<line x1="{left}" y1="{py(h):.2f}" x2="{left + pw}" y2="{py(h):.2f}" '
                   f'stroke="gray" stroke-dasharray="4 3"/>')
    for i, ((label, _, _), x, y) in enumerate(zip(series, xs, ys)):
        color = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 12 + 16 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{left + pw + 34}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _numeric(values) -> bool:
    return bool(values) and all(isinstance(v, (int, float, np.integer, np.floating))
                                and not isinstance(v, (bool, np.bool_)) for v in values)


def emit_plot(report: ExperimentReport, path: str | Path) -> Path:
    """SVG line chart of a report.

    ``report.artifacts['plot']`` may name the ``x`` column, the ``y``
    columns, a ``group`` column that splits rows into separate series, and
    horizontal reference lines (``hlines``). Without it the first numeric
    column is the abscissa and every other float column is a series.
    """
    spec = report.artifacts.get("plot", {})
    cols = list(report.columns)
    numeric = [c for c in cols if report.rows and _numeric(report.column(c))]
    xcol = spec.get("x", numeric[0] if numeric else "")
    if "y" in spec:
        ycols = list(spec["y"])
    else:
        ycols = [c for c in numeric if c != xcol
                 and all(isinstance(v, (float, np.floating)) for v in report.column(c))]
    series = []
    if report.rows and xcol in cols:
        group = spec.get("group")
        keys = list(dict.fromkeys(report.column(group))) if group in cols else [None]
        for key in keys:
            rows = [r for r in report.rows if key is None or r[cols.index(group)] == key]
            x = np.array([r[cols.index(xcol)] for r in rows], float)
            for c in ycols:
                label = c if key is None else (str(key) if len(ycols) == 1 else f"{key}: {c}")
                series.append((label, x, np.array([r[cols.index(c)] for r in rows], float)))
    svg = svg_chart(series, title=spec.get("title", report.name), xlabel=spec.get("xlabel", xcol),
                    ylabel=spec.get("ylabel", ""), hlines=tuple(spec.get("hlines", ())))
    path = Path(path)
    path.write_text(svg)
    return path


__all__ = [
    "csv_text",
    "emit_csv",
    "emit_metadata",
    "emit_plot",
    "emit_summary",
    "format_value",
    "parse_value",
    "read_csv",
    "slug",
    "svg_chart",
]
