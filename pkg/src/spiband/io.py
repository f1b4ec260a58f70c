"""Sample CSV, band JSON, report CSV/JSON and a dependency-free SVG band plot.

Sample CSV: a header of grid times, then one curve per line, no quoting,
LF line endings, values written with 17 significant digits.

Band JSON keys: ``grid``, ``lower``, ``upper``, ``method``, ``alpha``,
``seed``, ``config`` and, optionally, ``metrics``.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

from .curves import Band, TimeGrid, validate_matrix
from .errors import BandIOError, ParseError, RaggedRowsError
from .evaluation import REPORT_COLUMNS, ExperimentReport


def _fmt(x):
    return format(float(x), ".17g")


def _parse_float(text, where):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{where}: {text.strip()!r} is not a number") from None
    if not math.isfinite(value):
        raise ParseError(f"{where}: {text.strip()!r} is not finite")
    return value


def read_sample_csv(path, survival=False):
    """Load a sample matrix; the header row holds the grid times."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            lines = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise BandIOError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8: {exc}") from exc
    if not lines:
        raise ParseError(f"{path} is empty")
    times = [_parse_float(c, f"{path}:1") for c in lines[0]]
    grid = TimeGrid(times)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if len(line) != len(times):
            raise RaggedRowsError(
                f"{path}:{lineno} has {len(line)} values, header has {len(times)}")
        rows.append([_parse_float(c, f"{path}:{lineno}") for c in line])
    return validate_matrix(np.array(rows).reshape(len(rows), len(times)), grid, survival)


def write_sample_csv(samples, path):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(_fmt(t) for t in samples.grid.times) + "\n")
            for row in samples.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise BandIOError(f"cannot write {path}: {exc}") from exc


def band_to_dict(band, metadata=None):
    metadata = dict(metadata or {})
    doc = {
        "grid": [float(t) for t in band.grid.times],
        "lower": [float(v) for v in band.lower],
        "upper": [float(v) for v in band.upper],
        "method": metadata.pop("method", None),
        "alpha": metadata.pop("alpha", None),
        "seed": metadata.pop("seed", None),
        "config": metadata.pop("config", {}),
    }
    metrics = metadata.pop("metrics", None)
    if metrics is not None:
        doc["metrics"] = metrics
    doc.update(metadata)
    return doc


def write_band_json(band, metadata, path):
    """Write ``band`` with its metadata echoed verbatim."""
    doc = band_to_dict(band, metadata)
    try:
        text = json.dumps(doc, indent=2, allow_nan=False)
    except ValueError as exc:
        raise BandIOError(f"band contains non-finite values: {exc}") from exc
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise BandIOError(f"cannot write {path}: {exc}") from exc


def read_band_json(path):
    """Return ``(band, metadata)``; metadata holds every key except the arrays."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise BandIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    missing = [k for k in ("grid", "lower", "upper") if k not in doc]
    if missing:
        raise ParseError(f"{path} lacks keys {missing}")
    band = Band(TimeGrid(doc.pop("grid")), doc.pop("lower"), doc.pop("upper"))
    return band, doc


def write_report_csv(report, path):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for row in report.rows:
                # repr is the shortest string that round-trips
                writer.writerow([
                    row["trial"], row["method"], repr(row["alpha"]), row["grid_size"],
                    repr(row["observed_coverage"]), repr(row["average_width"]),
                    repr(row["percent_change"]),
                ])
    except OSError as exc:
        raise BandIOError(f"cannot write {path}: {exc}") from exc


def read_report_csv(path):
    report = ExperimentReport()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            report.add(int(row["trial"]), row["method"], float(row["alpha"]),
                       int(row["grid_size"]), float(row["observed_coverage"]),
                       float(row["average_width"]), float(row["percent_change"]))
    return report


def write_report_json(report, path, extra=None):
    doc = {"aggregate": report.aggregate()}
    if extra:
        doc.update(extra)
    try:
        # nan coverage (no test set) is written as null
        text = json.dumps(_nan_to_none(doc), indent=2, allow_nan=False)
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise BandIOError(f"cannot write {path}: {exc}") from exc


def _nan_to_none(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_none(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_W, _H = 640, 400
_LEFT, _RIGHT, _TOP, _BOTTOM = 60, 20, 20, 50


def _xy(times, values, t0, t1):
    span = (t1 - t0) or 1.0
    x = _LEFT + (np.asarray(times) - t0) / span * (_W - _LEFT - _RIGHT)
    y = _TOP + (1.0 - np.asarray(values)) * (_H - _TOP - _BOTTOM)
    return x, y


def _points(x, y):
    return " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(x, y))


def band_svg(band, curve=None):
    """SVG markup: shaded band, optional point-estimate curve, labelled axes."""
    times = band.grid.times
    t0, t1 = float(times[0]), float(times[-1])
    if curve is not None:
        curve = np.asarray(curve, dtype=np.float64)
        if curve.shape != times.shape:
            raise RaggedRowsError("curve length does not match the band grid")
    lo = np.clip(band.lower, 0.0, 1.0)
    hi = np.clip(band.upper, 0.0, 1.0)
    xl, yl = _xy(times, lo, t0, t1)
    xu, yu = _xy(times, hi, t0, t1)
    x0, x1 = _LEFT, _W - _RIGHT
    y0, y1 = _H - _BOTTOM, _TOP
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<polygon class="band" points="{_points(np.r_[xu, xl[::-1]], np.r_[yu, yl[::-1]])}" '
        'fill="#4c72b0" fill-opacity="0.35" stroke="#4c72b0" stroke-width="1"/>',
    ]
    if curve is not None:
        xc, yc = _xy(times, np.clip(curve, 0.0, 1.0), t0, t1)
        parts.append(f'<polyline class="curve" points="{_points(xc, yc)}" '
                     'fill="none" stroke="#c44e52" stroke-width="2"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        _, yp = _xy([t0], [p], t0, t1)
        parts.append(f'<text x="{x0 - 8}" y="{yp[0] + 4:.3f}" font-size="11" '
                     f'text-anchor="end">{p:.2f}</text>')
    for t in np.linspace(t0, t1, 5):
        xp, _ = _xy([t], [0.0], t0, t1)
        parts.append(f'<text x="{xp[0]:.3f}" y="{y0 + 16}" font-size="11" '
                     f'text-anchor="middle">{t:.4g}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{_H - 10}" font-size="13" '
                 'text-anchor="middle">time</text>')
    parts.append(f'<text x="15" y="{(y0 + y1) / 2:.1f}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 15 {(y0 + y1) / 2:.1f})">survival probability</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_band_svg(band, path, curve=None):
    text = band_svg(band, curve)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise BandIOError(f"cannot write {path}: {exc}") from exc
