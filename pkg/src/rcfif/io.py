"""Dataset ingestion (CSV/JSON), CSV output and a minimal SVG polyline writer."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .core import FifError, HermiteData
from .estimate import arithmetic_mean_derivatives


class DatasetError(FifError):
    pass


def fmt(v: float) -> str:
    """Locale-independent 12 significant digit formatting."""
    return format(float(v), ".12g")


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    d: np.ndarray | None
    source: str = ""

    def hermite(self) -> tuple[HermiteData, str]:
        """Hermite data plus a note on where the derivatives came from."""
        if self.d is not None:
            return HermiteData(self.x, self.y, self.d), "derivatives: supplied"
        d = arithmetic_mean_derivatives(self.x, self.y)
        return HermiteData(self.x, self.y, d), "derivatives: estimated (arithmetic mean)"


def _number(text, row, col):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise DatasetError(f"row {row}: non-numeric {col} value {text!r}") from None
    if not np.isfinite(v):
        raise DatasetError(f"row {row}: non-finite {col} value {text!r}")
    return v


def _records_to_dataset(records, source):
    if not records:
        raise DatasetError(f"{source}: no data rows")
    has_d = [r.get("d") not in (None, "") for _, r in records]
    if any(has_d) and not all(has_d):
        raise DatasetError(f"{source}: column d is present on some rows only")
    xs, ys, ds = [], [], []
    for row, rec in records:
        xs.append(_number(rec.get("x"), row, "x"))
        ys.append(_number(rec.get("y"), row, "y"))
        if has_d[0]:
            ds.append(_number(rec.get("d"), row, "d"))
    x = np.array(xs)
    for k in range(1, len(x)):
        if x[k] == x[k - 1]:
            raise DatasetError(f"row {records[k][0]}: duplicate x value {fmt(x[k])}")
        if x[k] < x[k - 1]:
            raise DatasetError(f"row {records[k][0]}: x values are not increasing")
    return Dataset(x, np.array(ys), np.array(ds) if has_d[0] else None, source)


def parse_dataset(path) -> Dataset:
    """Read ``x,y[,d]`` from a CSV file with a header row or a JSON array of records."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(raw, list) or not all(isinstance(r, dict) for r in raw):
            raise DatasetError(f"{path}: expected a JSON array of {{x, y, d?}} records")
        return _records_to_dataset(list(enumerate(raw, start=1)), str(path))

    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DatasetError(f"{path}: empty file") from None
    if "x" not in header or "y" not in header:
        raise DatasetError(f"{path}: header must name columns x and y, got {header}")
    records = []
    for row, cells in enumerate(reader, start=2):
        if len(cells) != len(header):
            raise DatasetError(f"row {row}: expected {len(header)} fields, got {len(cells)}")
        records.append((row, dict(zip(header, (c.strip() for c in cells)))))
    return _records_to_dataset(records, str(path))


def write_csv(target, header, columns, comments=()):
    """Write columns to a path, or to an open text stream when ``target`` has ``write``."""
    if hasattr(target, "write"):
        _write_rows(target, header, columns, comments)
        return
    with open(target, "w", newline="") as fh:
        _write_rows(fh, header, columns, comments)


def _write_rows(fh, header, columns, comments):
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write(",".join(header) + "\n")
    for row in zip(*columns):
        fh.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def read_curve(path):
    """(x, y) columns of a sample CSV (column S) or a dataset (column y)."""
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    col = "S" if "S" in (reader.fieldnames or []) else "y"
    xs, ys = [], []
    for row, rec in enumerate(reader, start=2):
        xs.append(_number(rec.get("x"), row, "x"))
        ys.append(_number(rec.get(col), row, col))
    if not xs:
        raise DatasetError(f"{path}: no data rows")
    return np.array(xs), np.array(ys)


def svg_polyline(x, y, *, width=640, height=400, markers=None, title="") -> str:
    """SVG 1.1 document with one path for the curve and min/max axis labels.

    Data coordinates are used directly in the viewBox (y flipped through a
    transform), padded by 5% of each extent.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if markers is not None:
        mx, my = map(np.asarray, markers)
        x0, x1 = min(x0, mx.min()), max(x1, mx.max())
        y0, y1 = min(y0, my.min()), max(y1, my.max())
    wx = (x1 - x0) or 1.0
    wy = (y1 - y0) or 1.0
    px, py = 0.05 * wx, 0.05 * wy
    vx, vy, vw, vh = x0 - px, -(y1 + py), wx + 2 * px, wy + 2 * py
    stroke = fmt(0.004 * max(vw, vh))
    d = "M" + " L".join(f"{fmt(a)},{fmt(-b)}" for a, b in zip(x, y))
    font = fmt(0.035 * vh)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="{fmt(vx)} {fmt(vy)} {fmt(vw)} {fmt(vh)}" '
        'preserveAspectRatio="none">',
    ]
    if title:
        parts.append(f"<title>{escape(title)}</title>")
    parts += [
        f'<g stroke="#999" stroke-width="{stroke}" fill="none">',
        f'<line x1="{fmt(x0)}" y1="{fmt(-y0)}" x2="{fmt(x1)}" y2="{fmt(-y0)}"/>',
        f'<line x1="{fmt(x0)}" y1="{fmt(-y0)}" x2="{fmt(x0)}" y2="{fmt(-y1)}"/>',
        "</g>",
        f'<path d="{d}" fill="none" stroke="#1f77b4" stroke-width="{stroke}"/>',
    ]
    if markers is not None:
        rad = fmt(0.008 * max(vw, vh))
        parts.append('<g fill="#d62728">')
        parts += [f'<circle cx="{fmt(a)}" cy="{fmt(-b)}" r="{rad}"/>' for a, b in zip(mx, my)]
        parts.append("</g>")
    parts += [
        f'<g font-size="{font}" font-family="sans-serif" fill="#333">',
        f'<text x="{fmt(x0)}" y="{fmt(-y0 + 0.8 * py)}">{fmt(x0)}</text>',
        f'<text x="{fmt(x1)}" y="{fmt(-y0 + 0.8 * py)}" text-anchor="end">{fmt(x1)}</text>',
        f'<text x="{fmt(x0 - 0.9 * px)}" y="{fmt(-y0)}">{fmt(y0)}</text>',
        f'<text x="{fmt(x0 - 0.9 * px)}" y="{fmt(-y1)}">{fmt(y1)}</text>',
        "</g>",
        "</svg>",
    ]
    return "\n".join(parts) + "\n"
