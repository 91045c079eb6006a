"""Deterministic SVG line charts from the workbench CSV files.

The writer is intentionally dependency-free and formats every coordinate
with a fixed precision, so identical CSV input yields byte-identical SVG.
"""

from __future__ import annotations

import math

from .experiments import read_csv

CANVAS_W, CANVAS_H = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 160, 30, 50

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f"]

AXIS_LABELS = {
    "reward": ("Timestep", "Average reward"),
    "power": ("BS power (dBm)", "Average sum rate (bit/s/Hz)"),
    "elements": ("RIS reflecting elements", "Average sum rate (bit/s/Hz)"),
}


def _fmt(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".")


def _series_from_rows(rows: list, kind: str) -> dict:
    """Map the tidy rows into {series label: [(x, y), ...]} per figure kind."""
    series: dict = {}
    if kind == "reward":
        counters: dict = {}
        for row in rows:
            label = row["scheme"]
            t = counters.get(label, 0)
            counters[label] = t + 1
            y = float(row["reward"])
            if math.isfinite(y):
                series.setdefault(label, []).append((float(t), y))
    elif kind in ("power", "elements"):
        x_col = "power_dbm" if kind == "power" else "elements"
        groups: dict = {}
        for row in rows:
            if row.get("seed") == "mean":
                continue
            label = row["scheme"]
            if kind == "elements" and row["scheme"].startswith("hris"):
                label = f"{row['scheme']}"
            key = (label, float(row[x_col]))
            groups.setdefault(key, []).append(float(row["sum_rate"]))
        for (label, x), ys in sorted(groups.items()):
            series.setdefault(label, []).append((x, sum(ys) / len(ys)))
    else:
        raise ValueError(f"unknown plot kind '{kind}'")
    if not series or all(len(pts) == 0 for pts in series.values()):
        raise ValueError("no plottable rows in CSV")
    for pts in series.values():
        pts.sort(key=lambda p: p[0])
    return series


def _ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def render_svg(series: dict, kind: str) -> str:
    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    plot_w = CANVAS_W - MARGIN_L - MARGIN_R
    plot_h = CANVAS_H - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    x_label, y_label = AXIS_LABELS[kind]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" '
        f'height="{CANVAS_H}" viewBox="0 0 {CANVAS_W} {CANVAS_H}">',
        f'<rect width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black"/>',
    ]
    for tx in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{_fmt(px(tx))}" y1="{MARGIN_T + plot_h}" '
                   f'x2="{_fmt(px(tx))}" y2="{MARGIN_T + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(px(tx))}" y="{MARGIN_T + plot_h + 20}" '
                   f'font-size="11" text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py(ty))}" '
                   f'x2="{MARGIN_L}" y2="{_fmt(py(ty))}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(py(ty) + 4)}" '
                   f'font-size="11" text-anchor="end">{_fmt(ty)}</text>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2}" y="{CANVAS_H - 12}" '
               f'font-size="13" text-anchor="middle">{x_label}</text>')
    out.append(f'<text x="18" y="{MARGIN_T + plot_h / 2}" font-size="13" '
               f'text-anchor="middle" transform="rotate(-90 18 '
               f'{MARGIN_T + plot_h / 2})">{y_label}</text>')

    for i, (label, pts) in enumerate(sorted(series.items())):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        ly = MARGIN_T + 14 + 16 * i
        lx = MARGIN_L + plot_w + 10
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly}" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_csv(csv_path: str, kind: str, out_path: str, force: bool = False) -> str:
    import os
    if kind not in AXIS_LABELS:
        raise ValueError(f"unknown plot kind '{kind}' (reward|power|elements)")
    _, rows = read_csv(csv_path)
    series = _series_from_rows(rows, kind)
    svg = render_svg(series, kind)
    if os.path.exists(out_path) and not force:
        raise FileExistsError(f"{out_path} exists; pass force to overwrite")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return out_path
