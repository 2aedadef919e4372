"""Plot-ready summaries and a minimal static SVG chart writer.

Charts are plain hand-built SVG text with fixed geometry — enough to eyeball
an indicator or risk series without any plotting dependency, and
deterministic byte-for-byte for identical inputs.
"""

from __future__ import annotations

import json
import math

import numpy as np
from scipy.stats import spearmanr

from .errors import ValidationError
from .tableio import write_csv

_PALETTE = ("#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#d68910",
            "#17a589", "#884ea0", "#2e4053", "#a04000", "#5d6d7e")

_WIDTH, _HEIGHT = 840, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 34, 46


def _ticks(lo: float, hi: float, n: int = 5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("chart range must be finite")
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def svg_line_chart(path, x_labels, series: dict, title: str, y_label: str = ""):
    """Write a multi-series line chart; series maps name -> values (None gaps)."""
    n = len(x_labels)
    if n < 2:
        raise ValidationError("a line chart needs at least 2 x positions")
    values = [v for vals in series.values() for v in vals if v is not None]
    if not values:
        raise ValidationError("no finite values to chart")
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(i):
        return _MARGIN_L + plot_w * i / (n - 1)

    def py(v):
        return _MARGIN_T + plot_h * (hi - v) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_MARGIN_L}" y="20" font-family="sans-serif" '
        f'font-size="14" font-weight="bold">{title}</text>',
    ]
    for tick in _ticks(lo, hi):
        y = py(tick)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y:.2f}" x2="{_WIDTH - _MARGIN_R}" '
            f'y2="{y:.2f}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(
            f'<text x="{_MARGIN_L - 6}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(tick)}</text>')
    n_xticks = min(8, n)
    for j in range(n_xticks):
        i = round(j * (n - 1) / max(n_xticks - 1, 1))
        x = px(i)
        parts.append(
            f'<text x="{x:.2f}" y="{_HEIGHT - _MARGIN_B + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="10">'
            f'{x_labels[i]}</text>')
    if y_label:
        parts.append(
            f'<text x="14" y="{_MARGIN_T + plot_h / 2:.2f}" '
            f'font-family="sans-serif" font-size="11" '
            f'transform="rotate(-90 14 {_MARGIN_T + plot_h / 2:.2f})" '
            f'text-anchor="middle">{y_label}</text>')

    for idx, (name, vals) in enumerate(series.items()):
        if len(vals) != n:
            raise ValidationError(f"series {name!r} length does not match x labels")
        color = _PALETTE[idx % len(_PALETTE)]
        segment: list[str] = []
        chunks = []
        for i, v in enumerate(vals):
            if v is None or not math.isfinite(float(v)):
                if segment:
                    chunks.append(segment)
                segment = []
                continue
            segment.append(f"{px(i):.2f},{py(float(v)):.2f}")
        if segment:
            chunks.append(segment)
        for chunk in chunks:
            if len(chunk) == 1:
                x, y = chunk[0].split(",")
                parts.append(f'<circle cx="{x}" cy="{y}" r="2" fill="{color}"/>')
            else:
                parts.append(
                    f'<polyline points="{" ".join(chunk)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>')
        lx = _MARGIN_L + 8 + 130 * idx
        parts.append(
            f'<rect x="{lx}" y="{_HEIGHT - 14}" width="10" height="3" '
            f'fill="{color}"/>')
        parts.append(
            f'<text x="{lx + 14}" y="{_HEIGHT - 9}" font-family="sans-serif" '
            f'font-size="10">{name}</text>')
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#333333"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


def svg_scatter(path, points, title: str, x_label: str, y_label: str):
    """Labeled scatter; points are (label, x, y) triples."""
    if not points:
        raise ValidationError("no points to chart")
    xs = [float(p[1]) for p in points]
    ys = [float(p[2]) for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x_pad, y_pad = 0.07 * (x_hi - x_lo), 0.07 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(v):
        return _MARGIN_L + plot_w * (v - x_lo) / (x_hi - x_lo)

    def py(v):
        return _MARGIN_T + plot_h * (y_hi - v) / (y_hi - y_lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_MARGIN_L}" y="20" font-family="sans-serif" '
        f'font-size="14" font-weight="bold">{title}</text>',
    ]
    for tick in _ticks(y_lo, y_hi):
        y = py(tick)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y:.2f}" x2="{_WIDTH - _MARGIN_R}" '
            f'y2="{y:.2f}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(
            f'<text x="{_MARGIN_L - 6}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(tick)}</text>')
    for tick in _ticks(x_lo, x_hi, 6):
        x = px(tick)
        parts.append(
            f'<text x="{x:.2f}" y="{_HEIGHT - _MARGIN_B + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="10">'
            f'{_fmt(tick)}</text>')
    for label, x, y in points:
        cx, cy = px(float(x)), py(float(y))
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" '
                     f'fill="#1b6ca8" fill-opacity="0.8"/>')
        parts.append(
            f'<text x="{cx + 6:.2f}" y="{cy - 5:.2f}" '
            f'font-family="sans-serif" font-size="9">{label}</text>')
    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{_HEIGHT - 6}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="11">'
        f'{x_label}</text>')
    parts.append(
        f'<text x="14" y="{_MARGIN_T + plot_h / 2:.2f}" '
        f'font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 14 {_MARGIN_T + plot_h / 2:.2f})" '
        f'text-anchor="middle">{y_label}</text>')
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#333333"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


def relate_table(trees, risk_series_list):
    """Join per-entity mean betweenness with mean delta-CoVaR.

    Returns ``(rows, spearman)`` where rows are (entity, mean_bc_normalized,
    mean_delta_covar) sorted by entity, over the entities present in both
    inputs.
    """
    if not trees or not risk_series_list:
        raise ValidationError("need both tree and risk series inputs")
    entities = trees[0].entities
    bc = np.zeros(len(entities))
    for tree in trees:
        if tree.indicators is None:
            raise ValidationError("trees must carry computed indicators")
        if tree.entities != entities:
            raise ValidationError("trees must share one entity set")
        bc += np.asarray(tree.indicators.bc_normalized)
    bc /= len(trees)
    mean_bc = dict(zip(entities, bc))
    mean_delta = {s.entity: float(s.delta_covar.mean()) for s in risk_series_list}

    common = sorted(set(mean_bc) & set(mean_delta))
    if len(common) < 2:
        raise ValidationError("need at least 2 entities present in both inputs")
    rows = [(e, float(mean_bc[e]), mean_delta[e]) for e in common]
    rho, _ = spearmanr([r[1] for r in rows], [r[2] for r in rows])
    return rows, float(rho)


def save_relate_csv(path, rows):
    write_csv(path, ["entity", "mean_bc_normalized", "mean_delta_covar"], rows,
              column_types=["string", "float", "float"],
              description="Per-entity mean betweenness joined with mean "
                          "delta-CoVaR.")


def save_relate_summary(path, rows, spearman: float):
    payload = {
        "n_entities": len(rows),
        "spearman_bc_delta_covar": spearman,
        "most_central": max(rows, key=lambda r: r[1])[0],
        "most_negative_delta_covar": min(rows, key=lambda r: r[2])[0],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
