"""Deterministic SVG figures with companion CSV files.

SVG coordinates are written with two decimals and no timestamps or ids,
so identical inputs give byte-identical files. CSV floats use ``repr`` and
parse back to the exact plotted values.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from xml.sax.saxutils import escape

from .errors import StorageError

WIDTH, HEIGHT = 480, 360
MARGIN = dict(left=60, right=20, top=30, bottom=50)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _f(x):
    return f"{x:.2f}"


class _Canvas:
    def __init__(self, xlim, ylim, title="", xlabel="", ylabel=""):
        self.xlim, self.ylim = xlim, ylim
        self.parts = []
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def sx(self, x):
        a, b = self.xlim
        return self.x0 + (x - a) / (b - a) * (self.x1 - self.x0)

    def sy(self, y):
        a, b = self.ylim
        return self.y0 - (y - a) / (b - a) * (self.y0 - self.y1)

    def add(self, s):
        self.parts.append(s)

    def line(self, x1, y1, x2, y2, color="#000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<line x1="{_f(self.sx(x1))}" y1="{_f(self.sy(y1))}" '
                 f'x2="{_f(self.sx(x2))}" y2="{_f(self.sy(y2))}" '
                 f'stroke="{color}" stroke-width="{width}"{extra}/>')

    def circle(self, x, y, r=2.5, color="#1f77b4", opacity=0.6):
        self.add(f'<circle cx="{_f(self.sx(x))}" cy="{_f(self.sy(y))}" r="{r}" '
                 f'fill="{color}" fill-opacity="{opacity}"/>')

    def text(self, x, y, s, anchor="middle", size=11, rotate=None, raw=False):
        px, py = (x, y) if raw else (self.sx(x), self.sy(y))
        rot = f' transform="rotate({rotate} {_f(px)} {_f(py)})"' if rotate else ""
        self.add(f'<text x="{_f(px)}" y="{_f(py)}" font-size="{size}" '
                 f'text-anchor="{anchor}"{rot}>{escape(str(s))}</text>')

    def axes(self, xticks, yticks, xticklabels=None):
        self.add(f'<rect x="{self.x0}" y="{self.y1}" width="{self.x1 - self.x0}" '
                 f'height="{self.y0 - self.y1}" fill="none" stroke="#000"/>')
        labels = xticklabels or [_tick(t) for t in xticks]
        for t, lab in zip(xticks, labels):
            px = self.sx(t)
            self.add(f'<line x1="{_f(px)}" y1="{self.y0}" x2="{_f(px)}" y2="{self.y0 + 4}" stroke="#000"/>')
            self.text(px, self.y0 + 16, lab, raw=True)
        for t in yticks:
            py = self.sy(t)
            self.add(f'<line x1="{self.x0 - 4}" y1="{_f(py)}" x2="{self.x0}" y2="{_f(py)}" stroke="#000"/>')
            self.text(self.x0 - 6, py + 4, _tick(t), anchor="end", raw=True)
        if self.title:
            self.text(WIDTH / 2, 18, self.title, size=13, raw=True)
        if self.xlabel:
            self.text((self.x0 + self.x1) / 2, HEIGHT - 12, self.xlabel, raw=True)
        if self.ylabel:
            yc = (self.y0 + self.y1) / 2
            self.text(16, yc, self.ylabel, rotate=-90, raw=True)

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
                f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
        body = "\n".join(self.parts)
        return f'{head}\n<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>\n{body}\n</svg>\n'


def _tick(t):
    return f"{t:g}" if abs(t - round(t, 3)) < 1e-9 else f"{t:.2f}"


def _nice_range(lo, hi, step):
    a = math.floor(lo / step) * step
    b = math.ceil(hi / step) * step
    if b - a < step:
        b = a + step
    return a, b


def _ticks(a, b, step):
    n = int(round((b - a) / step))
    return [a + i * step for i in range(n + 1)]


def boxplot_svg(summaries, title="", xlabel="", ylabel="approximation ratio"):
    """Box per :class:`RatioSummary`, whiskers at min/max."""
    lo = min(s.min for s in summaries)
    hi = max(s.max for s in summaries)
    a, b = _nice_range(lo, hi, 0.05)
    k = len(summaries)
    c = _Canvas((0.0, k + 1.0), (a, b), title, xlabel, ylabel)
    c.axes(list(range(1, k + 1)), _ticks(a, b, 0.05 if b - a <= 0.5 else 0.1),
           [f"{s.group:g}" for s in summaries])
    half = 0.25
    for i, s in enumerate(summaries, start=1):
        c.line(i, s.min, i, s.q1)
        c.line(i, s.q3, i, s.max)
        c.line(i - half / 2, s.min, i + half / 2, s.min)
        c.line(i - half / 2, s.max, i + half / 2, s.max)
        x, y = c.sx(i - half), c.sy(s.q3)
        w, h = c.sx(i + half) - x, c.sy(s.q1) - y
        c.add(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
              f'fill="#aec7e8" stroke="#000"/>')
        c.line(i - half, s.median, i + half, s.median, color="#d62728", width=2)
    return c.render()


def scatter_svg(points, xlim, ylim, title="", xlabel="", ylabel="", line=None,
                colors=None, xticks=None, yticks=None, xticklabels=None):
    c = _Canvas(xlim, ylim, title, xlabel, ylabel)
    c.axes(xticks or _ticks(*xlim, (xlim[1] - xlim[0]) / 5),
           yticks or _ticks(*ylim, (ylim[1] - ylim[0]) / 5), xticklabels)
    for i, (x, y) in enumerate(points):
        c.circle(x, y, color=colors[i] if colors else PALETTE[0])
    if line is not None:
        slope, intercept = line
        c.line(xlim[0], slope * xlim[0] + intercept, xlim[1], slope * xlim[1] + intercept,
               color="#333", width=1.5, dash="6,4")
    return c.render()


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


def emit_plots(out_dir, depth_stats=(), class_stats=None, pairs=(), fit=None,
               clouds=None, summary=None, fmt="both"):
    """Write figures and tables to ``out_dir``; returns the file names written.

    ``class_stats`` maps depth -> list of per-``e_p`` summaries; ``clouds``
    maps depth -> :class:`ConcentrationCloud`.
    """
    if fmt not in ("svg", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    want_svg, want_csv = fmt in ("svg", "both"), fmt in ("csv", "both")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create {out_dir}: {exc}") from exc
    written = []

    def put(name, text):
        _write(os.path.join(out_dir, name), text)
        written.append(name)

    stat_header = ["group", "min", "q1", "median", "q3", "max"]
    if depth_stats:
        if want_csv:
            put("boxplot_p.csv", csv_text(stat_header, [s.row() for s in depth_stats]))
        if want_svg:
            put("boxplot_p.svg", boxplot_svg(depth_stats, "ratio vs depth", "p"))
    for p, stats in sorted((class_stats or {}).items()):
        if not stats:
            continue
        if want_csv:
            put(f"boxplot_ep_p{p}.csv", csv_text(stat_header, [s.row() for s in stats]))
        if want_svg:
            put(f"boxplot_ep_p{p}.svg", boxplot_svg(stats, f"ratio by class, p={p}", "e_p"))

    if pairs:
        if want_csv:
            put("scatter_ged.csv", csv_text(["g1", "g2", "ged", "d"],
                                            [[q.g1, q.g2, float(q.ged), q.d] for q in pairs]))
        if want_svg:
            xs = [float(q.ged) for q in pairs]
            ys = [q.d for q in pairs]
            xlim = (0.0, float(max(xs) + 1))
            ylim = (0.0, _nice_range(0.0, max(ys) or 0.05, 0.05)[1])
            line = (fit[0], fit[1]) if fit else None
            put("scatter_ged.svg", scatter_svg(list(zip(xs, ys)), xlim, ylim,
                                               "ratio difference vs GED", "graph edit distance",
                                               "|r1 - r2|", line=line))

    for p, cloud in sorted((clouds or {}).items()):
        if not cloud.points:
            continue
        rows = [list(pt) for pt in cloud.points]
        if want_csv:
            put(f"concentration_p{p}.csv", csv_text(["graph_id", "step", "beta", "gamma"], rows))
        if want_svg:
            ids = sorted({pt[0] for pt in cloud.points})
            color_of = {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(ids)}
            pts = [(pt[2], pt[3]) for pt in cloud.points]
            ticks_x = [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi]
            ticks_y = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi]
            put(f"concentration_p{p}.svg", scatter_svg(
                pts, (0.0, math.pi), (0.0, 2 * math.pi),
                f"near-optimal parameters, p={p}, step {cloud.step}",
                f"beta_{cloud.step}", f"gamma_{cloud.step}",
                colors=[color_of[pt[0]] for pt in cloud.points],
                xticks=ticks_x, yticks=ticks_y,
                xticklabels=["0", "pi/4", "pi/2", "3pi/4", "pi"]))

    if summary is not None:
        put("summary.json", json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return written
