"""Summaries of experiment journals: ratio statistics, ratio difference
versus graph edit distance, and near-optimal parameter concentration."""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bench import ExperimentRecord
from .errors import InputError
from .ged import graph_edit_distance
from .graphs import Graph
from .sim import BETA_PERIOD, GAMMA_PERIOD

log = logging.getLogger(__name__)


@dataclass
class RatioSummary:
    group: float
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float

    def row(self):
        return [self.group, self.min, self.q1, self.median, self.q3, self.max]


@dataclass
class DistancePair:
    g1: str
    g2: str
    ged: float
    d: float


@dataclass
class ConcentrationCloud:
    p: int
    step: int
    points: list = field(default_factory=list)  # (graph_id, step, beta, gamma)
    beta_std: float = 0.0
    gamma_std: float = 0.0
    folded_beta_std: float = 0.0
    folded_gamma_std: float = 0.0

    @property
    def size(self):
        return len(self.points)


def five_number_summary(values) -> tuple:
    """``(min, q1, median, q3, max)`` with linear-interpolated quartiles."""
    v = np.asarray(values, dtype=float)
    q = np.percentile(v, [0, 25, 50, 75, 100])
    return tuple(float(x) for x in q)


def ratio_stats(records: Iterable[ExperimentRecord], group_by: str = "p",
                graphs: Sequence[Graph] | None = None, p: int | None = None
                ) -> list[RatioSummary]:
    """Five-number summaries of approximation ratios per group.

    ``group_by`` is ``"p"`` or ``"e_p"``; ``p`` optionally restricts to one
    depth. Groups come out sorted by key.
    """
    if group_by not in ("p", "e_p"):
        raise InputError(f"group_by must be 'p' or 'e_p', got {group_by!r}")
    records = list(records)
    if not records:
        raise InputError("ratio_stats needs at least one record")
    e_p_of = {g.id: g.e_p for g in graphs or ()}
    groups = defaultdict(list)
    for r in records:
        if p is not None and r.p != p:
            continue
        if group_by == "p":
            key = r.p
        else:
            key = r.e_p if r.e_p is not None else e_p_of.get(r.graph_id)
            if key is None:
                log.warning("record %s p=%d has no e_p; omitted", r.graph_id, r.p)
                continue
        groups[key].append(r.ratio)
    out = []
    for key in sorted(groups):
        vals = groups[key]
        if not vals:
            log.warning("empty group %s omitted", key)
            continue
        out.append(RatioSummary(key, len(vals), *five_number_summary(vals)))
    return out


def best_ratio_per_graph(records: Iterable[ExperimentRecord]) -> dict:
    """``r_G``: the best ratio over whatever depths each graph has."""
    best = {}
    for r in records:
        if r.ratio > best.get(r.graph_id, -math.inf):
            best[r.graph_id] = r.ratio
    return best


def pairwise_ratio_diff(records: Iterable[ExperimentRecord], graphs: Sequence[Graph],
                        ged_cache: dict | None = None) -> list[DistancePair]:
    """``(GED, |r_G1 - r_G2|)`` for every unordered pair of graphs with records.

    ``ged_cache`` (keyed by the sorted id pair) is filled in place, so a
    caller can reuse distances across depths.
    """
    r = best_ratio_per_graph(records)
    present = []
    for g in sorted(graphs, key=lambda g: g.id):
        if g.id in r:
            present.append(g)
        else:
            log.warning("graph %s has no records; its pairs are skipped", g.id)
    cache = {} if ged_cache is None else ged_cache
    out = []
    for a, b in itertools.combinations(present, 2):
        key = (a.id, b.id)
        if key not in cache:
            cache[key] = graph_edit_distance(a, b)
        out.append(DistancePair(a.id, b.id, cache[key], abs(r[a.id] - r[b.id])))
    return out


def least_squares_fit(points) -> tuple:
    """Ordinary least squares line: ``(slope, intercept, r_squared)``.

    ``r_squared`` is 1 for a perfect fit even when ``y`` is constant.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise InputError("least_squares_fit needs at least two (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise InputError("least_squares_fit: all x values are equal")
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    ss_res = float((resid ** 2).sum())
    ss_tot = float(((y - ym) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def circular_std(angles, period) -> float:
    """Circular standard deviation ``sqrt(-2 ln R)`` rescaled to ``period``."""
    a = np.asarray(angles, dtype=float)
    if a.size == 0:
        return math.nan
    theta = a * (2.0 * math.pi / period)
    resultant = math.hypot(np.cos(theta).mean(), np.sin(theta).mean())
    resultant = min(resultant, 1.0)
    if resultant <= 1e-12:  # uniform spread up to rounding
        return math.inf
    return math.sqrt(-2.0 * math.log(resultant)) * period / (2.0 * math.pi)


# Max-Cut costs are invariant under flipping every bit, and the global flip
# commutes with the whole ansatz, so f is pi/2-periodic in each beta.
MAXCUT_BETA_PERIOD = BETA_PERIOD / 2


def fold_conjugate(x):
    """Representative of ``x`` under ``(beta, gamma) -> (pi - beta, 2pi - gamma)``
    applied to all steps (``f`` is invariant under it): the member whose first
    gamma lies in ``[0, pi]``."""
    x = np.asarray(x, dtype=float)
    p = x.size // 2
    if x[p] <= math.pi:
        return x.copy()
    return np.concatenate([BETA_PERIOD - x[:p], GAMMA_PERIOD - x[p:]])


def concentration(records: Iterable[ExperimentRecord], threshold: float = 0.01,
                  step: int | None = None) -> dict:
    """Per-depth point clouds of near-optimal ``(beta_k, gamma_k)``.

    ``step`` is 1-based; ``None`` means the last step of each depth (so
    ``p = 2`` plots step 2). Returns ``{p: ConcentrationCloud}``.

    ``beta_std``/``gamma_std`` use the box periods (pi, 2*pi). The
    ``folded_*`` variants first map each point through
    :func:`fold_conjugate` and measure beta with period pi/2, so copies of
    one optimum under the landscape symmetries count as the same place.
    """
    by_p = defaultdict(list)
    for r in sorted(records, key=lambda r: (r.p, r.graph_id)):
        by_p[r.p].append(r)
    out = {}
    for p, recs in sorted(by_p.items()):
        k = p if step is None else step
        if k > p:
            continue
        cloud = ConcentrationCloud(p, k)
        folded = []
        for r in recs:
            fs = r.near_optimal_f or [None] * len(r.near_optimal_params)
            for x, f in zip(r.near_optimal_params, fs):
                if f is not None and f < (1.0 - threshold) * r.best_f:
                    continue
                cloud.points.append((r.graph_id, k, float(x[k - 1]), float(x[p + k - 1])))
                folded.append(fold_conjugate(x))
        if not cloud.points:
            log.warning("no near-optimal points for p=%d", p)
            out[p] = cloud
            continue
        betas = [pt[2] for pt in cloud.points]
        gammas = [pt[3] for pt in cloud.points]
        fb = [x[k - 1] for x in folded]
        fg = [x[p + k - 1] for x in folded]
        cloud.beta_std = circular_std(betas, BETA_PERIOD)
        cloud.gamma_std = circular_std(gammas, GAMMA_PERIOD)
        cloud.folded_beta_std = circular_std(fb, MAXCUT_BETA_PERIOD)
        cloud.folded_gamma_std = circular_std(fg, GAMMA_PERIOD)
        out[p] = cloud
    return out


def headline(records: Sequence[ExperimentRecord], pairs: Sequence[DistancePair] = ()):
    """Numbers printed by ``analyze``: mean / max of r_G, GED trend slope."""
    r = best_ratio_per_graph(records)
    vals = list(r.values())
    out = {
        "graphs": len(vals),
        "records": len(records),
        "depths": sorted({rec.p for rec in records}),
        "mean_ratio": float(np.mean(vals)) if vals else math.nan,
        "max_ratio": float(np.max(vals)) if vals else math.nan,
        "evaluations": int(sum(rec.evaluations_used for rec in records)),
        "reference_mean_ratio": 0.77,
        "reference_max_ratio": 0.91,
    }
    pts = [(pp.ged, pp.d) for pp in pairs]
    if len({x for x, _ in pts}) >= 2:
        slope, intercept, r2 = least_squares_fit(pts)
        out.update(trend_slope=slope, trend_intercept=intercept, trend_r2=r2)
    return out
