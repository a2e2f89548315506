"""Benchmark construction and (graph, depth) optimisation runs."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DegenerateInstanceError, InputError, QaoaBenchError
from .graphs import Graph, generate_er, maxcut_bruteforce, save_manifest
from .journal import Journal
from .optim import Bounds, multistart
from .rng import derive_seed
from .sim import build_cut_table, qaoa_expectation_vec

log = logging.getLogger(__name__)

DEFAULT_E_P = (0.3, 0.4, 0.5, 0.6, 0.7)
DEFAULT_DEPTHS = (1, 2, 4, 6, 8)
# Desk-scale budgets, one tenth of the 1M / 3M used for the original study.
DEFAULT_BUDGETS = {1: 100_000, 2: 100_000, 4: 300_000, 6: 300_000, 8: 300_000}
FULL_SCALE_BUDGETS = {1: 1_000_000, 2: 1_000_000, 4: 3_000_000, 6: 3_000_000, 8: 3_000_000}


@dataclass
class ExperimentRecord:
    graph_id: str
    p: int
    best_betas: list
    best_gammas: list
    best_f: float
    ground_truth: int
    ratio: float
    evaluations_used: int
    starts_completed: int
    seed: int
    near_optimal_params: list = field(default_factory=list)
    near_optimal_f: list = field(default_factory=list)
    converged_starts: int = 0
    padded_start: bool = False
    e_p: float | None = None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**d)
        except TypeError as exc:
            raise InputError(f"malformed experiment record: {exc}") from exc

    @property
    def key(self):
        return (self.graph_id, self.p)

    @property
    def best_vector(self):
        return np.array(list(self.best_betas) + list(self.best_gammas))


def approximation_ratio(best_f: float, ground_truth: int) -> float:
    if ground_truth <= 0:
        raise DegenerateInstanceError("ground truth is 0: approximation ratio undefined")
    return best_f / ground_truth


def build_benchmark(n: int = 10, e_p_values: Sequence[float] = DEFAULT_E_P,
                    per_class: int = 10, master_seed: int = 0,
                    path=None) -> list[Graph]:
    """``len(e_p_values) * per_class`` Erdős–Rényi graphs.

    Graph ``k`` of class ``e_p`` uses seed
    ``derive_seed(master_seed, "graph", n, e_p, k, attempt)``; ``attempt``
    starts at 0 and is bumped while the sample has no edges, so every
    instance has a positive Max-Cut.
    """
    for e_p in e_p_values:
        if not 0.0 <= e_p <= 1.0:
            raise InputError(f"e_p_values: {e_p} is not a probability")
        if e_p == 0.0:
            raise InputError("e_p_values: 0 yields only empty (degenerate) graphs")
    if n < 2:
        raise InputError("n: need at least 2 vertices for a non-degenerate cut")
    if per_class < 1:
        raise InputError("per_class must be >= 1")
    graphs = []
    for e_p in e_p_values:
        for k in range(per_class):
            attempt = 0
            while True:
                seed = derive_seed(master_seed, "graph", n, f"{e_p:g}", k, attempt)
                g = generate_er(n, e_p, seed, graph_id=f"er{n}_p{e_p:.2f}_{k:02d}")
                if g.num_edges > 0:
                    break
                attempt += 1
            graphs.append(g)
    if path is not None:
        save_manifest(graphs, path)
    return graphs


class NearOptimalTracker:
    """Wraps ``-f`` for the optimizer and keeps every evaluated point whose
    ``f`` is within ``threshold`` (relative) of the best ``f`` seen so far.

    Points closer than ``xtol`` (max-norm) to a kept point are merged,
    keeping the higher ``f``. :meth:`final` applies the cut against the
    final best value.
    """

    def __init__(self, table, threshold=0.01, xtol=1e-2):
        self.table = table
        self.keep = 1.0 - threshold
        self.xtol = xtol
        self.best = -math.inf
        self.points = np.empty((0, 0))
        self.values = np.empty(0)

    def __call__(self, x):
        f = qaoa_expectation_vec(self.table, x)
        if f >= self.keep * self.best:
            self._add(np.array(x, dtype=float), f)
        return -f

    def _add(self, x, f):
        if f > self.best:
            self.best = f
            if self.values.size:
                mask = self.values >= self.keep * f
                self.points, self.values = self.points[mask], self.values[mask]
        if self.values.size == 0:
            self.points, self.values = x[None, :], np.array([f])
            return
        near = np.flatnonzero(np.abs(self.points - x).max(axis=1) < self.xtol)
        if near.size:
            i = near[0]
            if f > self.values[i]:
                self.points[i], self.values[i] = x, f
            return
        self.points = np.vstack([self.points, x])
        self.values = np.append(self.values, f)

    def final(self, best_f):
        mask = self.values >= self.keep * best_f
        order = np.lexsort((*self.points[mask].T[::-1], -self.values[mask]))
        return self.points[mask][order], self.values[mask][order]


def pad_params(betas, gammas, p):
    """Append identity layers (zero angles) up to depth ``p``."""
    extra = p - len(betas)
    if extra < 0:
        raise InputError("cannot pad to a smaller depth")
    return list(betas) + [0.0] * extra, list(gammas) + [0.0] * extra


def task_seed(master_seed, graph_id, p):
    return derive_seed(master_seed, "run", graph_id, p)


def run_task(g: Graph, p: int, budget: int, seed: int, ftol: float = 1e-3,
             xtol: float = 1e-2, threshold: float = 0.01,
             padded_from: ExperimentRecord | None = None) -> ExperimentRecord:
    """Optimise one (graph, depth) pair and package the outcome."""
    truth = maxcut_bruteforce(g).max_value
    if truth == 0:
        raise DegenerateInstanceError(f"graph {g.id} has no edges: ratio undefined")
    table = build_cut_table(g)
    tracker = NearOptimalTracker(table, threshold, xtol)
    starts = []
    if padded_from is not None:
        b, c = pad_params(padded_from.best_betas, padded_from.best_gammas, p)
        starts.append(b + c)
    res = multistart(tracker, Bounds.qaoa(p), budget, seed, ftol, xtol, initial_points=starts)
    best_f = -res.best_value
    pts, vals = tracker.final(best_f)
    x = res.best_point
    return ExperimentRecord(
        graph_id=g.id,
        p=p,
        best_betas=[float(v) for v in x[:p]],
        best_gammas=[float(v) for v in x[p:]],
        best_f=float(best_f),
        ground_truth=int(truth),
        ratio=float(approximation_ratio(best_f, truth)),
        evaluations_used=int(res.evaluations_used),
        starts_completed=int(res.starts_completed),
        seed=int(seed),
        near_optimal_params=[[float(v) for v in row] for row in pts],
        near_optimal_f=[float(v) for v in vals],
        converged_starts=int(sum(res.converged)),
        padded_start=padded_from is not None,
        e_p=g.e_p,
    )


def _run_task_job(args):
    g, p, budget, seed, ftol, xtol, threshold, padded = args
    return run_task(g, p, budget, seed, ftol, xtol, threshold, padded)


def resume(journal: Journal | Iterable[dict] | None, graphs: Sequence[Graph],
           depths: Sequence[int]):
    """Split the work into ``(done, remaining)``.

    ``done`` maps ``(graph_id, p)`` to the journaled record; ``remaining`` is
    the ordered list of pairs still to run. Raises :class:`JournalError` if
    the journal is corrupt before its last line.
    """
    if journal is None:
        rows = []
    elif isinstance(journal, Journal):
        rows = journal.read()
    else:
        rows = list(journal)
    done = {}
    for row in rows:
        rec = ExperimentRecord.from_dict(row)
        done[rec.key] = rec
    remaining = [(g.id, p) for p in sorted(depths) for g in graphs if (g.id, p) not in done]
    return done, remaining


def run_experiment(graphs: Sequence[Graph], depths: Sequence[int] = DEFAULT_DEPTHS,
                   budgets: dict | None = None, master_seed: int = 0,
                   ftol: float = 1e-3, xtol: float = 1e-2, threshold: float = 0.01,
                   padded_starts: bool = True, journal: Journal | None = None,
                   workers: int = 1) -> Iterator[ExperimentRecord]:
    """Yield one record per outstanding (graph, depth) pair.

    Depths run in ascending waves so a padded start can use the previous
    depth's journaled optimum. Records already in ``journal`` are skipped;
    new ones are appended as they finish. A failing pair is logged and
    skipped.
    """
    budgets = dict(DEFAULT_BUDGETS if budgets is None else budgets)
    depths = sorted(set(depths))
    missing = [p for p in depths if p not in budgets]
    if missing:
        raise InputError(f"budgets: no budget for depth(s) {missing}")
    done, _ = resume(journal, graphs, depths)

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        prev = None
        for p in depths:
            jobs = []
            for g in graphs:
                if (g.id, p) in done:
                    continue
                padded = done.get((g.id, prev)) if (padded_starts and prev is not None) else None
                jobs.append((g, p, budgets[p], task_seed(master_seed, g.id, p),
                             ftol, xtol, threshold, padded))
            for rec in _execute(jobs, pool):
                done[rec.key] = rec
                if journal is not None:
                    journal.append(rec.to_dict())
                yield rec
            prev = p
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)


def _execute(jobs, pool):
    if pool is None:
        for job in jobs:
            try:
                yield _run_task_job(job)
            except QaoaBenchError as exc:
                log.warning("skipping %s p=%d: %s", job[0].id, job[1], exc)
        return
    futures = {pool.submit(_run_task_job, job): job for job in jobs}
    for fut in as_completed(futures):
        job = futures[fut]
        try:
            yield fut.result()
        except QaoaBenchError as exc:
            log.warning("skipping %s p=%d: %s", job[0].id, job[1], exc)


def check_records(records: Iterable[ExperimentRecord], graphs: Sequence[Graph],
                  tol: float = 1e-9, threshold: float = 0.01) -> list[str]:
    """Re-simulate every record; return a description of each inconsistency."""
    by_id = {g.id: g for g in graphs}
    problems = []
    tables = {}
    for rec in records:
        g = by_id.get(rec.graph_id)
        tag = f"{rec.graph_id} p={rec.p}"
        if g is None:
            problems.append(f"{tag}: graph not in manifest")
            continue
        if g.id not in tables:
            tables[g.id] = build_cut_table(g)
        table = tables[g.id]
        f = qaoa_expectation_vec(table, rec.best_vector)
        if abs(f - rec.best_f) > tol:
            problems.append(f"{tag}: best_f {rec.best_f!r} but re-simulation gives {f!r}")
        if rec.ground_truth != table.max_value:
            problems.append(f"{tag}: ground_truth {rec.ground_truth} != {table.max_value}")
        elif abs(rec.ratio - rec.best_f / rec.ground_truth) > tol:
            problems.append(f"{tag}: ratio inconsistent with best_f / ground_truth")
        if rec.ratio > 1 + 1e-12 or rec.ratio < 0:
            problems.append(f"{tag}: ratio {rec.ratio} outside [0, 1]")
        for x in rec.near_optimal_params:
            fx = qaoa_expectation_vec(table, x)
            if fx < (1.0 - threshold) * rec.best_f - tol:
                problems.append(f"{tag}: near-optimal point {x} has f={fx} below threshold")
                break
    return problems
