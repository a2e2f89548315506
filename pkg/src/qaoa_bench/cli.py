"""Command-line pipeline: ``generate``, ``run``, ``analyze``, ``check``.

Exit codes: 0 success, 1 check found inconsistencies, 2 bad config or
input, 3 I/O or journal error, 4 capacity exceeded, 5 degenerate instance,
6 objective evaluation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter

from . import analysis
from .bench import ExperimentRecord, build_benchmark, check_records, resume, run_experiment
from .config import load_config
from .errors import InputError, QaoaBenchError
from .graphs import load_manifest
from .journal import Journal
from .plots import emit_plots

log = logging.getLogger("qaoa_bench")


def cmd_generate(cfg, out=None):
    out = out or sys.stdout
    graphs = build_benchmark(cfg.n, cfg.e_p_values, cfg.per_class, cfg.master_seed,
                             path=cfg.manifest)
    counts = Counter(g.e_p for g in graphs)
    print(f"wrote {len(graphs)} graphs to {cfg.manifest}", file=out)
    print(f"{'e_p':>6}  {'count':>5}  {'mean |E|':>8}", file=out)
    for e_p in sorted(counts):
        edges = [g.num_edges for g in graphs if g.e_p == e_p]
        print(f"{e_p:>6g}  {counts[e_p]:>5}  {sum(edges) / len(edges):>8.1f}", file=out)
    return graphs


def cmd_run(cfg, fresh=False, check=False, out=None):
    out = out or sys.stdout
    graphs = load_manifest(cfg.manifest)
    journal = Journal(cfg.journal)
    if fresh:
        journal.reset()
    done, remaining = resume(journal, graphs, cfg.depths)
    total = len(graphs) * len(cfg.depths)
    print(f"{len(done)}/{total} pairs already journaled; {len(remaining)} to run", file=out)
    best = max((r.ratio for r in done.values()), default=float("nan"))
    finished = len(done)
    for rec in run_experiment(graphs, cfg.depths, cfg.budgets, cfg.master_seed, cfg.ftol,
                              cfg.xtol, cfg.threshold, cfg.padded_starts, journal, cfg.workers):
        finished += 1
        best = rec.ratio if not best >= rec.ratio else best
        print(f"[{finished}/{total}] {rec.graph_id} p={rec.p} ratio={rec.ratio:.4f} "
              f"starts={rec.starts_completed} best={best:.4f}", file=out, flush=True)
    if check:
        return cmd_check(cfg, out=out)
    return 0


def _load_records(cfg):
    rows = Journal(cfg.journal).read()
    if not rows:
        raise InputError(f"journal {cfg.journal} is empty or missing")
    recs = [ExperimentRecord.from_dict(r) for r in rows]
    return sorted(recs, key=lambda r: (r.graph_id, r.p))


def cmd_check(cfg, out=None):
    out = out or sys.stdout
    graphs = load_manifest(cfg.manifest)
    records = _load_records(cfg)
    problems = check_records(records, graphs, threshold=cfg.threshold)
    for msg in problems:
        print(f"MISMATCH {msg}", file=out)
    print(f"checked {len(records)} records: {len(problems)} problem(s)", file=out)
    return 1 if problems else 0


def cmd_analyze(cfg, fmt="both", out=None):
    out = out or sys.stdout
    graphs = load_manifest(cfg.manifest)
    records = _load_records(cfg)
    depth_stats = analysis.ratio_stats(records, "p")
    class_stats = {p: analysis.ratio_stats(records, "e_p", graphs, p=p)
                   for p in sorted({r.p for r in records})}
    pairs = analysis.pairwise_ratio_diff(records, graphs)
    fit = None
    if len({q.ged for q in pairs}) >= 2:
        fit = analysis.least_squares_fit([(q.ged, q.d) for q in pairs])
    clouds = analysis.concentration(records, cfg.threshold, cfg.step)
    summary = analysis.headline(records, pairs)
    summary["r_G_depths"] = summary["depths"]
    summary["concentration"] = {
        str(p): {"step": c.step, "points": c.size,
                 "beta_circ_std": c.beta_std, "gamma_circ_std": c.gamma_std,
                 "folded_beta_circ_std": c.folded_beta_std,
                 "folded_gamma_circ_std": c.folded_gamma_std}
        for p, c in clouds.items()}
    summary["depth_medians"] = {str(s.group): s.median for s in depth_stats}
    written = emit_plots(cfg.out_dir, depth_stats, class_stats, pairs, fit, clouds,
                         summary, fmt)

    print(f"records: {len(records)}  graphs: {summary['graphs']}  depths: {summary['depths']}",
          file=out)
    print(f"mean ratio (r_G over available depths): {summary['mean_ratio']:.4f}"
          f"   [reference: 0.77]", file=out)
    print(f"max ratio: {summary['max_ratio']:.4f}   [reference: 0.91]", file=out)
    for s in depth_stats:
        print(f"  p={s.group:<2} n={s.count:<3} median={s.median:.4f} "
              f"[{s.min:.4f}, {s.max:.4f}]", file=out)
    if fit is not None:
        print(f"trend |r1-r2| vs GED: slope={fit[0]:.5f} intercept={fit[1]:.5f} "
              f"r2={fit[2]:.3f} over {len(pairs)} pairs", file=out)
    for p, c in sorted(clouds.items()):
        print(f"  concentration p={p} step {c.step}: {c.size} points, circular std "
              f"beta={c.beta_std:.3f} gamma={c.gamma_std:.3f} "
              f"(folded {c.folded_beta_std:.3f}/{c.folded_gamma_std:.3f})", file=out)
    print(f"wrote {len(written)} files to {cfg.out_dir}", file=out)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON config file")
    common.add_argument("--workers", type=int, help="worker processes for run")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qaoa-bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write the benchmark manifest")
    run = sub.add_parser("run", parents=[common], help="optimise every (graph, depth) pair")
    run.add_argument("--fresh", action="store_true", help="discard the journal first")
    run.add_argument("--check", action="store_true", help="re-simulate records afterwards")
    an = sub.add_parser("analyze", parents=[common], help="statistics, CSV and SVG output")
    an.add_argument("--format", choices=["svg", "csv", "both"], default="both")
    sub.add_parser("check", parents=[common], help="re-simulate every journal record")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, workers=args.workers)
        if args.command == "generate":
            cmd_generate(cfg)
            return 0
        if args.command == "run":
            return cmd_run(cfg, fresh=args.fresh, check=args.check)
        if args.command == "analyze":
            return cmd_analyze(cfg, fmt=args.format)
        return cmd_check(cfg)
    except QaoaBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
