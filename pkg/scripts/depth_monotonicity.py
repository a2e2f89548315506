"""Best f across depths with and without padded warm starts.

With padding, the depth-p optimum seeds the depth-(p+1) search, so the best
value can only go up. Without it, a small budget at a higher depth often
ends below the lower-depth result: the search failed, the ansatz did not.

    python scripts/depth_monotonicity.py --graphs 10 --budget 40 --depths 1 2 4
"""

import argparse

from qaoa_bench.bench import build_benchmark, run_task, task_seed


def sweep(g, depths, budget, seed, padded):
    out, prev = [], None
    for p in depths:
        rec = run_task(g, p, budget, task_seed(seed, g.id, p),
                       padded_from=prev if padded else None)
        out.append(rec.best_f)
        prev = rec
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=10)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--e-p", type=float, default=0.5)
    ap.add_argument("--budget", type=int, default=40)
    ap.add_argument("--depths", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--seed", type=int, default=6)
    args = ap.parse_args()

    graphs = build_benchmark(args.n, (args.e_p,), args.graphs, args.seed)
    drops = {False: 0, True: 0}
    head = "  ".join(f"p={p:<5}" for p in args.depths)
    print(f"{'graph':<16} {'padded':<7} {head}")
    for g in graphs:
        for padded in (False, True):
            fs = sweep(g, args.depths, args.budget, args.seed, padded)
            drop = any(b < a - 1e-6 for a, b in zip(fs, fs[1:]))
            drops[padded] += drop
            row = "  ".join(f"{f:7.4f}" for f in fs)
            print(f"{g.id:<16} {str(padded):<7} {row}{'  <- drop' if drop else ''}")
    print(f"\ninstances with a drop in depth: unpadded {drops[False]}/{len(graphs)}, "
          f"padded {drops[True]}/{len(graphs)}")


if __name__ == "__main__":
    main()
