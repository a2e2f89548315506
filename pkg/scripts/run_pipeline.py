"""Generate, run and analyse one configuration end to end.

    python scripts/run_pipeline.py scripts/configs/smoke.toml
    python scripts/run_pipeline.py scripts/configs/desk.toml --workers 4

Re-running resumes from the journal; pass --fresh to start over.
"""

import argparse
import logging
import os
import sys
import time

from qaoa_bench.cli import cmd_analyze, cmd_generate, cmd_run
from qaoa_bench.config import load_config
from qaoa_bench.errors import QaoaBenchError


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--fresh", action="store_true")
    ap.add_argument("--format", choices=["svg", "csv", "both"], default="both")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = load_config(args.config, workers=args.workers)
        t0 = time.perf_counter()
        if args.fresh or not os.path.exists(cfg.manifest):
            cmd_generate(cfg)
        code = cmd_run(cfg, fresh=args.fresh, check=True)
        print(f"run finished in {time.perf_counter() - t0:.0f}s (check exit {code})")
        cmd_analyze(cfg, fmt=args.format)
    except QaoaBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return code


if __name__ == "__main__":
    sys.exit(main())
