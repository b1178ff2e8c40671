"""Run a batch of experiment configs and write each result to its own directory.

    python3 scripts/run_experiments.py scripts/configs/*.conf --out results
    python3 scripts/run_experiments.py scripts/configs/edge.conf --set n=500 --set replications=20
"""

import argparse
import json
import sys
import time
from pathlib import Path

from gote.errors import GoteError
from gote.harness import ExperimentConfig, emit, run


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("configs", nargs="+", help="flat key = value config files")
    p.add_argument("--out", default="results", help="parent directory for per-config outputs")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--workers", type=int, default=1)
    a = p.parse_args(argv)

    status = 0
    for path in map(Path, a.configs):
        try:
            text = path.read_text() + "\n" + "\n".join(a.set)
            cfg = ExperimentConfig.from_text(text, workers=a.workers)
            t0 = time.perf_counter()
            result = run(cfg)
            emit(result, Path(a.out) / path.stem)
        except (OSError, GoteError) as exc:
            print(f"{path.stem}: error: {exc}", file=sys.stderr)
            status = 2
            continue
        headline = {k: v for k, v in result.summary.items() if not isinstance(v, (dict, list))}
        print(f"{path.stem} ({time.perf_counter() - t0:.1f}s): {json.dumps(headline)}")
    return status


if __name__ == "__main__":
    sys.exit(main())
