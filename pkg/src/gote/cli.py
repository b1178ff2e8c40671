"""Command-line entry point ``gote``.

Exit codes: 0 success, 2 invalid configuration or input, 3 capacity exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cov_oracle import CovModel, assemble_sigma, export_sigma, frob_diff, frob_diff_bound, tv_bound
from .errors import CapacityError, ConfigError, GoteError, UnsupportedError
from .harness import KINDS, ExperimentConfig, emit, run
from .tensor_core import (
    DEFAULT_ENTRY_CAP,
    contract_mixed,
    load_tensor,
    load_vectors,
    sample_gote,
    save_matrix,
    save_tensor,
    unit_vector,
)
from .theory import Regime, edge_fluctuation_cov, edge_limits, overlap_limits

EXIT_CONFIG = 2
EXIT_CAPACITY = 3


def _dirs(spec: str, n: int) -> list[np.ndarray]:
    """Directions from a CSV file (one per row) or a ``;``-separated list of specs."""
    p = Path(spec)
    if p.is_file():
        return [unit_vector(n, row) for row in load_vectors(p)]
    return [unit_vector(n, s) for s in spec.split(";") if s.strip()]


def _cmd_sample_tensor(a) -> int:
    save_tensor(sample_gote(a.r, a.n, a.seed, cap=a.cap), a.out)
    return 0


def _cmd_contract(a) -> int:
    t = load_tensor(a.tensor)
    m = contract_mixed(t, _dirs(a.dirs, t.dim))
    if a.out:
        save_matrix(m, a.out)
    else:
        np.savetxt(sys.stdout, m, delimiter=",", fmt="%.17g")
    return 0


def _cmd_predict(a) -> int:
    regime = Regime.parse(a.regime, a.c)
    out: dict = {"regime": regime.to_json()}
    edge = edge_limits(a.r, a.n, regime)
    out["scale"] = edge.scale
    if edge.limits is not None:
        out["limits"] = list(edge.limits)
    else:
        out["distribution"] = [m.name for m in edge.distribution.marginals]
    try:
        out["fluctuation_cov"] = edge_fluctuation_cov(a.r, regime).to_json()
    except UnsupportedError as exc:
        out["fluctuation_cov"] = None
        out["fluctuation_note"] = str(exc)
    try:
        out["overlaps"] = overlap_limits(a.r, regime).to_json()
    except UnsupportedError as exc:
        out["overlaps"] = None
        out["overlap_note"] = str(exc)
    print(json.dumps(out, indent=2))
    return 0


def _cmd_cov(a) -> int:
    if a.mode == "pure":
        model = CovModel.pure(a.r, unit_vector(a.n, a.w, seed=a.seed))
    else:
        model = CovModel.mixed4(unit_vector(a.n, a.u, seed=a.seed), unit_vector(a.n, a.v, seed=a.seed))
    sigma = assemble_sigma(model, cap=a.cap)
    if a.out:
        export_sigma(sigma, a.out)
    else:
        np.savetxt(sys.stdout, sigma, delimiter=",", fmt="%.17g")
    return 0


def _cmd_tv_bound(a) -> int:
    u = unit_vector(a.n, a.u)
    v = unit_vector(a.n, a.v)
    tb = tv_bound(u, v)
    out = {"lower": tb.lower, "upper": tb.upper, "whitened_delta": tb.delta,
           "frob_diff": frob_diff(u, v), "frob_bound": frob_diff_bound(u, v)}
    print(json.dumps({k: float(f"{x:.17g}") for k, x in out.items()}, indent=2))
    return 0


def _cmd_experiment(a) -> int:
    cfg = ExperimentConfig.from_file(a.config, kind=a.kind, output_dir=a.out, workers=a.workers)
    result = run(cfg)
    paths = emit(result, a.out)
    print(json.dumps({k: str(p) for k, p in paths.items()}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gote", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample-tensor", help="draw a GOTE(r, n) tensor")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--cap", type=int, default=DEFAULT_ENTRY_CAP)
    s.set_defaults(func=_cmd_sample_tensor)

    s = sub.add_parser("contract", help="contract a saved tensor against r-2 directions")
    s.add_argument("--tensor", required=True)
    s.add_argument("--dirs", required=True, help="CSV file (one direction per row) or specs like 'e1;e2'")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_contract)

    s = sub.add_parser("predict", help="theoretical edge, fluctuation and overlap limits as JSON")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--regime", required=True)
    s.add_argument("--c", type=float)
    s.add_argument("--n", type=int, help="optional; checked for consistency with the regime")
    s.set_defaults(func=_cmd_predict)

    s = sub.add_parser("cov", help="assembled covariance of vech of a contraction, as CSV")
    s.add_argument("--mode", choices=("pure", "mixed4"), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r", type=int, default=4)
    s.add_argument("--w", default="e1")
    s.add_argument("--u", default="e1")
    s.add_argument("--v", default="e2")
    s.add_argument("--seed", type=int, help="seed for 'uniform' directions")
    s.add_argument("--cap", type=int, default=20_000)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_cov)

    s = sub.add_parser("tv-bound", help="total-variation sandwich between mixed covariances")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--u", required=True)
    s.add_argument("--v", required=True)
    s.set_defaults(func=_cmd_tv_bound)

    s = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    s.add_argument("kind", choices=KINDS)
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=_cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"gote: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, GoteError) as exc:
        print(f"gote: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
