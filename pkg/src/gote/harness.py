"""Seeded Monte Carlo experiments for each limit theorem, with CSV/JSON output.

Replication ``k`` of an experiment draws from a generator keyed by a 128-bit
hash of ``(master_seed, kind, k)``, so records depend only on the config and
can be computed in any order or in parallel.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .cov_oracle import CovModel, assemble_sigma, frob_diff, frob_diff_bound, tv_bound
from .errors import CapacityError, ConfigError, DomainError
from .law_equiv import pure_params, sample_mixed4_equivalent, sample_pure_equivalent
from .spectral import (
    WeightedSpectralMeasure,
    directional_limit,
    eigh,
    eigvals_desc,
    ks_distance,
    semicircle_cdf,
)
from .tensor_core import (
    DEFAULT_ENTRY_CAP,
    contract_mixed,
    contraction_operator,
    entry_count,
    gote_std,
    make_rng,
    sample_gote,
    unit_vector,
    vech_pairs,
)
from .theory import (
    Regime,
    edge_fluctuation_cov,
    edge_fluctuation_cov_delta_method,
    edge_limits,
    mixed_limits,
    overlap_limits,
)

KINDS = (
    "bulk", "edge", "fluctuation", "overlap", "directional",
    "mixed_compare", "cov_validate", "concentration", "tv_bound",
)
SAMPLERS = ("direct_tensor", "equivalent_law")
HIST_BINS = 100
BL_FUNCTIONS = 64


@dataclass
class ExperimentConfig:
    kind: str
    r: int = 4
    n: int = 100
    replications: int = 10
    master_seed: int = 0
    regime: str = "fixed_r"
    c: float | None = None
    direction: str = "e1"
    rho: float = 1.0
    contraction: str = "pure"
    sampler: str = "equivalent_law"
    output_dir: str | None = None
    window_delta: float = 0.015
    epsilon: float = 0.3
    tv_gammas: str = "0.05,0.1,0.2,0.4,0.8"
    entry_cap: int = DEFAULT_ENTRY_CAP
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if self.contraction not in ("pure", "mixed4"):
            raise ConfigError(f"contraction must be 'pure' or 'mixed4', got {self.contraction!r}")
        if self.kind == "mixed_compare" or self.contraction == "mixed4":
            if self.r != 4:
                raise ConfigError("mixed contractions are only available for r = 4")
        if not -1 <= self.rho <= 1:
            raise ConfigError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.r < 3:
            raise ConfigError(f"need r >= 3, got {self.r}")
        try:
            Regime.parse(self.regime, self.c)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def regime_obj(self) -> Regime:
        return Regime.parse(self.regime, self.c)

    @classmethod
    def from_text(cls, text: str, **overrides) -> ExperimentConfig:
        """Parse flat ``key = value`` lines; ``#`` starts a comment."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[key] = _coerce(key, types[key], val)
        values.update({k: v for k, v in overrides.items() if v is not None})
        if "kind" not in values:
            raise ConfigError("config is missing 'kind'")
        return cls(**values)

    @classmethod
    def from_file(cls, path, **overrides) -> ExperimentConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text, **overrides)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(key: str, typ: str, val: str):
    typ = str(typ)
    if val.lower() in ("none", "") and "None" in typ:
        return None
    try:
        if typ.startswith("int"):
            return int(val)
        if typ.startswith("float"):
            return float(val)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {val!r} as {typ}") from exc
    return val


def replication_seed(master_seed: int, kind: str, k: int) -> int:
    """128-bit seed for replication ``k``; injective in practice, order independent."""
    h = hashlib.blake2b(f"{master_seed}\x1f{kind}\x1f{k}".encode(), digest_size=16)
    return int.from_bytes(h.digest(), "big")


# samplers -------------------------------------------------------------------------


def _orthogonal_partner(u: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``u``."""
    k = int(np.argsort(np.abs(u))[0])
    e = np.zeros_like(u)
    e[k] = 1.0
    p = e - (e @ u) * u
    return p / np.linalg.norm(p)


def with_inner_product(u: np.ndarray, rho: float) -> np.ndarray:
    """Unit vector ``v`` with ``u . v = rho``."""
    if abs(rho) == 1:
        return rho * u
    v = rho * u + math.sqrt(1 - rho * rho) * _orthogonal_partner(u)
    return v / np.linalg.norm(v)


def _check_direct(cfg: ExperimentConfig) -> None:
    count = entry_count(cfg.r, cfg.n)
    if count > cfg.entry_cap:
        raise CapacityError(
            f"direct_tensor sampler needs {count} entries for r={cfg.r}, n={cfg.n}; cap is {cfg.entry_cap}",
            required=count, cap=cfg.entry_cap,
        )


def sample_pure(cfg: ExperimentConfig, w: np.ndarray, seed) -> np.ndarray:
    if cfg.sampler == "direct_tensor":
        t = sample_gote(cfg.r, cfg.n, seed, cap=cfg.entry_cap)
        return contract_mixed(t, [w] * (cfg.r - 2))
    return sample_pure_equivalent(cfg.r, cfg.n, w, seed)[0]


def sample_mixed(cfg: ExperimentConfig, u: np.ndarray, v: np.ndarray, seed) -> np.ndarray:
    if cfg.sampler == "direct_tensor":
        t = sample_gote(4, cfg.n, seed, cap=cfg.entry_cap)
        return contract_mixed(t, [u, v])
    return sample_mixed4_equivalent(u, v, seed)[0]


def config_directions(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """``(w, v)``: the contraction direction and a partner with ``w . v = rho``."""
    w = unit_vector(cfg.n, cfg.direction, seed=replication_seed(cfg.master_seed, "direction", 0))
    return w, with_inner_product(w, cfg.rho)


# per-replication kernels --------------------------------------------------------------


def _hist(values: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    return np.histogram(values, bins=HIST_BINS, range=window)[0]


def _bulk_params(cfg: ExperimentConfig) -> tuple[float, float]:
    """(matrix scale, predicted semicircle variance on that scale)."""
    if cfg.contraction == "pure":
        return pure_params(cfg.r).theta * math.sqrt(cfg.n), 1.0
    return math.sqrt(cfg.n), mixed_limits(cfg.rho).bulk_sigma2


def _spectral_window(cfg: ExperimentConfig) -> tuple[float, float]:
    if cfg.kind == "bulk":
        _, s2 = _bulk_params(cfg)
        half = 1.5 * 2 * math.sqrt(s2)
    elif cfg.kind == "edge" and cfg.regime_obj.tag == "r_much_greater_n":
        half = 4.0
    elif cfg.kind == "mixed_compare":
        half = 1.5 * pure_params(4).varpi
    else:
        half = 1.5 * max(pure_params(cfg.r).varpi, 2 * pure_params(cfg.r).theta)
        if cfg.kind == "edge" and cfg.regime_obj.tag == "proportional":
            half = 1.5 * (math.sqrt(cfg.regime_obj.c) * 3 + 2)
    return (-half, half)


def _rep(args) -> tuple[dict, np.ndarray | None]:
    cfg, k = args
    seed = replication_seed(cfg.master_seed, cfg.kind, k)
    w, v = config_directions(cfg)
    kind = cfg.kind
    window = _spectral_window(cfg)
    if kind == "bulk":
        scale, s2 = _bulk_params(cfg)
        M = sample_pure(cfg, w, seed) if cfg.contraction == "pure" else sample_mixed(cfg, w, v, seed)
        ev = eigvals_desc(M) / scale
        ks = ks_distance(WeightedSpectralMeasure.esd(ev), lambda x: semicircle_cdf(x, s2))
        return {"rep": k, "ks": ks, "lambda_1": ev[0], "lambda_n": ev[-1]}, _hist(ev, window)
    if kind in ("edge", "fluctuation", "concentration"):
        M = sample_pure(cfg, w, seed)
        ev = eigvals_desc(M)
        if kind == "edge":
            scale = math.sqrt(cfg.r) if cfg.regime_obj.tag == "r_much_greater_n" else math.sqrt(cfg.n)
            ev = ev / scale
            return {"rep": k, "lambda_1": ev[0], "lambda_n": ev[-1]}, _hist(ev, window)
        ev = ev / math.sqrt(cfg.n)
        if kind == "fluctuation":
            vp = pure_params(cfg.r).varpi
            rec = {"rep": k, "lambda_1": ev[0], "lambda_n": ev[-1],
                   "fluc_1": math.sqrt(cfg.n) * (ev[0] - vp), "fluc_n": math.sqrt(cfg.n) * (ev[-1] + vp)}
            return rec, _hist(ev, window)
        centers = np.linspace(window[0], window[1], BL_FUNCTIONS)
        stats = 0.5 * np.tanh(ev[:, None] - centers[None, :]).mean(axis=0)
        rec = {"rep": k, "lambda_1": ev[0]}
        rec.update({f"bl_{i:02d}": s for i, s in enumerate(stats)})
        return rec, _hist(ev, window)
    if kind == "overlap":
        es = eigh(sample_pure(cfg, w, seed) / math.sqrt(cfg.n))
        s1, sn = es.eigenvectors[:, 0], es.eigenvectors[:, -1]
        a, b = abs(w @ s1), abs(w @ sn)
        ta, tb = abs(w @ (s1 + sn)) / math.sqrt(2), abs(w @ (s1 - sn)) / math.sqrt(2)
        rec = {"rep": k, "lambda_1": es.eigenvalues[0], "lambda_n": es.eigenvalues[-1],
               "delta_1": max(a, b), "delta_n": min(a, b), "delta_tilde_1": max(ta, tb),
               "delta_tilde_n": min(ta, tb), "dist": math.sqrt(max(0.0, 1 - a * a - b * b))}
        return rec, _hist(es.eigenvalues, window)
    if kind == "directional":
        return _directional_rep(cfg, w, v, seed, k, window)
    if kind == "mixed_compare":
        u = w
        perp = with_inner_product(u, 0.0)
        ev_p = eigvals_desc(sample_mixed(cfg, u, u, replication_seed(cfg.master_seed, "mixed_compare/pure", k)))
        ev_m = eigvals_desc(sample_mixed(cfg, u, perp, replication_seed(cfg.master_seed, "mixed_compare/mixed", k)))
        ev_p /= math.sqrt(cfg.n)
        ev_m /= math.sqrt(cfg.n)
        edge = 2 * pure_params(4).theta + cfg.window_delta
        rec = {"rep": k, "pure_lambda_1": ev_p[0], "pure_lambda_n": ev_p[-1], "pure_outliers": int(np.sum(np.abs(ev_p) > edge)),
               "mixed_lambda_1": ev_m[0], "mixed_lambda_n": ev_m[-1], "mixed_outliers": int(np.sum(np.abs(ev_m) > edge))}
        return rec, _hist(ev_p, window) + _hist(ev_m, window)
    raise ConfigError(f"kind {kind!r} has no per-replication kernel")


def _directional_rep(cfg, w, x_dir, seed, k, window):
    """Directional measure of ``M / sqrt n`` along ``x`` with ``x . w = rho``."""
    es = eigh(sample_pure(cfg, w, seed) / math.sqrt(cfg.n))
    mu = WeightedSpectralMeasure(es.eigenvalues, (x_dir @ es.eigenvectors) ** 2)
    lim = directional_limit(cfg.rho, cfg.r, scale="theta")
    ww = (w @ es.eigenvectors) ** 2
    rec = {"rep": k, "lambda_1": es.eigenvalues[0], "lambda_n": es.eigenvalues[-1],
           "x_weight_1": (x_dir @ es.eigenvectors[:, 0]) ** 2, "x_weight_n": (x_dir @ es.eigenvectors[:, -1]) ** 2,
           "w_outlier_weight": ww[0] + ww[-1]}
    # the two outlier atoms are compared against the predicted point masses separately
    if lim.atoms:
        bulk = WeightedSpectralMeasure(es.eigenvalues[1:-1], (x_dir @ es.eigenvectors[:, 1:-1]) ** 2)
    else:
        bulk = mu
    rec["ks_continuous"] = ks_distance(bulk, lim.continuous_cdf)
    rec["ks_mixture"] = ks_distance(mu, lim.cdf)
    return rec, _hist(es.eigenvalues, window)


# aggregate --------------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[dict]
    summary: dict
    theory: dict
    histogram: np.ndarray
    hist_window: tuple[float, float]
    metadata: dict = field(default_factory=dict)


def _moments(x: np.ndarray) -> dict:
    x = np.asarray(x, dtype=float)
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    return {"mean": float(x.mean()), "var": var, "se": math.sqrt(var / x.size)}


def _common_theory(cfg: ExperimentConfig) -> dict:
    p4 = pure_params(4)
    return {"varpi_4": p4.varpi, "bulk_edge_r4": 2 * p4.theta, "two_over_sqrt3": 2 / math.sqrt(3)}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    start = time.perf_counter()
    if cfg.sampler == "direct_tensor":
        _check_direct(cfg)
    if cfg.kind == "cov_validate":
        result = _run_cov_validate(cfg)
    elif cfg.kind == "tv_bound":
        result = _run_tv(cfg)
    else:
        jobs = [(cfg, k) for k in range(cfg.replications)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                out = list(pool.map(_rep, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
        else:
            out = [_rep(j) for j in jobs]
        records = [o[0] for o in out]
        hist = np.sum([o[1] for o in out], axis=0)
        summary, theory = _summarise(cfg, records)
        result = ExperimentResult(cfg, records, summary, theory, hist, _spectral_window(cfg))
    result.summary.update(_common_theory(cfg))
    result.metadata = {
        "config": cfg.to_json(),
        "versions": {"gote": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "wall_time_s": time.perf_counter() - start,
    }
    return result


def _col(records, key) -> np.ndarray:
    return np.array([r[key] for r in records], dtype=float)


def _summarise(cfg: ExperimentConfig, records: list[dict]) -> tuple[dict, dict]:
    kind = cfg.kind
    keys = [k for k in records[0] if k != "rep" and not k.startswith("bl_")]
    summary: dict = {"replications": len(records)}
    summary.update({k: _moments(_col(records, k)) for k in keys})
    theory: dict = {}
    regime = cfg.regime_obj
    if kind == "bulk":
        _, s2 = _bulk_params(cfg)
        theory = {"semicircle_sigma2": s2, "scale": "theta*sqrt(n)" if cfg.contraction == "pure" else "sqrt(n)"}
    elif kind == "edge":
        theory = edge_limits(cfg.r, cfg.n, regime).to_json()
    elif kind == "fluctuation":
        pair = np.column_stack([_col(records, "fluc_1"), _col(records, "fluc_n")])
        emp = np.cov(pair.T)
        summary["fluctuation_cov"] = emp.tolist()
        summary["fluctuation_corr"] = float(emp[0, 1] / math.sqrt(emp[0, 0] * emp[1, 1]))
        th = edge_fluctuation_cov(cfg.r, Regime("fixed_r"))
        dm = edge_fluctuation_cov_delta_method(cfg.r)
        theory = {"fluctuation_cov": th.to_json(), "fluctuation_corr": th.correlation(),
                  "delta_method_cov": dm.to_json(), "delta_method_corr": dm.correlation()}
    elif kind == "overlap":
        theory = overlap_limits(cfg.r, regime).to_json()
    elif kind == "directional":
        lim = directional_limit(cfg.rho, cfg.r, scale="theta")
        theory = {"rho": cfg.rho, "atoms": [list(a) for a in lim.atoms],
                  "outlier_weight_total": sum(m for _, m in lim.atoms)}
    elif kind == "mixed_compare":
        for br in ("pure", "mixed"):
            cnt = _col(records, f"{br}_outliers")
            summary[f"{br}_outlier_hist"] = {str(int(c)): int(np.sum(cnt == c)) for c in np.unique(cnt)}
        summary["frac_pure_two_outliers"] = float(np.mean(_col(records, "pure_outliers") == 2))
        summary["frac_mixed_zero_outliers"] = float(np.mean(_col(records, "mixed_outliers") == 0))
        summary["window"] = [-(2 * pure_params(4).theta + cfg.window_delta), 2 * pure_params(4).theta + cfg.window_delta]
        theory = {"pure_edge": mixed_limits(1.0).edge, "mixed_orthogonal_edge": mixed_limits(0.0).edge,
                  "pure_bulk_edge": 2 * pure_params(4).theta}
    elif kind == "concentration":
        eps, n, r = cfg.epsilon, cfg.n, cfg.r
        lam = _col(records, "lambda_1")
        bl = np.array([[rec[f"bl_{i:02d}"] for i in range(BL_FUNCTIONS)] for rec in records])
        dbl = np.abs(bl - bl.mean(axis=0)).max(axis=1)
        summary["lambda_1_tail_freq"] = float(np.mean(np.abs(lam - lam.mean()) > eps))
        summary["dbl_proxy_tail_freq"] = float(np.mean(dbl > eps))
        summary["dbl_proxy_max"] = float(dbl.max())
        theory = {"epsilon": eps, "lambda_1_tail_bound": 2 * math.exp(-n * eps**2 / (2 * r)),
                  "dbl_tail_bound": 2 * eps**-1.5 * math.exp(-(n**2) * eps**2 / (2 * r))}
    return summary, theory


def _vech_samples(cfg: ExperimentConfig, dirs, count_start: int, count: int, A: np.ndarray | None) -> np.ndarray:
    rows, cols = vech_pairs(cfg.n)
    out = np.empty((count, rows.size))
    std = gote_std(cfg.r, cfg.n) if A is not None else None
    for t in range(count):
        seed = replication_seed(cfg.master_seed, cfg.kind, count_start + t)
        if A is not None:
            vals = make_rng(seed).standard_normal(std.size) * std
            out[t] = A @ vals
        elif cfg.contraction == "pure":
            out[t] = sample_pure_equivalent(cfg.r, cfg.n, dirs[0], seed)[0][rows, cols]
        else:
            out[t] = sample_mixed4_equivalent(dirs[0], dirs[1], seed)[0][rows, cols]
    return out


def _run_cov_validate(cfg: ExperimentConfig) -> ExperimentResult:
    """Empirical ``Cov(vech M)`` against the oracle; records are one row per entry."""
    w, v = config_directions(cfg)
    if cfg.contraction == "pure":
        dirs = [w] * (cfg.r - 2)
        model = CovModel.pure(cfg.r, w)
    else:
        dirs = [w, v]
        model = CovModel.mixed4(w, v)
    sigma = assemble_sigma(model)
    A = contraction_operator(cfg.r, cfg.n, dirs) if cfg.sampler == "direct_tensor" else None
    m = sigma.shape[0]
    s1 = np.zeros(m)
    s2 = np.zeros((m, m))
    s4 = np.zeros((m, m))
    chunk = 20_000
    N = cfg.replications
    # accumulate raw moments; the mean is known to be zero, so no centring is needed
    for start in range(0, N, chunk):
        x = _vech_samples(cfg, [w, v] if cfg.contraction == "mixed4" else [w], start, min(chunk, N - start), A)
        s1 += x.sum(axis=0)
        s2 += x.T @ x
        sq = x * x
        s4 += sq.T @ sq
    emp = s2 / N
    # Var(x_a x_b) = E[x_a^2 x_b^2] - Cov^2
    se = np.sqrt(np.maximum(s4 / N - emp**2, 0.0) / N)
    z = (emp - sigma) / np.where(se > 0, se, np.inf)
    rows, cols = vech_pairs(cfg.n)
    iu = np.triu_indices(m)
    records = [
        {"a": int(a), "b": int(b), "i": int(rows[a]) + 1, "j": int(cols[a]) + 1, "k": int(rows[b]) + 1,
         "l": int(cols[b]) + 1, "empirical": emp[a, b], "oracle": sigma[a, b], "se": se[a, b], "z": z[a, b]}
        for a, b in zip(*iu)
    ]
    zs = z[iu]
    summary = {
        "replications": N, "entries": int(zs.size), "frac_within_4se": float(np.mean(np.abs(zs) <= 4)),
        "max_abs_z": float(np.abs(zs).max()), "mean_abs": float(np.abs(s1 / N).max()),
        "sampler": cfg.sampler,
    }
    window = (-6.0, 6.0)
    theory = {"model": cfg.contraction, "r": cfg.r, "n": cfg.n}
    return ExperimentResult(cfg, records, summary, theory, _hist(zs, window), window)


def _run_tv(cfg: ExperimentConfig) -> ExperimentResult:
    """Sweep ``v = sqrt(1 - g^2) u + g u_perp`` and record the bounds."""
    try:
        gammas = [float(g) for g in cfg.tv_gammas.split(",") if g.strip()]
    except ValueError as exc:
        raise ConfigError(f"tv_gammas: {exc}") from exc
    u, _ = config_directions(cfg)
    perp = with_inner_product(u, 0.0)
    records = []
    for g in gammas:
        v = math.sqrt(1 - g * g) * u + g * perp
        v /= np.linalg.norm(v)
        tb = tv_bound(u, v)
        fd = frob_diff(u, v)
        records.append({"gamma": g, "distance": float(np.linalg.norm(u - v)), "tv_lower": tb.lower,
                        "tv_upper": tb.upper, "whitened_delta": tb.delta, "frob_diff": fd,
                        "frob_bound": frob_diff_bound(u, v), "frob_ratio": fd / (g * cfg.n)})
    ratio = np.array([r["frob_ratio"] for r in records])
    summary = {"points": len(records), "frob_ratio_spread": float(ratio.max() / ratio.min()),
               "bound_holds": bool(all(r["frob_diff"] <= r["frob_bound"] + 1e-8 for r in records))}
    vals = np.array([r["tv_upper"] for r in records])
    window = (0.0, 1.5)
    return ExperimentResult(cfg, records, summary, {"tv_constants": [0.01, 1.5]}, _hist(vals, window), window)


# output ------------------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def _json_float_repr(obj):
    """Round-trip floats with 17 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: _json_float_repr(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_float_repr(v) for v in obj]
    return obj


def emit(result: ExperimentResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {name: out / name for name in ("records.csv", "summary.json", "histogram.csv", "theory.json")}
        with paths["records.csv"].open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            cols = list(result.records[0].keys())
            writer.writerow(cols)
            for rec in result.records:
                writer.writerow([_fmt(rec[c]) for c in cols])
        summary = dict(result.summary)
        summary["metadata"] = result.metadata
        summary["histogram_window"] = list(result.hist_window)
        paths["summary.json"].write_text(json.dumps(_json_float_repr(summary), indent=2, default=_json_default) + "\n")
        edges = np.linspace(result.hist_window[0], result.hist_window[1], HIST_BINS + 1)
        with paths["histogram.csv"].open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_left", "bin_right", "count"])
            for a, b, c in zip(edges[:-1], edges[1:], result.histogram):
                writer.writerow([_fmt(a), _fmt(b), int(c)])
        paths["theory.json"].write_text(
            json.dumps(_json_float_repr(result.theory), indent=2, default=_json_default) + "\n"
        )
    except OSError as exc:
        raise OSError(f"cannot write experiment output under {out}: {exc}") from exc
    return paths
