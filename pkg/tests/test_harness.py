import json
import math

import numpy as np
import pytest

from gote.errors import CapacityError, ConfigError
from gote.harness import KINDS, ExperimentConfig, emit, replication_seed, run, with_inner_product


def test_config_parsing():
    cfg = ExperimentConfig.from_text("kind = edge\nr = 5\nn = 40  # small\nreplications=3\nc = none\n")
    assert (cfg.kind, cfg.r, cfg.n, cfg.replications, cfg.c) == ("edge", 5, 40, 3, None)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("kind = edge\ncolour = blue\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("kind = nonsense\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("kind = edge\nreplications = 0\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text("kind = edge\nn = many\n")
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="mixed_compare", r=5)


def test_seed_derivation_injective_and_order_free():
    seeds = {replication_seed(7, "edge", k) for k in range(50_000)}
    assert len(seeds) == 50_000
    assert replication_seed(7, "edge", 3) != replication_seed(7, "bulk", 3)
    assert replication_seed(7, "edge", 3) != replication_seed(8, "edge", 3)
    assert replication_seed(7, "edge", 3) < 2**128


def test_with_inner_product(rng):
    u = rng.standard_normal(6)
    u /= np.linalg.norm(u)
    for rho in (-1, -0.3, 0, 0.8, 1):
        v = with_inner_product(u, rho)
        assert np.linalg.norm(v) == pytest.approx(1)
        assert u @ v == pytest.approx(rho, abs=1e-12)


@pytest.mark.parametrize(
    "kw",
    [
        dict(kind="bulk", n=60, replications=2),
        dict(kind="bulk", n=60, replications=2, contraction="mixed4", rho=0.5),
        dict(kind="edge", n=60, replications=2),
        dict(kind="edge", r=120, n=60, replications=2, regime="r_much_greater_n"),
        dict(kind="edge", r=60, n=60, replications=2, regime="proportional", c=1.0),
        dict(kind="fluctuation", n=60, replications=3),
        dict(kind="overlap", n=60, replications=2),
        dict(kind="directional", n=60, replications=2, rho=0.8),
        dict(kind="mixed_compare", n=60, replications=2),
        dict(kind="cov_validate", n=3, replications=500),
        dict(kind="cov_validate", n=3, replications=500, sampler="direct_tensor", contraction="mixed4", rho=0.2),
        dict(kind="concentration", n=60, replications=4),
        dict(kind="tv_bound", n=6),
    ],
)
def test_every_kind_runs_and_emits(kw, tmp_path):
    res = run(ExperimentConfig(**kw))
    paths = emit(res, tmp_path)
    assert set(paths) == {"records.csv", "summary.json", "histogram.csv", "theory.json"}
    hist = paths["histogram.csv"].read_text().splitlines()
    assert hist[0] == "bin_left,bin_right,count" and len(hist) == 101
    summary = json.loads(paths["summary.json"].read_text())
    assert summary["varpi_4"] == pytest.approx(math.sqrt(1.5))
    assert summary["bulk_edge_r4"] == pytest.approx(2 / math.sqrt(3))
    assert summary["metadata"]["config"]["kind"] == kw["kind"]
    json.loads(paths["theory.json"].read_text())


def test_all_kinds_covered():
    assert set(KINDS) == {"bulk", "edge", "fluctuation", "overlap", "directional", "mixed_compare",
                          "cov_validate", "concentration", "tv_bound"}


def test_rerun_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(kind="overlap", n=50, replications=3, master_seed=5)
    a = emit(run(cfg), tmp_path / "a")["records.csv"].read_bytes()
    b = emit(run(cfg), tmp_path / "b")["records.csv"].read_bytes()
    assert a == b


def test_parallel_matches_serial():
    base = dict(kind="edge", n=40, replications=6, master_seed=2)
    serial = run(ExperimentConfig(**base)).records
    parallel = run(ExperimentConfig(workers=2, **base)).records
    assert serial == parallel


def test_records_depend_only_on_k():
    short = run(ExperimentConfig(kind="edge", n=40, replications=2, master_seed=1)).records
    long = run(ExperimentConfig(kind="edge", n=40, replications=5, master_seed=1)).records
    assert long[:2] == short


def test_direct_tensor_capacity():
    with pytest.raises(CapacityError):
        run(ExperimentConfig(kind="edge", r=4, n=200, sampler="direct_tensor", entry_cap=1000))


def test_direct_and_equivalent_samplers_agree_r4_n8(tmp_path, rng):
    w = rng.standard_normal(8)
    np.savetxt(tmp_path / "w.csv", [w / np.linalg.norm(w)], delimiter=",", fmt="%.17g")
    out = {}
    # distinct master seeds keep the two Monte Carlo streams independent
    for sampler, seed in (("direct_tensor", 3), ("equivalent_law", 4)):
        res = run(ExperimentConfig(kind="cov_validate", r=4, n=8, replications=40_000, sampler=sampler,
                                   direction=str(tmp_path / "w.csv"), master_seed=seed))
        out[sampler] = res.records
    d, e = out["direct_tensor"], out["equivalent_law"]
    diff = np.array([abs(a["empirical"] - b["empirical"]) for a, b in zip(d, e)])
    se = np.array([math.hypot(a["se"], b["se"]) for a, b in zip(d, e)])
    assert np.all(diff <= 6 * se)


def test_tv_sweep_records():
    res = run(ExperimentConfig(kind="tv_bound", n=10, tv_gammas="0.05,0.1,0.2"))
    assert [r["gamma"] for r in res.records] == [0.05, 0.1, 0.2]
    for r in res.records:
        assert r["frob_diff"] <= r["frob_bound"] + 1e-8
        assert 0 <= r["tv_lower"] <= r["tv_upper"] <= 1.5


def test_config_file_roundtrip(tmp_path):
    p = tmp_path / "cfg.txt"
    p.write_text("kind = bulk\nn = 30\nreplications = 1\n")
    cfg = ExperimentConfig.from_file(p, workers=None)
    assert cfg.n == 30
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "missing.txt")
