import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gote.errors import CapacityError, DomainError
from gote.tensor_core import (
    SymTensor,
    canonical_indices,
    contract_mixed,
    contract_pure,
    contraction_operator,
    entry_count,
    frobenius_inner,
    load_matrix,
    load_tensor,
    multiset_perm_count,
    perm_counts,
    rank,
    sample_gote,
    save_matrix,
    save_tensor,
    unit_vector,
    vech_pairs,
)

from .conftest import random_unit


# indexing -----------------------------------------------------------------


@pytest.mark.parametrize("idx, expected", [((0, 0, 0, 0), 1), ((0, 0, 1, 2), 12), ((0, 1, 2, 3), 24)])
def test_multiset_perm_count_examples(idx, expected):
    assert multiset_perm_count(idx) == expected


def test_multiset_perm_count_rejects_out_of_range():
    with pytest.raises(DomainError):
        multiset_perm_count((0, 5), n=3)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=6))
def test_multiset_perm_count_matches_enumeration(idx):
    assert multiset_perm_count(idx) == len(set(itertools.permutations(idx)))


@pytest.mark.parametrize("r, n", [(1, 4), (2, 3), (3, 5), (4, 4), (5, 3), (6, 2)])
def test_rank_matches_enumeration_order(r, n):
    ci = canonical_indices(r, n)
    expected = list(itertools.combinations_with_replacement(range(n), r))
    assert [tuple(row) for row in ci] == expected
    assert ci.shape[0] == entry_count(r, n) == math.comb(n + r - 1, r)
    for k, row in enumerate(expected):
        assert rank(row, n) == k


@pytest.mark.parametrize("r, n", [(2, 4), (4, 3), (5, 2)])
def test_perm_counts_match_scalar_version(r, n):
    got = perm_counts(r, n)
    want = [multiset_perm_count(row) for row in canonical_indices(r, n)]
    assert got.tolist() == want
    # sum of #Perm over multisets counts all ordered tuples
    assert got.sum() == n**r


def test_symmetric_lookup_1000_random_permutations(rng):
    t = sample_gote(5, 6, seed=7)
    for _ in range(1000):
        idx = rng.integers(0, 6, size=5)
        perm = rng.permutation(idx)
        assert t[tuple(perm)] == t[tuple(idx)] == t[tuple(sorted(idx))]


def test_dense_roundtrip_is_symmetric():
    t = sample_gote(3, 4, seed=1)
    d = t.to_dense()
    for p in itertools.permutations(range(3)):
        np.testing.assert_array_equal(d, d.transpose(p))


# sampling -----------------------------------------------------------------


def test_sample_deterministic_and_seed_sensitive():
    a, b, c = sample_gote(4, 3, 11), sample_gote(4, 3, 11), sample_gote(4, 3, 12)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_sample_layout_independent():
    # entry k is draw k of the stream, whatever the dimension
    from gote.tensor_core import gote_std, make_rng

    t = sample_gote(4, 3, 5)
    z = make_rng(5).standard_normal(t.values.size)
    np.testing.assert_array_equal(t.values, z * gote_std(4, 3))


def test_capacity_error_reports_required():
    with pytest.raises(CapacityError) as exc:
        sample_gote(6, 40, seed=0, cap=1000)
    assert exc.value.required == entry_count(6, 40)


def test_r2_variances_are_goe():
    vals = np.array([sample_gote(2, 3, s).values for s in range(20000)])
    var = vals.var(axis=0)
    diag = [rank((i, i), 3) for i in range(3)]
    off = [k for k in range(vals.shape[1]) if k not in diag]
    se2 = np.sqrt(2 / 20000) * 2
    assert np.all(np.abs(var[diag] - 2) < 4 * se2)
    assert np.all(np.abs(var[off] - 1) < 4 * np.sqrt(2 / 20000))


def test_r4_n2_variance_profile():
    np.testing.assert_allclose(4 / perm_counts(4, 2), [4, 1, 2 / 3, 1, 4])


@pytest.mark.slow
def test_sampler_law_1e5_seeds():
    N = 100_000
    vals = np.array([sample_gote(4, 4, s).values for s in range(N)])
    truth = 4 / perm_counts(4, 4)
    var = (vals**2).mean(axis=0)
    se = np.sqrt(((vals**2 - var) ** 2).mean(axis=0) / N)
    assert np.all(np.abs(var - truth) <= 4 * se)
    # G_1234 in particular
    k = rank((0, 1, 2, 3), 4)
    assert abs(var[k] - 1 / 6) <= 4 * se[k]
    # a few pairwise correlations
    c = np.corrcoef(vals[:, :8].T)
    off = c[np.triu_indices(8, 1)]
    assert np.all(np.abs(off) <= 4 / np.sqrt(N))


# contractions --------------------------------------------------------------


def test_pure_e1_selects_entries():
    t = sample_gote(4, 5, 3)
    m = contract_pure(t, np.eye(5)[0])
    for i, j in itertools.product(range(5), repeat=2):
        assert m[i, j] == t[i, j, 0, 0]


def test_mixed_e1_e2_selects_entries():
    t = sample_gote(4, 4, 3)
    m = contract_mixed(t, [np.eye(4)[0], np.eye(4)[1]])
    for i, j in itertools.product(range(4), repeat=2):
        assert m[i, j] == t[i, j, 0, 1]


def test_all_ones_r3(rng):
    n = 4
    t = SymTensor(3, n, np.ones(entry_count(3, n)))
    w = random_unit(rng, n)
    np.testing.assert_allclose(contract_pure(t, w), np.full((n, n), w.sum()), atol=1e-14)


def test_contraction_against_dense_einsum(rng):
    t = sample_gote(5, 4, 9)
    dirs = [random_unit(rng, 4) for _ in range(3)]
    want = np.einsum("ijabc,a,b,c->ij", t.to_dense(), *dirs)
    got = contract_mixed(t, dirs)
    np.testing.assert_allclose(got, want, atol=1e-12)
    np.testing.assert_array_equal(got, got.T)


def test_pure_equals_repeated_mixed(rng):
    t = sample_gote(5, 4, 2)
    w = random_unit(rng, 4)
    np.testing.assert_array_equal(contract_pure(t, w), contract_mixed(t, [w, w, w]))


def test_mixed_slot_permutation_invariance(rng):
    t = sample_gote(5, 3, 4)
    dirs = [random_unit(rng, 3) for _ in range(3)]
    base = contract_mixed(t, dirs)
    for p in itertools.permutations(range(3)):
        np.testing.assert_allclose(contract_mixed(t, [dirs[k] for k in p]), base, atol=1e-13)


def test_contract_errors(rng):
    t = sample_gote(4, 3, 0)
    with pytest.raises(DomainError):
        contract_mixed(t, [np.eye(3)[0]])
    with pytest.raises(DomainError):
        contract_pure(t, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(DomainError):
        contract_pure(t, np.eye(4)[0])
    with pytest.raises(DomainError):
        contract_pure(sample_gote(2, 3, 0), np.eye(3)[0])


def test_unit_norm_tolerance_is_strict():
    t = sample_gote(3, 2, 0)
    w = np.array([1.0 + 1e-9, 0.0])
    with pytest.raises(DomainError):
        contract_pure(t, w)


@given(st.integers(0, 10**6), st.floats(-3, 3), st.floats(-3, 3))
def test_bilinearity(seed, a, b):
    rng = np.random.default_rng(seed)
    s, t = sample_gote(4, 4, seed), sample_gote(4, 4, seed + 1)
    w = random_unit(rng, 4)
    lhs = contract_pure(s * a + t * b, w)
    rhs = a * contract_pure(s, w) + b * contract_pure(t, w)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * (1 + np.abs(rhs).max()))


@given(st.integers(0, 10**6))
def test_contraction_is_1_lipschitz(seed):
    rng = np.random.default_rng(seed)
    s, t = sample_gote(4, 5, seed), sample_gote(4, 5, seed + 7)
    dirs = [random_unit(rng, 5), random_unit(rng, 5)]
    diff = np.linalg.norm(contract_mixed(s, dirs) - contract_mixed(t, dirs))
    assert diff <= (s - t).frobenius_norm() + 1e-12


def test_contraction_operator_matches(rng):
    dirs = [random_unit(rng, 5), random_unit(rng, 5)]
    A = contraction_operator(4, 5, dirs)
    rows, cols = vech_pairs(5)
    for seed in range(3):
        t = sample_gote(4, 5, seed)
        np.testing.assert_allclose(A @ t.values, contract_mixed(t, dirs)[rows, cols], atol=1e-13)


def test_mixed_var_m34_orthogonal_dirs_mc():
    # Var(M_34) for u = e1, v = e2 is 1/6: it reads off G_{3412}
    N = 100_000
    A = contraction_operator(4, 4, [np.eye(4)[0], np.eye(4)[1]])
    rows, cols = vech_pairs(4)
    a = int(np.flatnonzero((rows == 2) & (cols == 3))[0])
    x = np.array([A[a] @ sample_gote(4, 4, s).values for s in range(N)])
    var = (x**2).mean()
    se = np.sqrt(((x**2 - var) ** 2).mean() / N)
    assert abs(var - 1 / 6) <= 4 * se


# Frobenius inner product ------------------------------------------------------


def test_frobenius_identity_r2():
    eye = SymTensor.from_function(2, 3, lambda idx: 1.0 if idx[0] == idx[1] else 0.0)
    assert frobenius_inner(eye, eye) == 3


def test_frobenius_all_ones_r3_n2():
    t = SymTensor(3, 2, np.ones(entry_count(3, 2)))
    assert frobenius_inner(t, t) == 8


@given(st.integers(0, 10**6))
def test_frobenius_symmetric_and_matches_dense(seed):
    s, t = sample_gote(3, 4, seed), sample_gote(3, 4, seed + 1)
    assert frobenius_inner(s, t) == pytest.approx(frobenius_inner(t, s), rel=1e-14)
    assert frobenius_inner(s, t) == pytest.approx(float(np.sum(s.to_dense() * t.to_dense())), rel=1e-12)


def test_frobenius_shape_mismatch():
    with pytest.raises(DomainError):
        frobenius_inner(sample_gote(3, 2, 0), sample_gote(3, 3, 0))


# serialisation ------------------------------------------------------------------


def test_tensor_roundtrip(tmp_path):
    t = sample_gote(4, 3, 8)
    p = tmp_path / "t.txt"
    save_tensor(t, p)
    text = p.read_text().splitlines()
    assert text[:3] == ["format-version: 1", "r: 4", "n: 3"]
    assert text[3].startswith("1,1,1,1,")
    np.testing.assert_array_equal(load_tensor(p).values, t.values)


def test_tensor_load_accepts_permuted_lines(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("format-version: 1\nr: 2\nn: 2\n1,1,1.5\n2,1,-2\n2,2,3\n")
    t = load_tensor(p)
    assert t[0, 1] == -2 and t[1, 0] == -2


def test_tensor_load_missing_entries(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("format-version: 1\nr: 2\nn: 2\n1,1,1.5\n")
    with pytest.raises(DomainError):
        load_tensor(p)


def test_matrix_roundtrip(tmp_path, rng):
    m = rng.standard_normal((4, 4))
    m = m + m.T
    save_matrix(m, tmp_path / "m.csv")
    np.testing.assert_array_equal(load_matrix(tmp_path / "m.csv"), m)


def test_unit_vector_specs(tmp_path):
    np.testing.assert_array_equal(unit_vector(3, "e2"), [0, 1, 0])
    assert np.linalg.norm(unit_vector(5, "uniform", seed=1)) == pytest.approx(1)
    np.savetxt(tmp_path / "w.csv", [[0.6, 0.8]], delimiter=",")
    np.testing.assert_allclose(unit_vector(2, str(tmp_path / "w.csv")), [0.6, 0.8])
    with pytest.raises(DomainError):
        unit_vector(3, "e4")
