import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gote.cov_oracle import (
    CovModel,
    IndexPairClass,
    assemble_sigma,
    classify,
    cov_mixed4,
    cov_pure,
    elimination_matrix,
    export_sigma,
    frob_diff,
    frob_diff_bound,
    tv_bound,
    unvech,
    vech,
)
from gote.errors import CapacityError, DomainError
from gote.law_equiv import pure_params, representation_cov_mixed4, representation_cov_pure
from gote.tensor_core import contraction_operator, load_matrix, perm_counts

from .conftest import random_unit, unit_vectors

C = IndexPairClass


def brute_class(ij, kl):
    """Classification by counting, independent of the vectorised dispatcher."""
    a, b = sorted(ij), sorted(kl)
    da, db = a[0] == a[1], b[0] == b[1]
    if a == b:
        return C.VAR_DIAG if da else C.VAR_OFFDIAG
    shared = len(set(a) & set(b))
    if da and db:
        return C.DIAG_VS_DIAG
    if da or db:
        return C.DIAG_VS_SHARED if shared else C.DIAG_VS_DISJOINT
    return C.SHARED_ROW if shared else C.DISJOINT_OFFDIAG


def test_classification_exhaustive_against_brute_force():
    n = 5
    seen = set()
    for i, j, k, l in itertools.product(range(n), repeat=4):
        got = classify((i, j), (k, l))
        assert got == brute_class((i, j), (k, l))
        assert classify((k, l), (i, j)) == got
        seen.add(got)
    assert seen == set(C)


@pytest.mark.parametrize("r", range(3, 9))
def test_oracle_equals_representation_all_pairs(r, rng):
    n = 5
    p = pure_params(r)
    for _ in range(3):
        w = random_unit(rng, n)
        for i, j, k, l in itertools.product(range(n), repeat=4):
            assert abs(cov_pure(r, w, (i, j), (k, l)) - representation_cov_pure(p, w, (i, j), (k, l))) < 1e-12


def test_mixed_oracle_equals_representation_all_pairs(rng):
    n = 5
    for _ in range(5):
        u, v = random_unit(rng, n), random_unit(rng, n)
        for i, j, k, l in itertools.product(range(n), repeat=4):
            assert abs(cov_mixed4(u, v, (i, j), (k, l)) - representation_cov_mixed4(u, v, (i, j), (k, l))) < 1e-12


def _tensor_sigma(r, dirs):
    """Exact Cov(vech M) of the true contraction: A diag(r/#Perm) A^T."""
    n = dirs[0].shape[0]
    A = contraction_operator(r, n, dirs)
    return (A * (r / perm_counts(r, n))) @ A.T


@pytest.mark.parametrize("r", [3, 4, 5, 6])
def test_pure_oracle_equals_true_tensor_covariance(r, rng):
    w = random_unit(rng, 4)
    np.testing.assert_allclose(assemble_sigma(CovModel.pure(r, w)), _tensor_sigma(r, [w] * (r - 2)), atol=1e-12)


def test_mixed_oracle_equals_true_tensor_covariance(rng):
    for _ in range(3):
        u, v = random_unit(rng, 5), random_unit(rng, 5)
        np.testing.assert_allclose(assemble_sigma(CovModel.mixed4(u, v)), _tensor_sigma(4, [u, v]), atol=1e-12)


@given(unit_vectors(6))
def test_mixed_reduces_to_pure(u):
    for i, j, k, l in itertools.product(range(6), repeat=4):
        assert abs(cov_mixed4(u, u, (i, j), (k, l)) - cov_pure(4, u, (i, j), (k, l))) < 1e-12


def test_pure_examples():
    e1 = np.eye(5)[0]
    assert cov_pure(4, e1, (0, 0), (0, 0)) == pytest.approx(4)
    assert cov_pure(4, e1, (1, 2), (1, 2)) == pytest.approx(1 / 3)
    # off-w diagonal: 2/(r-1)
    assert cov_pure(4, e1, (2, 2), (2, 2)) == pytest.approx(2 / 3)


def test_pure_disjoint_example(rng):
    w = random_unit(rng, 6)
    p = pure_params(5)
    assert cov_pure(5, w, (0, 1), (2, 3)) == pytest.approx(p.alpha**2 * w[0] * w[1] * w[2] * w[3], abs=1e-15)


def test_mixed_examples():
    e = np.eye(5)
    assert cov_mixed4(e[0], e[1], (2, 3), (2, 3)) == pytest.approx(1 / 6)
    assert cov_mixed4(e[0], e[0], (0, 0), (0, 0)) == pytest.approx(4)


def test_index_validation():
    with pytest.raises(DomainError):
        cov_pure(4, np.eye(3)[0], (0, 3), (0, 0))


# vech and elimination matrix -------------------------------------------------------


def test_vech_order():
    a = np.arange(9.0).reshape(3, 3)
    a = a + a.T
    assert vech(a).tolist() == [a[0, 0], a[0, 1], a[1, 1], a[0, 2], a[1, 2], a[2, 2]]
    np.testing.assert_array_equal(unvech(vech(a)), a)


@given(st.integers(1, 9), st.integers(0, 2**31))
def test_elimination_matrix(n, seed):
    L = elimination_matrix(n)
    np.testing.assert_array_equal(L @ L.T, np.eye(n * (n + 1) // 2))
    a = np.random.default_rng(seed).standard_normal((n, n))
    a = a + a.T
    np.testing.assert_array_equal(L @ a.flatten(order="F"), vech(a))


# assembled Sigma ------------------------------------------------------------------------


def test_sigma_symmetric_psd(rng):
    for model in (CovModel.pure(5, random_unit(rng, 7)), CovModel.mixed4(random_unit(rng, 7), random_unit(rng, 7))):
        s = assemble_sigma(model)
        np.testing.assert_array_equal(s, s.T)
        assert np.linalg.eigvalsh(s)[0] >= -1e-8


def test_sigma_uu_spectrum_sandwich(rng):
    for _ in range(50):
        u = random_unit(rng, 8)
        ev = np.linalg.eigvalsh(assemble_sigma(CovModel.mixed4(u, u)))
        assert ev[0] >= 1 / 3 - 1e-8 and ev[-1] <= 4 + 1e-8


def test_sigma_e1_spectrum():
    e1 = np.eye(6)[0]
    ev = np.linalg.eigvalsh(assemble_sigma(CovModel.mixed4(e1, e1)))
    assert ev[0] >= 1 / 3 - 1e-12 and ev[-1] <= 4 + 1e-12


def test_sigma_capacity():
    with pytest.raises(CapacityError):
        assemble_sigma(CovModel.pure(4, np.eye(10)[0]), cap=20)


def test_pure_requires_r3():
    with pytest.raises(DomainError):
        CovModel.pure(2, np.eye(3)[0])


# Frobenius and TV bounds ----------------------------------------------------------------------


def test_frob_zero_at_equal(rng):
    u = random_unit(rng, 6)
    assert frob_diff(u, u) == 0
    assert frob_diff_bound(u, u) == 0
    assert tuple(tv_bound(u, u)) == (0.0, 0.0)


def test_frob_bound_random_pairs(rng):
    for _ in range(100):
        u, v = random_unit(rng, 10), random_unit(rng, 10)
        assert frob_diff(u, v) <= frob_diff_bound(u, v) + 1e-8


def test_frob_gamma_family():
    n = 20
    e1, e2 = np.eye(n)[0], np.eye(n)[1]
    for g in (0.05, 0.1, 0.2):
        v = math.sqrt(1 - g * g) * e1 + g * e2
        ratio = frob_diff(e1, v) / (g * n)
        assert 0.05 <= ratio <= 5
        assert frob_diff(e1, v) <= frob_diff_bound(e1, v)


def test_frob_bound_monotone_along_geodesic(rng):
    u = random_unit(rng, 5)
    q = random_unit(rng, 5)
    q -= (q @ u) * u
    q /= np.linalg.norm(q)
    bounds = [frob_diff_bound(u, math.cos(t) * u + math.sin(t) * q) for t in np.linspace(0, math.pi, 20)]
    assert all(a <= b + 1e-12 for a, b in zip(bounds, bounds[1:]))


def test_tv_saturates_for_orthogonal_basis_vectors():
    e = np.eye(15)
    tb = tv_bound(e[0], e[1])
    assert tb.delta >= 1
    assert (tb.lower, tb.upper) == (0.01, 1.5)


def test_tv_upper_vs_frobenius_chain(rng):
    for _ in range(10):
        u, v = random_unit(rng, 6), random_unit(rng, 6)
        u_near = u
        v_near = u + 0.01 * v
        v_near /= np.linalg.norm(v_near)
        tb = tv_bound(u_near, v_near)
        assert tb.upper <= 1.5 * 3 * frob_diff_bound(u_near, v_near) + 1e-12
        assert tb.delta <= 3 * frob_diff(u_near, v_near) + 1e-10


def test_export_sigma(tmp_path, rng):
    s = assemble_sigma(CovModel.mixed4(random_unit(rng, 4), random_unit(rng, 4)))
    export_sigma(s, tmp_path / "s.csv")
    np.testing.assert_array_equal(load_matrix(tmp_path / "s.csv"), s)
