"""Low-rank-plus-GOE representations equal in law to GOTE contractions.

For a pure contraction ``M = G . w^(r-2)`` the matrix

    X = alpha U w w^T + beta (V w^T + w V^T) + theta Z

has the same Gaussian law, with ``U`` scalar, ``V`` a standard vector and ``Z``
a GOE matrix.  For ``r = 4`` and two directions ``u, v`` a four-term analogue
is available.  The rank-2 part ``P = alpha U w w^T + beta (V w^T + w V^T)`` has
a closed-form eigensystem, implemented in ``rank2_eigenstructure``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError
from .tensor_core import check_unit, make_rng

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class PureLawParams:
    r: int
    alpha: float
    beta: float
    theta: float
    varpi: float

    @property
    def beta_prime(self) -> float:
        """Spike strength in units of the noise: beta / theta = sqrt(r - 2)."""
        return self.beta / self.theta

    @property
    def bulk_edge(self) -> float:
        return 2.0 * self.theta


def pure_params(r: int) -> PureLawParams:
    if int(r) != r or r < 3:
        raise DomainError(f"pure representation needs integer r >= 3, got {r}")
    r = int(r)
    alpha = math.sqrt((r - 2) * (r - 3) / (r - 1))
    beta = math.sqrt((r - 2) / (r - 1))
    theta = math.sqrt(1.0 / (r - 1))
    varpi = (math.sqrt(r - 2) + 1.0 / math.sqrt(r - 2)) / math.sqrt(r - 1)
    return PureLawParams(r, alpha, beta, theta, varpi)


@dataclass(frozen=True, eq=False)
class SpikeScalars:
    """Gaussian draws behind a representation sample.

    ``U`` and ``V`` drive the pure case.  For the mixed case ``V`` is ``V1`` and
    ``V2`` is the correlated second vector.
    """

    U: float
    V: np.ndarray
    V2: np.ndarray | None = None


def sample_goe(n: int, seed) -> np.ndarray:
    """GOE matrix: off-diagonal variance 1, diagonal variance 2."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return _goe(make_rng(seed), n)


def _goe(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return (a + a.T) / math.sqrt(2.0)


def pure_from_draws(params: PureLawParams, w, U: float, V, Z) -> np.ndarray:
    """Evaluate ``alpha U w w^T + beta (V w^T + w V^T) + theta Z`` for given draws."""
    w = np.asarray(w, dtype=float)
    V = np.asarray(V, dtype=float)
    wV = np.outer(V, w)
    return params.alpha * U * np.outer(w, w) + params.beta * (wV + wV.T) + params.theta * np.asarray(Z)


def spike_part(params: PureLawParams, scalars: SpikeScalars, w) -> np.ndarray:
    """The rank-2 matrix ``P`` of the pure representation."""
    return pure_from_draws(params, w, scalars.U, scalars.V, 0.0)


def sample_pure_equivalent(r: int, n: int, w, seed) -> tuple[np.ndarray, SpikeScalars]:
    params = pure_params(r)
    w = check_unit(w, n)
    rng = make_rng(seed)
    U = float(rng.standard_normal())
    V = rng.standard_normal(n)
    Z = _goe(rng, n)
    return pure_from_draws(params, w, U, V, Z), SpikeScalars(U, V)


def mixed4_spike_part(u, v, scalars: SpikeScalars) -> np.ndarray:
    """Low-rank part ``Q`` of the mixed representation, scaled by 1/sqrt(6)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    uv = np.outer(u, v)
    a = np.outer(scalars.V, u)
    b = np.outer(scalars.V2, v)
    return (scalars.U * (uv + uv.T) + a + a.T + b + b.T) / math.sqrt(6.0)


def sample_mixed4_equivalent(u, v, seed) -> tuple[np.ndarray, SpikeScalars]:
    """Representation of ``G . u (x) v`` for ``G ~ GOTE(4, n)``."""
    u = check_unit(u, name="u")
    v = check_unit(v, u.shape[0], name="v")
    n = u.shape[0]
    rho = float(np.clip(u @ v, -1.0, 1.0))
    rng = make_rng(seed)
    U = float(rng.standard_normal())
    V1 = rng.standard_normal(n)
    W = rng.standard_normal(n)
    Z = _goe(rng, n)
    V2 = rho * V1 + math.sqrt(1.0 - rho * rho) * W
    scalars = SpikeScalars(U, V1, V2)
    X = mixed4_spike_part(u, v, scalars) + math.sqrt((1.0 + rho * rho) / 6.0) * Z
    return X, scalars


@dataclass(frozen=True)
class Rank2Eigen:
    lambda_plus: float
    lambda_minus: float
    gamma_plus: float
    gamma_minus: float
    delta_plus: float
    delta_minus: float
    s_plus: float
    s_minus: float
    overlap_plus: float
    overlap_minus: float


def rank2_eigenstructure(a: float, b: float, x, y) -> Rank2Eigen:
    """Nonzero eigenpairs of ``B = a x x^T + b (x y^T + y x^T)``.

    The unit eigenvector for ``lambda_pm`` is ``gamma_pm x + delta_pm y``, with the
    sign fixed by ``delta_pm >= 0``.
    """
    x = check_unit(x, name="x")
    y = check_unit(y, x.shape[0], name="y")
    if b == 0:
        raise DomainError("b must be nonzero")
    c = float(x @ y)
    if abs(c) >= 1.0 - DEGENERACY_TOL:
        raise DegeneracyError(f"x and y are numerically dependent (x.y = {c})")
    return _rank2(float(a), float(b), c)


def _rank2(a: float, b: float, c: float) -> Rank2Eigen:
    disc = math.sqrt(a * a + 4 * a * b * c + 4 * b * b)
    lam = ((a + 2 * b * c + disc) / 2, (a + 2 * b * c - disc) / 2)
    sgn = math.copysign(1.0, b)
    tail = b * b * (1 - c * c)
    s = [math.sqrt(l * l + tail) for l in lam]
    return Rank2Eigen(
        lambda_plus=lam[0],
        lambda_minus=lam[1],
        gamma_plus=sgn * (lam[0] - b * c) / s[0],
        gamma_minus=sgn * (lam[1] - b * c) / s[1],
        delta_plus=abs(b) / s[0],
        delta_minus=abs(b) / s[1],
        s_plus=s[0],
        s_minus=s[1],
        overlap_plus=sgn * lam[0] / s[0],
        overlap_minus=sgn * lam[1] / s[1],
    )


def spike_eigenvalues_exact(params: PureLawParams, scalars: SpikeScalars, w) -> tuple[float, float]:
    """Top and bottom eigenvalues of ``P`` from the draws alone."""
    w = np.asarray(w, dtype=float)
    V = np.asarray(scalars.V, dtype=float)
    aU = params.alpha * scalars.U
    wV = float(w @ V)
    VV = float(V @ V)
    root = math.sqrt(max(aU * aU + 4 * aU * params.beta * wV + 4 * params.beta**2 * VV, 0.0))
    mid = aU / 2 + params.beta * wV
    return mid + root / 2, mid - root / 2


# analytic covariances of the representations ---------------------------------


def representation_cov_pure(params: PureLawParams, w, ij, kl) -> float:
    """Cov(X_ij, X_kl) computed term by term from the representation.

    ``alpha^2 w_i w_j w_k w_l + beta^2 (d_ik w_j w_l + d_il w_j w_k + d_jk w_i w_l
    + d_jl w_i w_k) + theta^2 (d_ik d_jl + d_il d_jk)``
    """
    w = np.asarray(w, dtype=float)
    i, j = ij
    k, l = kl
    d = lambda p, q: 1.0 if p == q else 0.0  # noqa: E731
    return (
        params.alpha**2 * w[i] * w[j] * w[k] * w[l]
        + params.beta**2 * (d(i, k) * w[j] * w[l] + d(i, l) * w[j] * w[k] + d(j, k) * w[i] * w[l] + d(j, l) * w[i] * w[k])
        + params.theta**2 * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
    )


def representation_cov_mixed4(u, v, ij, kl) -> float:
    """Cov(X_ij, X_kl) for the mixed representation, from its four Gaussian sources.

    ``X = (1/sqrt 6)[U S + sum_a (V_a d_a^T + d_a V_a^T) + sqrt(1 + rho^2) Z]`` with
    ``d_1 = u``, ``d_2 = v``, ``S = u v^T + v u^T`` and ``Cov(V_a, V_b) = C_ab I``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    rho = float(u @ v)
    i, j = ij
    k, l = kl
    d = lambda p, q: 1.0 if p == q else 0.0  # noqa: E731
    S = lambda p, q: u[p] * v[q] + u[q] * v[p]  # noqa: E731
    dirs = (u, v)
    C = ((1.0, rho), (rho, 1.0))
    spike = S(i, j) * S(k, l)
    lin = 0.0
    for a in range(2):
        for b in range(2):
            da, db = dirs[a], dirs[b]
            # Cov(V_a[i] d_a[j] + d_a[i] V_a[j], V_b[k] d_b[l] + d_b[k] V_b[l])
            lin += C[a][b] * (
                d(i, k) * da[j] * db[l] + d(i, l) * da[j] * db[k] + d(j, k) * da[i] * db[l] + d(j, l) * da[i] * db[k]
            )
    goe = (1.0 + rho * rho) * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
    return (spike + lin + goe) / 6.0
