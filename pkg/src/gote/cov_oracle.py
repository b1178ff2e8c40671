"""Closed-form covariances of contraction entries and the assembled vech covariance.

Every pair of entries ``(M_ij, M_kl)`` falls into one of seven overlap patterns.
Each pattern has its own formula, for the pure contraction of any order ``r >= 3``
and for the mixed ``r = 4`` contraction ``G . u (x) v``.  Indices are 0-based.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError, NumericError
from .law_equiv import pure_params
from .tensor_core import check_unit, save_matrix, vech_pairs

DEFAULT_ROW_CAP = 20_000
PSD_TOL = 1e-8
EIG_FLOOR = 1e-10


class IndexPairClass(enum.IntEnum):
    VAR_DIAG = 0  # (ii, ii)
    VAR_OFFDIAG = 1  # (ij, ij)
    DISJOINT_OFFDIAG = 2  # (ij, kl)
    DIAG_VS_DISJOINT = 3  # (ii, kl)
    DIAG_VS_DIAG = 4  # (ii, kk)
    SHARED_ROW = 5  # (ij, il)
    DIAG_VS_SHARED = 6  # (ii, il)

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


def _canonical(i, j, k, l):
    """Classify pairs and reorder to the representative pattern of each class.

    Returns ``(cls, p, q, s, t)`` so that the class formula reads off
    ``(M_pq, M_st)`` with any shared index in positions ``p`` and ``s``
    and any diagonal pair first.
    """
    i, j, k, l = (np.asarray(a, dtype=np.int64) for a in (i, j, k, l))
    i, j = np.minimum(i, j), np.maximum(i, j)
    k, l = np.minimum(k, l), np.maximum(k, l)
    # put a diagonal pair first
    swap = (k == l) & (i != j)
    i, j, k, l = (np.where(swap, k, i), np.where(swap, l, j), np.where(swap, i, k), np.where(swap, j, l))
    d1, d2 = i == j, k == l
    same = (i == k) & (j == l)

    # shared index of two distinct pairs, moved to the front of each pair
    ik, il, jk, jl = i == k, i == l, j == k, j == l
    shares = (ik | il | jk | jl) & ~same
    sh = np.where(ik | il, i, j)
    q = np.where(ik | il, j, i)
    t = np.where(ik | jk, l, k)

    cls = np.full(i.shape, int(IndexPairClass.DISJOINT_OFFDIAG), dtype=np.int64)
    cls = np.where(d1 & d2 & same, IndexPairClass.VAR_DIAG, cls)
    cls = np.where(d1 & d2 & ~same, IndexPairClass.DIAG_VS_DIAG, cls)
    cls = np.where(d1 & ~d2 & shares, IndexPairClass.DIAG_VS_SHARED, cls)
    cls = np.where(d1 & ~d2 & ~shares, IndexPairClass.DIAG_VS_DISJOINT, cls)
    cls = np.where(~d1 & same, IndexPairClass.VAR_OFFDIAG, cls)
    cls = np.where(~d1 & ~d2 & shares, IndexPairClass.SHARED_ROW, cls)

    use_shared = shares & ~(d1 & d2)
    p = np.where(use_shared, sh, i)
    q = np.where(use_shared, q, j)
    s = np.where(use_shared, sh, k)
    t = np.where(use_shared, t, l)
    return cls, p, q, s, t


def classify(ij, kl) -> IndexPairClass:
    """Overlap pattern of the unordered pairs ``ij`` and ``kl``."""
    cls, *_ = _canonical(ij[0], ij[1], kl[0], kl[1])
    return IndexPairClass(int(cls))


def _cov_pure_arrays(r: int, w: np.ndarray, i, j, k, l) -> np.ndarray:
    prm = pure_params(r)
    a2, b2, t2 = prm.alpha**2, prm.beta**2, prm.theta**2
    cls, p, q, s, t = _canonical(i, j, k, l)
    wp, wq, ws, wt = w[p], w[q], w[s], w[t]
    C = IndexPairClass
    return np.select(
        [cls == C.VAR_DIAG, cls == C.VAR_OFFDIAG, cls == C.DISJOINT_OFFDIAG, cls == C.DIAG_VS_DISJOINT,
         cls == C.DIAG_VS_DIAG, cls == C.SHARED_ROW, cls == C.DIAG_VS_SHARED],
        [
            2 * t2 + 4 * b2 * wp**2 + a2 * wp**4,
            t2 + b2 * (wp**2 + wq**2) + a2 * wp**2 * wq**2,
            a2 * wp * wq * ws * wt,
            a2 * wp**2 * ws * wt,
            a2 * wp**2 * ws**2,
            b2 * wq * wt + a2 * wp**2 * wq * wt,
            2 * b2 * wp * wt + a2 * wp**3 * wt,
        ],
    )


def _cov_mixed4_arrays(u: np.ndarray, v: np.ndarray, i, j, k, l) -> np.ndarray:
    rho = float(u @ v)
    cls, p, q, s, t = _canonical(i, j, k, l)
    up, uq, us, ut = u[p], u[q], u[s], u[t]
    vp, vq, vs, vt = v[p], v[q], v[s], v[t]
    sym_pq = up * vq + uq * vp
    sym_st = us * vt + ut * vs
    sym_pt = up * vt + ut * vp
    C = IndexPairClass
    return np.select(
        [cls == C.VAR_DIAG, cls == C.VAR_OFFDIAG, cls == C.DISJOINT_OFFDIAG, cls == C.DIAG_VS_DISJOINT,
         cls == C.DIAG_VS_DIAG, cls == C.SHARED_ROW, cls == C.DIAG_VS_SHARED],
        [
            (1 + rho**2) / 3 + 4 / 3 * rho * up * vp + 2 / 3 * (up**2 + vp**2) + 2 / 3 * up**2 * vp**2,
            (1 + rho**2) / 6 + rho / 3 * (up * vp + uq * vq) + (up**2 + uq**2 + vp**2 + vq**2) / 6 + sym_pq**2 / 6,
            sym_pq * sym_st / 6,
            up * vp * sym_st / 3,
            2 / 3 * up * vp * us * vs,
            (uq * ut + vq * vt + rho * (uq * vt + ut * vq)) / 6 + sym_pq * sym_pt / 6,
            (up * ut + vp * vt) / 3 + rho / 3 * sym_pt + up * vp * sym_pt / 3,
        ],
    )


def _check_pairs(n: int, *pairs) -> None:
    for pr in pairs:
        if len(pr) != 2 or any(not 0 <= int(x) < n for x in pr):
            raise DomainError(f"index pair {tuple(pr)} invalid for n={n}")


def cov_pure(r: int, w, ij, kl) -> float:
    """Cov(M_ij, M_kl) for ``M = G . w^(r-2)``, ``G ~ GOTE(r, n)``."""
    w = check_unit(w)
    _check_pairs(w.shape[0], ij, kl)
    return float(_cov_pure_arrays(r, w, ij[0], ij[1], kl[0], kl[1]))


def cov_mixed4(u, v, ij, kl) -> float:
    """Cov(M_ij, M_kl) for ``M = G . u (x) v``, ``G ~ GOTE(4, n)``."""
    u = check_unit(u, name="u")
    v = check_unit(v, u.shape[0], name="v")
    _check_pairs(u.shape[0], ij, kl)
    return float(_cov_mixed4_arrays(u, v, ij[0], ij[1], kl[0], kl[1]))


# vech ------------------------------------------------------------------------


def vech(a: np.ndarray) -> np.ndarray:
    """Half-vectorisation in the order (A11, A12, A22, A13, A23, A33, ...)."""
    a = np.asarray(a)
    rows, cols = vech_pairs(a.shape[0])
    return a[..., rows, cols] if a.ndim > 2 else a[rows, cols]


def unvech(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = int(round((math.sqrt(8 * x.size + 1) - 1) / 2))
    if n * (n + 1) // 2 != x.size:
        raise DomainError(f"length {x.size} is not triangular")
    rows, cols = vech_pairs(n)
    a = np.zeros((n, n))
    a[rows, cols] = x
    a[cols, rows] = x
    return a


def elimination_matrix(n: int) -> np.ndarray:
    """0/1 matrix ``L`` with ``vech(A) = L vec(A)``, ``vec`` stacking columns."""
    rows, cols = vech_pairs(n)
    L = np.zeros((rows.size, n * n))
    L[np.arange(rows.size), rows + cols * n] = 1.0
    return L


# assembled covariance ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CovModel:
    """Covariance of ``vech`` of a pure (any r >= 3) or mixed (r = 4) contraction."""

    mode: str
    n: int
    r: int = 4
    w: np.ndarray | None = None
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def __post_init__(self):
        if self.mode == "pure":
            pure_params(self.r)
            object.__setattr__(self, "w", check_unit(self.w, self.n, "w"))
        elif self.mode == "mixed4":
            object.__setattr__(self, "r", 4)
            object.__setattr__(self, "u", check_unit(self.u, self.n, "u"))
            object.__setattr__(self, "v", check_unit(self.v, self.n, "v"))
        else:
            raise DomainError(f"mode must be 'pure' or 'mixed4', got {self.mode!r}")

    @classmethod
    def pure(cls, r: int, w) -> CovModel:
        w = np.asarray(w, dtype=float)
        return cls("pure", w.shape[0], r=r, w=w)

    @classmethod
    def mixed4(cls, u, v) -> CovModel:
        u = np.asarray(u, dtype=float)
        return cls("mixed4", u.shape[0], u=u, v=v)

    def cov(self, ij, kl):
        """Vectorised over array-valued index pairs."""
        i, j = ij
        k, l = kl
        if self.mode == "pure":
            return _cov_pure_arrays(self.r, self.w, i, j, k, l)
        return _cov_mixed4_arrays(self.u, self.v, i, j, k, l)


def assemble_sigma(model: CovModel, cap: int = DEFAULT_ROW_CAP) -> np.ndarray:
    """Dense ``Cov(vech(M))`` in vech order."""
    m = model.n * (model.n + 1) // 2
    if m > cap:
        raise CapacityError(f"Sigma would have {m} rows, above the cap {cap}", required=m, cap=cap)
    rows, cols = vech_pairs(model.n)
    sigma = np.empty((m, m))
    block = max(1, 2_000_000 // max(m, 1))
    for start in range(0, m, block):
        sl = slice(start, min(m, start + block))
        sigma[sl] = model.cov((rows[sl, None], cols[sl, None]), (rows[None, :], cols[None, :]))
    # the class formulas are symmetric; averaging removes rounding asymmetry
    return (sigma + sigma.T) / 2


def frob_diff(u, v, cap: int = DEFAULT_ROW_CAP) -> float:
    """``||Sigma_{u,v} - Sigma_{u,u}||_F`` from assembled matrices."""
    s_uv = assemble_sigma(CovModel.mixed4(u, v), cap)
    s_uu = assemble_sigma(CovModel.mixed4(u, u), cap)
    return float(np.linalg.norm(s_uv - s_uu))


def frob_diff_bound(u, v) -> float:
    u = check_unit(u, name="u")
    v = check_unit(v, u.shape[0], name="v")
    return 5.0 * u.shape[0] * float(np.linalg.norm(u - v))


def inv_sqrt_psd(s: np.ndarray, floor: float = EIG_FLOOR) -> np.ndarray:
    """Symmetric inverse square root; eigenvalues below ``floor`` are raised to it."""
    vals, vecs = np.linalg.eigh(s)
    if vals[0] < -PSD_TOL:
        raise NumericError(f"matrix is not PSD: min eigenvalue {vals[0]:.3e}")
    vals = np.maximum(vals, floor)
    return (vecs / np.sqrt(vals)) @ vecs.T


def whitened_distance(s_ref: np.ndarray, s_other: np.ndarray) -> float:
    """``||S_ref^{-1/2} S_other S_ref^{-1/2} - I||_F``."""
    for s in (s_ref, s_other):
        if np.linalg.eigvalsh(s)[0] < -PSD_TOL:
            raise NumericError("covariance is not PSD")
    if np.array_equal(s_ref, s_other):
        return 0.0
    h = inv_sqrt_psd(s_ref)
    return float(np.linalg.norm(h @ s_other @ h - np.eye(s_ref.shape[0])))


@dataclass(frozen=True)
class TVBound:
    lower: float
    upper: float
    delta: float

    def __iter__(self):
        return iter((self.lower, self.upper))


def tv_bound(u, v, cap: int = DEFAULT_ROW_CAP) -> TVBound:
    """Two-sided bound on d_TV(N(0, Sigma_{u,u}), N(0, Sigma_{u,v})).

    Unpacks as ``(lower, upper)``; ``delta`` is the whitened Frobenius distance.
    """
    s_uu = assemble_sigma(CovModel.mixed4(u, u), cap)
    s_uv = assemble_sigma(CovModel.mixed4(u, v), cap)
    delta = whitened_distance(s_uu, s_uv)
    m = min(1.0, delta)
    return TVBound(m / 100.0, 1.5 * m, delta)


def export_sigma(sigma: np.ndarray, path) -> None:
    save_matrix(sigma, path)
