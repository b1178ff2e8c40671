"""Symmetric tensors stored over sorted multi-indices, GOTE sampling and contractions.

A symmetric order-``r`` tensor in dimension ``n`` has ``C(n+r-1, r)`` free
entries, one per multiset of indices.  Entries are kept in a flat array in the
lexicographic order produced by ``itertools.combinations_with_replacement``;
every lookup canonicalises its index tuple by sorting.

Indices are 0-based in the Python API.  The text serialisation writes them
1-based, matching the usual mathematical notation.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_ENTRY_CAP = 10_000_000
UNIT_NORM_TOL = 1e-12
FORMAT_VERSION = 1


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; draw ``k`` of the stream is fixed by ``seed`` alone."""
    return np.random.Generator(np.random.Philox(seed))


def entry_count(r: int, n: int) -> int:
    return math.comb(n + r - 1, r)


def multiset_perm_count(idx: Sequence[int], n: int | None = None) -> int:
    """Number of distinct orderings of the multiset ``idx``: r! / prod(mult!)."""
    idx = tuple(int(i) for i in idx)
    if n is not None and any(i < 0 or i >= n for i in idx):
        raise DomainError(f"index {idx} out of range for dimension {n}")
    if any(i < 0 for i in idx):
        raise DomainError(f"negative index in {idx}")
    out = math.factorial(len(idx))
    for m in Counter(idx).values():
        out //= math.factorial(m)
    return out


def check_unit(w, n: int | None = None, name: str = "direction") -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise DomainError(f"{name} must be a vector, got shape {w.shape}")
    if n is not None and w.shape[0] != n:
        raise DomainError(f"{name} has length {w.shape[0]}, expected {n}")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise DomainError(f"{name} must be unit-norm within {UNIT_NORM_TOL:g} (norm={norm!r})")
    return w


@lru_cache(maxsize=64)
def _binom_table(N: int, r: int) -> np.ndarray:
    table = np.zeros((N + 1, r + 1), dtype=np.int64)
    for m in range(N + 1):
        for t in range(r + 1):
            table[m, t] = math.comb(m, t)
    return table


def rank_sorted(sorted_idx: np.ndarray, n: int) -> np.ndarray:
    """Lexicographic rank of sorted multi-indices (last axis) among all multisets.

    Shifting ``a_k -> a_k + k`` turns a multiset into a strict combination of
    ``N = n + r - 1`` symbols; its lex rank is ``C(N, r) - 1 - sum_k C(N-1-b_k, r-k)``.
    """
    sorted_idx = np.asarray(sorted_idx, dtype=np.int64)
    r = sorted_idx.shape[-1]
    N = n + r - 1
    table = _binom_table(N, r)
    b = sorted_idx + np.arange(r)
    acc = np.zeros(sorted_idx.shape[:-1], dtype=np.int64)
    for k in range(r):
        acc += table[N - 1 - b[..., k], r - k]
    return table[N, r] - 1 - acc


def rank(idx: Sequence[int], n: int) -> int:
    return int(rank_sorted(np.sort(np.asarray(idx))[None, :], n)[0])


@lru_cache(maxsize=16)
def canonical_indices(r: int, n: int) -> np.ndarray:
    """All sorted multi-indices, shape ``(C(n+r-1, r), r)``, in storage order."""
    arr = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations_with_replacement(range(n), r)),
        dtype=np.int64,
    )
    arr = arr.reshape(-1, r)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=16)
def perm_counts(r: int, n: int) -> np.ndarray:
    """``multiset_perm_count`` for every canonical index, in storage order."""
    idx = canonical_indices(r, n)
    fact = np.array([math.factorial(k) for k in range(r + 1)], dtype=np.int64)
    denom = np.ones(idx.shape[0], dtype=np.int64)
    for m in range(n):
        denom *= fact[(idx == m).sum(axis=1)]
    out = math.factorial(r) // denom
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SymTensor:
    """Symmetric tensor of order ``order`` in dimension ``dim``.

    ``values[k]`` is the entry at ``canonical_indices(order, dim)[k]``.
    """

    order: int
    dim: int
    values: np.ndarray

    def __post_init__(self):
        if self.order < 1 or self.dim < 1:
            raise DomainError(f"need order >= 1 and dim >= 1, got ({self.order}, {self.dim})")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (entry_count(self.order, self.dim),):
            raise DomainError(
                f"expected {entry_count(self.order, self.dim)} canonical entries, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, idx) -> float:
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.order:
            raise DomainError(f"expected {self.order} indices, got {len(idx)}")
        if any(i < 0 or i >= self.dim for i in idx):
            raise DomainError(f"index {idx} out of range for dimension {self.dim}")
        return float(self.values[rank(idx, self.dim)])

    def __add__(self, other: SymTensor) -> SymTensor:
        _check_same_shape(self, other)
        return SymTensor(self.order, self.dim, self.values + other.values)

    def __sub__(self, other: SymTensor) -> SymTensor:
        _check_same_shape(self, other)
        return SymTensor(self.order, self.dim, self.values - other.values)

    def __mul__(self, scalar: float) -> SymTensor:
        return SymTensor(self.order, self.dim, float(scalar) * self.values)

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, r: int, n: int, fn) -> SymTensor:
        """Build from ``fn(sorted_index_tuple) -> float``."""
        vals = [fn(tuple(int(i) for i in row)) for row in canonical_indices(r, n)]
        return cls(r, n, np.asarray(vals, dtype=float))

    def to_dense(self) -> np.ndarray:
        """Full ``n**r`` array; only for small tensors."""
        grid = np.indices((self.dim,) * self.order).reshape(self.order, -1).T
        ranks = rank_sorted(np.sort(grid, axis=1), self.dim)
        return self.values[ranks].reshape((self.dim,) * self.order)

    def frobenius_norm(self) -> float:
        return math.sqrt(frobenius_inner(self, self))


def _check_same_shape(s: SymTensor, t: SymTensor) -> None:
    if s.order != t.order or s.dim != t.dim:
        raise DomainError(f"shape mismatch: ({s.order}, {s.dim}) vs ({t.order}, {t.dim})")


def gote_std(r: int, n: int) -> np.ndarray:
    """Entry standard deviations sqrt(r / #Perm) in storage order."""
    return np.sqrt(r / perm_counts(r, n))


def sample_gote(r: int, n: int, seed, cap: int = DEFAULT_ENTRY_CAP) -> SymTensor:
    """Draw a GOTE(r, n) tensor: independent N(0, r/#Perm) entries over multisets.

    Canonical entry ``k`` is ``sd_k`` times the ``k``-th standard normal draw of
    the Philox stream keyed by ``seed``.
    """
    if r < 2 or n < 1:
        raise DomainError(f"need r >= 2 and n >= 1, got r={r}, n={n}")
    count = entry_count(r, n)
    if count > cap:
        raise CapacityError(
            f"GOTE({r}, {n}) has {count} free entries, above the cap {cap}", required=count, cap=cap
        )
    z = make_rng(seed).standard_normal(count)
    return SymTensor(r, n, z * gote_std(r, n))


def _slot_grid(n: int, slots: int) -> np.ndarray:
    return np.indices((n,) * slots, dtype=np.int64).reshape(slots, -1).T


def _slot_weights(dirs: Sequence[np.ndarray]) -> np.ndarray:
    weight = np.ones(1)
    for d in dirs:
        weight = np.multiply.outer(weight, d).ravel()
    return weight


def _check_dirs(t: SymTensor, dirs) -> list[np.ndarray]:
    dirs = [check_unit(d, t.dim, name=f"direction {k}") for k, d in enumerate(dirs)]
    if len(dirs) != t.order - 2:
        raise DomainError(f"order-{t.order} tensor needs {t.order - 2} directions, got {len(dirs)}")
    return dirs


def _row_ranks(r: int, n: int, i: int, grid: np.ndarray) -> np.ndarray:
    """Canonical ranks of (i, j, *slots) for every j and every slot tuple: shape (n, G)."""
    G = grid.shape[0]
    full = np.empty((n, G, r), dtype=np.int64)
    full[:, :, 0] = i
    full[:, :, 1] = np.arange(n)[:, None]
    full[:, :, 2:] = grid[None, :, :]
    full.sort(axis=2)
    return rank_sorted(full, n)


def contract_mixed(t: SymTensor, dirs: Sequence) -> np.ndarray:
    """M_ij = sum over the last r-2 slots of G_{ij i3..ir} w1_{i3} ... w_{r-2, ir}."""
    dirs = _check_dirs(t, dirs)
    n, r = t.dim, t.order
    grid = _slot_grid(n, r - 2)
    weight = _slot_weights(dirs)
    out = np.empty((n, n))
    for i in range(n):
        out[i] = t.values[_row_ranks(r, n, i, grid)] @ weight
    return out


def contract_pure(t: SymTensor, w) -> np.ndarray:
    """Pure contraction ``G . w^{(r-2)}``."""
    if t.order < 3:
        raise DomainError(f"pure contraction needs order >= 3, got {t.order}")
    w = check_unit(w, t.dim)
    return contract_mixed(t, [w] * (t.order - 2))


def vech_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column of each vech position: (A11, A12, A22, A13, ...) order, i <= j."""
    cols = np.concatenate([np.full(j + 1, j) for j in range(n)])
    rows = np.concatenate([np.arange(j + 1) for j in range(n)])
    return rows, cols


def contraction_operator(r: int, n: int, dirs: Sequence, cap: int = 50_000_000) -> np.ndarray:
    """Dense matrix ``A`` with ``vech(contract_mixed(t, dirs)) == A @ t.values``.

    Lets Monte Carlo code push many tensors through the same contraction at
    once.  Size is ``n(n+1)/2 x C(n+r-1, r)``.
    """
    dirs = [check_unit(d, n, name=f"direction {k}") for k, d in enumerate(dirs)]
    if len(dirs) != r - 2:
        raise DomainError(f"order-{r} contraction needs {r - 2} directions, got {len(dirs)}")
    K = entry_count(r, n)
    rows = n * (n + 1) // 2
    if rows * K > cap:
        raise CapacityError(f"contraction operator needs {rows * K} cells, above {cap}", rows * K, cap)
    grid = _slot_grid(n, r - 2)
    weight = _slot_weights(dirs)
    A = np.zeros((rows, K))
    for i in range(n):
        ranks = _row_ranks(r, n, i, grid)
        for j in range(i, n):
            A[j * (j + 1) // 2 + i] = np.bincount(ranks[j], weights=weight, minlength=K)
    return A


def frobenius_inner(s: SymTensor, t: SymTensor) -> float:
    """Inner product summed over the full index hypercube."""
    _check_same_shape(s, t)
    return float(np.sum(s.values * t.values * perm_counts(s.order, s.dim)))


# serialisation -------------------------------------------------------------


def save_tensor(t: SymTensor, path) -> None:
    path = Path(path)
    lines = [f"format-version: {FORMAT_VERSION}", f"r: {t.order}", f"n: {t.dim}"]
    for row, val in zip(canonical_indices(t.order, t.dim), t.values):
        lines.append(",".join(str(int(i) + 1) for i in row) + f",{val:.17g}")
    path.write_text("\n".join(lines) + "\n")


def load_tensor(path) -> SymTensor:
    path = Path(path)
    header: dict[str, int] = {}
    entries: dict[tuple[int, ...], float] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" in line:
            key, val = (s.strip() for s in line.split(":", 1))
            header[key] = int(val)
            continue
        parts = line.split(",")
        try:
            idx = tuple(sorted(int(p) - 1 for p in parts[:-1]))
            entries[idx] = float(parts[-1])
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: cannot parse {raw!r}") from exc
    for key in ("format-version", "r", "n"):
        if key not in header:
            raise DomainError(f"{path}: missing header field {key!r}")
    if header["format-version"] != FORMAT_VERSION:
        raise DomainError(f"{path}: unsupported format-version {header['format-version']}")
    r, n = header["r"], header["n"]
    vals = np.zeros(entry_count(r, n))
    seen = 0
    for idx, val in entries.items():
        if len(idx) != r or min(idx) < 0 or max(idx) >= n:
            raise DomainError(f"{path}: bad index {tuple(i + 1 for i in idx)} for r={r}, n={n}")
        vals[rank(idx, n)] = val
        seen += 1
    if seen != vals.size:
        raise DomainError(f"{path}: expected {vals.size} canonical entries, found {seen}")
    return SymTensor(r, n, vals)


def save_matrix(m: np.ndarray, path) -> None:
    np.savetxt(path, np.asarray(m, dtype=float), delimiter=",", fmt="%.17g")


def load_matrix(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))


def load_vectors(path) -> list[np.ndarray]:
    """One vector per CSV row."""
    arr = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return [row.copy() for row in arr]


def unit_vector(n: int, spec: str | Iterable[float], seed=None) -> np.ndarray:
    """Resolve a direction spec: ``e<k>`` (1-based), ``ones``, ``uniform`` or a CSV path."""
    if not isinstance(spec, str):
        return check_unit(np.asarray(list(spec), dtype=float), n)
    s = spec.strip()
    if s.startswith("e") and s[1:].isdigit():
        k = int(s[1:])
        if not 1 <= k <= n:
            raise DomainError(f"basis vector {s} out of range for n={n}")
        w = np.zeros(n)
        w[k - 1] = 1.0
        return w
    if s == "ones":
        return np.full(n, 1.0 / math.sqrt(n))
    if s in ("uniform", "uniform-random", "random"):
        if seed is None:
            raise DomainError("a uniform-random direction needs a seed")
        g = make_rng(seed).standard_normal(n)
        return g / np.linalg.norm(g)
    p = Path(s)
    if p.exists():
        w = np.loadtxt(p, delimiter=",", dtype=float).ravel()
        return check_unit(w, n, name=str(p))
    raise DomainError(f"unrecognised direction spec {spec!r}")
