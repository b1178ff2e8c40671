"""Eigendecomposition, spectral measures, semicircle analytics and Stieltjes transforms.

The directional limit of a pure contraction is handled on the unit-noise scale
``M' = M / (theta sqrt n)``, where the spike strength is ``beta' = sqrt(r - 2)``
and the outliers sit at ``+-(beta' + 1/beta')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, PoleError
from .law_equiv import pure_params
from .tensor_core import check_unit

SYM_TOL = 1e-12
POLE_WINDOW = 1e-6
QUAD_TOL = 1e-8


# eigendecomposition ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues in descending order; ``eigenvectors[:, i]`` pairs with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the first entry above 1e-12 in absolute value positive in every column."""
    big = np.abs(vecs) > 1e-12
    first = np.argmax(big, axis=0)
    signs = np.sign(vecs[first, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def eigh(m) -> EigenSystem:
    """Full symmetric eigendecomposition, descending, with a fixed sign convention."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.T).max(initial=0.0) > SYM_TOL * scale:
        raise DomainError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(m)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    return EigenSystem(vals.copy(), _fix_signs(vecs))


def eigvals_desc(m) -> np.ndarray:
    return np.linalg.eigvalsh(np.asarray(m, dtype=float))[::-1]


# measures ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightedSpectralMeasure:
    """Finite atomic measure, kept sorted by location."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float).ravel()
        wt = np.asarray(self.weights, dtype=float).ravel()
        if loc.shape != wt.shape:
            raise DomainError("locations and weights differ in length")
        if np.any(wt < 0):
            raise DomainError("weights must be nonnegative")
        order = np.argsort(loc, kind="stable")
        object.__setattr__(self, "locations", loc[order])
        object.__setattr__(self, "weights", wt[order])

    @classmethod
    def esd(cls, eigenvalues) -> WeightedSpectralMeasure:
        ev = np.asarray(eigenvalues, dtype=float)
        return cls(ev, np.full(ev.shape, 1.0 / ev.size))

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def moment(self, k: int = 1) -> float:
        return float(np.sum(self.weights * self.locations**k))

    def cdf(self, x) -> np.ndarray:
        """Right-continuous distribution function."""
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[np.searchsorted(self.locations, x, side="right")]

    def stieltjes(self, z: complex) -> complex:
        return complex(np.sum(self.weights / (self.locations - z)))

    def scaled(self, c: float) -> WeightedSpectralMeasure:
        return WeightedSpectralMeasure(self.locations * c, self.weights)

    def restrict(self, lo: float, hi: float) -> WeightedSpectralMeasure:
        keep = (self.locations >= lo) & (self.locations <= hi)
        return WeightedSpectralMeasure(self.locations[keep], self.weights[keep])

    def to_csv(self, path) -> None:
        np.savetxt(
            path, np.column_stack([self.locations, self.weights]), delimiter=",", fmt="%.17g",
            header="location,weight", comments="",
        )


def directional_measure(es: EigenSystem, x) -> WeightedSpectralMeasure:
    """Atoms ``(lambda_i, (x . u_i)^2)``."""
    x = check_unit(x, es.n, name="x")
    return WeightedSpectralMeasure(es.eigenvalues, (x @ es.eigenvectors) ** 2)


# semicircle -------------------------------------------------------------------


def _check_sigma2(sigma2: float) -> float:
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    return float(sigma2)


def semicircle_density(x, sigma2: float = 1.0):
    s2 = _check_sigma2(sigma2)
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.clip(4 * s2 - x * x, 0.0, None)) / (2 * math.pi * s2)
    return float(out) if out.ndim == 0 else out


def semicircle_cdf(x, sigma2: float = 1.0):
    s2 = _check_sigma2(sigma2)
    t = np.clip(np.asarray(x, dtype=float) / (2 * math.sqrt(s2)), -1.0, 1.0)
    out = 0.5 + (t * np.sqrt(1 - t * t) + np.arcsin(t)) / math.pi
    return float(out) if out.ndim == 0 else out


def stieltjes_semicircle(z: complex) -> complex:
    """``s(z) = (-z + sqrt(z^2 - 4)) / 2`` on the branch with ``Im s > 0``.

    Real ``z`` with ``|z| > 2`` is taken as the boundary value, the root of
    modulus below one.
    """
    z = complex(z)
    if z.imag < 0:
        raise DomainError(f"z must lie in the closed upper half plane, got {z}")
    if z.imag == 0:
        if abs(z.real) <= 2:
            raise DomainError(f"z = {z.real} lies on the support [-2, 2]")
        x = z.real
        return complex((-x + math.copysign(math.sqrt(x * x - 4), x)) / 2)
    root = np.sqrt(z * z - 4)
    s = (-z + root) / 2
    if s.imag <= 0:
        s = (-z - root) / 2
    return complex(s)


def _poles(beta_prime: float) -> tuple[float, float]:
    p = beta_prime + 1.0 / beta_prime
    return p, -p


def limit_stieltjes(z: complex, rho: float, beta_prime: float) -> complex:
    """Stieltjes transform of the unit-scale directional limit."""
    if not -1 <= rho <= 1:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    if not beta_prime > 1:
        raise DomainError(f"beta' must exceed 1, got {beta_prime}")
    z = complex(z)
    for pole in _poles(beta_prime):
        if abs(z - pole) < POLE_WINDOW:
            raise PoleError(f"z = {z} is within {POLE_WINDOW} of the pole {pole}", pole)
    s = stieltjes_semicircle(z)
    return rho * rho * s / (1 - beta_prime**2 * s * s) + (1 - rho * rho) * s


# directional limit --------------------------------------------------------------


def nu_density(x, beta_prime: float):
    """Continuous spike component ``(1+b^2) / ((1+b^2)^2 - b^2 x^2) f_sc(x)``; mass ``1/b^2``."""
    b2 = beta_prime**2
    x = np.asarray(x, dtype=float)
    out = (1 + b2) / ((1 + b2) ** 2 - b2 * x * x) * semicircle_density(x, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class LimitMixture:
    """Continuous density plus atoms.

    ``scale`` maps the unit-noise description to the requested one by ``x -> scale x``.
    """

    rho: float
    r: int
    scale: float = 1.0
    atoms: tuple = field(init=False)
    beta_prime: float = field(init=False)

    def __post_init__(self):
        bp = math.sqrt(self.r - 2)
        object.__setattr__(self, "beta_prime", bp)
        if self.r == 3:
            atoms = ()
        else:
            mass = self.rho**2 / 2 * (1 - 1 / bp**2)
            loc = (bp + 1 / bp) * self.scale
            atoms = ((-loc, mass), (loc, mass)) if mass > 0 else ()
        object.__setattr__(self, "atoms", atoms)

    @property
    def support_half_width(self) -> float:
        return 2.0 * self.scale

    def density(self, x):
        """Continuous part on the chosen scale (includes the 1/scale Jacobian)."""
        y = np.asarray(x, dtype=float) / self.scale
        rho2 = self.rho**2
        out = (rho2 * nu_density(y, self.beta_prime) + (1 - rho2) * semicircle_density(y, 1.0)) / self.scale
        return float(out) if np.ndim(out) == 0 else out

    def continuous_mass(self) -> float:
        return _quad(self.density, -self.support_half_width, self.support_half_width)

    def continuous_cdf(self, x) -> np.ndarray:
        """Cumulative mass of the continuous part only."""
        y = np.atleast_1d(np.asarray(x, dtype=float)) / self.scale
        rho2 = self.rho**2
        return rho2 * _nu_cdf(y, self.beta_prime) + (1 - rho2) * semicircle_cdf(y, 1.0)

    def cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.continuous_cdf(x)
        for loc, mass in self.atoms:
            out = out + mass * (x >= loc)
        return out

    def total_mass(self) -> float:
        return self.continuous_mass() + sum(m for _, m in self.atoms)

    def density_grid(self, step: float) -> np.ndarray:
        """Columns ``(x, f(x))`` on a grid of the given step over the support."""
        h = self.support_half_width
        xs = np.arange(-h, h + step / 2, step)
        return np.column_stack([xs, self.density(xs)])


def _quad(f: Callable, a: float, b: float) -> float:
    val, _ = integrate.quad(f, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return float(val)


def _nu_cdf(y: np.ndarray, beta_prime: float) -> np.ndarray:
    out = np.empty_like(y)
    for k, yk in enumerate(y):
        if yk <= -2:
            out[k] = 0.0
        else:
            out[k] = _quad(lambda t: nu_density(t, beta_prime), -2.0, min(yk, 2.0))
    return out


def directional_limit(rho: float, r: int, scale: str = "unit") -> LimitMixture:
    """Limit of the directional measure of a pure contraction along ``x`` with ``x.w = rho``.

    ``scale='unit'`` describes ``M / (theta sqrt n)``; ``scale='theta'`` describes
    ``M / sqrt n``, with atoms at ``+-varpi_r``.
    """
    if not -1 <= rho <= 1:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    if r < 3:
        raise DomainError(f"need r >= 3, got {r}")
    if scale == "unit":
        c = 1.0
    elif scale == "theta":
        c = pure_params(r).theta
    else:
        raise DomainError(f"scale must be 'unit' or 'theta', got {scale!r}")
    return LimitMixture(float(rho), int(r), c)


# distances ------------------------------------------------------------------------


def ks_distance(measure: WeightedSpectralMeasure, cdf: Callable) -> float:
    """Sup of ``|F_measure - cdf|`` over atom locations, using both one-sided limits."""
    loc = measure.locations
    if loc.size == 0:
        raise DomainError("measure has no atoms")
    right = measure.cdf(loc)
    cum = np.concatenate([[0.0], np.cumsum(measure.weights)])
    left = cum[np.searchsorted(loc, loc, side="left")]
    f = np.asarray(cdf(loc), dtype=float)
    return float(max(np.abs(right - f).max(), np.abs(left - f).max()))


def w2_sorted(a, b) -> float:
    """Exact W2 between the ESDs of ``a`` and ``b`` (sorted eigenvalue pairing)."""
    la, lb = eigvals_desc(a), eigvals_desc(b)
    if la.shape != lb.shape:
        raise DomainError("matrices differ in size")
    return float(np.sqrt(np.mean((la - lb) ** 2)))


def w2_bound(a, b) -> float:
    """``||a - b||_F / sqrt n``, an upper bound for the W2 distance between ESDs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise DomainError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b) / math.sqrt(a.shape[0]))
