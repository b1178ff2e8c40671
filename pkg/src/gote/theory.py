"""Closed-form limit and fluctuation predictors for pure and mixed contractions.

Every predictor takes an explicit ``Regime``; nothing is inferred from ``(r, n)``.
Random limits are returned as laws of transformed standard normals ``g(zeta)``,
each with a CDF, a quantile function and a seeded joint sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm

from .errors import DomainError, UnsupportedError
from .law_equiv import pure_params
from .tensor_core import make_rng

REGIME_TAGS = ("fixed_r", "r_much_less_n", "intermediate", "proportional", "r_much_greater_n")


@dataclass(frozen=True)
class Regime:
    """Asymptotic regime.

    ``intermediate`` is ``sqrt(n) << r << n``, a sub-case of ``r_much_less_n``
    with its own fluctuation law.
    """

    tag: str
    c: float | None = None

    def __post_init__(self):
        if self.tag not in REGIME_TAGS:
            raise DomainError(f"unknown regime {self.tag!r}; expected one of {REGIME_TAGS}")
        if self.tag == "proportional":
            if self.c is None or not (0 < self.c < math.inf):
                raise DomainError(f"proportional regime needs finite c > 0, got {self.c}")

    @classmethod
    def parse(cls, text: str, c: float | None = None) -> Regime:
        return cls(text.strip().replace("-", "_"), c)

    def to_json(self) -> dict:
        out = {"tag": self.tag}
        if self.c is not None:
            out["c"] = self.c
        return out


# laws -------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarLaw:
    """Law of a random limit, with a CDF and a quantile function."""

    name: str
    cdf: Callable
    quantile: Callable

    def sample(self, seed, size: int) -> np.ndarray:
        u = make_rng(seed).random(size)
        return np.asarray(self.quantile(u), dtype=float)


def xi_of(zeta, c: float):
    zeta = np.asarray(zeta, dtype=float)
    return (math.sqrt(c) * zeta + np.sqrt(c * zeta**2 + 4)) / 2


def xi_law(c: float) -> ScalarLaw:
    """``xi = (sqrt(c) zeta + sqrt(c zeta^2 + 4)) / 2``, increasing in ``zeta``; ``zeta = (x - 1/x)/sqrt(c)``."""

    def cdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = norm.cdf((x - 1 / x) / math.sqrt(c))
        return np.where(x > 0, out, 0.0)

    return ScalarLaw(f"xi(c={c})", cdf, lambda p: xi_of(norm.ppf(p), c))


def neg_inv_xi_law(c: float) -> ScalarLaw:
    """Law of ``-1/xi``."""
    base = xi_law(c)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x < 0, 1 - base.cdf(-1 / x), 1.0)

    return ScalarLaw(f"-1/xi(c={c})", cdf, lambda p: -1 / base.quantile(1 - np.asarray(p)))


def zeta_plus_law() -> ScalarLaw:
    """Positive part of a standard normal: atom 1/2 at 0."""
    cdf = lambda x: np.where(np.asarray(x) >= 0, norm.cdf(x), 0.0)  # noqa: E731
    quantile = lambda p: np.where(np.asarray(p) <= 0.5, 0.0, norm.ppf(np.maximum(p, 0.5)))  # noqa: E731
    return ScalarLaw("zeta_+", cdf, quantile)


def neg_zeta_minus_law() -> ScalarLaw:
    """``-max(-zeta, 0)``: atom 1/2 at 0."""
    cdf = lambda x: np.where(np.asarray(x) < 0, norm.cdf(x), 1.0)  # noqa: E731
    quantile = lambda p: np.where(np.asarray(p) >= 0.5, 0.0, norm.ppf(np.minimum(p, 0.5)))  # noqa: E731
    return ScalarLaw("-zeta_-", cdf, quantile)


def proportional_finite_law(c: float) -> ScalarLaw:
    """Law of ``xi / sqrt(c)``, the top eigenvalue on the ``sqrt(r)`` scale at ratio ``c``."""
    base = xi_law(c)
    s = math.sqrt(c)
    return ScalarLaw(f"xi/sqrt(c), c={c}", lambda x: base.cdf(np.asarray(x) * s), lambda p: base.quantile(p) / s)


@dataclass(frozen=True)
class JointLaw:
    """Random vector ``(g_1(zeta), ..., g_k(zeta))`` driven by one standard normal."""

    transforms: tuple
    marginals: tuple

    def sample(self, seed, size: int) -> np.ndarray:
        zeta = make_rng(seed).standard_normal(size)
        return np.column_stack([g(zeta) for g in self.transforms])


# edge limits ----------------------------------------------------------------------


@dataclass(frozen=True)
class EdgePrediction:
    regime: Regime
    scale: str
    limits: tuple | None = None
    distribution: JointLaw | None = None

    def to_json(self) -> dict:
        out = {"regime": self.regime.to_json(), "scale": self.scale}
        if self.limits is not None:
            out["limits"] = list(self.limits)
        if self.distribution is not None:
            out["distribution"] = [m.name for m in self.distribution.marginals]
        return out


def _check_regime(r: int, n: int | None, regime: Regime) -> None:
    if r < 3:
        raise DomainError(f"need r >= 3, got {r}")
    if n is None:
        return
    if regime.tag in ("r_much_less_n", "intermediate") and r >= n:
        raise DomainError(f"regime {regime.tag} is inconsistent with r={r} >= n={n}")
    if regime.tag == "r_much_greater_n" and r <= n:
        raise DomainError(f"regime r_much_greater_n is inconsistent with r={r} <= n={n}")


def edge_limits(r: int, n: int | None, regime: Regime) -> EdgePrediction:
    """Limits of ``(lambda_1, lambda_n)`` on the stated scale."""
    _check_regime(r, n, regime)
    if regime.tag == "fixed_r":
        p = pure_params(r)
        top = p.varpi if r >= 4 else 2 * p.theta
        return EdgePrediction(regime, "sqrt(n)", (top, -top))
    if regime.tag in ("r_much_less_n", "intermediate"):
        return EdgePrediction(regime, "sqrt(n)", (1.0, -1.0))
    if regime.tag == "proportional":
        c = regime.c
        law = JointLaw((lambda z: xi_of(z, c), lambda z: -1 / xi_of(z, c)), (xi_law(c), neg_inv_xi_law(c)))
        return EdgePrediction(regime, "sqrt(n)", None, law)
    law = JointLaw((lambda z: np.maximum(z, 0.0), lambda z: np.minimum(z, 0.0)), (zeta_plus_law(), neg_zeta_minus_law()))
    return EdgePrediction(regime, "sqrt(r)", None, law)


# fluctuations ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FluctuationCov:
    matrix: np.ndarray
    scaling: str
    centering: tuple

    def correlation(self) -> float:
        m = self.matrix
        return float(m[0, 1] / math.sqrt(m[0, 0] * m[1, 1]))

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist(), "scaling": self.scaling, "centering": list(self.centering)}


def edge_fluctuation_cov(r: int, regime: Regime) -> FluctuationCov:
    """Gaussian fluctuation covariance of ``(lambda_1, lambda_n)``.

    Fixed ``r``: ``(r-3)/(4(r-2)(r-1)) [[r^2-1, r^2-9], [r^2-9, r^2-1]]`` at scale
    ``sqrt(n)``.  ``sqrt(n) << r << n``: ``(1/4)`` all-ones at scale ``sqrt(n/r)``.
    """
    if regime.tag == "fixed_r":
        if r == 3:
            raise UnsupportedError("no fluctuation law is available for r = 3")
        if r < 3:
            raise DomainError(f"need r >= 4, got {r}")
        k = (r - 3) / (4 * (r - 2) * (r - 1))
        m = k * np.array([[r * r - 1, r * r - 9], [r * r - 9, r * r - 1]], dtype=float)
        vp = pure_params(r).varpi
        return FluctuationCov(m, "sqrt(n)", (vp, -vp))
    if regime.tag == "intermediate":
        return FluctuationCov(np.full((2, 2), 0.25), "sqrt(n/r)", (1.0, -1.0))
    raise UnsupportedError(f"no fluctuation law for regime {regime.tag}")


def edge_fluctuation_cov_delta_method(r: int) -> FluctuationCov:
    """Fixed-``r`` covariance assembled term by term from its two sources.

    Spike part: delta method through ``x -> x + 1/x`` applied to the fluctuation
    of the rank-2 eigenvalues.  Noise part: independent outlier fluctuation of
    variance ``(beta' - 1) eta(beta')^2`` with ``eta(x) = sqrt(2(|x|+1))/|x|``.
    On the ``sqrt(n)`` scale this gives diagonal ``(r-3)(r^2-1)/(4(r-2)(r-1))``,
    equal to ``edge_fluctuation_cov``, but off-diagonal ``(r-3)^2/(4(r-2))``.
    Simulation agrees with this form (see README).
    """
    if r < 4:
        raise UnsupportedError("needs r >= 4")
    p = pure_params(r)
    bp = p.beta_prime
    ap2 = (p.alpha / p.theta) ** 2
    shrink = (1 - 1 / bp**2) ** 2
    eta2 = 2 * (bp + 1) / bp**2
    spike = shrink * np.array([[ap2 / 4 + 1.5 * bp**2, ap2 / 4 + 0.5 * bp**2], [ap2 / 4 + 0.5 * bp**2, ap2 / 4 + 1.5 * bp**2]])
    m = p.theta**2 * (spike + (bp - 1) * eta2 * np.eye(2))
    return FluctuationCov(m, "sqrt(n)", (p.varpi, -p.varpi))


# overlaps --------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapPrediction:
    """Limits of ``(delta_1, delta_n)``, ``(tilde delta_1, tilde delta_n)`` and ``dist(w, span)``.

    For random limits the pairs are ``None`` and ``distribution`` samples
    ``(delta_1, delta_n, tilde delta_1, tilde delta_n)``.
    """

    regime: Regime
    delta: tuple | None
    delta_tilde: tuple | None
    dist: float | None
    distribution: JointLaw | None = None

    def to_json(self) -> dict:
        return {
            "regime": self.regime.to_json(),
            "delta": None if self.delta is None else list(self.delta),
            "delta_tilde": None if self.delta_tilde is None else list(self.delta_tilde),
            "dist": self.dist,
            "distribution": None if self.distribution is None else "functions of xi",
        }


def _prop_overlaps(c: float) -> JointLaw:
    # eigenvector overlaps of the spike plane at ratio c, as functions of xi
    def parts(z):
        xi = xi_of(z, c)
        h = np.sqrt(xi**2 + 1)
        a, b = xi / h, 1 / h
        ta, tb = (xi + 1) / (math.sqrt(2) * h), np.abs(xi - 1) / (math.sqrt(2) * h)
        return np.maximum(a, b), np.minimum(a, b), np.maximum(ta, tb), np.minimum(ta, tb)

    fns = tuple((lambda z, k=k: parts(z)[k]) for k in range(4))
    return JointLaw(fns, ())


def overlap_limits(r: int, regime: Regime) -> OverlapPrediction:
    if r == 3:
        raise UnsupportedError("r = 3 has no outliers, so no spike-plane overlap")
    if r < 3:
        raise DomainError(f"need r >= 4, got {r}")
    if regime.tag == "fixed_r":
        p = pure_params(r)
        q = math.sqrt(1 - p.theta**2 / p.beta**2)
        return OverlapPrediction(regime, (q / math.sqrt(2), q / math.sqrt(2)), (q, 0.0), p.theta / p.beta)
    if regime.tag in ("r_much_less_n", "intermediate"):
        h = 1 / math.sqrt(2)
        return OverlapPrediction(regime, (h, h), (1.0, 0.0), 0.0)
    if regime.tag == "proportional":
        return OverlapPrediction(regime, None, None, 0.0, _prop_overlaps(regime.c))
    h = 1 / math.sqrt(2)
    return OverlapPrediction(regime, (1.0, 0.0), (h, h), 0.0)


# rank-2 part alone ----------------------------------------------------------------------


@dataclass(frozen=True)
class SpikePrediction:
    regime: Regime
    scale: str
    centering: tuple | None
    fluctuation: FluctuationCov | None
    distribution: JointLaw | None = None

    def to_json(self) -> dict:
        return {
            "regime": self.regime.to_json(),
            "scale": self.scale,
            "centering": None if self.centering is None else list(self.centering),
            "fluctuation_cov": None if self.fluctuation is None else self.fluctuation.to_json(),
        }


def spike_fluctuation_matrix(alpha2: float, beta2: float) -> np.ndarray:
    d, o = alpha2 / 4 + 1.5 * beta2, alpha2 / 4 + 0.5 * beta2
    return np.array([[d, o], [o, d]])


def spike_regime_limits(r: int, n: int | None, regime: Regime) -> SpikePrediction:
    """Limits for ``(lambda_1(P), lambda_n(P))`` of the rank-2 part alone."""
    _check_regime(r, n, regime)
    p = pure_params(r)
    if regime.tag == "fixed_r":
        fc = FluctuationCov(spike_fluctuation_matrix(p.alpha**2, p.beta**2), "sqrt(n)", (p.beta, -p.beta))
        return SpikePrediction(regime, "sqrt(n)", (p.beta, -p.beta), fc)
    if regime.tag in ("r_much_less_n", "intermediate"):
        fc = FluctuationCov(np.full((2, 2), 0.25), "sqrt(n/r)", (p.beta, -p.beta))
        return SpikePrediction(regime, "sqrt(n)", (p.beta, -p.beta), fc)
    edge = edge_limits(r, n, regime)
    return SpikePrediction(regime, edge.scale, None, None, edge.distribution)


# mixed --------------------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedPrediction:
    """Bulk variance and top-edge limit of ``G . u (x) v / sqrt n`` for ``r = 4``.

    ``edge`` is ``None`` where no limit is known (``0 < |rho| < 1``).
    """

    rho: float
    bulk_sigma2: float
    edge: float | None
    bulk_edge: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "bulk_edge", 2 * math.sqrt(self.bulk_sigma2))


def mixed_limits(rho: float) -> MixedPrediction:
    if not -1 <= rho <= 1:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    sigma2 = (1 + rho * rho) / 6
    if rho == 0:
        edge = 2 * math.sqrt(sigma2)
    elif abs(rho) == 1:
        edge = pure_params(4).varpi
    else:
        edge = None
    return MixedPrediction(float(rho), sigma2, edge)
