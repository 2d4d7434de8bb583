"""Parameter types, log-densities, exact sampling, moments and marginals.

Six families are implemented:

* ``Normal(mu, sigma)`` and ``LogNormal(mu, sigma)`` — sigma is the standard
  deviation, so the scale parameter of the family is ``sigma**2``;
* ``SkewNormal(mu, sigma, alpha)`` with density
  ``(2/sigma) phi((x-mu)/sigma) Phi(alpha (x-mu)/sigma)`` and
  ``LogSkewNormal`` for its exponential;
* ``Cfusn(loc_scale, skew)`` — the canonical fundamental skew-normal with an
  n x m skewness matrix ``Delta``, density
  ``2^m |Sigma|^{-1/2} phi_n(x0) Phi_m(Delta' x0 | I_m - Delta'Delta)`` where
  ``x0 = Sigma^{-1/2}(x - mu)`` and ``Sigma^{1/2}`` is the symmetric root;
* ``Lcfusn`` — the componentwise exponential of a Cfusn vector;
* ``MultivariateNormal`` as the zero-skewness base case.

Sampling uses the convolution representation

    Z = Delta |U| + (I_n - Delta Delta')^{1/2} V,   U ~ N_m(0,I), V ~ N_n(0,I)

followed by ``mu + Sigma^{1/2} Z`` (and exp() for the log families); its
correctness is established empirically by the moment and KS tests.

Specs are immutable and safe to share across threads; sampling requires an
exclusively owned generator per thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr

from .errors import (
    DimensionMismatch,
    InvalidPartition,
    NotPositiveDefinite,
    OutOfSupport,
    Unsupported,
)
from .numerics import (
    SymPosDefMatrix,
    chol_decompose,
    log_mvn_cdf_batch,
    sym_sqrt,
)

__all__ = [
    "SkewnessMatrix",
    "LocationScale",
    "Partition",
    "Normal",
    "LogNormal",
    "SkewNormal",
    "LogSkewNormal",
    "MultivariateNormal",
    "Cfusn",
    "Lcfusn",
    "log_pdf",
    "sample",
    "mean",
    "variance",
    "marginal",
    "alpha_to_delta",
    "delta_to_alpha",
    "sn_to_cfusn",
    "cfusn_to_sn",
    "canonical_cfusn",
    "family_name",
    "dim",
    "skew_width",
    "positive_support",
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_2 = math.log(2.0)

# Validity margin for I_m - Delta'Delta: pivots in (0, 1e-10] are rejected
# as numerically singular rather than regularized.
DELTA_MIN_PIVOT = 1e-10

_SKEW_CONSTRAINT_MSG = (
    "invalid skewness matrix: ||Delta a|| < 1 must hold for every unit "
    "vector a, i.e. I - Delta'Delta must be positive definite"
)


def _vector(x, name: str) -> np.ndarray:
    v = np.array(x, dtype=float, copy=True).reshape(-1)
    v.setflags(write=False)
    if not np.all(np.isfinite(v)):
        raise DimensionMismatch(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class SkewnessMatrix:
    """An n x m skewness matrix with ``||Delta a|| < 1`` for all unit a.

    The constraint is verified by factoring ``I_m - Delta'Delta``; the
    factored conditional covariance is cached as ``delta_star`` and the
    symmetric root of ``I_n - Delta Delta'`` as ``conv_root`` (used by the
    convolution sampler).
    """

    entries: np.ndarray
    delta_star: SymPosDefMatrix = field(repr=False)
    conv_root: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def from_matrix(cls, delta) -> "SkewnessMatrix":
        d = np.array(delta, dtype=float, copy=True)
        if d.ndim == 1:
            d = d[:, None]
        if d.ndim != 2:
            raise DimensionMismatch("skewness matrix must be 2-dimensional")
        if not np.all(np.isfinite(d)):
            raise DimensionMismatch("skewness matrix entries must be finite")
        n, m = d.shape
        try:
            star = chol_decompose(np.eye(m) - d.T @ d, min_pivot=DELTA_MIN_PIVOT)
        except NotPositiveDefinite as exc:
            raise NotPositiveDefinite(
                f"{_SKEW_CONSTRAINT_MSG} (pivot {exc.pivot:.3g} at index "
                f"{exc.pivot_index})",
                pivot_index=exc.pivot_index,
                pivot=exc.pivot,
            ) from exc
        conv = chol_decompose(np.eye(n) - d @ d.T)
        root = sym_sqrt(conv)
        d.setflags(write=False)
        root.setflags(write=False)
        return cls(entries=d, delta_star=star, conv_root=root)

    def zero(self) -> bool:
        return not np.any(self.entries)


@dataclass(frozen=True)
class LocationScale:
    """Location vector plus factored scale matrix and its symmetric root."""

    mu: np.ndarray
    sigma: SymPosDefMatrix
    sigma_root: np.ndarray = field(repr=False)

    @classmethod
    def from_values(cls, mu, sigma) -> "LocationScale":
        mu = _vector(mu, "mu")
        spd = sigma if isinstance(sigma, SymPosDefMatrix) else chol_decompose(sigma)
        if spd.dim != mu.size:
            raise DimensionMismatch(
                f"mu has length {mu.size}, sigma has dim {spd.dim}"
            )
        root = sym_sqrt(spd)
        root.setflags(write=False)
        return cls(mu=mu, sigma=spd, sigma_root=root)

    @property
    def n(self) -> int:
        return self.mu.size

    def is_canonical(self) -> bool:
        return not np.any(self.mu) and np.array_equal(
            self.sigma.entries, np.eye(self.n)
        )


def _check_univariate(mu: float, sigma: float):
    if not (math.isfinite(mu) and math.isfinite(sigma)):
        raise DimensionMismatch("mu and sigma must be finite")
    if sigma <= 0.0:
        raise DimensionMismatch("sigma must be positive")


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def __post_init__(self):
        _check_univariate(self.mu, self.sigma)


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float

    def __post_init__(self):
        _check_univariate(self.mu, self.sigma)


@dataclass(frozen=True)
class SkewNormal:
    mu: float
    sigma: float
    alpha: float

    def __post_init__(self):
        _check_univariate(self.mu, self.sigma)
        if not math.isfinite(self.alpha):
            raise DimensionMismatch("alpha must be finite")


@dataclass(frozen=True)
class LogSkewNormal:
    mu: float
    sigma: float
    alpha: float

    def __post_init__(self):
        _check_univariate(self.mu, self.sigma)
        if not math.isfinite(self.alpha):
            raise DimensionMismatch("alpha must be finite")


@dataclass(frozen=True)
class MultivariateNormal:
    loc_scale: LocationScale


@dataclass(frozen=True)
class Cfusn:
    loc_scale: LocationScale
    skew: SkewnessMatrix

    def __post_init__(self):
        if self.skew.n != self.loc_scale.n:
            raise DimensionMismatch(
                f"skewness matrix has {self.skew.n} rows, location has "
                f"length {self.loc_scale.n}"
            )


@dataclass(frozen=True)
class Lcfusn:
    loc_scale: LocationScale
    skew: SkewnessMatrix

    def __post_init__(self):
        if self.skew.n != self.loc_scale.n:
            raise DimensionMismatch(
                f"skewness matrix has {self.skew.n} rows, location has "
                f"length {self.loc_scale.n}"
            )


DistributionSpec = (
    Normal | LogNormal | SkewNormal | LogSkewNormal | MultivariateNormal | Cfusn | Lcfusn
)

_UNIVARIATE = (Normal, LogNormal, SkewNormal, LogSkewNormal)
_LOG_FAMILIES = (LogNormal, LogSkewNormal, Lcfusn)


def family_name(spec) -> str:
    return {
        Normal: "normal",
        LogNormal: "lognormal",
        SkewNormal: "sn",
        LogSkewNormal: "lsn",
        MultivariateNormal: "mvn",
        Cfusn: "cfusn",
        Lcfusn: "lcfusn",
    }[type(spec)]


def dim(spec) -> int:
    if isinstance(spec, _UNIVARIATE):
        return 1
    return spec.loc_scale.n


def skew_width(spec) -> int:
    """Number of skewing dimensions m (0 for the non-skew families)."""
    if isinstance(spec, (SkewNormal, LogSkewNormal)):
        return 1
    if isinstance(spec, (Cfusn, Lcfusn)):
        return spec.skew.m
    return 0


def positive_support(spec) -> bool:
    return isinstance(spec, _LOG_FAMILIES)


def alpha_to_delta(alpha: float) -> float:
    return alpha / math.sqrt(1.0 + alpha * alpha)


def delta_to_alpha(delta: float) -> float:
    return delta / math.sqrt(1.0 - delta * delta)


def sn_to_cfusn(spec: SkewNormal | LogSkewNormal):
    """Embed SN(mu, sigma, alpha) as the 1x1 skew-matrix family."""
    loc = LocationScale.from_values([spec.mu], [[spec.sigma**2]])
    skew = SkewnessMatrix.from_matrix([[alpha_to_delta(spec.alpha)]])
    if isinstance(spec, SkewNormal):
        return Cfusn(loc, skew)
    return Lcfusn(loc, skew)


def cfusn_to_sn(spec: Cfusn | Lcfusn):
    """Inverse of :func:`sn_to_cfusn`; requires n = m = 1."""
    if dim(spec) != 1 or spec.skew.m != 1:
        raise Unsupported("only 1x1 skew matrices map to the univariate family")
    mu = float(spec.loc_scale.mu[0])
    sigma = math.sqrt(float(spec.loc_scale.sigma.entries[0, 0]))
    alpha = delta_to_alpha(float(spec.skew.entries[0, 0]))
    cls = SkewNormal if isinstance(spec, Cfusn) else LogSkewNormal
    return cls(mu, sigma, alpha)


def canonical_cfusn(skew: SkewnessMatrix) -> Cfusn:
    """Cfusn with mu = 0 and Sigma = I for the given skewness matrix."""
    loc = LocationScale.from_values(np.zeros(skew.n), np.eye(skew.n))
    return Cfusn(loc, skew)


# ---------------------------------------------------------------------------
# log densities
# ---------------------------------------------------------------------------


def _as_batch(x, n: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.size != n:
            raise DimensionMismatch(f"point has length {arr.size}, expected {n}")
        return arr[None, :], True
    if arr.ndim == 2 and arr.shape[1] == n:
        return arr, False
    raise DimensionMismatch(f"points have shape {arr.shape}, expected (*, {n})")


def _normal_logpdf_1d(x, mu, sigma):
    t = (x - mu) / sigma
    return -np.log(sigma) - _HALF_LOG_2PI - 0.5 * t * t


def _sn_logpdf_1d(x, mu, sigma, alpha):
    t = (x - mu) / sigma
    return _LOG_2 - np.log(sigma) - _HALF_LOG_2PI - 0.5 * t * t + log_ndtr(alpha * t)


def _log_transform_1d(x):
    """ln(x) with -inf carried through for x == 0; negative x is an error."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise OutOfSupport("log-family density evaluated at a negative point")
    with np.errstate(divide="ignore"):
        return np.log(x)


def _mvn_logpdf_batch(batch: np.ndarray, loc: LocationScale) -> np.ndarray:
    x0 = np.linalg.solve(loc.sigma_root, (batch - loc.mu).T).T
    quad = np.einsum("ij,ij->i", x0, x0)
    n = loc.n
    return -0.5 * loc.sigma.logdet - n * _HALF_LOG_2PI - 0.5 * quad


def _cfusn_logpdf_batch(batch: np.ndarray, spec: Cfusn) -> np.ndarray:
    loc, skew = spec.loc_scale, spec.skew
    x0 = np.linalg.solve(loc.sigma_root, (batch - loc.mu).T).T
    quad = np.einsum("ij,ij->i", x0, x0)
    log_cdf, _ = log_mvn_cdf_batch(x0 @ skew.entries, skew.delta_star)
    n = loc.n
    return (
        skew.m * _LOG_2
        - 0.5 * loc.sigma.logdet
        - n * _HALF_LOG_2PI
        - 0.5 * quad
        + log_cdf
    )


def log_pdf(spec, x):
    """Natural log of the density of ``spec`` at ``x``.

    ``x`` may be a scalar / length-n vector (returns float) or a (K, n)
    batch (returns a length-K array).  Log-family boundaries (a zero
    coordinate) give -inf; negative coordinates raise OutOfSupport.
    Evaluation stays in log space throughout (log of the normal CDF, log
    determinants).
    """
    if isinstance(spec, _UNIVARIATE):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        if isinstance(spec, Normal):
            out = _normal_logpdf_1d(arr, spec.mu, spec.sigma)
        elif isinstance(spec, SkewNormal):
            out = _sn_logpdf_1d(arr, spec.mu, spec.sigma, spec.alpha)
        else:
            lx = _log_transform_1d(arr)
            boundary = np.isneginf(lx)
            safe = np.where(boundary, 0.0, lx)
            if isinstance(spec, LogNormal):
                inner = _normal_logpdf_1d(safe, spec.mu, spec.sigma)
            else:
                inner = _sn_logpdf_1d(safe, spec.mu, spec.sigma, spec.alpha)
            out = np.where(boundary, -np.inf, inner - safe)
        return float(out) if scalar else np.asarray(out, dtype=float)

    n = dim(spec)
    batch, single = _as_batch(x, n)
    if isinstance(spec, MultivariateNormal):
        out = _mvn_logpdf_batch(batch, spec.loc_scale)
    elif isinstance(spec, Cfusn):
        out = _cfusn_logpdf_batch(batch, spec)
    elif isinstance(spec, Lcfusn):
        lx = _log_transform_1d(batch)
        boundary = np.isneginf(lx).any(axis=1)
        safe = np.where(boundary[:, None], 0.0, lx)
        inner = _cfusn_logpdf_batch(safe, Cfusn(spec.loc_scale, spec.skew))
        out = np.where(boundary, -np.inf, inner - safe.sum(axis=1))
    else:
        raise Unsupported(f"log_pdf not defined for {type(spec).__name__}")
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample(spec, rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. variates; returns a (count, n) matrix.

    The draw order per family is part of the determinism contract: the
    skewing block U is consumed before the kernel block V.
    """
    if count <= 0:
        raise DimensionMismatch("count must be positive")
    if isinstance(spec, (Normal, LogNormal)):
        z = spec.mu + spec.sigma * rng.standard_normal(count)
        out = z if isinstance(spec, Normal) else np.exp(z)
        return out[:, None]
    if isinstance(spec, (SkewNormal, LogSkewNormal)):
        delta = alpha_to_delta(spec.alpha)
        u = rng.standard_normal(count)
        v = rng.standard_normal(count)
        z = spec.mu + spec.sigma * (delta * np.abs(u) + math.sqrt(1.0 - delta * delta) * v)
        out = z if isinstance(spec, SkewNormal) else np.exp(z)
        return out[:, None]
    if isinstance(spec, MultivariateNormal):
        loc = spec.loc_scale
        v = rng.standard_normal((count, loc.n))
        return loc.mu + v @ loc.sigma_root
    if isinstance(spec, (Cfusn, Lcfusn)):
        loc, skew = spec.loc_scale, spec.skew
        u = rng.standard_normal((count, skew.m))
        v = rng.standard_normal((count, skew.n))
        z = np.abs(u) @ skew.entries.T + v @ skew.conv_root
        w = loc.mu + z @ loc.sigma_root
        return w if isinstance(spec, Cfusn) else np.exp(w)
    raise Unsupported(f"sample not defined for {type(spec).__name__}")


# ---------------------------------------------------------------------------
# closed-form moments
# ---------------------------------------------------------------------------

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def mean(spec) -> np.ndarray:
    """Closed-form mean vector; log families are not supported."""
    if isinstance(spec, Normal):
        return np.array([spec.mu])
    if isinstance(spec, SkewNormal):
        return np.array([spec.mu + spec.sigma * _SQRT_2_OVER_PI * alpha_to_delta(spec.alpha)])
    if isinstance(spec, MultivariateNormal):
        return spec.loc_scale.mu.copy()
    if isinstance(spec, Cfusn):
        loc, skew = spec.loc_scale, spec.skew
        return loc.mu + _SQRT_2_OVER_PI * (loc.sigma_root @ skew.entries.sum(axis=1))
    raise Unsupported(f"closed-form mean not available for {family_name(spec)}")


def variance(spec) -> np.ndarray:
    """Closed-form covariance matrix; log families are not supported."""
    if isinstance(spec, Normal):
        return np.array([[spec.sigma**2]])
    if isinstance(spec, SkewNormal):
        delta = alpha_to_delta(spec.alpha)
        return np.array([[spec.sigma**2 * (1.0 - 2.0 * delta * delta / math.pi)]])
    if isinstance(spec, MultivariateNormal):
        return spec.loc_scale.sigma.entries.copy()
    if isinstance(spec, Cfusn):
        loc, skew = spec.loc_scale, spec.skew
        root_delta = loc.sigma_root @ skew.entries
        return loc.sigma.entries - (2.0 / math.pi) * (root_delta @ root_delta.T)
    raise Unsupported(f"closed-form variance not available for {family_name(spec)}")


# ---------------------------------------------------------------------------
# partitions and marginals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Two-block split of an n-vector and the induced row split of Delta."""

    n1: int
    n2: int
    idx1: np.ndarray
    idx2: np.ndarray
    delta1: SkewnessMatrix
    delta2: SkewnessMatrix

    @classmethod
    def split(cls, skew: SkewnessMatrix, n1: int) -> "Partition":
        n = skew.n
        if not (0 < n1 < n):
            raise InvalidPartition(f"block size {n1} invalid for dimension {n}")
        n2 = n - n1
        idx1 = np.arange(0, n1)
        idx2 = np.arange(n1, n)
        d1 = SkewnessMatrix.from_matrix(skew.entries[:n1, :])
        d2 = SkewnessMatrix.from_matrix(skew.entries[n1:, :])
        return cls(n1=n1, n2=n2, idx1=idx1, idx2=idx2, delta1=d1, delta2=d2)

    def swapped(self) -> "Partition":
        return Partition(
            n1=self.n2,
            n2=self.n1,
            idx1=self.idx2,
            idx2=self.idx1,
            delta1=self.delta2,
            delta2=self.delta1,
        )


def marginal(spec, part: Partition, which: int):
    """Block marginal of a canonical Cfusn / Lcfusn.

    Only the canonical case (mu = 0, Sigma = I) has closed-form marginals:
    block i keeps its row subset of Delta and the full skewing width m.
    """
    if which not in (1, 2):
        raise InvalidPartition("which must be 1 or 2")
    if not isinstance(spec, (Cfusn, Lcfusn)):
        raise Unsupported("marginal is defined for Cfusn and Lcfusn specs")
    if part.n1 + part.n2 != dim(spec):
        raise InvalidPartition(
            f"partition covers {part.n1 + part.n2} coordinates, spec has {dim(spec)}"
        )
    if not spec.loc_scale.is_canonical():
        raise Unsupported(
            "block marginals are only available in the canonical case "
            "(mu = 0, Sigma = I)"
        )
    sub = part.delta1 if which == 1 else part.delta2
    cls = type(spec)
    return cls(
        LocationScale.from_values(np.zeros(sub.n), np.eye(sub.n)),
        sub,
    )
