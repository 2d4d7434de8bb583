"""Dense symmetric linear algebra and normal-distribution kernels.

Everything downstream (densities, samplers, Monte Carlo estimators and the
quadrature oracle) is built on the primitives in this module:

* :class:`SymPosDefMatrix` — a validated, Cholesky-factored symmetric
  positive definite matrix with cached log-determinant,
* :func:`sym_sqrt` — the symmetric square root,
* :func:`std_normal_cdf` / :func:`mvn_cdf` — the univariate and m-variate
  zero-mean normal CDF.  The bivariate case is evaluated by deterministic
  adaptive Gauss-Legendre quadrature of the single-integral reduction

      P(X<=a, Y<=b) = Phi(a)Phi(b)
          + (1/2pi) * int_0^{asin(rho)} exp(-(a^2+b^2-2ab sin t)/(2cos^2 t)) dt,

  and dimensions m >= 3 use a separation-of-variables randomized-lattice
  rule with a fixed number of random shifts, reporting a 3-sigma error bound.

All operations are pure functions of their inputs.  The random shifts of the
lattice rule come from a fixed internal seed, so repeated calls with equal
arguments return identical results.  RNG streams for sampling are owned by
the caller; parallel estimators derive independent substreams from a root
seed through :func:`substream` (a counter-based split).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric

__all__ = [
    "SymPosDefMatrix",
    "GaussianKernelResult",
    "chol_decompose",
    "sym_sqrt",
    "std_normal_cdf",
    "mvn_cdf",
    "mvn_cdf_batch",
    "log_mvn_cdf_batch",
    "mvn_sample",
    "substream",
    "as_seed_sequence",
]

# Accuracy targets for mvn_cdf (configurable per call).
DEFAULT_CDF_TARGET_2D = 1e-6
DEFAULT_CDF_TARGET_ND = 1e-4

# Fixed seed for the random shifts of the lattice rule: makes mvn_cdf a pure
# function of its arguments while still allowing a spread-based error bound.
_SHIFT_SEED = 0x5EEDCD
_N_SHIFTS = 12

_SYMMETRY_RTOL = 1e-12
_LOG_TINY = 1e-300  # clamp before taking logs of CDF values

_PRIMES = np.array(
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71],
    dtype=float,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SymPosDefMatrix:
    """A symmetric positive definite matrix with cached factorization.

    ``logdet`` equals ``2 * sum(log(diag(chol)))`` by construction.
    Instances are immutable and safe to share across threads.
    """

    entries: np.ndarray
    chol: np.ndarray
    logdet: float

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class GaussianKernelResult:
    """CDF value together with an error bound.

    ``error_bound`` is 0 for deterministic evaluation paths and a 3-sigma
    spread bound when the randomized lattice path is used.
    """

    value: float
    error_bound: float


def _cholesky_lower(a: np.ndarray, min_pivot: float) -> np.ndarray:
    """Left-looking Cholesky that reports the offending pivot on failure."""
    d = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(d):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not pivot > min_pivot:
            raise NotPositiveDefinite(
                f"Cholesky pivot {pivot:.6g} at index {j} is not above the "
                f"admissible minimum {min_pivot:.6g}",
                pivot_index=j,
                pivot=float(pivot),
            )
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def chol_decompose(a, min_pivot: float = 0.0) -> SymPosDefMatrix:
    """Validate symmetry, factor ``a = L L'`` and cache the log-determinant.

    Raises :class:`NotSymmetric` when the relative asymmetry exceeds 1e-12
    and :class:`NotPositiveDefinite` (with the pivot index) when any
    Cholesky pivot fails to exceed ``min_pivot``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > _SYMMETRY_RTOL * scale:
        raise NotSymmetric(
            f"matrix is not symmetric within relative tolerance {_SYMMETRY_RTOL:g}"
        )
    sym = 0.5 * (a + a.T)
    lower = _cholesky_lower(sym, min_pivot)
    logdet = 2.0 * float(np.sum(np.log(np.diag(lower))))
    return SymPosDefMatrix(entries=_readonly(sym), chol=_readonly(lower), logdet=logdet)


def sym_sqrt(a: SymPosDefMatrix) -> np.ndarray:
    """Symmetric square root ``S`` with ``S @ S == a.entries`` (within 1e-9)."""
    w, u = np.linalg.eigh(a.entries)
    root = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.T
    return 0.5 * (root + root.T)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the error function (abs. error < 1e-15)."""
    return float(ndtr(x))


# ---------------------------------------------------------------------------
# Bivariate CDF: single-integral reduction with the sin-substitution, see the
# module docstring.  Adaptive node doubling; deterministic.
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _bvn_integral(a: np.ndarray, b: np.ndarray, theta: float, n_nodes: int) -> np.ndarray:
    """(1/2pi) * int_0^theta exp(-(a^2+b^2-2ab sin t)/(2 cos^2 t)) dt, batched."""
    x, w = _gl_nodes(n_nodes)
    half = 0.5 * theta
    t = half * (x + 1.0)
    sin_t = np.sin(t)
    inv_2ct2 = 0.5 / np.cos(t) ** 2
    sq = a * a + b * b
    ab2 = 2.0 * a * b
    quad = np.empty_like(a)
    chunk = max(1, (1 << 21) // n_nodes)
    for start in range(0, a.size, chunk):
        sl = slice(start, start + chunk)
        expo = -(sq[sl, None] - ab2[sl, None] * sin_t) * inv_2ct2
        quad[sl] = np.exp(expo) @ w
    return quad * half / (2.0 * np.pi)


def _bvn_batch(a: np.ndarray, b: np.ndarray, rho: float, tol: float) -> np.ndarray:
    """P(X<=a, Y<=b) for standard bivariate normal pairs sharing one rho."""
    base = ndtr(a) * ndtr(b)
    if rho == 0.0:
        return base
    theta = float(np.arcsin(rho))
    prev = None
    for n_nodes in (32, 64, 128, 256, 512, 1024):
        cur = _bvn_integral(a, b, theta, n_nodes)
        if prev is not None and np.max(np.abs(cur - prev)) < tol:
            break
        prev = cur
    return np.clip(base + cur, 0.0, 1.0)


# ---------------------------------------------------------------------------
# m >= 3: separation-of-variables lattice rule (randomly shifted Richtmyer
# sequence, _N_SHIFTS shifts, incremental point doubling).
# ---------------------------------------------------------------------------


def _lattice_shifts(d: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_SHIFT_SEED)))
    return rng.random((_N_SHIFTS, d))


def _genz_stage_products(b_std: np.ndarray, lower: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Conditional-probability products for one block of lattice points.

    b_std : (K, m) standardized upper limits, lower : (m, m) Cholesky of the
    correlation matrix, w : (B, d) lattice points.  Returns (B, K) products.
    """
    n_block = w.shape[0]
    n_batch, m = b_std.shape
    e_first = ndtr(b_std[:, 0] / lower[0, 0])
    f = np.broadcast_to(e_first, (n_block, n_batch)).copy()
    e_prev = f.copy()
    ys = []
    for i in range(1, m):
        u = np.clip(w[:, i - 1 : i] * e_prev, 1e-100, 1.0 - 1e-16)
        ys.append(ndtri(u))
        acc = np.zeros_like(f)
        for j in range(i):
            acc += lower[i, j] * ys[j]
        e_prev = ndtr((b_std[:, i] - acc) / lower[i, i])
        f *= e_prev
    return f


def _genz_batch(
    b_std: np.ndarray,
    lower: np.ndarray,
    target: float,
    max_points: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Lattice-rule CDF estimate; returns (values, 3-sigma error bounds)."""
    n_batch, m = b_std.shape
    d = m - 1
    shifts = _lattice_shifts(d)
    gen = np.sqrt(_PRIMES[:d])
    sums = np.zeros((_N_SHIFTS, n_batch))
    n_points = 0
    n_next = 128
    block = max(1, (1 << 20) // max(1, n_batch))
    while True:
        ks = np.arange(n_points + 1, n_next + 1, dtype=float)
        for s in range(_N_SHIFTS):
            for start in range(0, ks.size, block):
                kb = ks[start : start + block]
                w = (kb[:, None] * gen + shifts[s]) % 1.0
                sums[s] += _genz_stage_products(b_std, lower, w).sum(axis=0)
        n_points = n_next
        means = sums / n_points
        values = means.mean(axis=0)
        err = 3.0 * means.std(axis=0, ddof=1) / np.sqrt(_N_SHIFTS)
        if np.max(err) <= target or n_points >= max_points:
            break
        n_next = 2 * n_points
    return np.clip(values, 0.0, 1.0), err


def _standardize(cov: SymPosDefMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Return (axis scales, Cholesky factor of the correlation matrix)."""
    scales = np.sqrt(np.diag(cov.entries))
    return scales, cov.chol / scales[:, None]


def mvn_cdf_batch(
    uppers: np.ndarray,
    cov: SymPosDefMatrix,
    target: float | None = None,
    max_points: int = 4096,
) -> tuple[np.ndarray, np.ndarray]:
    """P(X <= upper) for rows of ``uppers``, X ~ N_m(0, cov).

    Returns (values, error_bounds); all entries of ``uppers`` must be finite.
    Deterministic for m <= 2 (error bound 0), randomized lattice for m >= 3.
    """
    uppers = np.asarray(uppers, dtype=float)
    if uppers.ndim != 2 or uppers.shape[1] != cov.dim:
        raise DimensionMismatch(
            f"uppers shape {uppers.shape} incompatible with cov dim {cov.dim}"
        )
    m = cov.dim
    if m == 1:
        scale = float(np.sqrt(cov.entries[0, 0]))
        return ndtr(uppers[:, 0] / scale), np.zeros(uppers.shape[0])
    scales, lower_corr = _standardize(cov)
    b_std = uppers / scales
    if m == 2:
        if target is None:
            target = DEFAULT_CDF_TARGET_2D
        rho = float(cov.entries[0, 1] / (scales[0] * scales[1]))
        tol = max(1e-15, min(5e-13, target * 1e-3))
        return _bvn_batch(b_std[:, 0], b_std[:, 1], rho, tol), np.zeros(uppers.shape[0])
    if target is None:
        target = DEFAULT_CDF_TARGET_ND
    return _genz_batch(b_std, lower_corr, target, max_points)


def mvn_cdf(
    upper,
    cov: SymPosDefMatrix,
    target: float | None = None,
    max_points: int = 8192,
) -> GaussianKernelResult:
    """P(X <= upper) for X ~ N_m(0, cov), with +inf entries marginalized out.

    Deterministic quadrature for m <= 2; randomized lattice rule with a
    reported 3-sigma ``error_bound`` for m >= 3.
    """
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if upper.ndim != 1 or upper.size != cov.dim:
        raise DimensionMismatch(
            f"upper has shape {upper.shape}, covariance has dim {cov.dim}"
        )
    if np.any(np.isnan(upper)) or np.any(np.isneginf(upper)):
        raise DimensionMismatch("upper entries must be finite or +inf")
    finite = np.isfinite(upper)
    if not np.all(finite):
        # Marginalizing an unbounded coordinate is exact: drop its row/column.
        if not np.any(finite):
            return GaussianKernelResult(value=1.0, error_bound=0.0)
        idx = np.flatnonzero(finite)
        sub = cov.entries[np.ix_(idx, idx)]
        cov = chol_decompose(sub)
        upper = upper[finite]
    values, errs = mvn_cdf_batch(upper[None, :], cov, target=target, max_points=max_points)
    return GaussianKernelResult(value=float(values[0]), error_bound=float(errs[0]))


def log_mvn_cdf_batch(
    uppers: np.ndarray,
    cov: SymPosDefMatrix,
    target: float | None = None,
    max_points: int = 4096,
) -> tuple[np.ndarray, np.ndarray]:
    """log P(X <= upper) rowwise, with a relative-error bound per row.

    Fully log-space (``log_ndtr``) whenever the covariance factorizes:
    m == 1, or a diagonal covariance matrix.  Otherwise the CDF is computed
    by :func:`mvn_cdf_batch` and clamped away from zero before the log.
    The second return value bounds ``|delta log|``; it is 0 on the exact
    paths and ``error_bound / value`` on the lattice path.
    """
    uppers = np.asarray(uppers, dtype=float)
    if uppers.ndim != 2 or uppers.shape[1] != cov.dim:
        raise DimensionMismatch(
            f"uppers shape {uppers.shape} incompatible with cov dim {cov.dim}"
        )
    m = cov.dim
    off_diag = cov.entries - np.diag(np.diag(cov.entries))
    if m == 1 or not np.any(off_diag):
        scales = np.sqrt(np.diag(cov.entries))
        return log_ndtr(uppers / scales).sum(axis=1), np.zeros(uppers.shape[0])
    values, errs = mvn_cdf_batch(uppers, cov, target=target, max_points=max_points)
    clipped = np.clip(values, _LOG_TINY, 1.0)
    return np.log(clipped), errs / clipped


def mvn_sample(rng: np.random.Generator, n: int, mean, scale_root, count: int | None = None):
    """Draw ``mean + scale_root @ z`` with z i.i.d. standard normal.

    With ``count=None`` returns one vector of length n, otherwise a
    (count, n) matrix.  The caller owns ``rng``.
    """
    mean = np.asarray(mean, dtype=float)
    scale_root = np.asarray(scale_root, dtype=float)
    if mean.shape != (n,) or scale_root.shape != (n, n):
        raise DimensionMismatch(
            f"mean {mean.shape} / scale_root {scale_root.shape} do not match dim {n}"
        )
    if count is None:
        return mean + scale_root @ rng.standard_normal(n)
    return mean + rng.standard_normal((count, n)) @ scale_root.T


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Coerce an int seed (or pass through a SeedSequence) for splitting."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def substream(seed, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under ``seed`` (counter-based split).

    Pure: repeated calls with equal arguments return identically seeded
    generators, and distinct keys give statistically independent streams.
    """
    root = as_seed_sequence(seed)
    child = np.random.SeedSequence(
        entropy=root.entropy, spawn_key=tuple(root.spawn_key) + key
    )
    return np.random.Generator(np.random.PCG64(child))
