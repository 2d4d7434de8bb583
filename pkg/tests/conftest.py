import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.integrate import cumulative_simpson
from scipy.special import kolmogi

from skewentropy import distributions as ds

settings.register_profile(
    "ci",
    deadline=None,
    derandomize=True,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def random_spd(rng: np.random.Generator, n: int, jitter: float = 0.5) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return a @ a.T + jitter * np.eye(n)


def random_skew_entries(
    rng: np.random.Generator, n: int, m: int, max_norm: float = 0.85
) -> np.ndarray:
    """Entries with spectral norm (max ||Delta a|| over unit a) below max_norm."""
    d = rng.uniform(-0.9, 0.9, size=(n, m))
    top = np.linalg.svd(d, compute_uv=False)[0]
    if top >= max_norm:
        d *= max_norm / top * rng.uniform(0.5, 0.99)
    return d


def random_skew_matrix(rng, n, m, max_norm: float = 0.85) -> ds.SkewnessMatrix:
    return ds.SkewnessMatrix.from_matrix(random_skew_entries(rng, n, m, max_norm))


def quadrature_cdf(logpdf, lo: float, hi: float, n_grid: int = 8193):
    """Callable CDF built by cumulative Simpson integration of exp(logpdf)."""
    grid = np.linspace(lo, hi, n_grid)
    pdf = np.exp(np.asarray(logpdf(grid), dtype=float))
    cdf = np.concatenate([[0.0], cumulative_simpson(pdf, x=grid)])
    return lambda x: np.interp(x, grid, cdf)


def ks_statistic(draws: np.ndarray, cdf) -> float:
    x = np.sort(np.asarray(draws, dtype=float))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    return float(kolmogi(alpha)) / np.sqrt(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
