"""Entropy, mutual information and KL divergence for skew-normal and
log-skew-normal families with normal kernel."""

__version__ = "0.1.0"

from .distributions import (
    Cfusn,
    Lcfusn,
    LocationScale,
    LogNormal,
    LogSkewNormal,
    MultivariateNormal,
    Normal,
    Partition,
    SkewNormal,
    SkewnessMatrix,
    canonical_cfusn,
    log_pdf,
    marginal,
    mean,
    sample,
    variance,
)
from .entropy import (
    McEstimate,
    entropy_closed,
    entropy_curve,
    entropy_estimate,
    entropy_expanded_cfusn,
    entropy_mc,
    skew_correction,
)
from .information import LsnSpec, kl_lcfusn_vs_lsn, matching_alpha, mutual_information
from .numerics import (
    GaussianKernelResult,
    SymPosDefMatrix,
    chol_decompose,
    mvn_cdf,
    mvn_sample,
    std_normal_cdf,
    substream,
    sym_sqrt,
)
from .oracle import QuadratureConfig, entropy_quadrature, kl_quadrature, mi_quadrature
