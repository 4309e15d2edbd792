"""Drift MLEs, the log-likelihood, and noise-parameter recovery.

All drift estimators are algebraic functions of the sufficient statistics
(S, I, J, K, w) produced by the transform engine:

    joint:      alpha_hat = gamma (S K - I J) / (w K - J^2)
                beta_hat  = (S J - w I) / (w K - J^2)
    known beta: alpha_tilde = (gamma / w) (S + beta J)
    known alpha: beta_tilde = ((alpha / gamma) J - I) / K
    mean-level form: mu_hat = gamma (S K - I J) / (S J - w I), kappa_hat = beta_hat

and the log-likelihood ratio against the zero-drift measure is

    (alpha/gamma) S - beta I - alpha^2 w / (2 gamma^2)
        + (alpha beta / gamma) J - beta^2 K / 2.

The noise scale is recovered without the drift parameters: the transformed
process Z is a Gaussian martingale with bracket gamma^2 w(t), so the sum of
squared panel increments of Z divided by w(T) converges to gamma^2.  The
roughness index is recovered from the dyadic ratio of second-difference
variations, which annihilate the smooth drift to first order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .transforms import SufficientStats, constants, shared_engine

_QV_MAX_BLOCKS = 2048
_MIN_RECOVERY_N = 4096

_VARIANTS = ("joint", "alpha-only", "beta-only", "mu-kappa")


class DegenerateStatsError(ValueError):
    """Estimator denominator vanished; the path is constant or degenerate."""


@dataclass(frozen=True)
class DriftEstimate:
    """A drift-parameter estimate plus the context it was computed in.

    For the "mu-kappa" variant the fields hold (mu_hat, kappa_hat): the
    mean-level and reversion-speed parameterization of the same drift.
    """

    alpha_hat: float
    beta_hat: float
    variant: str
    horizon: float
    hurst: float
    gamma: float

    def __post_init__(self) -> None:
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


def _joint_denominator(stats: SufficientStats) -> float:
    denom = stats.w * stats.K - stats.J**2
    if not denom > 0.0:
        raise DegenerateStatsError(f"w K - J^2 = {denom}; path carries no slope information")
    return denom


def mle_joint(stats: SufficientStats, gamma: float) -> DriftEstimate:
    denom = _joint_denominator(stats)
    alpha_hat = gamma * (stats.S * stats.K - stats.I * stats.J) / denom
    beta_hat = (stats.S * stats.J - stats.w * stats.I) / denom
    return DriftEstimate(
        alpha_hat=alpha_hat,
        beta_hat=beta_hat,
        variant="joint",
        horizon=stats.horizon,
        hurst=stats.hurst,
        gamma=gamma,
    )


def mle_alpha(stats: SufficientStats, gamma: float, beta_known: float) -> float:
    """MLE of the level parameter when the reversion parameter is known."""
    return gamma / stats.w * (stats.S + beta_known * stats.J)


def mle_beta(stats: SufficientStats, gamma: float, alpha_known: float) -> float:
    """MLE of the reversion parameter when the level parameter is known."""
    if not stats.K > 0.0:
        raise DegenerateStatsError("K = 0; path carries no slope information")
    return (alpha_known / gamma * stats.J - stats.I) / stats.K


def mle_mu_kappa(stats: SufficientStats, gamma: float) -> DriftEstimate:
    """Joint MLE in the (mean level, reversion speed) parameterization.

    Identical to mle_joint up to the reparameterization mu = alpha/beta,
    kappa = beta; kept as its own closed form so the identity is testable.
    """
    _joint_denominator(stats)
    mu_denom = stats.S * stats.J - stats.w * stats.I
    if mu_denom == 0.0:
        raise DegenerateStatsError("S J - w I = 0; mean level is unidentified")
    mu_hat = gamma * (stats.S * stats.K - stats.I * stats.J) / mu_denom
    kappa_hat = mu_denom / (stats.w * stats.K - stats.J**2)
    return DriftEstimate(
        alpha_hat=mu_hat,
        beta_hat=kappa_hat,
        variant="mu-kappa",
        horizon=stats.horizon,
        hurst=stats.hurst,
        gamma=gamma,
    )


def loglik(alpha: float, beta: float, stats: SufficientStats, gamma: float) -> float:
    """Log density ratio of the (alpha, beta) drift against zero drift."""
    return (
        alpha / gamma * stats.S
        - beta * stats.I
        - alpha**2 / (2.0 * gamma**2) * stats.w
        + alpha * beta / gamma * stats.J
        - beta**2 / 2.0 * stats.K
    )


def _path_arrays(path) -> tuple[np.ndarray, object]:
    values = getattr(path, "values", None)
    grid = getattr(path, "grid", None)
    if values is None or grid is None:
        raise TypeError("expected a sampled path with .grid and .values")
    return np.asarray(values, dtype=float), grid


def estimate_gamma(path, hurst: float) -> float:
    """Recover the noise scale from the quadratic variation of Z.

    Z is the kernel transform of the path (gamma times the S panel); its
    squared increments over any refining partition sum to gamma^2 w(T).
    The partition size is capped so the weight panel stays affordable at
    large n; the estimate is unbiased at any partition because Z has
    independent Gaussian increments.
    """
    values, grid = _path_arrays(path)
    if grid.n < _MIN_RECOVERY_N:
        raise ValueError(f"noise recovery needs n >= {_MIN_RECOVERY_N}, got {grid.n}")
    blocks = min(grid.n // 16, _QV_MAX_BLOCKS)
    if grid.n % blocks:
        raise ValueError(f"n = {grid.n} not divisible by the {blocks}-block partition")
    engine = shared_engine(grid, hurst, stride=grid.n // blocks)
    z_panel, _ = engine.raw_panels(values[None, :])
    variation = float(np.sum(np.diff(z_panel[0]) ** 2))
    if not variation > 0.0:
        raise DegenerateStatsError("flat path: zero quadratic variation")
    w_T = constants(hurst, 1.0).w(grid.horizon)
    return math.sqrt(variation / w_T)


def estimate_hurst(path) -> float:
    """Recover the roughness index from dyadic second-difference variations.

    V at the full resolution scales like n^(1-2H) times the squared mesh
    to the 2H, so halving the resolution multiplies V by 2^(2H-1) and
    H = 1/2 - log2(V_fine / V_coarse) / 2.
    """
    values, grid = _path_arrays(path)
    if grid.n < _MIN_RECOVERY_N:
        raise ValueError(f"roughness recovery needs n >= {_MIN_RECOVERY_N}, got {grid.n}")
    if grid.n % 2:
        raise ValueError("roughness recovery needs an even n")
    d_fine = values[2:] - 2.0 * values[1:-1] + values[:-2]
    coarse = values[::2]
    d_coarse = coarse[2:] - 2.0 * coarse[1:-1] + coarse[:-2]
    v_fine = float(d_fine @ d_fine)
    v_coarse = float(d_coarse @ d_coarse)
    if not (v_fine > 0.0 and v_coarse > 0.0):
        raise DegenerateStatsError("flat path: zero second-difference variation")
    hurst = 0.5 - 0.5 * math.log2(v_fine / v_coarse)
    if not 0.0 < hurst < 1.0:
        raise DegenerateStatsError(f"second-difference ratio gives H = {hurst:.3f}, outside (0, 1)")
    return hurst
