"""Modified Bessel functions of the first kind, real order nu > -1.

Everything is built around log-scale evaluation: the primary internal quantity
is log I_nu(x), from which the scaled value exp(-x) I_nu(x) and the raw value
are derived.  Downstream moment-generating-function code combines these logs
with large positive or negative exponents analytically, so no intermediate
here is allowed to overflow for arguments of practical size.

Evaluation strategy:
  * x <= 30: the ascending power series, accumulated as a running logsumexp of
    per-term logs (all terms are positive for x > 0, so there is no
    cancellation and the log form only has to control dynamic range).
  * x > 30: the large-argument asymptotic expansion
    I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k with eight
    correction terms, which keeps the truncation error below ~1e-11 at the
    crossover for |nu| < 1.

log_gamma uses the Lanczos approximation with Godfrey's published coefficient
table (g = 607/128, 15 terms, ~15 significant digits) and the reflection
formula below 1/2.
"""

from __future__ import annotations

import math

__all__ = [
    "log_gamma",
    "log_bessel_i",
    "bessel_i",
    "bessel_i_scaled",
    "bessel_ratio_even",
]

_SERIES_ASYMPTOTIC_CROSSOVER = 30.0
_ASYMPTOTIC_CORRECTION_TERMS = 8
_SERIES_MAX_TERMS = 600

# Lanczos coefficients, g = 607/128 (Godfrey's table).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_COEFFS = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"log_gamma needs x > 0, got {x!r}")
    if x < 0.5:
        # Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x); both factors positive here.
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for k in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def _check_order(nu: float) -> None:
    if not nu > -1.0:
        raise ValueError(f"Bessel order must be > -1, got {nu!r}")


def _log_series(nu: float, x: float) -> float:
    # sum_j (x/2)^(2j+nu) / (j! Gamma(j+1+nu)), accumulated as a running
    # logsumexp; terms rise to a peak near j ~ x/2 and then decay factorially.
    log_half_x = math.log(0.5 * x)
    running_max = -math.inf
    running_sum = 0.0
    peak = 0.5 * x
    for j in range(_SERIES_MAX_TERMS):
        lt = (2.0 * j + nu) * log_half_x - log_gamma(j + 1.0) - log_gamma(j + 1.0 + nu)
        if lt > running_max:
            running_sum = running_sum * math.exp(running_max - lt) + 1.0
            running_max = lt
        else:
            running_sum += math.exp(lt - running_max)
            # Stop once past the peak and the terms stop mattering.
            if j > peak and lt < running_max - 40.0:
                break
    return running_max + math.log(running_sum)


def _log_asymptotic(nu: float, x: float) -> float:
    mu = 4.0 * nu * nu
    correction = 1.0
    term = 1.0
    for k in range(1, _ASYMPTOTIC_CORRECTION_TERMS):
        term *= -(mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * x)
        correction += term
    return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(correction)


def log_bessel_i(nu: float, x: float) -> float:
    """log I_nu(x) for x > 0, nu > -1.

    This is the primary scaled representation used by the MGF code: the
    caller combines it with exponents like -beta*T before exponentiating.
    """
    _check_order(nu)
    if not x > 0.0:
        raise ValueError(f"log_bessel_i needs x > 0, got {x!r}")
    if x <= _SERIES_ASYMPTOTIC_CROSSOVER:
        return _log_series(nu, x)
    return _log_asymptotic(nu, x)


def bessel_i(nu: float, x: float) -> float:
    """Modified Bessel function of the first kind I_nu(x), x >= 0, nu > -1."""
    _check_order(nu)
    if x < 0.0:
        raise ValueError(f"bessel_i needs x >= 0, got {x!r}")
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        return 0.0 if nu > 0.0 else math.inf
    return math.exp(log_bessel_i(nu, x))


def bessel_i_scaled(nu: float, x: float) -> float:
    """exp(-x) I_nu(x): the overflow-safe evaluation, primary over bessel_i."""
    _check_order(nu)
    if x < 0.0:
        raise ValueError(f"bessel_i_scaled needs x >= 0, got {x!r}")
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        return 0.0 if nu > 0.0 else math.inf
    return math.exp(log_bessel_i(nu, x) - x)


def bessel_ratio_even(nu: float, x: float) -> float:
    """I_nu(|x|) / |x|^nu, an even function of x, finite at 0.

    Evaluated through |x| so evenness holds exactly in floating point.
    At x = 0 the series gives the limit 2^(-nu) / Gamma(1+nu).
    """
    _check_order(nu)
    ax = abs(x)
    if ax == 0.0:
        return math.exp(-nu * math.log(2.0) - log_gamma(1.0 + nu))
    return math.exp(log_bessel_i(nu, ax) - nu * math.log(ax))
