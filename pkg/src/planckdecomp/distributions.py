"""Exact laws of the five mode-energy families.

All quantities are dimensionless: energies in units of the quantum
eps0 = h nu, entropies in units of k. Scalar arguments give floats, array
arguments give arrays.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit, gammaln

from .params import DomainError, Kind, ModeParams, MomentSummary, VariableFamily

# Below this beta the dark-part mean and variance switch to their Taylor
# series; the closed forms lose digits to cancellation there.
_DARK_SERIES_BETA = 0.05


def _check_nonneg_int(name, value):
    arr = np.asarray(value)
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind != "f" or np.any(arr != np.floor(arr)):
            raise DomainError(f"{name} must be an integer, got {value!r}")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative, got {value!r}")


def _scalar_or_array(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def gauss_density(y, p: ModeParams):
    """Exponential density beta * exp(-beta y) of the scaled mode energy."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise DomainError("Gauss variable is supported on [0, inf)")
    return _scalar_or_array(p.beta * np.exp(-p.beta * y))


def gauss_cdf(y, p: ModeParams):
    y = np.asarray(y, dtype=float)
    return _scalar_or_array(np.where(y < 0, 0.0, -np.expm1(-p.beta * np.maximum(y, 0.0))))


def dark_density(z, p: ModeParams):
    """Truncated exponential density of the fractional part, support [0, 1)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z >= 1) or np.any(np.isnan(z)):
        raise DomainError("dark variable is supported on [0, 1)")
    return _scalar_or_array(p.beta * np.exp(-p.beta * z) / -math.expm1(-p.beta))


def dark_cdf(z, p: ModeParams):
    z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
    return _scalar_or_array(np.expm1(-p.beta * z) / math.expm1(-p.beta))


def planck_pmf(n, p: ModeParams):
    """Planck-Bose (geometric) mass function (1 - b) b**n."""
    _check_nonneg_int("n", n)
    n = np.asarray(n, dtype=float)
    return _scalar_or_array(-math.expm1(-p.beta) * np.exp(-p.beta * n))


def planck_logpmf(n, p: ModeParams):
    _check_nonneg_int("n", n)
    n = np.asarray(n, dtype=float)
    return _scalar_or_array(math.log(-math.expm1(-p.beta)) - p.beta * n)


def binary_argument(s, p: ModeParams):
    """2**s * beta, the exponent that sets the s-th component's occupation."""
    _check_nonneg_int("s", s)
    return _scalar_or_array(np.ldexp(p.beta, np.asarray(s, dtype=np.int64)))


def binary_occupation(s, p: ModeParams):
    """Return ``(p_empty, p_occupied)`` for the s-th binary component.

    ``p_occupied = 1 / (exp(2**s beta) + 1)``, evaluated as a logistic so
    large ``2**s beta`` underflows to 0 instead of overflowing.
    """
    x = np.asarray(binary_argument(s, p))
    return _scalar_or_array(expit(x)), _scalar_or_array(expit(-x))


def binary_log_occupation(s, p: ModeParams):
    """Log-probabilities ``(log p_empty, log p_occupied)``."""
    x = np.asarray(binary_argument(s, p))
    return _scalar_or_array(-np.logaddexp(0.0, -x)), _scalar_or_array(-np.logaddexp(0.0, x))


def multiplet_rate(m, p: ModeParams):
    """Poisson parameter lambda_m = b**m / m of the m-th multiplet."""
    m = np.asarray(m)
    if np.any(m < 1) or np.any(m != np.floor(m)):
        raise DomainError("multiplet order m must be a positive integer")
    m = m.astype(float)
    return _scalar_or_array(np.exp(-m * p.beta) / m)


def multiplet_pmf(m, l, p: ModeParams):
    """P(x_m = l * m): Poisson mass at count ``l`` with parameter lambda_m."""
    lam = np.asarray(multiplet_rate(m, p))
    _check_nonneg_int("l", l)
    l = np.asarray(l, dtype=float)
    # l * log(lam) with lam > 0 always; 0 * log(lam) is 0.
    return _scalar_or_array(np.exp(l * np.log(lam) - lam - gammaln(l + 1.0)))


def characteristic_function(f: VariableFamily, t, p: ModeParams):
    """E[exp(i t X)] for the family's variable X (in units of eps0)."""
    t = np.asarray(t, dtype=float)
    beta = p.beta
    # 1 - b e^{it} as -expm1(-beta + it): accurate for small beta and exactly
    # 1 - b at t = 0, so every CF is exactly 1 there.
    one_minus_b = -math.expm1(-beta)
    if f.kind is Kind.GAUSS:
        out = 1.0 / (1.0 - 1j * t / beta)
    elif f.kind is Kind.DARK:
        out = -np.expm1(-beta + 1j * t) / one_minus_b / (1.0 - 1j * t / beta)
    elif f.kind is Kind.PLANCK:
        out = one_minus_b / -np.expm1(-beta + 1j * t)
    elif f.kind is Kind.BINARY:
        p_occ = binary_occupation(f.index, p)[1]
        out = 1.0 + p_occ * np.expm1(1j * math.ldexp(1.0, f.index) * t)
    else:
        lam = multiplet_rate(f.index, p)
        out = np.exp(lam * np.expm1(1j * f.index * t))
    return _scalar_or_array(np.asarray(out, dtype=complex))


def dark_mean(beta: float) -> float:
    """1/beta - 1/(e^beta - 1), tending to 1/2 from below as beta -> 0."""
    if beta < _DARK_SERIES_BETA:
        b2 = beta * beta
        return 0.5 - beta / 12.0 * (1.0 - b2 / 60.0 * (1.0 - b2 / 42.0 * (1.0 - b2 / 40.0)))
    return 1.0 / beta - math.exp(-beta) / -math.expm1(-beta)


def dark_variance(beta: float) -> float:
    """Exact variance 1/beta**2 - nbar - nbar**2 of the fractional part."""
    if beta < _DARK_SERIES_BETA:
        b2 = beta * beta
        return 1.0 / 12.0 - b2 / 240.0 + b2 * b2 / 6048.0 - b2**3 / 172800.0 + b2**4 / 5322240.0
    half = 0.5 * beta
    return 1.0 / (beta * beta) - 0.25 / math.sinh(half) ** 2


def entropy_over_k(f: VariableFamily, p: ModeParams) -> float:
    """Shannon (differential, for continuous families) entropy in units of k."""
    beta = p.beta
    if f.kind is Kind.GAUSS:
        return 1.0 - math.log(beta)
    if f.kind is Kind.DARK:
        # -int f log f computed straight from the truncated-exponential density
        return 1.0 - math.log(beta) + math.log(-math.expm1(-beta)) - beta * math.exp(-beta) / -math.expm1(-beta)
    if f.kind is Kind.PLANCK:
        n = p.nbar
        return (1.0 + n) * math.log1p(n) - n * math.log(n)
    if f.kind is Kind.BINARY:
        x = math.ldexp(beta, f.index)
        n = float(expit(-x))
        return n * float(np.logaddexp(0.0, x)) + (1.0 - n) * float(np.logaddexp(0.0, -x))
    m = f.index
    xbar = math.exp(-m * beta)
    return xbar / m * (1.0 + m * beta)


def mean_and_variance(f: VariableFamily, p: ModeParams) -> tuple[float, float]:
    beta = p.beta
    if f.kind is Kind.GAUSS:
        return 1.0 / beta, 1.0 / (beta * beta)
    if f.kind is Kind.DARK:
        return dark_mean(beta), dark_variance(beta)
    if f.kind is Kind.PLANCK:
        n = p.nbar
        return n, n * (1.0 + n)
    if f.kind is Kind.BINARY:
        p_empty, p_occ = binary_occupation(f.index, p)
        w = math.ldexp(1.0, f.index)
        return w * p_occ, w * w * p_occ * p_empty
    m = f.index
    xbar = math.exp(-m * beta)
    return xbar, m * xbar


def moments(f: VariableFamily, p: ModeParams) -> MomentSummary:
    mean, var = mean_and_variance(f, p)
    return MomentSummary(mean=mean, variance=var, entropy_over_k=entropy_over_k(f, p))
