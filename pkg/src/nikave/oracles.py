"""Closed-form reference values for Gaussian coefficient vectors.

Gamma ratios are formed in log space and exponentiated once at the end,
so nothing overflows before N ~ 1e9.

>>> round(c_q(2.0), 12)
1.0
>>> round(moment_ratio_factor(2, 2, 33).value * 33, 12)
1.0
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.integrate import quad
from scipy.special import erf, erfc, gammaln, poch

from .errors import DomainError

_LOG_MAX = math.log(1.7976931348623157e308)
_POCH_MAX_SHIFT = 64.0
_LN2 = math.log(2.0)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, slots=True)
class OracleValue:
    """value == exp(log_scale) unless overflow, in which case only log_scale holds."""

    value: float
    log_scale: float
    overflow: bool = False

    @classmethod
    def from_log(cls, log_scale: float) -> OracleValue:
        if log_scale > _LOG_MAX:
            return cls(math.inf, log_scale, overflow=True)
        return cls(math.exp(log_scale), log_scale)


class TailBounds(NamedTuple):
    lower: float
    upper: float
    exact: float


def _log_gamma_ratio(a: float, b: float) -> float:
    """ln Gamma(a) - ln Gamma(b) for a, b > 0."""
    shift = a - b
    if abs(shift) <= _POCH_MAX_SHIFT:
        ratio = float(poch(b, shift))  # Gamma(b + shift) / Gamma(b)
        if 0.0 < ratio < math.inf:
            return math.log(ratio)
    return float(gammaln(a) - gammaln(b))


def _check_positive_int(name: str, value: int, minimum: int = 1) -> None:
    if value < minimum or int(value) != value:
        msg = f"{name} must be an integer >= {minimum}, provided {name}={value}"
        raise DomainError(msg)


def _check_exponent(q: float) -> None:
    if not (q >= 1.0 and math.isfinite(q)):
        msg = f"exponent must be finite and >= 1, provided {q=}"
        raise DomainError(msg)


def c_q(q: float) -> float:
    """C(q) = (E|g|^q)^(1/q) for g ~ N(0, 1)."""
    _check_exponent(q)
    log_value = (
        -math.log(math.pi) / (2.0 * q)
        + 0.5 * _LN2
        + float(gammaln((q + 1.0) / 2.0)) / q
    )
    return math.exp(log_value)


def moment_ratio_factor(k: int, l: int, N: int) -> OracleValue:  # noqa: E741
    """F with E(|f|_q^k / |f|_2^l) = F * E|f|_q^k.

    F = 2^(-l/2) Gamma((k-l+N)/2) / Gamma((k+N)/2).
    """
    _check_positive_int("k", k)
    _check_positive_int("l", l)
    _check_positive_int("N", N)
    if l >= k + N:
        msg = f"moment ratio needs l < k + N, provided k={k} l={l} N={N}"
        raise DomainError(msg)
    log_value = -0.5 * l * _LN2 + _log_gamma_ratio((k - l + N) / 2, (k + N) / 2)
    return OracleValue.from_log(log_value)


def recip_moment_factor(k: int, l: int, N: int) -> OracleValue:  # noqa: E741
    """F with E(|f|_2^k / |f|_p^l) = F * E(|f|_p^-l).

    F = 2^(k/2) Gamma((k-l+N)/2) / Gamma((N-l)/2).
    """
    _check_positive_int("k", k, minimum=0)
    _check_positive_int("l", l)
    _check_positive_int("N", N)
    if l >= N:
        msg = f"reciprocal moment needs l < N, provided l={l} N={N}"
        raise DomainError(msg)
    log_value = 0.5 * k * _LN2 + _log_gamma_ratio((k - l + N) / 2, (N - l) / 2)
    return OracleValue.from_log(log_value)


def chi_moment(N: int, k: float) -> OracleValue:
    """E|a|_2^k for a ~ N(0, I_N): 2^(k/2) Gamma((N+k)/2) / Gamma(N/2)."""
    _check_positive_int("N", N)
    if not k > -N:
        msg = f"chi moment needs k > -N, provided N={N} k={k}"
        raise DomainError(msg)
    return OracleValue.from_log(0.5 * k * _LN2 + _log_gamma_ratio((N + k) / 2, N / 2))


def expected_qq_norm(q: float, N: int) -> float:
    """E|T|_q^q = C(q)^q N^(q/2); exact for real orthonormal bases with m = N."""
    _check_exponent(q)
    _check_positive_int("N", N)
    return math.exp(q * math.log(c_q(q)) + 0.5 * q * math.log(N))


def gaussian_tail(t: float) -> TailBounds:
    """Mills-ratio bracket of P(|g| >= t) for g ~ N(0, 1); the bracket holds for t > 1."""
    if not t > 0:
        msg = f"tail needs t > 0, provided {t=}"
        raise DomainError(msg)
    density = math.sqrt(2.0 / math.pi) * math.exp(-t * t / 2.0)
    return TailBounds(
        lower=density * (1.0 / t - 1.0 / t**3),
        upper=density / t,
        exact=float(erfc(t / _SQRT2)),
    )


def stirling_ratio_check(x: float) -> float:
    """Gamma(x+1) e^x / (sqrt(2 pi) x^(x+1/2)); tends to 1 from above."""
    if not x > 0:
        msg = f"stirling ratio needs x > 0, provided {x=}"
        raise DomainError(msg)
    log_value = (
        float(gammaln(x + 1.0))
        + x
        - 0.5 * math.log(2.0 * math.pi)
        - (x + 0.5) * math.log(x)
    )
    return math.exp(log_value)


# --- maxima of N i.i.d. |N(0,1)| ----------------------------------------------
def _log_cdf_abs_max(s: float, N: int) -> float:
    """ln P(max_k |g_k| <= s) = N ln erf(s / sqrt 2)."""
    if s <= 0:
        return -math.inf
    inside = float(erf(s / _SQRT2))
    if inside < 0.5:
        return N * math.log(inside)
    return N * math.log1p(-float(erfc(s / _SQRT2)))


def expected_abs_max(N: int) -> float:
    """E max_k |g_k| over N i.i.d. standard normals.

    A lower bound for E|T|_inf / sqrt(N) on real-1d and complex bases, since
    the canonical grid samples are N(0, I_N).
    """
    _check_positive_int("N", N)
    centre = math.sqrt(2.0 * math.log(N)) if N > 1 else 1.0
    upper = centre + 12.0

    def survival(s: float) -> float:
        return -math.expm1(_log_cdf_abs_max(s, N))

    value, _ = quad(survival, 0.0, upper, points=[centre], limit=200)
    return float(value)


def expected_recip_abs_max(N: int, r: float) -> float:
    """E (max_k |g_k|)^-r = r * int_0^inf erf(s/sqrt2)^N s^(-r-1) ds, for N > r."""
    _check_positive_int("N", N)
    if not 0 < r < N:
        msg = f"reciprocal maximum needs 0 < r < N, provided {N=} {r=}"
        raise DomainError(msg)
    centre = math.sqrt(2.0 * math.log(N)) if N > 1 else 1.0

    def integrand(s: float) -> float:
        return math.exp(_log_cdf_abs_max(s, N)) * s ** (-r - 1.0)

    body, _ = quad(integrand, 0.0, centre, limit=200)
    tail, _ = quad(integrand, centre, math.inf, limit=200)
    return float(r * (body + tail))
