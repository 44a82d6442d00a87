"""
Error-function family on real scalars: erf, erfc and erfcx(x) = exp(x^2) erfc(x).

|x| < 2 uses the positive-term Maclaurin series of erf; x >= 2 uses the
Laplace continued fraction, evaluated with the modified Lentz algorithm,
and erfcx is the primitive quantity there so that large arguments never
overflow.
"""

from __future__ import annotations

import math

from .errors import ConvergenceError, DomainError

SERIES_LIMIT = 2.0

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_SQRT_PI = math.sqrt(math.pi)
_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 1000


def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) e^{-x^2} sum_k 2^k x^{2k+1} / (2k+1)!!
    x2 = x * x
    term = x
    total = x
    k = 0
    while abs(term) > 1e-17 * abs(total):
        k += 1
        term *= 2.0 * x2 / (2 * k + 1)
        total += term
    return _TWO_OVER_SQRT_PI * math.exp(-x2) * total


def _laplace_tail(x: float, order: int) -> float:
    """T_k(x) = (k/2) / (x + ((k+1)/2) / (x + ...)) by modified Lentz."""
    f = _TINY
    c = f
    d = 0.0
    for j in range(1, _MAX_TERMS):
        a = 0.5 * (order + j - 1)
        d = x + a * d
        if d == 0.0:
            d = _TINY
        c = x + a / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            return f
    raise ConvergenceError(f"erfcx continued fraction did not converge at x={x!r}")


def erf(x: float) -> float:
    if math.isnan(x):
        return x
    if abs(x) < SERIES_LIMIT:
        return _erf_series(x)
    return math.copysign(1.0 - erfc(abs(x)), x)


def erfc(x: float) -> float:
    """Complementary error function, relative accuracy ~1e-13 on |x| <= 10."""
    if math.isnan(x):
        return x
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x < SERIES_LIMIT:
        return 1.0 - _erf_series(x)
    if math.isinf(x):
        return 0.0
    return erfcx(x) * math.exp(-x * x)


def erfcx(x: float) -> float:
    """exp(x^2) * erfc(x) for x >= 0, without intermediate overflow."""
    if math.isnan(x):
        return x
    if x < 0.0:
        raise DomainError(f"erfcx is only defined here for x >= 0, got {x!r}")
    if x < SERIES_LIMIT:
        return math.exp(x * x) * (1.0 - _erf_series(x))
    if math.isinf(x):
        return 0.0
    return 1.0 / (_SQRT_PI * (x + _laplace_tail(x, 1)))


def erfcx_tail(x: float, order: int = 1) -> float:
    """
    Tail T_k of erfcx(x) = 1 / (sqrt(pi) (x + T_1(x))), T_k = (k/2) / (x + T_{k+1}).

    Lets callers form 1 - sqrt(pi) x erfcx(x) = T_1 / (x + T_1) and similar
    combinations without cancellation at large x. Orders 1 and 2 only.
    """
    if order not in (1, 2):
        raise DomainError(f"erfcx_tail supports order 1 or 2, got {order!r}")
    if math.isnan(x):
        return x
    if x < 0.0:
        raise DomainError(f"erfcx_tail is only defined here for x >= 0, got {x!r}")
    if x >= SERIES_LIMIT:
        return _laplace_tail(x, order)
    t1 = 1.0 / (_SQRT_PI * erfcx(x)) - x
    if order == 1:
        return t1
    return 0.5 / t1 - x
