"""Explicit constants of the Gaussian-approximation bounds.

Everything that can overflow is kept as a natural logarithm; ``m`` may be as
large as ``1e19`` (a corollary gate) without loss.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "log_omega",
    "c1",
    "c2",
    "c3",
    "big_c",
    "BoundConstants",
    "constants",
    "BIG_C_TABLE",
    "big_c_table_check",
    "stirling_log_bounds",
]


def log_omega(m: float) -> float:
    """Log volume of the unit ball in ``R^m``: ``(m/2) log pi - log Gamma(m/2 + 1)``."""
    return 0.5 * m * math.log(math.pi) - float(gammaln(0.5 * m + 1))


def _L(m: float) -> float:
    return math.log(m) + 1.0


def c1(m: float) -> float:
    return (
        (1 + 1 / m) ** (4 / 3)
        / (2 * (1 - m**-3))
        * (1 + m ** (-4 / 3) / math.sqrt(6) * (1 + 1 / m) ** (5 / 3))
        * (math.sqrt(_L(m)) + 1)
        / m ** (5 / 3)
    )


def c2(m: float) -> float:
    L = _L(m)
    top = (
        4 * m * m * L
        + 2 * math.exp(1 / 3) * (m + 1) ** 2 * L
        + (2 + m**-3) * m * (m + 1)
        + (m + 1) ** (8 / 3) * (math.sqrt(L) + 1) ** 2
    )
    return top / ((m + 1) ** (8 / 3) * L)


def c3(m: float) -> float:
    num = math.exp(0.5 * (1 + 1 / (2 * m**3))) * (1 + 1 / m) ** 2
    den = math.sqrt(2) * (1 - math.exp(1 / (2 * m * m)) / (24 * math.sqrt(3) * m**4))
    return num / den


def big_c(m: float) -> float:
    """``C(m) = (1 - c1(m))^2 / (4 c2(m))``."""
    return (1 - c1(m)) ** 2 / (4 * c2(m))


@dataclass(frozen=True)
class BoundConstants:
    m: int
    n: int
    N: float
    Omega_m: float
    log_Omega_m: float
    Lambda1: float
    c1: float
    c2: float
    c3: float
    bigC: float


def constants(m: int, n: int) -> BoundConstants:
    """All scalar constants at ``(m, n)``; ``N = n / m``.

    >>> round(constants(2, 16).Lambda1, 5)
    3.07406
    """
    if m < 2 or n < 1:
        raise ValueError("constants need m >= 2 and n >= 1")
    lo = log_omega(m)
    return BoundConstants(
        m=m,
        n=n,
        N=n / m,
        Omega_m=math.exp(lo) if lo < 700 else math.inf,
        log_Omega_m=lo,
        Lambda1=n / (2 * m * math.sqrt(_L(m))),
        c1=c1(m),
        c2=c2(m),
        c3=c3(m),
        bigC=big_c(m),
    )


# lower bounds for C(m) as tabulated alongside the n >= m^4 corollary
BIG_C_TABLE = {
    7: 0.052, 8: 0.056, 9: 0.059, 10: 0.062, 20: 0.077, 30: 0.085,
    40: 0.091, 50: 0.095, 100: 0.106, 500: 0.125, 1000: 0.131,
}


def big_c_table_check() -> list[dict]:
    """``C(m)`` against each tabulated lower bound."""
    rows = []
    for m, tab in BIG_C_TABLE.items():
        val = big_c(m)
        rows.append({"m": m, "computed": val, "tabulated": tab, "pass": val >= tab})
    return rows


def stirling_log_bounds(x):
    """Logs of the Stirling bracket ``sqrt(2 pi) x^{x+1/2} e^{-x} (1, e^{1/(12x)})`` around ``Gamma(x+1)``."""
    x = np.asarray(x, dtype=float)
    lower = 0.5 * math.log(2 * math.pi) + (x + 0.5) * np.log(x) - x
    return lower, lower + 1 / (12 * x)
