"""Right-hand sides of the L2 / total-variation theorems and their corollaries.

Each bound is a :class:`BoundValue` holding its natural log and the gate it
was evaluated under. A bound whose gate fails has ``applicable=False`` and a
``nan`` log; it is never extrapolated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .constants import BoundConstants, constants

__all__ = [
    "BoundValue",
    "BoundReport",
    "APPROX1_GATES",
    "l2_summand_logs",
    "theorem_bounds",
    "maineq_vs_approx1",
]

# (p, m_min): the simplified L2/TV bound holds when n >= m^p and m >= m_min
APPROX1_GATES = ((4, 10**19), (5, 1140), (6, 34), (7, 11), (8, 6), (9, 5), (10, 4))
APPROX2_EPS = 1e-82
# e^{13/24} (e^{9/8} + 1) 16/15: leading constant of the small-xi summand
K_SMALL = 16 / 15 * math.exp(13 / 24) * (math.exp(9 / 8) + 1)


@dataclass(frozen=True)
class BoundValue:
    name: str
    log_value: float
    applicable: bool
    gate: str
    info: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        if not self.applicable:
            return math.nan
        return math.exp(self.log_value) if self.log_value < 709 else math.inf

    @property
    def log10(self) -> float:
        return self.log_value / math.log(10)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "applicable": self.applicable,
            "gate": self.gate,
            "log": self.log_value if self.applicable else None,
            "log10": self.log10 if self.applicable else None,
            "value": self.value if self.applicable else None,
        }
        d.update(self.info)
        return d


def _na(name: str, gate: str, **info) -> BoundValue:
    return BoundValue(name, math.nan, False, gate, info)


def _pow_ge(n: int, m: int, p: int) -> bool:
    """``n >= m**p`` without float rounding for integer inputs."""
    if isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer)):
        return int(n) >= int(m) ** p
    return math.log(n) >= p * math.log(m)


def l2_summand_logs(m: int, n: int, k: BoundConstants | None = None, *, bracket: bool = False) -> list[float]:
    """Logs of the four summands of the L2 bound.

    By default each includes the common prefactor ``sqrt(Omega_m) N^{m/2}``;
    with ``bracket=True`` the bare bracketed terms are returned. Only the
    bracketed terms are decreasing in ``n``: the prefactor grows like a
    power of ``N`` and outweighs the slow Gaussian decay of the third term
    for ``n`` near ``m^3``.
    """
    k = k or constants(m, n)
    N = k.N
    L = math.log(m) + 1
    pre = 0.5 * k.log_Omega_m + 0.5 * m * math.log(N)
    s1 = (
        math.log(K_SMALL) + 1.5 * math.log(m) - 0.5 * (m + 1) * math.log(N)
        + 0.25 * m * math.log(m / 2) + N * (1.5 + math.log(L)) - 0.5 * float(gammaln(2 * N + 1))
    )
    s2 = (
        0.5 * math.log(3) + 4 * m * m * math.log(2 * math.e)
        + m * (0.5 * math.log(k.c3) + math.log(m) - math.log(2 * math.pi * n) / N)
        - (1 - k.c1) ** 2 * float(n) ** 2 / (3 * k.c2 * (m + 1) ** (8 / 3) * L)
    )
    s3 = 0.5 * m * math.log(m) - (1 - k.c1) ** 2 * N * N / (4 * k.c2 * (m + 1) ** (8 / 3) * L * L)
    s4 = 0.5 * math.log(m) - 0.5 * (m - 2) * math.log(2 * math.sqrt(L)) - math.log(N) - N * N / (8 * L)
    if bracket:
        return [s1, s2, s3, s4]
    return [pre + s for s in (s1, s2, s3, s4)]


def _approx1_common(m, n, k):
    N = k.N
    L = math.log(m) + 1
    return (
        0.5 * k.log_Omega_m + 1.5 * math.log(m) + N * (1.5 + math.log(L))
        - 0.5 * math.log(N) - 0.5 * float(gammaln(2 * N + 1))
    )


def maineq_vs_approx1(m: int, n: int) -> float:
    """``log(L2 total / simplified bound)`` with the shared leading factor cancelled exactly.

    At m = 1e19 both logs are ~1e59 in size, so subtracting them in
    floating point would lose every significant digit; the first summand
    is therefore compared through its constant ratio ``K / 8``.
    """
    k = constants(m, n)
    s = l2_summand_logs(m, n, k)
    a1 = math.log(8) + 0.25 * m * math.log(m / 2) + _approx1_common(m, n, k)
    terms = [math.log(K_SMALL / 8)] + [x - a1 for x in s[1:]]
    return float(logsumexp(terms))


@dataclass
class BoundReport:
    m: int
    n: int
    constants: BoundConstants
    l2_summands: list
    l2_total: BoundValue
    tv: BoundValue
    corollaries: dict
    remarks: dict

    def to_dict(self) -> dict:
        c = self.constants
        return {
            "m": self.m,
            "n": self.n,
            "constants": {
                "N": c.N, "Omega_m": c.Omega_m, "log_Omega_m": c.log_Omega_m,
                "Lambda1": c.Lambda1, "c1": c.c1, "c2": c.c2, "c3": c.c3, "C": c.bigC,
            },
            "l2_summands": [b.to_dict() for b in self.l2_summands],
            "l2_total": self.l2_total.to_dict(),
            "tv": self.tv.to_dict(),
            "corollaries": {k: v.to_dict() for k, v in self.corollaries.items()},
            "remarks": {k: v.to_dict() for k, v in self.remarks.items()},
        }


def _tv_from_l2(m: int, n: int, l2: BoundValue) -> BoundValue:
    gate = "m >= 4 and (n >= m^4 with L2 <= 3m(2 sqrt(3e) m)^(-m/2), or n >= m^3 with L2 <= 2.5m(2 sqrt(5e) m)^(-m/2))"
    if m < 4 or not l2.applicable:
        return _na("tv_theorem", gate)
    x = l2.log_value
    # x (log 1/x)^{m/4} is increasing only for x <= e^{-m/4}; the L2 value
    # is an upper bound, so the substitution needs that monotone range
    if x > -m / 4:
        return _na("tv_theorem", gate, reason="L2 bound above e^(-m/4)")
    for mult, p, lim in (
        (48, 4, math.log(3 * m) - 0.5 * m * math.log(2 * math.sqrt(3 * math.e) * m)),
        (80, 3, math.log(2.5 * m) - 0.5 * m * math.log(2 * math.sqrt(5 * math.e) * m)),
    ):
        if _pow_ge(n, m, p) and x <= lim:
            val = math.log(2) + 0.25 * m * math.log(mult * m * (-x)) + x
            return BoundValue("tv_theorem", val, True, gate, {"multiplier": mult})
    return _na("tv_theorem", gate, reason="smallness condition on the L2 bound fails")


def _corollaries(m: int, n: int, k: BoundConstants) -> dict:
    out = {}
    N = k.N
    L = math.log(m) + 1
    gate1 = "n >= m^p and m >= m_min for some (p, m_min) in " + str(APPROX1_GATES)
    col = next((pm for pm in APPROX1_GATES if m >= pm[1] and _pow_ge(n, m, pm[0])), None)
    if col is not None:
        common = _approx1_common(m, n, k)
        out["approx1_l2"] = BoundValue(
            "approx1_l2", math.log(8) + 0.25 * m * math.log(m / 2) + common, True, gate1, {"column": col[0]}
        )
        out["approx1_tv"] = BoundValue(
            "approx1_tv",
            math.log(16) + 0.25 * m * math.log(24 * n * m * math.log(N)) + common,
            True, gate1, {"column": col[0]},
        )
    else:
        out["approx1_l2"] = _na("approx1_l2", gate1)
        out["approx1_tv"] = _na("approx1_tv", gate1)

    decay = k.bigC * N * N / ((m + 1) ** (8 / 3) * L * L)
    for name, p, m_l2, m_tv, eps, mult in (
        ("approx2", 4, 7, 27, APPROX2_EPS, 48),
        ("approx3", 3, 68, 10**18, 0.2, 80),
    ):
        ok_n = _pow_ge(n, m, p)
        lead = float(np.logaddexp(0.5 * m * math.log(m), math.log(eps)))
        g2 = f"n >= m^{p}, m >= {m_l2}"
        if ok_n and m >= m_l2:
            out[f"{name}_l2"] = BoundValue(
                f"{name}_l2", 0.5 * k.log_Omega_m + lead + 0.5 * m * math.log(N) - decay, True, g2
            )
        else:
            out[f"{name}_l2"] = _na(f"{name}_l2", g2)
        gt = f"n >= m^{p}, m >= {m_tv:g}"
        if ok_n and m >= m_tv:
            val = (
                0.5 * k.log_Omega_m + 0.25 * m * math.log(mult * k.bigC * m) + lead + m * math.log(N)
                - (2 * m / 3) * math.log(m + 1) - 0.5 * m * math.log(L) - decay
            )
            out[f"{name}_tv"] = BoundValue(f"{name}_tv", val, True, gt)
        else:
            out[f"{name}_tv"] = _na(f"{name}_tv", gt)
    return out


def theorem_bounds(m: int, n: int) -> BoundReport:
    """Evaluate every theorem-level bound at ``(m, n)`` in log space.

    Examples
    --------
    >>> r = theorem_bounds(3, 26)
    >>> r.l2_total.applicable
    False
    """
    k = constants(m, n)
    l2_gate = "m >= 3 and n >= m^3"
    if m >= 3 and _pow_ge(n, m, 3):
        logs = l2_summand_logs(m, n, k)
        bare = l2_summand_logs(m, n, k, bracket=True)
        summands = [
            BoundValue(f"l2_summand_{i + 1}", v, True, l2_gate, {"bracket_log": b})
            for i, (v, b) in enumerate(zip(logs, bare))
        ]
        total = BoundValue("l2_total", float(logsumexp(logs)), True, l2_gate)
    else:
        summands = [_na(f"l2_summand_{i + 1}", l2_gate) for i in range(4)]
        total = _na("l2_total", l2_gate)
    tv = _tv_from_l2(m, n, total)
    cors = _corollaries(m, n, k)

    tv_candidates = [b.log_value for b in [tv] + [v for key, v in cors.items() if key.endswith("_tv")] if b.applicable]
    best_tv = min(tv_candidates) if tv_candidates else math.nan
    N = k.N
    remarks = {}
    for name, p, m_min, env in (
        ("tv_envelope_power", 4, 1000, -0.3 * N * math.log(N)),
        ("tv_envelope_sqrt", 3, 10**19, -0.8 * math.sqrt(N) * math.log(N)),
    ):
        gate = f"n >= m^{p}, m >= {m_min:g}"
        if _pow_ge(n, m, p) and m >= m_min:
            certified = bool(tv_candidates) and best_tv <= env
            remarks[name] = BoundValue(
                name, env, True, gate,
                {"certified": certified, "best_tv_log": best_tv if tv_candidates else None},
            )
        else:
            remarks[name] = _na(name, gate)
    return BoundReport(m, n, k, summands, total, tv, cors, remarks)
