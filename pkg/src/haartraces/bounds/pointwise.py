"""Pointwise bounds on the characteristic function in three ranges of ``xi``.

Throughout, ``n`` in the formulas is the number of random eigenangles
``q = spec.num_angles`` and ``N = q / m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ..detform import char_fn_det_many
from ..groups import GroupSpec
from .constants import c1, c2
from .theorems import BoundValue

__all__ = ["PointwiseBounds", "pointwise_bounds", "check_charfn_bounds", "ROUNDOFF_FLOOR"]

# absolute resolution of a computed |F| or |F - gaussian|; a bound below
# this cannot be resolved by binary64 determinants and is compared at it
ROUNDOFF_FLOOR = 1e-13
K_REGIME1 = 32 * math.exp(0.5) * (math.exp(9 / 8) + 1) / 15


class PointwiseBounds(tuple):
    """``(regime1a, regime2, regime3)`` as :class:`BoundValue` objects."""

    __slots__ = ()

    def __new__(cls, r1, r2, r3):
        return super().__new__(cls, (r1, r2, r3))

    regime1a = property(lambda self: self[0])
    regime2 = property(lambda self: self[1])
    regime3 = property(lambda self: self[2])


def pointwise_bounds(spec: GroupSpec, xi) -> PointwiseBounds:
    """Evaluate the three right-hand sides at ``xi`` with their gates attached.

    >>> from haartraces.groups import group_spec
    >>> b = pointwise_bounds(group_spec("sp", 8), [0.0, 0.0])
    >>> b.regime1a.value
    0.0
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    m = len(xi)
    n = spec.num_angles
    N = n / m
    r = float(np.linalg.norm(xi))
    L = math.log(m) + 1
    rho = math.sqrt(L) * r

    g1 = "N >= max(2 rho, m)"
    if n >= 1 and N >= max(2 * rho, m):
        if rho == 0:
            val = -math.inf
        else:
            val = (math.log(K_REGIME1) + math.log(m) + rho + 2 * N * math.log(rho)
                   - 0.5 * r * r - float(gammaln(2 * N + 1)))
        b1 = BoundValue("regime1a", val, True, g1, {"rho": rho, "N": N})
    else:
        b1 = BoundValue("regime1a", math.nan, False, g1, {"rho": rho, "N": N})

    g2 = "m >= 2 and n >= m^3"
    if m >= 2 and n >= m**3:
        val = -(1 - c1(m)) ** 2 * min(n * n, r * r) / (c2(m) * (m + 1) ** (8 / 3) * L)
        b2 = BoundValue("regime2", val, True, g2)
    else:
        b2 = BoundValue("regime2", math.nan, False, g2)

    g3 = "m >= 3 and n >= m^3 and xi != 0"
    if m >= 3 and n >= m**3 and r > 0:
        corr = 1 - math.exp(1 / (2 * math.sqrt(n * m))) / (24 * math.sqrt(3) * n * m)
        inner = (0.5 * (1 + 1 / (2 * n)) + 0.5 * math.log(n * m) + 2 * math.log(m + 1)
                 - 0.5 * math.log(2) - math.log(corr) - math.log(r))
        val = 2 * n * math.log(2 * math.e) - 0.5 * math.log(2 * math.pi * n) + n / (4 * m) * inner
        b3 = BoundValue("regime3", val, True, g3)
    else:
        b3 = BoundValue("regime3", math.nan, False, g3)
    return PointwiseBounds(b1, b2, b3)


@dataclass
class RegimeReport:
    name: str
    checked: int = 0
    violations: int = 0
    worst_margin: float = math.inf  # min over checks of rhs - lhs
    rows: list = field(default_factory=list)

    def add(self, lhs: float, bound: BoundValue, xi):
        rhs = bound.value
        self.checked += 1
        ok = lhs <= max(rhs, ROUNDOFF_FLOOR)
        self.violations += not ok
        self.worst_margin = min(self.worst_margin, max(rhs, ROUNDOFF_FLOOR) - lhs)
        self.rows.append({"name": self.name, "gate": bound.gate, "xi": [float(x) for x in xi],
                          "lhs": float(lhs), "rhs": rhs, "margin": float(max(rhs, ROUNDOFF_FLOOR) - lhs), "pass": ok})

    def summary(self) -> dict:
        return {"name": self.name, "checked": self.checked, "violations": self.violations,
                "worst_margin": float(self.worst_margin) if self.checked else None}


def check_charfn_bounds(spec: GroupSpec, xi_samples, *, keep_rows: bool = False) -> dict:
    """Compare the exact ``F`` at each sample with every applicable regime bound.

    Returns a dict keyed by regime name with ``checked``, ``violations`` and
    ``worst_margin``; with ``keep_rows`` the per-sample records are included.
    """
    xs = np.atleast_2d(np.asarray(xi_samples, dtype=float))
    F = char_fn_det_many(spec, xs) if len(xs) else np.empty(0, complex)
    reps = {k: RegimeReport(k) for k in ("regime1a", "regime2", "regime3")}
    for x, f in zip(xs, F):
        b = pointwise_bounds(spec, x)
        gauss = math.exp(-0.5 * float(x @ x))
        if b.regime1a.applicable:
            reps["regime1a"].add(abs(f - gauss), b.regime1a, x)
        if b.regime2.applicable:
            reps["regime2"].add(abs(f), b.regime2, x)
        if b.regime3.applicable:
            reps["regime3"].add(abs(f), b.regime3, x)
    out = {}
    for k, rep in reps.items():
        out[k] = rep.summary()
        if keep_rows:
            out[k]["rows"] = rep.rows
    out["violations"] = sum(r.violations for r in reps.values())
    return out
