"""Joint moments of traces of powers.

Two independent routes are provided. The Gaussian side evaluates the
closed form ``prod_j E[(sqrt(j) Z_j + s_j)^{m_j}]``. The group side extracts
mixed Taylor coefficients of the entire generating function

    D(t) = E[ exp(sum_j t_j Tr U^j) ]

computed as a Gram determinant, by tensor-product trapezoid quadrature on
circles in each active ``t_j``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple

import numpy as np

from .detform import _matrices
from .fredholm import ConvergenceError
from .groups import GroupKind, GroupSpec, eta
from .symbols import fourier_from_samples

__all__ = [
    "Partition",
    "partitions",
    "z_lambda_sum",
    "verify_exponential_formula",
    "moment_range",
    "GaussianMoment",
    "gaussian_factor_moment",
    "gaussian_side_moment",
    "group_moment_exact",
    "MomentEntry",
    "moment_identity_check",
    "moments_agree",
    "MOMENT_TOL",
]

MAX_PARTITION_WEIGHT = 30


@dataclass(frozen=True)
class Partition:
    """Integer partition with its part multiplicities.

    ``z`` is ``prod_i m_i! i^{m_i}``, the size of the centralizer of a
    permutation with this cycle type.
    """

    parts: tuple[int, ...]

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def multiplicities(self) -> dict[int, int]:
        return dict(sorted(Counter(self.parts).items()))

    @property
    def z(self) -> int:
        return math.prod(math.factorial(mi) * i**mi for i, mi in self.multiplicities.items())

    def __len__(self):
        return len(self.parts)


def _parts(n: int, largest: int):
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _parts(n - first, first):
            yield (first,) + rest


def partitions(weight: int) -> list[Partition]:
    """All partitions of ``weight`` in reverse lexicographic order."""
    if weight < 0:
        raise ValueError("weight must be non-negative")
    if weight > MAX_PARTITION_WEIGHT:
        raise ValueError(f"weight {weight} exceeds the limit {MAX_PARTITION_WEIGHT}")
    return [Partition(p) for p in _parts(weight, weight)]


def z_lambda_sum(weight: int) -> Fraction:
    """``sum_{lambda |- weight} 1 / z_lambda`` in exact arithmetic (always 1)."""
    return sum((Fraction(1, p.z) for p in partitions(weight)), Fraction(0))


def _taylor_coeffs_1d(func, order: int, radius: float, nodes: int) -> np.ndarray:
    """Taylor coefficients ``0..order`` of an entire function by the trapezoid rule."""
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = func(radius * w)
    c = np.fft.fft(vals) / nodes
    return c[: order + 1] / radius ** np.arange(order + 1)


def verify_exponential_formula(gvals, W: int, radius: float = 0.5) -> float:
    """Largest gap between the two sides of the exponential formula up to ``t^W``.

    One side is the Taylor coefficient of ``exp(sum_k g(k) t^k / k)``, the other
    is ``sum_{lambda |- n} z_lambda^{-1} prod_i g(lambda_i)``.
    """
    if W > 12:
        raise ValueError("W must be <= 12")
    g = np.asarray(gvals, dtype=complex)
    if len(g) < W:
        raise ValueError("need g(1..W)")
    k = np.arange(1, W + 1)

    def gen(t):
        return np.exp(np.power.outer(t, k) @ (g[:W] / k))

    taylor = _taylor_coeffs_1d(gen, W, radius, 4 * W + 32)
    resid = 0.0
    for n in range(W + 1):
        side = sum(np.prod([g[i - 1] for i in p.parts]) / p.z for p in partitions(n))
        resid = max(resid, abs(taylor[n] - side))
    return float(resid)


def moment_range(spec: GroupSpec) -> int:
    """Largest ``sum_j j m_j`` for which the Gaussian moment identity holds."""
    n = spec.n
    if spec.kind in (GroupKind.O_EVEN_PLUS, GroupKind.O_EVEN_MINUS):
        return 2 * n - 1
    if spec.kind in (GroupKind.O_ODD_PLUS, GroupKind.O_ODD_MINUS):
        return 2 * n
    return 2 * n + 1


def _shift(spec: GroupSpec, j: int) -> float:
    e = eta(j)
    return {
        GroupKind.O_EVEN_PLUS: e,
        GroupKind.O_EVEN_MINUS: -e,
        GroupKind.SP: -e,
        GroupKind.O_ODD_PLUS: -(1 - e),
        GroupKind.O_ODD_MINUS: 1 - e,
    }[spec.kind]


def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def gaussian_factor_moment(j: int, power: int, shift: float) -> float:
    """``E[(sqrt(j) Z + shift)^power]`` by the binomial expansion."""
    total = 0.0
    for r in range(0, power + 1, 2):
        total += math.comb(power, r) * j ** (r // 2) * _double_factorial(r - 1) * shift ** (power - r)
    return float(total)


class GaussianMoment(NamedTuple):
    value: float
    weight: int
    max_weight: int

    @property
    def in_range(self) -> bool:
        return self.weight <= self.max_weight


def _clean(mult: Mapping[int, int]) -> dict[int, int]:
    out = {}
    for j, mj in dict(mult).items():
        j, mj = int(j), int(mj)
        if j < 1 or mj < 0:
            raise ValueError("multiplicities need j >= 1 and m_j >= 0")
        if mj:
            out[j] = mj
    return dict(sorted(out.items()))


def gaussian_side_moment(spec: GroupSpec, mult: Mapping[int, int]) -> GaussianMoment:
    """Gaussian prediction for ``E[prod_j (Tr U^j)^{m_j}]`` and its validity range."""
    mult = _clean(mult)
    value = math.prod(gaussian_factor_moment(j, mj, _shift(spec, j)) for j, mj in mult.items())
    weight = sum(j * mj for j, mj in mult.items())
    return GaussianMoment(float(value), weight, moment_range(spec))


def _auto_radius(j: int, mj: int) -> float:
    # a fraction of the saddle point sqrt(m_j / j) of exp(j t^2 / 2) / t^{m_j}:
    # large enough that cancellation costs little, small enough that few
    # nodes suppress aliasing
    return float(np.clip(0.5 * math.sqrt(mj / j), 0.2, 1.5))


def _node_count(j: int, mj: int, r: float, q: int, eps: float = 1e-14) -> int:
    """Nodes so that the aliased coefficient ``m_j + Q`` is below ``eps`` relative.

    The coefficients of ``D`` in ``t_j`` are bounded using the Gaussian
    envelope ``(j r^2/2)^{k/2} / (k/2)!`` inflated by the ``e^{2 q |t|}``
    growth that holds for every ``D``.
    """
    a = 0.5 * j * r * r

    def log_c(k):
        return 0.5 * k * math.log(a) - math.lgamma(0.5 * k + 1) + 2 * q * r

    target = log_c(mj) - 2 * q * r + math.log(eps)
    Q = mj + 6
    while log_c(mj + Q) > target and Q < 400:
        Q += 1
    return Q


def _generating_grid(spec: GroupSpec, js: list[int], grids: list[np.ndarray]) -> np.ndarray:
    """``D(t)`` on the tensor grid ``grids[0] x grids[1] x ...``.

    The symbol factors as ``prod_j exp(2 t_j cos(j theta))``, so each factor
    is sampled once per node of its own variable and the grid values are
    formed by products.
    """
    q = spec.num_angles
    J = max(js)
    tmax = max(float(np.max(np.abs(g))) for g in grids)
    K = 2 * q + 2
    # exp(2 t cos(j theta)) has coefficients ~ |t|^{k/j} / (k/j)!; the grid
    # must hold every coefficient above roundoff without aliasing onto -K..K
    M = 1 << max(5, math.ceil(math.log2(2 * K + 2 + J * (2 * math.e * tmax + 40))))
    theta = 2 * np.pi * np.arange(M) / M
    factors = [np.exp(2 * g[:, None] * np.cos(j * theta)) for j, g in zip(js, grids)]
    shape = tuple(len(g) for g in grids)
    total = math.prod(shape)
    out = np.empty(total, dtype=complex)
    chunk = max(1, int(2**20 // M))
    for s in range(0, total, chunk):
        idx = np.unravel_index(np.arange(s, min(s + chunk, total)), shape)
        vals = factors[0][idx[0]]
        for f, i in zip(factors[1:], idx[1:]):
            vals = vals * f[i]
        c = fourier_from_samples(vals, K)
        out[s:s + chunk] = np.linalg.det(_matrices(c, K, q, spec.variant, gram=True))
    return out.reshape(shape)


def _extract(spec, js, ms, radii, nodes, det_shift):
    grids = [r * np.exp(2j * np.pi * np.arange(Q) / Q) for r, Q in zip(radii, nodes)]
    with np.errstate(over="ignore", invalid="ignore"):
        D = _generating_grid(spec, js, grids)
        if det_shift is not None:
            for axis, (g, sh) in enumerate(zip(grids, det_shift)):
                shape = [1] * len(grids)
                shape[axis] = len(g)
                D = D * np.exp(sh * g).reshape(shape)
    if not np.all(np.isfinite(D)):
        return None
    # mixed coefficient via an n-dimensional FFT; pick index (m_1, ..., m_r)
    coef = np.fft.fftn(D)[tuple(ms)] / math.prod(nodes)
    coef /= math.prod(r**mj for r, mj in zip(radii, ms))
    return coef * math.prod(math.factorial(mj) for mj in ms)


def group_moment_exact(
    spec: GroupSpec,
    mult: Mapping[int, int],
    *,
    include_deterministic: bool = False,
    radius: float | None = None,
    tol: float = 1e-10,
) -> float:
    """Exact ``E[prod_j (Tr U^j)^{m_j}]`` over the random eigenvalues.

    Parameters
    ----------
    spec : GroupSpec
    mult : mapping j -> m_j
    include_deterministic : bool
        Add ``sum_d d^j`` from the forced +-1 eigenvalues to each ``Tr U^j``
        before taking powers.
    radius : float, optional
        Common contour radius. By default each variable uses a radius near
        the saddle point of its Gaussian generating function, which keeps
        the trapezoid sum free of cancellation.
    tol : float
        The extraction is repeated with four more nodes per variable; the
        two values must agree to this relative level, otherwise
        :class:`ConvergenceError` is raised.

    Examples
    --------
    >>> from haartraces.groups import group_spec
    >>> round(group_moment_exact(group_spec("sp", 2), {2: 2}), 10)
    3.0
    """
    mult = _clean(mult)
    if not mult:
        return 1.0
    weight = sum(j * mj for j, mj in mult.items())
    if weight > 16 and spec.num_angles > 6:
        raise ValueError("group_moment_exact is limited to weight <= 16 or num_angles <= 6")
    js = list(mult)
    ms = [mult[j] for j in js]
    det_shift = None
    if include_deterministic and spec.det_eigs:
        det_shift = np.array([float(sum(d**j for d in spec.det_eigs)) for j in js])
    radii = [radius if radius is not None else _auto_radius(j, mj) for j, mj in zip(js, ms)]
    q = spec.num_angles
    for _ in range(6):
        nodes = [_node_count(j, mj, r, q) for j, mj, r in zip(js, ms, radii)]
        first = _extract(spec, js, ms, radii, nodes, det_shift)
        check = _extract(spec, js, ms, radii, [Q + 4 for Q in nodes], det_shift)
        if first is None or check is None:
            radii = [0.5 * r for r in radii]
            continue
        if abs(first - check) <= tol * max(1.0, abs(check)):
            return float(check.real)
        raise ConvergenceError("contour extraction did not stabilize", (complex(first), complex(check)))
    raise ConvergenceError("generating function overflowed at every contour radius tried")


class MomentEntry(NamedTuple):
    mult: dict
    weight: int
    group: float
    gaussian: float
    in_range: bool
    passed: bool

    @property
    def discrepancy(self) -> float:
        return abs(self.group - self.gaussian)


MOMENT_TOL = 1e-7


def moments_agree(group: float, gaussian: float, tol: float = MOMENT_TOL) -> bool:
    """Relative agreement; absolute near zero, where many odd moments vanish."""
    return abs(group - gaussian) <= tol * max(1.0, abs(gaussian))


def moment_identity_check(spec: GroupSpec, max_weight: int) -> list[MomentEntry]:
    """Compare both routes for every multiplicity vector of weight ``1..max_weight``.

    Out-of-range entries are reported with ``passed`` telling whether the
    two values happen to agree; only in-range failures indicate an error.
    """
    entries = []
    for w in range(1, max_weight + 1):
        for p in partitions(w):
            mult = p.multiplicities
            gauss = gaussian_side_moment(spec, mult)
            grp = group_moment_exact(spec, mult)
            entries.append(
                MomentEntry(mult, w, grp, gauss.value, gauss.in_range, moments_agree(grp, gauss.value))
            )
    return entries
