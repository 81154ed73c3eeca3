"""Ensemble bookkeeping and joint eigenangle densities.

Five families of Haar-distributed matrices are covered: O(2n)+, O(2n)-,
O(2n+1)+, O(2n+1)- and Sp(2n). Each is tagged with the Jacobi exponents
``(a, b)`` of its eigenvalue density on ``[-1, 1]^q`` and with the forced
eigenvalues at +1/-1 that do not enter that density.

The *density index* ``q`` is the number of random eigenangles. It equals
``n`` for every family except O(2n)-, where it is ``n - 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupKind",
    "GroupSpec",
    "group_spec",
    "eta",
    "mean_trace",
    "eigen_density",
    "log_eigen_density",
    "jacobi_density",
    "jacobi_normalizer",
    "hadamard_sup_bound",
]


class GroupKind(str, enum.Enum):
    O_EVEN_PLUS = "o-even-plus"
    O_EVEN_MINUS = "o-even-minus"
    O_ODD_PLUS = "o-odd-plus"
    O_ODD_MINUS = "o-odd-minus"
    SP = "sp"

    @property
    def is_orthogonal(self) -> bool:
        return self is not GroupKind.SP


# (sign of a, sign of b) per family
_AB = {
    GroupKind.O_EVEN_PLUS: (-1, -1),
    GroupKind.O_EVEN_MINUS: (+1, +1),
    GroupKind.O_ODD_PLUS: (+1, -1),
    GroupKind.O_ODD_MINUS: (-1, +1),
    GroupKind.SP: (+1, +1),
}

_DET_EIGS = {
    GroupKind.O_EVEN_PLUS: (),
    GroupKind.O_EVEN_MINUS: (1, -1),
    GroupKind.O_ODD_PLUS: (1,),
    GroupKind.O_ODD_MINUS: (-1,),
    GroupKind.SP: (),
}


@dataclass(frozen=True)
class GroupSpec:
    """One Haar ensemble at a fixed size.

    Attributes
    ----------
    kind : GroupKind
    n : int
        Size parameter as it appears in the group name (O(2n), Sp(2n), ...).
    ab : tuple of float
        Jacobi exponents, each +1/2 or -1/2.
    num_angles : int
        Number of random eigenangles in ``[0, pi]`` (the density index).
    det_eigs : tuple of int
        Forced eigenvalues at +1 / -1.
    matrix_dim : int
    """

    kind: GroupKind
    n: int
    ab: tuple[float, float]
    num_angles: int
    det_eigs: tuple[int, ...]
    matrix_dim: int

    @property
    def variant(self) -> str:
        """Sign tag such as ``"-+"`` used by the determinant formulas."""
        return "".join("+" if x > 0 else "-" for x in self.ab)

    @property
    def density_index(self) -> int:
        return self.num_angles

    @property
    def det_sign(self) -> int:
        """Determinant of the matrices in this family."""
        return int(np.prod(self.det_eigs)) if self.det_eigs else 1

    def __str__(self) -> str:
        names = {
            GroupKind.O_EVEN_PLUS: "O({})+",
            GroupKind.O_EVEN_MINUS: "O({})-",
            GroupKind.O_ODD_PLUS: "O({})+",
            GroupKind.O_ODD_MINUS: "O({})-",
            GroupKind.SP: "Sp({})",
        }
        return names[self.kind].format(self.matrix_dim)


def group_spec(kind: GroupKind | str, n: int) -> GroupSpec:
    """Build the :class:`GroupSpec` for ``kind`` at size parameter ``n``.

    >>> s = group_spec("o-even-minus", 3)
    >>> s.num_angles, s.det_eigs, s.matrix_dim
    (2, (1, -1), 6)
    """
    kind = GroupKind(kind)
    n = int(n)
    n_min = 2 if kind is GroupKind.O_EVEN_MINUS else 1
    if n < n_min:
        raise ValueError(
            f"{kind.value} needs n >= {n_min} so that at least one random "
            f"eigenangle exists; got n={n}"
        )
    num_angles = n - 1 if kind is GroupKind.O_EVEN_MINUS else n
    det_eigs = _DET_EIGS[kind]
    sa, sb = _AB[kind]
    return GroupSpec(
        kind=kind,
        n=n,
        ab=(0.5 * sa, 0.5 * sb),
        num_angles=num_angles,
        det_eigs=det_eigs,
        matrix_dim=2 * num_angles + len(det_eigs),
    )


def eta(j: int) -> int:
    """1 for even ``j``, 0 for odd ``j``."""
    if j < 1:
        raise ValueError("eta is defined for j >= 1")
    return 1 if j % 2 == 0 else 0


def mean_trace(spec: GroupSpec, k: int, include_deterministic: bool = False) -> float:
    """Mean of ``Tr U^k`` as given by the moment formulas.

    Without ``include_deterministic`` only the random eigenvalues are summed.
    The value is the exact mean whenever ``k`` lies in the moment-identity
    range of the family (see :func:`haartraces.moments.moment_range`).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    e = eta(k)
    if spec.kind is GroupKind.O_EVEN_PLUS:
        mu = e
    elif spec.kind in (GroupKind.O_EVEN_MINUS, GroupKind.SP):
        mu = -e
    elif spec.kind is GroupKind.O_ODD_PLUS:
        mu = -(1 - e)
    else:
        mu = 1 - e
    if include_deterministic:
        mu += sum(d**k for d in spec.det_eigs)
    return float(mu)


def _log_prefactor(q: int, variant: str) -> float:
    power = (q - 1) ** 2 if variant == "--" else q * q
    return power * math.log(2.0) - math.lgamma(q + 1) - q * math.log(math.pi)


def log_eigen_density(spec: GroupSpec, angles) -> np.ndarray:
    """Natural log of :func:`eigen_density`; ``-inf`` where the density vanishes."""
    theta = np.asarray(angles, dtype=float)
    q = spec.num_angles
    if theta.ndim == 0 or theta.shape[-1] != q:
        raise ValueError(f"expected {q} angles on the last axis, got shape {theta.shape}")
    with np.errstate(divide="ignore"):
        out = np.full(theta.shape[:-1], _log_prefactor(q, spec.variant))
        variant = spec.variant
        if variant == "++":
            out = out + np.sum(np.log(np.sin(theta) ** 2), axis=-1)
        elif variant == "-+":
            out = out + np.sum(np.log(np.cos(theta / 2) ** 2), axis=-1)
        elif variant == "+-":
            out = out + np.sum(np.log(np.sin(theta / 2) ** 2), axis=-1)
        c = np.cos(theta)
        for j in range(q):
            for k in range(j + 1, q):
                out = out + np.log((c[..., j] - c[..., k]) ** 2)
    return out


def eigen_density(spec: GroupSpec, angles) -> np.ndarray | float:
    """Joint density of the random eigenangles on ``[0, pi]^q``.

    Product (Weyl) form; ``angles`` may carry leading batch axes. For O(2n)-
    the density is the ``(+,+)`` one at index ``n - 1``.
    """
    val = np.exp(log_eigen_density(spec, angles))
    return float(val) if np.ndim(val) == 0 else val


def jacobi_normalizer(q: int, a: float, b: float) -> float:
    """Closed-form normalizer of the Jacobi-type density on ``[-1, 1]^q``.

    ``pi^q q! / 2^(q^2 - (1-a-b) q + [a<0 and b<0])``.
    """
    indicator = 1 if (a < 0 and b < 0) else 0
    log_z = q * math.log(math.pi) + math.lgamma(q + 1)
    log_z -= (q * q - (1 - a - b) * q + indicator) * math.log(2.0)
    return math.exp(log_z)


def jacobi_density(x, a: float, b: float) -> np.ndarray | float:
    """Eigenvalue density in the ``x_j = cos(theta_j)`` variables."""
    x = np.asarray(x, dtype=float)
    q = x.shape[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.prod((1 - x) ** a * (1 + x) ** b, axis=-1)
        for j in range(q):
            for k in range(j + 1, q):
                val = val * (x[..., j] - x[..., k]) ** 2
    val = val / jacobi_normalizer(q, a, b)
    return float(val) if np.ndim(val) == 0 else val


def hadamard_sup_bound(q: int) -> float:
    """Upper bound ``(2e/pi)^q / sqrt(2 pi q)`` on every eigenangle density."""
    return math.exp(q * math.log(2 * math.e / math.pi) - 0.5 * math.log(2 * math.pi * q))

