"""Hankel operators, truncated Fredholm determinants and their identities.

A :class:`HankelOp` stands for ``sign * Q_p H(e^{-i s theta} c) Q_p`` with
``H(c) = (c_{j+k+1})_{j,k>=0}``: entry ``(j, k)`` is ``c_{j+k+1+s}`` when
both ``j, k >= p`` and zero otherwise. Every symbol used here is entire, so
its Fourier table is certified to be negligible beyond ``K`` and the Hankel
matrix built from it has finitely many nonzero rows; the Fredholm
determinant of that matrix is then an ordinary finite determinant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .detform import gram_matrix, slogdet
from .groups import GroupSpec
from .symbols import FourierTable, build_test_function, default_truncation, fourier_coeffs

__all__ = [
    "ConvergenceError",
    "HankelOp",
    "FredholmResult",
    "Diagnostics",
    "BE_CASES",
    "fredholm_det_truncated",
    "operator_diagnostics",
    "basor_ehrhardt_sides",
    "verify_basor_ehrhardt",
    "char_fn_fredholm",
    "char_fn_operator",
    "upsilon_bound",
]


class ConvergenceError(RuntimeError):
    """A truncation did not stabilize; carries the last two values."""

    def __init__(self, message, values=()):
        super().__init__(message)
        self.values = tuple(values)


@dataclass(frozen=True)
class HankelOp:
    base_symbol: FourierTable
    shift: int = 0
    sign: int = 1
    projection_n: int = 0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.projection_n < 0:
            raise ValueError("projection_n must be >= 0")

    def d(self, l):
        """Effective coefficients ``d_l = c_{l + shift}``."""
        return self.base_symbol.coef(np.asarray(l) + self.shift)

    @property
    def support_end(self) -> int:
        """Number of rows (past the projection) that can be nonzero."""
        last = self.base_symbol.K - self.shift - 1  # largest j+k with d_{j+k+1} in table
        return max(0, last - 2 * self.projection_n + 1)

    def block(self, M: int) -> np.ndarray:
        """``M x M`` block on rows/columns ``p .. p+M-1``, sign included."""
        p = self.projection_n
        idx = np.arange(M)
        jk = idx[:, None] + idx[None, :] + 2 * p + 1
        return self.sign * self.d(jk)


class FredholmResult(NamedTuple):
    value: complex
    tail: float
    size: int
    converged: bool
    previous: complex


class Diagnostics(NamedTuple):
    trace: complex
    hs_norm: float
    trace_tail: float
    hs_tail: float


def _coef_tail(op: HankelOp, start: int) -> float:
    """Sum of ``|d_l|`` for ``l >= start`` (inside the table) plus the table's own tail."""
    l = np.arange(start, op.base_symbol.K - op.shift + 1)
    inside = float(np.sum(np.abs(op.d(l)))) if len(l) else 0.0
    return inside + op.base_symbol.tail


def fredholm_det_truncated(
    op: HankelOp,
    M: int | None = None,
    *,
    tol: float = 1e-11,
    cap: int = 2048,
) -> FredholmResult:
    """``det(I + sign * Q_p H Q_p)`` by block truncation.

    The block size starts at ``M`` (default 8) and doubles until two
    successive determinants agree to ``tol`` or the block covers every
    nonzero row of the table, in which case the value is exact for the
    tabulated symbol. Hitting ``cap`` first returns ``converged=False``.
    """
    p = op.projection_n
    need = 2 * (p + (M or 1)) + 1 + abs(op.shift)
    if M is not None and op.base_symbol.K < need:
        raise ValueError(f"symbol table K={op.base_symbol.K} too small; need {need}")
    full = op.support_end
    size = min(M or 8, full)
    if size == 0:
        return FredholmResult(1.0 + 0j, _coef_tail(op, 2 * p + 1), 0, True, 1.0 + 0j)

    def det_at(sz):
        return slogdet(np.eye(sz) + op.block(sz), check_condition=False).value

    prev = det_at(size)
    while True:
        if size >= full:
            return FredholmResult(prev, _coef_tail(op, 2 * (p + size) + 1), size, True, prev)
        nxt = min(2 * size, full, cap)
        if nxt == size:
            return FredholmResult(prev, _coef_tail(op, 2 * (p + size) + 1), size, False, prev)
        cur = det_at(nxt)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return FredholmResult(cur, _coef_tail(op, 2 * (p + nxt) + 1), nxt, True, prev)
        size, prev_old, prev = nxt, prev, cur
        if size >= cap:
            return FredholmResult(cur, _coef_tail(op, 2 * (p + size) + 1), size, False, prev_old)


def operator_diagnostics(op: HankelOp, M: int | None = None) -> Diagnostics:
    """Trace and Hilbert-Schmidt norm of ``sign * Q_p H Q_p``.

    Both use every tabulated coefficient (or the ``M x M`` block when ``M``
    is given); the attached tails bound what the truncation drops, using
    ``|d_l|`` summed beyond the block and the table tail.
    """
    p = op.projection_n
    if M is None:
        M = op.support_end
    if M == 0:
        return Diagnostics(0j, 0.0, _coef_tail(op, 2 * p + 1), _coef_tail(op, 2 * p + 1))
    j = np.arange(M)
    trace = op.sign * complex(np.sum(op.d(2 * (j + p) + 1)))
    # entries with j + k + 1 = l inside the block: multiplicity of l
    l = np.arange(2 * p + 1, 2 * (p + M))
    mult = np.minimum(l - 2 * p, 2 * M - (l - 2 * p))
    hs = math.sqrt(float(np.sum(mult * np.abs(op.d(l)) ** 2)))
    trace_tail = _coef_tail(op, 2 * (p + M) + 1)
    l_rest = np.arange(2 * (p + M), op.base_symbol.K - op.shift + 1)
    hs_tail = math.sqrt(float(np.sum((l_rest - 2 * p) * np.abs(op.d(l_rest)) ** 2))) if len(l_rest) else 0.0
    hs_tail += op.base_symbol.tail
    return Diagnostics(trace, hs, trace_tail, hs_tail)


# case -> (lhs variant, hankel sign, parity of the exponential sum, sign of
# that sum, shift of the Hankel symbol: +1 for t^{-1}, -1 for t)
BE_CASES = {
    1: ("-+", +1, "odd", +1, 0),
    2: ("+-", -1, "odd", -1, 0),
    3: ("++", -1, "even", -1, +1),
    4: ("--", +1, "even", +1, -1),
}


def _poly_eval(coeffs: np.ndarray, theta: np.ndarray) -> np.ndarray:
    k = np.arange(len(coeffs))
    return np.exp(1j * np.asarray(theta)[..., None] * k) @ coeffs


def basor_ehrhardt_sides(case: int, bplus, n: int) -> tuple[complex, complex]:
    """Both sides of the Toeplitz+Hankel / Fredholm identity for ``a = exp(b+ + b+~)``.

    The left side is the Gram-normalized determinant of ``a`` (for case 4
    this is half the raw ``phi_{j-k} + phi_{j+k}`` determinant); the right
    side is ``exp(n [log a]_0 +/- sum [log a]_{odd/even} + 1/2 sum k [log a]_k^2)``
    times the Fredholm determinant of ``Q_n H(t^{-/+1} a_+^{-1} a_+~) Q_n``.
    """
    if case not in BE_CASES:
        raise ValueError("case must be 1, 2, 3 or 4")
    variant, hsign, parity, psign, shift = BE_CASES[case]
    bplus = np.atleast_1d(np.asarray(bplus, dtype=complex))

    def b(theta):
        return _poly_eval(bplus, theta) + _poly_eval(bplus, -np.asarray(theta))

    K_fix = max(64, 4 * len(bplus) + 2 * n + 8)
    log_a = fourier_coeffs(b, K_fix)
    a_tab = fourier_coeffs(lambda t: np.exp(b(t)), K_min=K_fix)
    lhs = slogdet(gram_matrix(variant, a_tab, n)).value

    pos = log_a.positive(1)
    k = np.arange(1, len(pos) + 1)
    sel = (k % 2 == 1) if parity == "odd" else (k % 2 == 0)
    expo = n * log_a.coef(0) + psign * np.sum(pos[sel]) + 0.5 * np.sum(k * pos**2)

    def sym(theta):
        theta = np.asarray(theta)
        return np.exp(_poly_eval(bplus, -theta) - _poly_eval(bplus, theta))

    sym_tab = fourier_coeffs(sym, K_min=K_fix)
    res = fredholm_det_truncated(HankelOp(sym_tab, shift=shift, sign=hsign, projection_n=n))
    if not res.converged:
        raise ConvergenceError("Fredholm truncation did not converge", (res.value, res.previous))
    return complex(lhs), complex(np.exp(expo) * res.value)


def verify_basor_ehrhardt(case: int, bplus, n: int) -> float:
    """Relative residual between the two sides of :func:`basor_ehrhardt_sides`."""
    lhs, rhs = basor_ehrhardt_sides(case, bplus, n)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


# (shift, sign) of the Hankel operator for each density variant
_CHARFN_SHIFT = {"-+": (0, +1), "+-": (0, -1), "++": (1, -1), "--": (-1, +1)}


def char_fn_operator(spec: GroupSpec, xi, *, K: int | None = None) -> tuple[HankelOp, float]:
    """Hankel operator of the Fredholm form of ``F`` and the Gaussian prefactor norm."""
    tf = build_test_function(spec, xi)
    q = spec.num_angles
    extra, sign = _CHARFN_SHIFT[spec.variant]
    shift = 2 * q + extra
    if K is None:
        k_min = max(default_truncation(tf.m, tf.rho, q), 2 * shift + 16)
        table = fourier_coeffs(tf.exp_2im_gplus, K_min=k_min)
    else:
        table = fourier_coeffs(tf.exp_2im_gplus, K)
    return HankelOp(table, shift=shift, sign=sign), tf.norm


def char_fn_fredholm(spec: GroupSpec, xi, *, K: int | None = None) -> complex:
    """``exp(-|xi|^2 / 2) det(1 +/- H(e^{-i s theta} e^{2 Im g_+}))``."""
    op, norm = char_fn_operator(spec, xi, K=K)
    res = fredholm_det_truncated(op)
    if not res.converged:
        raise ConvergenceError("Fredholm truncation did not converge", (res.value, res.previous))
    return complex(math.exp(-0.5 * norm**2) * res.value)


def upsilon_bound(upsilon: float) -> float:
    """``e^U (e^{(U+1)^2/2} + 1) U``: bound on ``|1 - det(1+K)|`` with ``U = max(|Tr K|, |K|_2)``."""
    return math.exp(upsilon) * (math.exp(0.5 * (upsilon + 1) ** 2) + 1) * upsilon
