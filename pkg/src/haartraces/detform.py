"""Finite-n expectations as Toeplitz+Hankel / Gram determinants.

For a symbol ``psi`` on ``[-1, 1]`` let ``phi_k`` be the Fourier coefficients
of ``psi(cos theta)``. Then ``E[prod_j psi(x_j)]`` over the ``(a, b)`` Jacobi
ensemble of size ``q`` equals ``det(alpha)``, where ``alpha`` is the Gram
matrix of orthonormal Jacobi polynomials against ``psi``::

    (-,+): alpha_jk = phi_{j-k} + phi_{j+k+1}
    (+,-): alpha_jk = phi_{j-k} - phi_{j+k+1}
    (+,+): alpha_jk = phi_{j-k} - phi_{j+k+2}
    (-,-): alpha_00 = phi_0, alpha_0j = alpha_j0 = sqrt(2) phi_j,
           alpha_jk = phi_{j-k} + phi_{j+k}          (j, k >= 1)

The un-normalized ``(-,-)`` matrix ``phi_{j-k} + phi_{j+k}`` has twice the
Gram determinant.
"""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np

from .groups import GroupSpec
from .symbols import (
    FourierTable,
    build_test_function,
    default_truncation,
    fourier_coeffs,
    fourier_from_samples,
)

__all__ = [
    "LogDet",
    "IllConditionedWarning",
    "VARIANTS",
    "slogdet",
    "gram_matrix",
    "toeplitz_hankel_matrix",
    "expectation_gram",
    "toeplitz_hankel_det",
    "char_fn_det",
    "char_fn_det_many",
]

VARIANTS = ("-+", "+-", "++", "--")
COND_WARN = 1e12


class IllConditionedWarning(RuntimeWarning):
    pass


class LogDet(NamedTuple):
    """Determinant as ``phase * exp(logabs)``."""

    phase: complex
    logabs: float

    @property
    def value(self) -> complex:
        if self.logabs == -math.inf:
            return 0j
        return complex(self.phase * math.exp(self.logabs))


def slogdet(mat: np.ndarray, *, check_condition: bool = True) -> LogDet:
    """LU-based log-determinant; warns when the matrix is badly conditioned."""
    if check_condition and mat.size:
        cond = np.linalg.cond(mat)
        if not np.isfinite(cond) or cond > COND_WARN:
            warnings.warn(
                f"determinant of a matrix with condition number {cond:.3g}",
                IllConditionedWarning,
                stacklevel=3,
            )
    sign, logabs = np.linalg.slogdet(mat)
    return LogDet(complex(sign), float(logabs))


def _check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return variant


def _required_K(size: int) -> int:
    return 2 * size + 2


def _coef_stack(coeffs: np.ndarray, K: int, idx: np.ndarray) -> np.ndarray:
    """Gather ``c[..., idx]`` from two-sided stacks; zero outside ``-K..K``."""
    inside = np.abs(idx) <= K
    out = coeffs[..., np.where(inside, idx + K, 0)]
    return np.where(inside, out, 0)


def _matrices(coeffs: np.ndarray, K: int, size: int, variant: str, gram: bool) -> np.ndarray:
    j = np.arange(size)[:, None]
    k = np.arange(size)[None, :]
    toe = _coef_stack(coeffs, K, j - k)
    if variant == "-+":
        mat = toe + _coef_stack(coeffs, K, j + k + 1)
    elif variant == "+-":
        mat = toe - _coef_stack(coeffs, K, j + k + 1)
    elif variant == "++":
        mat = toe - _coef_stack(coeffs, K, j + k + 2)
    else:
        mat = toe + _coef_stack(coeffs, K, j + k)
        if gram and size:
            scale = np.ones(size)
            scale[0] = 1 / math.sqrt(2)
            mat = mat * scale[:, None] * scale[None, :]
    return mat


def gram_matrix(variant: str, table: FourierTable, size: int) -> np.ndarray:
    """Gram matrix of the orthonormal Jacobi polynomials against the symbol."""
    _check_variant(variant)
    return _matrices(table.coefficients, table.K, size, variant, gram=True)


def toeplitz_hankel_matrix(variant: str, table: FourierTable, size: int) -> np.ndarray:
    _check_variant(variant)
    return _matrices(table.coefficients, table.K, size, variant, gram=False)


def _check_truncation(table: FourierTable, size: int):
    if table.K < _required_K(size):
        raise ValueError(
            f"Fourier table truncated at K={table.K}; need K >= {_required_K(size)}"
        )


def expectation_gram(spec: GroupSpec, table: FourierTable, *, log: bool = False):
    """``E[prod_j psi(cos theta_j)]`` over the random eigenangles of ``spec``.

    ``table`` holds the Fourier coefficients of ``psi(cos theta)``. With
    ``log=True`` a :class:`LogDet` is returned instead of a complex number.
    """
    size = spec.num_angles
    _check_truncation(table, size)
    ld = slogdet(gram_matrix(spec.variant, table, size))
    return ld if log else ld.value


def toeplitz_hankel_det(variant: str, table: FourierTable, n: int, *, log: bool = False):
    """Determinant of the literal ``n x n`` matrix ``phi_{j-k} +/- phi_{j+k+delta}``."""
    _check_truncation(table, n)
    ld = slogdet(toeplitz_hankel_matrix(variant, table, n))
    return ld if log else ld.value


def char_fn_det(spec: GroupSpec, xi, *, K: int | None = None) -> complex:
    """Characteristic function ``E exp(i xi . X)`` via the Gram determinant."""
    tf = build_test_function(spec, xi)
    if not np.any(tf.xi):
        return 1.0 + 0j
    if K is None:
        k_min = default_truncation(tf.m, tf.rho, spec.num_angles)
        table = fourier_coeffs(tf.exp_ig, K_min=k_min)
    else:
        table = fourier_coeffs(tf.exp_ig, K)
    return expectation_gram(spec, table)


def char_fn_det_many(spec: GroupSpec, xis, *, K: int | None = None) -> np.ndarray:
    """Vectorized :func:`char_fn_det` over the rows of ``xis``.

    A single truncation is used for the whole batch, sized for the largest
    ``|xi|``; the grid has ``8 (K + 1)`` points rounded up to a power of two.
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    P, m = xis.shape
    q = spec.num_angles
    if K is None:
        rho_max = math.sqrt(math.log(m) + 1) * float(np.max(np.linalg.norm(xis, axis=1), initial=0))
        # exp(i g) has |g| <= 2 sum |xi_k|/sqrt(k); its coefficients are
        # negligible well beyond m * (e * amplitude / 2 + 18)
        amp = float(np.max(np.sum(2 * np.abs(xis) / np.sqrt(np.arange(1, m + 1)), axis=1), initial=0))
        K = max(default_truncation(m, rho_max, q), int(m * (1.4 * amp + 40)))
    M = 1 << max(4, math.ceil(math.log2(8 * (K + 1))))
    theta = 2 * np.pi * np.arange(M) / M
    out = np.empty(P, dtype=complex)
    chunk = max(1, int(2**22 // M))
    kk = np.arange(1, m + 1)
    cos_table = np.cos(np.outer(kk, theta))  # (m, M)
    for start in range(0, P, chunk):
        block = xis[start:start + chunk]
        tfs = [build_test_function(spec, x) for x in block]
        consts = np.array([tf.g.const for tf in tfs])
        coefs = np.array([tf.g.cos_coeffs for tf in tfs])
        g = consts[:, None] + coefs @ cos_table
        c = fourier_from_samples(np.exp(1j * g), K)
        mats = _matrices(c, K, q, spec.variant, gram=True)
        out[start:start + chunk] = np.linalg.det(mats)
    return out
