"""Trigonometric test functions and Fourier tables of circle symbols.

Fourier convention: ``c_k = (1/2pi) * int_{-pi}^{pi} f(theta) exp(-i k theta) dtheta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .groups import GroupSpec, mean_trace

__all__ = [
    "TrigPoly",
    "TestFunction",
    "FourierTable",
    "chebyshev_T",
    "build_test_function",
    "hilbert_transform",
    "fourier_coeffs",
    "fourier_from_samples",
    "default_truncation",
]

# complex-argument evaluation is diagnostic only; beyond this |Im theta| the
# exponentials grow like e^{m |t|}
MAX_IMAG = 2.0


@dataclass(frozen=True)
class TrigPoly:
    """Real trigonometric polynomial ``c0 + sum_k c_k cos(k t) + s_k sin(k t)``."""

    const: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cos_coeffs, dtype=float).ravel()
        s = np.asarray(self.sin_coeffs, dtype=float).ravel()
        if c.shape != s.shape:
            raise ValueError("cos and sin coefficient vectors must have equal length")
        object.__setattr__(self, "cos_coeffs", c)
        object.__setattr__(self, "sin_coeffs", s)
        object.__setattr__(self, "const", float(self.const))

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs)

    def __call__(self, theta):
        theta = np.asarray(theta)
        if np.iscomplexobj(theta) and np.max(np.abs(theta.imag), initial=0.0) > MAX_IMAG:
            raise ValueError(f"|Im theta| is capped at {MAX_IMAG}")
        k = np.arange(1, self.degree + 1)
        kt = theta[..., None] * k
        val = self.const + np.cos(kt) @ self.cos_coeffs + np.sin(kt) @ self.sin_coeffs
        return val if np.ndim(val) else val[()]

    def derivative(self, order: int = 1) -> "TrigPoly":
        c, s = self.cos_coeffs, self.sin_coeffs
        k = np.arange(1, self.degree + 1, dtype=float)
        for _ in range(order):
            c, s = k * s, -k * c
        return TrigPoly(0.0, c, s)

    def fourier(self) -> np.ndarray:
        """Two-sided coefficients for indices ``-m..m``."""
        m = self.degree
        out = np.zeros(2 * m + 1, dtype=complex)
        out[m] = self.const
        out[m + 1:] = 0.5 * (self.cos_coeffs - 1j * self.sin_coeffs)
        out[:m] = (0.5 * (self.cos_coeffs + 1j * self.sin_coeffs))[::-1]
        return out

    def l2_norm(self) -> float:
        """Norm for the normalized measure ``dtheta / 2pi``."""
        return math.sqrt(
            self.const**2 + 0.5 * float(np.sum(self.cos_coeffs**2 + self.sin_coeffs**2))
        )


def chebyshev_T(k: int, x):
    """Chebyshev polynomial of the first kind via the three-term recurrence."""
    if k < 0:
        raise ValueError("k must be non-negative")
    x = np.asarray(x, dtype=float)
    t0, t1 = np.ones_like(x), x
    if k == 0:
        return t0 if t0.ndim else float(t0)
    for _ in range(k - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1 if t1.ndim else float(t1)


def hilbert_transform(poly: TrigPoly) -> TrigPoly:
    """Conjugate function: ``cos(k t) -> sin(k t)``, ``sin(k t) -> -cos(k t)``."""
    return TrigPoly(0.0, -poly.sin_coeffs, poly.cos_coeffs)


@dataclass(frozen=True)
class TestFunction:
    """Linear statistic ``g`` attached to a trace vector query ``xi``.

    ``g(theta) = sum_k xi_k / sqrt(k) * (2 cos(k theta) - mu_k / q)`` with
    ``mu_k`` the random-eigenvalue mean of ``Tr U^k`` and ``q`` the number of
    random eigenangles, so that ``sum_j g(theta_j) = xi . X``.
    """

    __test__ = False  # not a pytest class

    xi: np.ndarray
    spec: GroupSpec
    g: TrigPoly
    gplus_coeffs: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.xi)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.xi))

    @property
    def rho(self) -> float:
        """``sqrt(log m + 1) * |xi|``, a sup bound for the analytic part ``g_+``."""
        return math.sqrt(math.log(self.m) + 1.0) * self.norm

    def h(self) -> TrigPoly:
        """Hilbert transform of ``g``; equals ``2 Im g_+`` on the real line."""
        return hilbert_transform(self.g)

    def gplus(self, theta):
        theta = np.asarray(theta)
        k = np.arange(len(self.gplus_coeffs))
        return np.exp(1j * theta[..., None] * k) @ self.gplus_coeffs

    def exp_ig(self, theta):
        return np.exp(1j * self.g(theta))

    def exp_2im_gplus(self, theta):
        return np.exp(self.h()(theta))


def build_test_function(spec: GroupSpec, xi) -> TestFunction:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.ndim != 1 or len(xi) < 1:
        raise ValueError("xi must be a non-empty vector")
    m = len(xi)
    k = np.arange(1, m + 1, dtype=float)
    mu = np.array([mean_trace(spec, j) for j in range(1, m + 1)])
    const = -float(np.sum(xi * mu / np.sqrt(k))) / spec.num_angles
    g = TrigPoly(const, 2 * xi / np.sqrt(k), np.zeros(m))
    # half the constant goes to g_+; only 2 Im g_+ is ever used, where it cancels
    gplus = np.concatenate([[0.5 * const], xi / np.sqrt(k)]).astype(complex)
    return TestFunction(xi=xi, spec=spec, g=g, gplus_coeffs=gplus)


def default_truncation(m: int, rho: float, q: int) -> int:
    """Initial Fourier cut ``max(64, 4 m ceil(rho) + 2 q)``."""
    return max(64, 4 * m * math.ceil(rho) + 2 * q)


@dataclass(frozen=True)
class FourierTable:
    """Immutable table of two-sided Fourier coefficients ``c_{-K..K}``.

    Coefficients outside the table are treated as zero; :attr:`tail` is a
    size estimate for what that discards.
    """

    coefficients: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or len(c) % 2 != 1:
            raise ValueError("coefficient array must be 1-d with odd length")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def K(self) -> int:
        return (len(self.coefficients) - 1) // 2

    def __getitem__(self, k):
        return self.coef(k)

    def coef(self, k):
        """Coefficient(s) at integer index ``k``; zero beyond ``K``."""
        k = np.asarray(k)
        inside = np.abs(k) <= self.K
        idx = np.where(inside, k + self.K, 0)
        out = np.where(inside, self.coefficients[idx], 0.0)
        return complex(out) if out.ndim == 0 else out

    def positive(self, start: int = 0) -> np.ndarray:
        """Coefficients ``c_start .. c_K``."""
        if start > self.K:
            return np.zeros(0, dtype=complex)
        return self.coefficients[self.K + start:]

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        c = self.coefficients
        scale = max(1.0, float(np.max(np.abs(c))))
        return bool(np.max(np.abs(c - np.conj(c[::-1]))) <= tol * scale)

    @classmethod
    def from_positive(cls, c_nonneg, c_neg=None) -> "FourierTable":
        """Table with ``c_k`` for ``k >= 0`` given, negative side zero unless supplied."""
        c_nonneg = np.asarray(c_nonneg, dtype=complex)
        K = len(c_nonneg) - 1
        neg = np.zeros(K, dtype=complex) if c_neg is None else np.asarray(c_neg, dtype=complex)
        return cls(np.concatenate([neg[::-1], c_nonneg]))


def _grid_size(K: int) -> int:
    return 1 << max(4, math.ceil(math.log2(8 * (K + 1))))


def fourier_from_samples(values: np.ndarray, K: int) -> np.ndarray:
    """Two-sided coefficients ``-K..K`` from samples on a uniform circle grid.

    ``values`` holds samples at ``theta_j = 2 pi j / M`` on its last axis;
    leading axes are batched.
    """
    M = values.shape[-1]
    if M < 2 * K + 1:
        raise ValueError("grid too coarse for the requested truncation")
    fft = np.fft.fft(values, axis=-1) / M
    return np.concatenate([fft[..., M - K:], fft[..., : K + 1]], axis=-1)


def _table_at(symbol: Callable, K: int) -> np.ndarray:
    M = _grid_size(K)
    theta = 2 * np.pi * np.arange(M) / M
    vals = np.asarray(symbol(theta), dtype=complex)
    if vals.shape != theta.shape:
        vals = np.broadcast_to(vals, theta.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("symbol returned non-finite values")
    return fourier_from_samples(vals, K)


def fourier_coeffs(
    symbol: Callable,
    K: int | None = None,
    *,
    tol: float = 1e-12,
    K_min: int = 64,
    K_max: int = 1 << 16,
) -> FourierTable:
    """Fourier coefficients of a smooth circle function by trapezoid quadrature.

    With ``K`` given, a single grid of at least ``8 (K + 1)`` points is used.
    Otherwise ``K`` starts at ``K_min`` and doubles until two successive tables
    agree to ``tol`` (relative to the largest coefficient).
    """
    if K is not None:
        if K < 1:
            raise ValueError("K must be >= 1")
        c = _table_at(symbol, K)
        edge = np.abs(np.concatenate([c[:2], c[-2:]]))
        return FourierTable(c, tail=float(np.max(edge)))
    K = max(1, K_min)
    prev = _table_at(symbol, K)
    while True:
        K2 = 2 * K
        cur = _table_at(symbol, K2)
        scale = max(1.0, float(np.max(np.abs(cur))))
        diff = np.max(np.abs(cur[K2 - K: K2 + K + 1] - prev))
        outside = np.max(np.abs(np.concatenate([cur[: K2 - K], cur[K2 + K + 1:]])))
        if max(diff, outside) <= tol * scale or K2 >= K_max:
            edge = np.abs(np.concatenate([cur[:2], cur[-2:]]))
            return FourierTable(cur, tail=float(np.max(edge)))
        K, prev = K2, cur
