"""L2 distance between the characteristic function and the Gaussian one.

By Plancherel, ``(2 pi)^{-m/2}`` times this quantity is the L2 distance of
the densities; the unnormalized integral is what the bounds control.
"""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np
from scipy.special import erf

from ..detform import char_fn_det_many
from ..groups import GroupSpec

__all__ = ["L2Estimate", "l2_distance_estimate", "l2_distance_exact", "GridNotConvergedWarning"]


class GridNotConvergedWarning(RuntimeWarning):
    pass


class L2Estimate(NamedTuple):
    value: float
    h: float
    radius: float
    richardson_diff: float
    converged: bool
    gaussian_tail: float
    boundary_max: float  # max |F| on the outer edge of the grid


def _half_grid_sum(spec: GroupSpec, m: int, R: float, h: float):
    k = int(round(R / h))
    full = h * np.arange(-k, k + 1)
    w_full = np.full(full.size, h)
    w_full[[0, -1]] = h / 2
    half = full[k:]
    w_half = w_full[k:].copy()
    w_half[0] = h / 2  # xi_1 = 0 is shared by both halves
    if m == 1:
        pts = half[:, None]
        w = w_half
    else:
        a, b = np.meshgrid(half, full, indexing="ij")
        pts = np.stack([a.ravel(), b.ravel()], axis=1)
        w = np.outer(w_half, w_full).ravel()
    F = char_fn_det_many(spec, pts)
    g = np.exp(-0.5 * np.sum(pts**2, axis=1))
    integral = 2 * float(np.sum(w * np.abs(F - g) ** 2))
    edge = np.max(np.abs(pts), axis=1) >= full[-1] - 1e-12
    return integral, float(np.max(np.abs(F[edge])))


def l2_distance_estimate(
    spec: GroupSpec,
    m: int,
    *,
    radius: float = 8.0,
    h: float = 0.1,
    tol: float = 1e-6,
    max_refine: int = 2,
) -> L2Estimate:
    """Trapezoid estimate of ``(int |F - e^{-|xi|^2/2}|^2 dxi)^{1/2}`` with refinement.

    The integrand is even under ``xi -> -xi`` (``F(-xi)`` is the conjugate
    of ``F(xi)``), so only ``xi_1 >= 0`` is evaluated. The step is halved
    until two successive values agree to ``tol``; if ``max_refine``
    halvings do not suffice the estimate is returned with
    ``converged=False`` and a warning. Outside the box only the Gaussian
    part is added, in closed form: ``pi^{m/2} (1 - erf(R)^m)``.
    """
    if m not in (1, 2):
        raise ValueError("l2_distance_exact supports m in {1, 2}")
    if radius <= 0 or h <= 0:
        raise ValueError("radius and h must be positive")
    lam1 = spec.num_angles / (2 * m * math.sqrt(math.log(m) + 1))
    if radius < lam1:
        raise ValueError(f"grid radius {radius} is below Lambda_1 = {lam1:.4g}")
    tail = math.pi ** (m / 2) * (1 - float(erf(radius)) ** m)
    prev, edge = _half_grid_sum(spec, m, radius, h)
    diff = math.inf
    for _ in range(max_refine):
        h /= 2
        cur, edge = _half_grid_sum(spec, m, radius, h)
        diff = abs(math.sqrt(cur + tail) - math.sqrt(prev + tail))
        prev = cur
        if diff <= tol:
            break
    converged = diff <= tol
    if not converged:
        warnings.warn(f"L2 grid refinement disagreement {diff:.2e} > {tol:.0e}", GridNotConvergedWarning)
    return L2Estimate(math.sqrt(prev + tail), h, radius, diff, converged, tail, edge)


def l2_distance_exact(spec: GroupSpec, m: int, *, radius: float = 8.0, h: float = 0.1, tol: float = 1e-6) -> float:
    """Value of :func:`l2_distance_estimate`."""
    return l2_distance_estimate(spec, m, radius=radius, h=h, tol=tol).value
