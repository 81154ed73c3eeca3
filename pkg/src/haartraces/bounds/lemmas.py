"""Randomized checks of the auxiliary inequalities.

Every check compares two floating-point numbers; where the exact inequality
is tight or the bound is below binary64 resolution, a stated roundoff
allowance is applied and reported alongside the margin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, log_ndtr

from ..groups import GroupKind, eigen_density, group_spec, hadamard_sup_bound
from ..sampling import sample_batch
from ..symbols import build_test_function, fourier_coeffs
from .constants import stirling_log_bounds

__all__ = ["LemmaResult", "lemma_suite", "chahkiev_G", "LEMMA_NAMES"]

LEMMA_NAMES = (
    "ineq", "tech", "bound_fourier", "hadamard", "chahkiev",
    "stirling", "largedev", "box_tail", "box_tail_exact",
)
REL_EPS = 1e-12
CHAHKIEV_GRID = 1 << 20


@dataclass
class LemmaResult:
    name: str
    trials: int = 0
    violations: int = 0
    worst_margin: float = math.inf
    info: dict = field(default_factory=dict)

    def record(self, lhs, rhs, allowance=0.0):
        lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        margin = rhs + allowance - lhs
        self.trials += lhs.size
        self.violations += int(np.count_nonzero(~(margin >= 0)))
        if lhs.size:
            self.worst_margin = min(self.worst_margin, float(np.min(margin)))

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.trials > 0

    def to_dict(self) -> dict:
        d = {"name": self.name, "trials": self.trials, "violations": self.violations,
             "worst_margin": self.worst_margin, "pass": self.passed}
        d.update(self.info)
        return d


def _ineq(rng, trials):
    # log(1 + sinh(x)^2 / y^2) <= (x / y)^2
    res = LemmaResult("ineq")
    x = rng.uniform(-5, 5, trials)
    y = rng.uniform(-1, 1, trials)
    y[y == 0] = 1.0
    x[0] = 0.0  # equality case
    with np.errstate(divide="ignore"):
        lhs = np.logaddexp(0.0, 2 * (np.log(np.abs(np.sinh(x))) - np.log(np.abs(y))))
    rhs = (x / y) ** 2
    res.record(lhs, rhs, REL_EPS * np.abs(rhs))
    return res


def _tech(rng, trials):
    # x log y - log Gamma(x + 1) is nonincreasing on [y, y + 10]
    res = LemmaResult("tech")
    for y in rng.uniform(0, 20, trials):
        y = max(y, 1e-3)
        x = np.linspace(y, y + 10, 201)
        f = x * math.log(y) - gammaln(x + 1)
        d = np.diff(f)
        tol = REL_EPS * np.maximum(np.abs(f[1:]), 1.0)
        res.record(d.max(), 0.0, tol[np.argmax(d)])
    return res


def _bound_fourier(rng, trials):
    res = LemmaResult("bound_fourier", info={"floor": "1e-14 * max |c_k|"})
    spec = group_spec("sp", 4)  # the symbol depends on xi only
    for _ in range(trials):
        m = int(rng.integers(1, 5))
        xi = rng.normal(size=m)
        xi *= rng.uniform(0.05, 3.0) / (math.sqrt(math.log(m) + 1) * np.linalg.norm(xi))
        tf = build_test_function(spec, xi)
        rho = tf.rho
        k0 = math.ceil(2 * m * rho)
        tab = fourier_coeffs(tf.exp_2im_gplus, K_min=max(64, k0 + 4 * m + 8))
        ks = np.arange(max(k0, 1), tab.K + 1)
        c = np.abs(tab.coef(ks))
        j = np.ceil(ks / m)
        bound = np.exp(math.log(2) + rho + j * math.log(rho) - gammaln(j + 1))
        floor = 1e-14 * float(np.max(np.abs(tab.coefficients)))
        margin = np.maximum(bound, floor) - c
        res.trials += 1
        if np.any(margin < 0):
            res.violations += 1
        res.worst_margin = min(res.worst_margin, float(margin.min()))
    return res


def _hadamard(rng, trials):
    res = LemmaResult("hadamard")
    per = max(1, trials // (3 * len(GroupKind)))
    for q in (1, 2, 3):
        bound = hadamard_sup_bound(q)
        for kind in GroupKind:
            spec = group_spec(kind, q + 1 if kind is GroupKind.O_EVEN_MINUS else q)
            pts = rng.uniform(0, np.pi, size=(per, q))
            g = np.linspace(0, np.pi, {1: 2001, 2: 201, 3: 41}[q])
            grid = np.stack(np.meshgrid(*([g] * q), indexing="ij"), axis=-1).reshape(-1, q)
            sup = float(np.max(eigen_density(spec, grid)))
            res.record(eigen_density(spec, pts), bound)
            res.record(sup, bound)
            res.info.setdefault("grid_sup", {})[f"{kind.value}/q={q}"] = sup
    res.info["grid_sup"] = dict(sorted(res.info["grid_sup"].items()))
    return res


def chahkiev_G(values: np.ndarray, t) -> np.ndarray:
    """Fraction of grid samples with ``|p| <= t`` (``values`` on a uniform grid)."""
    a = np.sort(np.abs(values))
    return np.searchsorted(a, np.asarray(t), side="right") / len(a)


def _chahkiev(rng, trials, M=CHAHKIEV_GRID, per_poly=10):
    # measured G plus the counting error of at most 2 cells per interval end
    # (|p| <= t is a union of at most 2m intervals) must stay below the bound
    res = LemmaResult("chahkiev", info={"grid": M})
    n_poly = max(1, math.ceil(trials / per_poly))
    for _ in range(n_poly):
        m = int(rng.integers(1, 6))
        a = rng.normal(size=m + 1)
        b = rng.normal(size=m + 1)
        spec_c = np.zeros(M // 2 + 1, dtype=complex)
        spec_c[0] = a[0] / 2
        spec_c[1:m + 1] = (a[1:] - 1j * b[1:]) / 2
        p = np.fft.irfft(spec_c, n=M) * M
        norm = math.sqrt(a[0] ** 2 / 4 + 0.5 * float(np.sum(a[1:] ** 2 + b[1:] ** 2)))
        pmax = float(np.max(np.abs(p)))
        t = pmax * rng.uniform(0, 1, per_poly) ** 3
        G = chahkiev_G(p, t)
        bound = 2 * math.e * (t / (math.sqrt(2) * norm)) ** (1 / (2 * m))
        res.record(G + 4 * m / M, bound)
    return res


def _stirling(rng, trials):
    res = LemmaResult("stirling")
    x = np.concatenate([rng.uniform(0, 50, trials), np.linspace(0.05, 50, 1000)])
    x = x[x > 0]
    lo, hi = stirling_log_bounds(x)
    lg = gammaln(x + 1)
    # strict sandwich; both gaps are at least ~1/(360 x^3) > roundoff here
    res.record(lo, lg - 4e-15 * np.maximum(1, np.abs(lg)))
    res.record(lg, hi - 4e-15 * np.maximum(1, np.abs(lg)))
    return res


LARGEDEV_CASES = (
    # kind, n, m, multiplier, draws
    ("o-even-plus", 64, 4, 80, 1000),
    ("sp", 256, 4, 48, 100),
)


def _largedev(rng, trials, seed):
    res = LemmaResult("largedev", info={"cases": []})
    per = max(1, math.ceil(trials / len(LARGEDEV_CASES)))
    for i, (kind, n, m, mult, draws) in enumerate(LARGEDEV_CASES):
        spec = group_spec(kind, n)
        batch = sample_batch(spec, m, draws, seed, stream_id=1000 + i)
        lmin = 2 * math.sqrt(6) * m * m / math.sqrt(n - 1)
        Ls = lmin + rng.uniform(0, 40, per)
        # same estimator as empirical_stats: fraction of rows outside the box
        amax = np.max(np.abs(batch.xs), axis=1)
        tail = np.mean(amax[None, :] > 0.5 * Ls[:, None], axis=1)
        stderr = np.sqrt(tail * (1 - tail) / draws)
        res.record(tail, 2 * m * np.exp(-Ls * Ls / (mult * m)), 5 * stderr)
        res.info["cases"].append({"kind": kind, "n": n, "m": m, "multiplier": mult, "draws": draws})
    return res


def _box_tail(rng, trials):
    # printed form: (2 P[Z > L/2])^m <= e^{-m L^2 / 8} for L >= sqrt(3)
    res = LemmaResult("box_tail")
    # true complement mass 1 - (1 - 2 P[Z > L/2])^m against the union bound m e^{-L^2/8}
    exact = LemmaResult("box_tail_exact")
    m = rng.integers(1, 11, trials)
    L = rng.uniform(math.sqrt(3), 60, trials)
    L[0] = math.sqrt(3)
    lt = math.log(2) + log_ndtr(-L / 2)  # log of 2 P[Z > L/2]
    res.record(m * lt, -m * L * L / 8, REL_EPS * m * L * L)
    log_comp = np.log(-np.expm1(m * np.log1p(-np.exp(lt))))
    exact.record(log_comp, np.log(m) - L * L / 8, REL_EPS * L * L)
    exact.info["exceeds_product_bound"] = int(np.count_nonzero(log_comp > -m * L * L / 8))
    return res, exact


def lemma_suite(trials: int = 1000, seed: int = 0, *, include_mc: bool = True) -> dict:
    """Run every auxiliary inequality ``trials`` times; returns ``name -> LemmaResult``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ss = np.random.SeedSequence(seed)
    rngs = [np.random.default_rng(s) for s in ss.spawn(len(LEMMA_NAMES))]
    out = {
        "ineq": _ineq(rngs[0], trials),
        "tech": _tech(rngs[1], trials),
        "bound_fourier": _bound_fourier(rngs[2], trials),
        "hadamard": _hadamard(rngs[3], trials),
        "chahkiev": _chahkiev(rngs[4], trials),
        "stirling": _stirling(rngs[5], trials),
    }
    if include_mc:
        out["largedev"] = _largedev(rngs[6], trials, seed)
    out["box_tail"], out["box_tail_exact"] = _box_tail(rngs[7], trials)
    return out
