"""Haar sampling, eigenangle extraction and Monte-Carlo estimators.

Random streams are keyed by ``(seed, stream_id, block)``: draws are produced
in fixed-size blocks, each from its own Philox generator, so a batch does not
depend on how many workers produced it.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .groups import GroupKind, GroupSpec, mean_trace
from .moments import partitions

__all__ = [
    "BLOCK_SIZE",
    "block_rng",
    "haar_orthogonal",
    "haar_symplectic",
    "eigenangles",
    "SampleBatch",
    "sample_batch",
    "traces_from_matrices",
    "EmpiricalStats",
    "empirical_stats",
    "ecf",
]

BLOCK_SIZE = 512
DET_EIG_TOL = 1e-6
PAIR_TOL = 1e-9


def block_rng(seed: int, stream_id: int = 0, block: int = 0) -> np.random.Generator:
    """Counter-based generator for one block of one stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return block_rng(0 if seed is None else seed)


def _orthogonal_stack(N: int, count: int, rng: np.random.Generator, sign: int | None) -> np.ndarray:
    Z = rng.standard_normal((count, N, N))
    Q, R = np.linalg.qr(Z)
    d = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    Q = Q * d[:, None, :]
    if sign is not None:
        flip = np.sign(np.linalg.det(Q)) != sign
        Q[flip, :, 0] *= -1.0
    return Q


def haar_orthogonal(N: int, sign: int | None = None, seed=None) -> np.ndarray:
    """Haar orthogonal ``N x N`` matrix, optionally conditioned on ``det = sign``.

    Conditioning flips the first column when the determinant is wrong; this
    maps O(N) onto either coset equivariantly, so the result is Haar there.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if sign not in (None, 1, -1):
        raise ValueError("sign must be +1, -1 or None")
    return _orthogonal_stack(N, 1, _as_rng(seed), sign)[0]


def _partner(v: np.ndarray, n: int) -> np.ndarray:
    # quaternionic partner (x; y) -> (-conj y; conj x) of a column stack
    x, y = v[..., :n], v[..., n:]
    return np.concatenate([-np.conj(y), np.conj(x)], axis=-1)


def _symplectic_stack(two_n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    n = two_n // 2
    A = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / math.sqrt(2)
    B = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / math.sqrt(2)
    # columns v_k = (A[:, k]; -conj B[:, k]); partners are (B[:, k]; conj A[:, k])
    cols = np.concatenate([A, -np.conj(B)], axis=1).transpose(0, 2, 1)  # (count, n, 2n)
    basis = np.zeros((count, two_n, two_n), dtype=complex)  # rows = basis vectors
    for k in range(n):
        v = cols[:, k, :]
        for _ in range(2):  # re-orthogonalize once for stability
            if k:
                prev = basis[:, : 2 * k, :]
                coef = np.matmul(np.conj(prev), v[:, :, None])
                v = v - np.matmul(coef.transpose(0, 2, 1), prev)[:, 0, :]
        v = v / np.linalg.norm(v, axis=-1, keepdims=True)
        basis[:, 2 * k, :] = v
        basis[:, 2 * k + 1, :] = _partner(v, n)
    U = np.empty_like(basis)
    U[:, :, :n] = basis[:, 0::2, :].transpose(0, 2, 1)
    U[:, :, n:] = basis[:, 1::2, :].transpose(0, 2, 1)
    return U


def haar_symplectic(two_n: int, seed=None) -> np.ndarray:
    """Haar element of the compact symplectic group ``Sp(two_n)``.

    A matrix ``[[A, B], [-conj B, conj A]]`` with complex Gaussian blocks is
    orthonormalized column pair by column pair; each new column's
    quaternionic partner is appended with it, which keeps ``U^T J U = J``.
    """
    if two_n < 2 or two_n % 2:
        raise ValueError("two_n must be an even integer >= 2")
    return _symplectic_stack(two_n, 1, _as_rng(seed))[0]


def _matrix_stack(spec: GroupSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind is GroupKind.SP:
        return _symplectic_stack(spec.matrix_dim, count, rng)
    return _orthogonal_stack(spec.matrix_dim, count, rng, spec.det_sign)


def _angles_from_eigs(eigs: np.ndarray, spec: GroupSpec) -> np.ndarray:
    eigs = np.array(eigs, dtype=complex)
    count = eigs.shape[0]
    keep = np.ones(eigs.shape, dtype=bool)
    rows = np.arange(count)
    for d in spec.det_eigs:
        dist = np.where(keep, np.abs(eigs - d), np.inf)
        idx = np.argmin(dist, axis=1)
        if np.any(dist[rows, idx] > DET_EIG_TOL):
            raise ValueError(f"no eigenvalue within {DET_EIG_TOL} of {d}; matrix does not match {spec}")
        keep[rows, idx] = False
    rest = eigs[keep].reshape(count, 2 * spec.num_angles)
    ang = np.angle(rest)
    order = np.argsort(np.abs(ang), axis=1, kind="stable")
    ang = np.take_along_axis(ang, order, axis=1).reshape(count, spec.num_angles, 2)
    if np.any(np.abs(ang[..., 0] + ang[..., 1]) > 1e-6 * 2 * np.pi) or np.any(
        np.abs(np.abs(ang[..., 0]) - np.abs(ang[..., 1])) > 1e-6
    ):
        raise ValueError("eigenvalues do not pair into conjugates")
    return np.sort(0.5 * (np.abs(ang[..., 0]) + np.abs(ang[..., 1])), axis=1)


def eigenangles(matrix, spec: GroupSpec) -> np.ndarray:
    """Random eigenangles in ``[0, pi]``, one per conjugate pair, ascending.

    Exactly ``len(spec.det_eigs)`` eigenvalues are removed, each the one
    nearest to its forced value; a miss beyond ``1e-6`` raises ``ValueError``.
    """
    mat = np.asarray(matrix)
    if mat.shape != (spec.matrix_dim, spec.matrix_dim):
        raise ValueError(f"expected a {spec.matrix_dim}x{spec.matrix_dim} matrix")
    return _angles_from_eigs(np.linalg.eigvals(mat)[None, :], spec)[0]


def traces_from_matrices(mats: np.ndarray, spec: GroupSpec, m: int, method: str = "auto") -> np.ndarray:
    """``Tr U^k`` over the random eigenvalues, ``k = 1..m``, for a stack of matrices.

    ``method="eig"`` goes through :func:`eigenangles`; ``"power"`` multiplies
    matrices and subtracts the forced eigenvalues, which is faster for large
    dimension and small ``m``.
    """
    N = mats.shape[-1]
    if method == "auto":
        method = "power" if N > 64 and m <= 8 else "eig"
    k = np.arange(1, m + 1)
    if method == "eig":
        theta = _angles_from_eigs(np.linalg.eigvals(mats), spec)
        return 2 * np.cos(theta[..., None] * k).sum(axis=1)
    out = np.empty((mats.shape[0], m))
    P = mats
    for j in range(1, m + 1):
        if j > 1:
            P = P @ mats
        out[:, j - 1] = np.real(np.trace(P, axis1=-2, axis2=-1))
    det_part = np.array([sum(d**j for d in spec.det_eigs) for j in k], dtype=float)
    return out - det_part


@dataclass(frozen=True)
class SampleBatch:
    """Monte-Carlo trace vectors ``X`` (one row per draw)."""

    spec: GroupSpec
    m: int
    count: int
    xs: np.ndarray
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.shape != (self.count, self.m):
            raise ValueError("xs must have shape (count, m)")
        xs.setflags(write=False)
        object.__setattr__(self, "xs", xs)

    def traces(self) -> np.ndarray:
        """Random-eigenvalue traces ``Tr U^k = sqrt(k) X_k + E Tr U^k``."""
        k = np.arange(1, self.m + 1)
        mu = np.array([mean_trace(self.spec, j) for j in k])
        return self.xs * np.sqrt(k) + mu

    def metadata(self) -> dict:
        return {
            "group": self.spec.kind.value,
            "n": self.spec.n,
            "m": self.m,
            "count": self.count,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "block_size": BLOCK_SIZE,
        }

    def write_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"X{k}" for k in range(1, self.m + 1)])
            for row in self.xs:
                w.writerow([repr(float(x)) for x in row])

    def write_sidecar(self, path, extra: Mapping | None = None) -> None:
        meta = self.metadata()
        if extra:
            meta.update(extra)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True, indent=2)
            fh.write("\n")


def _block_traces(spec, m, seed, stream_id, block, size, method):
    rng = block_rng(seed, stream_id, block)
    mats = _matrix_stack(spec, size, rng)
    return traces_from_matrices(mats, spec, m, method)


def sample_batch(
    spec: GroupSpec,
    m: int,
    count: int,
    seed: int,
    *,
    stream_id: int = 0,
    workers: int = 1,
    method: str = "auto",
) -> SampleBatch:
    """Draw ``count`` Haar matrices and return their trace vectors ``X``.

    The output depends only on ``(spec, m, count, seed, stream_id)``; the
    number of worker threads does not change it.
    """
    if m < 1 or count < 1:
        raise ValueError("m and count must be >= 1")
    sizes = [min(BLOCK_SIZE, count - s) for s in range(0, count, BLOCK_SIZE)]
    args = [(spec, m, seed, stream_id, b, size, method) for b, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda a: _block_traces(*a), args))
    else:
        parts = [_block_traces(*a) for a in args]
    tr = np.concatenate(parts, axis=0)
    k = np.arange(1, m + 1)
    mu = np.array([mean_trace(spec, j) for j in k])
    xs = (tr - mu) / np.sqrt(k)
    return SampleBatch(spec=spec, m=m, count=count, xs=xs, seed=int(seed), stream_id=int(stream_id))


def ecf(xs: np.ndarray, xi) -> tuple[complex, float]:
    """Empirical characteristic function at ``xi`` and its standard error."""
    xi = np.asarray(xi, dtype=float)
    vals = np.exp(1j * (xs @ xi))
    est = complex(vals.mean())
    stderr = math.sqrt(max(0.0, 1.0 - abs(est) ** 2) / len(xs))
    return est, stderr


class EmpiricalStats(NamedTuple):
    ecf: np.ndarray
    ecf_stderr: np.ndarray
    moments: dict
    tail: float
    tail_stderr: float


def empirical_stats(batch: SampleBatch, xi_grid, L: float, max_weight: int = 6) -> EmpiricalStats:
    """Monte-Carlo summaries of a batch.

    Returns
    -------
    EmpiricalStats
        ``ecf``/``ecf_stderr`` at each row of ``xi_grid``; ``moments`` maps a
        multiplicity tuple ``((j, m_j), ...)`` to ``(mean, stderr)`` of
        ``prod_j (Tr U^j)^{m_j}`` over the random eigenvalues, for every
        weight up to ``max_weight`` with ``j <= m``; ``tail`` is the
        fraction of rows of ``X`` outside ``[-L/2, L/2]^m``.
    """
    grid = np.atleast_2d(np.asarray(xi_grid, dtype=float))
    if grid.shape[1] != batch.m:
        raise ValueError("xi grid rows must have length m")
    vals = np.exp(1j * (batch.xs @ grid.T))
    est = vals.mean(axis=0)
    ecf_se = np.sqrt(np.maximum(0.0, 1.0 - np.abs(est) ** 2) / batch.count)
    tr = batch.traces()
    moments = {}
    for w in range(1, max_weight + 1):
        for p in partitions(w):
            mult = p.multiplicities
            if max(mult) > batch.m:
                continue
            prod = np.ones(batch.count)
            for j, mj in mult.items():
                prod = prod * tr[:, j - 1] ** mj
            se = float(prod.std(ddof=1) / math.sqrt(batch.count)) if batch.count > 1 else math.inf
            moments[tuple(mult.items())] = (float(prod.mean()), se)
    outside = np.any(np.abs(batch.xs) > 0.5 * L, axis=1)
    p = float(outside.mean())
    return EmpiricalStats(est, ecf_se, moments, p, math.sqrt(p * (1 - p) / batch.count))
