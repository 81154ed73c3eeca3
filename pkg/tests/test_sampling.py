import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from haartraces.detform import char_fn_det
from haartraces.groups import group_spec
from haartraces.moments import group_moment_exact
from haartraces.sampling import (
    eigenangles,
    empirical_stats,
    haar_orthogonal,
    haar_symplectic,
    sample_batch,
    traces_from_matrices,
)

from conftest import KINDS

J2 = lambda n: np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def _rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


@given(st.integers(1, 12), st.sampled_from([1, -1, None]), st.integers(0, 2**31))
def test_haar_orthogonal_structure(N, sign, seed):
    U = haar_orthogonal(N, sign, seed)
    assert np.max(np.abs(U.T @ U - np.eye(N))) <= 1e-12
    d = np.linalg.det(U)
    assert min(abs(d - 1), abs(d + 1)) <= 1e-10
    if sign is not None:
        assert d == pytest.approx(sign, abs=1e-10)


@given(st.integers(1, 8), st.integers(0, 2**31))
def test_haar_symplectic_structure(n, seed):
    U = haar_symplectic(2 * n, seed)
    assert np.max(np.abs(U.conj().T @ U - np.eye(2 * n))) <= 1e-10
    assert np.max(np.abs(U.T @ J2(n) @ U - J2(n))) <= 1e-10
    ev = np.linalg.eigvals(U)
    assert np.max(np.abs(np.abs(ev) - 1)) <= 1e-9
    # conjugate pairing: the multiset of eigenvalues is closed under conjugation
    a = np.sort_complex(np.round(ev, 7))
    b = np.sort_complex(np.round(np.conj(ev), 7))
    assert np.allclose(a, b, atol=1e-6)


def test_so2_trace_mean():
    b = sample_batch(group_spec("o-even-plus", 1), 1, 10**6, seed=3)
    x = b.xs[:, 0]
    assert abs(x.mean()) <= 4 * x.std() / math.sqrt(len(x))


def test_sp2_trace_square_mean():
    b = sample_batch(group_spec("sp", 1), 1, 10**6, seed=4)
    y = b.xs[:, 0] ** 2
    assert abs(y.mean() - 1) <= 4 * y.std() / math.sqrt(len(y))


def test_eigenangles_examples():
    t = 0.7
    R = np.eye(3)
    R[1:, 1:] = _rot(t)
    assert eigenangles(R, group_spec("o-odd-plus", 1)) == pytest.approx([t])
    M = np.zeros((4, 4))
    M[:2, :2] = _rot(1.1)
    M[2, 2], M[3, 3] = 1.0, -1.0
    assert eigenangles(M, group_spec("o-even-minus", 2)) == pytest.approx([1.1])
    # a +1 pair in O(4)- with one extra forced +1: only one +1 is removed
    M = np.diag([1.0, 1.0, 1.0, -1.0])
    assert eigenangles(M, group_spec("o-even-minus", 2)) == pytest.approx([0.0])


def test_eigenangles_rejects_wrong_structure():
    with pytest.raises(ValueError):
        eigenangles(np.eye(2), group_spec("o-odd-plus", 1))


def test_rotation_by_quarter_turn_trace_vector():
    R = np.eye(3)
    R[1:, 1:] = _rot(math.pi / 2)
    spec = group_spec("o-odd-plus", 1)
    tr = traces_from_matrices(R[None], spec, 1, "eig")
    from haartraces.groups import mean_trace

    assert tr[0, 0] - mean_trace(spec, 1) == pytest.approx(1.0)


@pytest.mark.parametrize("kind", KINDS)
def test_power_and_eig_traces_agree(kind):
    spec = group_spec(kind, 4)
    a = sample_batch(spec, 3, 50, seed=9, method="eig").xs
    b = sample_batch(spec, 3, 50, seed=9, method="power").xs
    assert np.max(np.abs(a - b)) < 1e-10


def test_determinism_and_workers():
    spec = group_spec("o-odd-minus", 3)
    a = sample_batch(spec, 2, 1500, seed=11)
    b = sample_batch(spec, 2, 1500, seed=11, workers=3)
    assert np.array_equal(a.xs, b.xs)
    c = sample_batch(spec, 2, 1500, seed=12)
    assert not np.array_equal(a.xs, c.xs)


def test_variance_of_second_trace_sp4():
    b = sample_batch(group_spec("sp", 2), 2, 10**5, seed=5)
    y = b.xs[:, 1] ** 2
    exact = group_moment_exact(group_spec("sp", 2), {2: 2})  # E (Tr U^2)^2
    # E X_2^2 = (E (Tr U^2)^2 - 2 mu E Tr U^2 + mu^2) / 2 with mu = -1
    target = (exact - 1) / 2
    assert target == pytest.approx(1.0, abs=1e-9)
    assert abs(y.mean() - target) <= 5 * y.std() / math.sqrt(len(y))


def test_empirical_stats_examples():
    spec = group_spec("sp", 4)
    b = sample_batch(spec, 1, 20000, seed=6)
    st_ = empirical_stats(b, [[0.0], [1.0]], L=6.0)
    assert st_.ecf[0] == 1
    exact = char_fn_det(spec, [1.0])
    assert abs(st_.ecf[1] - exact) <= 5 * st_.ecf_stderr[1]
    bound = 2 * math.exp(-36 / 48)
    assert st_.tail <= bound + 5 * st_.tail_stderr


def test_csv_and_sidecar(tmp_path):
    b = sample_batch(group_spec("sp", 2), 2, 5, seed=1)
    p = tmp_path / "x.csv"
    b.write_csv(p, "hello")
    lines = p.read_text().splitlines()
    assert lines[0] == "# hello" and lines[1] == "X1,X2" and len(lines) == 7
    assert float(lines[2].split(",")[0]) == b.xs[0, 0]
    b.write_sidecar(tmp_path / "x.json")
    meta = json.loads((tmp_path / "x.json").read_text())
    assert meta["seed"] == 1 and meta["count"] == 5 and meta["group"] == "sp"


def test_batch_is_immutable():
    b = sample_batch(group_spec("sp", 2), 1, 3, seed=1)
    with pytest.raises(ValueError):
        b.xs[0, 0] = 1.0
