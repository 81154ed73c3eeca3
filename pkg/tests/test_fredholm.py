import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import jv

from haartraces.detform import char_fn_det
from haartraces.fredholm import (
    BE_CASES,
    HankelOp,
    basor_ehrhardt_sides,
    char_fn_fredholm,
    char_fn_operator,
    fredholm_det_truncated,
    operator_diagnostics,
    upsilon_bound,
    verify_basor_ehrhardt,
)
from haartraces.groups import group_spec
from haartraces.symbols import FourierTable

from conftest import KINDS


def _single(k, c, K=16):
    arr = np.zeros(2 * K + 1, dtype=complex)
    arr[K + k] = c
    return FourierTable(arr)


def test_zero_symbol():
    op = HankelOp(FourierTable(np.zeros(33)))
    assert fredholm_det_truncated(op).value == 1
    d = operator_diagnostics(op)
    assert d.trace == 0 and d.hs_norm == 0


def test_single_coefficient_c1():
    op = HankelOp(_single(1, 0.3))
    assert fredholm_det_truncated(op, 1).value == pytest.approx(1.3)
    assert fredholm_det_truncated(op, 2).value == pytest.approx(1.3)


def test_projection_annihilates():
    op = HankelOp(_single(3, 0.5), projection_n=5)
    assert fredholm_det_truncated(op).value == 1


def test_diagnostics_single_c3():
    d = operator_diagnostics(HankelOp(_single(3, 0.2)))
    assert d.trace == pytest.approx(0.2)
    assert d.hs_norm == pytest.approx(0.2 * math.sqrt(3))


def test_truncation_size_check():
    with pytest.raises(ValueError):
        fredholm_det_truncated(HankelOp(_single(1, 0.3, K=4)), M=8)


def test_basor_ehrhardt_example_case1():
    lhs, rhs = basor_ehrhardt_sides(1, [0, 0.3], 3)
    assert abs(lhs - rhs) <= 1e-9 * abs(lhs)
    # right side built by hand: Hankel coefficients of e^{-0.6 i sin} are J_k(-0.6)
    K = 40
    c = np.array([jv(k, -0.6) for k in range(-K, K + 1)], dtype=complex)
    fd = fredholm_det_truncated(HankelOp(FourierTable(c), projection_n=3)).value
    assert rhs == pytest.approx(math.exp(0.3 + 0.045) * fd, rel=1e-12)


@pytest.mark.parametrize("case", sorted(BE_CASES))
def test_basor_ehrhardt_trivial_symbol(case):
    lhs, rhs = basor_ehrhardt_sides(case, [0.0], 4)
    assert lhs == pytest.approx(1) and rhs == pytest.approx(1)


@pytest.mark.parametrize("case", sorted(BE_CASES))
def test_basor_ehrhardt_random_degree3(case, rng):
    for _ in range(3):
        b = rng.uniform(-0.5, 0.5, 4) + 1j * rng.uniform(-0.5, 0.5, 4)
        assert verify_basor_ehrhardt(case, b, 4) <= 1e-9


def test_charfn_fredholm_examples():
    assert char_fn_fredholm(group_spec("sp", 3), [0.0, 0.0]) == pytest.approx(1)
    assert char_fn_fredholm(group_spec("sp", 1), [1.0]).real == pytest.approx(jv(1, 2), abs=1e-10)


@given(st.sampled_from(KINDS), st.sampled_from([2, 4, 6]), st.lists(st.floats(-1.1, 1.1), min_size=1, max_size=3))
def test_charfn_routes_agree(kind, n, xi):
    spec = group_spec(kind, n)
    assert abs(char_fn_fredholm(spec, xi) - char_fn_det(spec, xi)) <= 1e-8


def test_operator_hs_norm_small_for_large_projection():
    spec = group_spec("o-even-plus", 12)
    op, _ = char_fn_operator(spec, [0.2, 0.1])
    d = operator_diagnostics(op)
    assert d.hs_norm < 1e-8
    assert abs(1 - fredholm_det_truncated(op).value) <= upsilon_bound(max(abs(d.trace), d.hs_norm))


def test_upsilon_bound_zero():
    assert upsilon_bound(0.0) == 0.0
