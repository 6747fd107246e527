from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confactor.piecewise import (
    LipschitzFunction,
    PiecewiseConstant,
    PiecewiseLinear,
    antiderivative,
    integrate_product,
    l2_norm_sq,
    linear_combination,
    sign_function,
)

F = Fraction


@st.composite
def step_functions(draw, max_pieces=6, max_den=16):
    n = draw(st.integers(1, max_pieces))
    pts = draw(st.sets(st.fractions(min_value=F(1, max_den), max_value=F(max_den - 1, max_den),
                                    max_denominator=max_den), max_size=n - 1))
    bps = [F(0), *sorted(p for p in pts if 0 < p < 1), F(1)]
    vals = draw(st.lists(st.integers(-4, 4).map(float), min_size=len(bps) - 1, max_size=len(bps) - 1))
    return PiecewiseConstant(bps, vals)


def test_canonical_merge():
    P = PiecewiseConstant([0, F(1, 4), F(1, 2), 1], [1.0, 1.0, 2.0])
    assert P.breakpoints == (F(0), F(1, 2), F(1))
    assert list(P.values) == [1.0, 2.0]


def test_rejects_bad_breakpoints():
    with pytest.raises(ValueError):
        PiecewiseConstant([0, F(1, 2), F(1, 2), 1], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        PiecewiseConstant([F(1, 4), 1], [1.0])
    with pytest.raises(ValueError):
        PiecewiseConstant([0, 1], [1.0, 2.0])


def test_right_continuous_evaluation():
    P = PiecewiseConstant([0, F(1, 3), 1], [1.0, -1.0])
    assert P(F(1, 3)) == -1.0
    assert P(0) == 1.0
    assert P(1) == -1.0


def test_antiderivative_of_haar_two():
    chi = PiecewiseConstant([0, F(1, 2), 1], [1.0, -1.0])
    Phi = antiderivative(chi)
    assert Phi(F(1, 2)) == 0.5
    assert Phi(1) == 0.0
    assert Phi(F(1, 4)) == 0.25
    assert Phi.lip_seminorm == 1.0


def test_integrate_product_identity_times_step():
    chi = PiecewiseConstant([0, F(1, 2), 1], [1.0, -1.0])
    assert integrate_product(PiecewiseLinear.identity(), chi) == pytest.approx(-0.25, abs=1e-15)


def test_sign_function_roots_are_exact():
    P = antiderivative(PiecewiseConstant([0, F(1, 3), 1], [1.0, -1.0]))
    # P rises to 1/3 then falls back to -1/3 at x = 1; the root sits at 2/3
    s = sign_function(P)
    assert list(s.values) == [1.0, -1.0]
    assert abs(float(s.breakpoints[1]) - 2 / 3) < 1e-18 + 2.0**-62


def test_to_dict_round_trip():
    P = PiecewiseLinear([0, F(1, 3), 1], [0.0, 0.5, 0.25])
    assert PiecewiseLinear.from_dict(P.to_dict()) == P
    Q = PiecewiseConstant([0, F(2, 7), 1], [3.0, -1.5])
    assert PiecewiseConstant.from_dict(Q.to_dict()) == Q


def test_lipschitz_norm_of_identity():
    f = LipschitzFunction(PiecewiseLinear.identity())
    assert f.lip_seminorm == 1.0
    assert f.sup_norm == 1.0
    assert f.lip1_norm == 2.0


def test_cell_values_requires_alignment():
    P = PiecewiseConstant([0, F(1, 3), 1], [1.0, 2.0])
    assert np.array_equal(P.cell_values(3), [1.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        P.cell_values(4)


@settings(max_examples=60, deadline=None)
@given(step_functions(), step_functions(), st.integers(-3, 3), st.integers(-3, 3))
def test_integral_is_bilinear(P, Q, a, b):
    lhs = linear_combination([(float(a), P), (float(b), Q)]).integral()
    assert lhs == pytest.approx(a * P.integral() + b * Q.integral(), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(step_functions())
def test_canonical_form_idempotent(P):
    again = PiecewiseConstant(P.breakpoints, P.values)
    assert again == P
    assert all(a != b for a, b in zip(P.values, P.values[1:]))


@settings(max_examples=60, deadline=None)
@given(step_functions())
def test_sign_times_primitive_nonnegative(P):
    Phi = antiderivative(P)
    s = sign_function(Phi)
    # check sign * Phi >= 0 at midpoints of the merged cells
    bps = sorted(set(s.breakpoints) | set(Phi.breakpoints))
    for a, b in zip(bps, bps[1:]):
        m = (a + b) / 2
        assert s(m) * Phi(m) >= -1e-14


@settings(max_examples=60, deadline=None)
@given(step_functions())
def test_antiderivative_matches_integral(P):
    Phi = antiderivative(P)
    assert Phi(1) == pytest.approx(P.integral(), abs=1e-13)
    assert Phi(0) == 0.0


@settings(max_examples=40, deadline=None)
@given(step_functions())
def test_l2_norm_matches_dense_sum(P):
    L = P.denominator
    dense = P.cell_values(L)
    assert l2_norm_sq(P) == pytest.approx(float(np.sum(dense**2)) / L, rel=1e-12, abs=1e-14)
