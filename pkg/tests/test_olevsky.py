import math

import numpy as np
import pytest

from confactor.olevsky import InfeasibleError, construct, prescribed_demo
from confactor.piecewise import PiecewiseConstant


def harmonic(m):
    return sum(1.0 / n for n in range(1, m + 1))


def test_harmonic_oracle():
    # asymptotic expansion ln m + Euler gamma + 1/(2m) - 1/(12 m^2)
    m = 256
    assert harmonic(m) == pytest.approx(math.log(m) + 0.5772156649015329 + 1 / (2 * m) - 1 / (12 * m * m), abs=1e-9)


def test_construct_hits_targets():
    a = np.array([1.0, 0.5, 0.25, 0.125])
    f0 = PiecewiseConstant.constant(1.0)
    ps = construct(a, f0, 0.5)
    assert ps.gram_residual() <= 1e-13
    assert ps.step_gram_residual() <= 1e-13
    coeffs = [fn.integral() for fn in ps.functions]
    assert np.max(np.abs(np.array(coeffs) - 0.5 * a)) <= 1e-14


def test_feasibility_boundary():
    a = np.array([3.0, 4.0])
    f0 = PiecewiseConstant.constant(1.0)
    b_max = 1.0 / 5.0
    ps = construct(a, f0, b_max)
    assert ps.gram_residual() <= 1e-12
    with pytest.raises(InfeasibleError, match="b <="):
        construct(a, f0, b_max * (1 + 1e-6))


def test_nonconstant_f0():
    f0 = PiecewiseConstant.from_grid([1.0, -2.0, 0.5, 3.0, 0.0, 1.0])
    a = [0.3, 0.2, 0.1]
    ps = construct(a, f0, 1.0, M=6)
    vals = [float(np.sum(f0.cell_values(6) * fn.cell_values(6))) / 6 for fn in ps.functions]
    assert np.allclose(vals, a, atol=1e-13)


def test_edge_cases():
    f0 = PiecewiseConstant.constant(1.0)
    ps = construct([1.0], f0, 1.0)
    assert ps.N == 1
    assert ps.functions[0].integral() == pytest.approx(1.0)
    assert construct([1.0], f0, 0.0).gram_residual() <= 1e-14
    with pytest.raises(ValueError):
        construct([], f0, 0.1)
    with pytest.raises(ValueError):
        construct([1.0, -1.0], f0, 0.1)
    with pytest.raises(ValueError):
        construct([1.0, 1.0], f0, 0.1, M=2)
    with pytest.raises(ValueError):
        construct([1.0], PiecewiseConstant.zero(), 0.1)


def test_demo_small():
    rep = prescribed_demo(32)
    assert rep.max_deviation <= 1e-10
    assert rep.coefficient_fidelity <= 1e-12
    assert rep.squared_sum <= rep.squared_bound
    rows = rep.rows()
    assert rows[0]["m"] == 1 and len(rows) == 32
    assert rows[-1]["bH_m"] == pytest.approx(rep.b * harmonic(32))


def test_demo_rejects_large_gamma():
    with pytest.raises(ValueError):
        prescribed_demo(8, gamma=0.5)


def test_default_b_is_below_feasibility():
    rep = prescribed_demo(16)
    a = np.arange(1, 17) ** (-4 / 3)
    assert rep.b == pytest.approx(0.9 / math.sqrt(float(a @ a)))
