import math
from fractions import Fraction

import numpy as np
import pytest

from confactor.extremal import (
    build_extremal,
    build_extremal_trig,
    functional_value,
    grid_increment,
    lip1_norm,
    lower_bound_check,
)
from confactor.factors import SignSequence, WeightSequence, build_QN, compute_DN
from confactor.ons import OrthonormalSystem
from confactor.piecewise import antiderivative

HAAR = OrthonormalSystem("haar")
WALSH = OrthonormalSystem("walsh")
TRIG = OrthonormalSystem("trig")
ONE = WeightSequence.const(1.0)


def test_example_N4():
    wit = lower_bound_check(HAAR, ONE, [1, 1, 1, 1], 4)
    assert wit.D_N == pytest.approx(0.68342, abs=1e-5)
    assert wit.deficit_bound == pytest.approx(2.25, abs=1e-12)
    assert wit.holds
    assert isinstance(wit.deficit_bound, float)


def test_extremal_slopes_and_value():
    Q = build_QN(HAAR, ONE, [1, 1, -1, 1, 1, -1, 1, 1], 8)
    f = build_extremal(Q)
    assert set(np.asarray(f.representation.slopes).tolist()) <= {-1.0, 0.0, 1.0}
    # <f, Q> = -int |P| by parts, since f(1) = int sign(P) and P(1) = 0
    P = antiderivative(Q)
    xs = (np.arange(8192) + 0.5) / 8192
    abs_int = float(np.mean(np.abs([P(Fraction(x)) for x in xs])))
    assert functional_value(f, Q) == pytest.approx(-abs_int, abs=1e-6)


@pytest.mark.parametrize("system", [HAAR, WALSH])
def test_lower_bound_random(system):
    rng = np.random.default_rng(9)
    for _ in range(10):
        N = int(rng.integers(2, 80))
        wit = lower_bound_check(system, WeightSequence.logpow(1.0), SignSequence.random(N, rng), N)
        assert wit.holds
        f = wit.f_N
        assert f.lip_seminorm <= 1.0
        assert lip1_norm(f) <= 2.0
        assert grid_increment(f, N) <= 1.0 / N + 1e-15


def test_lower_bound_without_mean_zero():
    raw = HAAR.with_mean_zero(False)
    wit = lower_bound_check(raw, ONE, [1] * 16, 16)
    assert wit.holds
    assert wit.D_N == pytest.approx(compute_DN(raw, ONE, [1] * 16, 16))


def test_trig_extremal():
    N = 24
    eps = [1, -1] * 12
    Q = build_QN(TRIG, ONE, eps, N)
    f = build_extremal_trig(Q, cells=2**12)
    assert set(np.asarray(f.representation.slopes).tolist()) <= {-1.0, 0.0, 1.0}
    wit = lower_bound_check(TRIG, ONE, eps, N, cells=2**12)
    assert wit.holds


def test_N_below_two_rejected():
    with pytest.raises(ValueError):
        lower_bound_check(HAAR, ONE, [1], 1)


def test_witness_dict():
    wit = lower_bound_check(WALSH, ONE, [1] * 8, 8)
    d = wit.to_dict()
    assert d["N"] == 8 and "f_N" in d
    assert math.isfinite(d["lip1_norm"])
    assert "f_N" not in wit.to_dict(include_function=False)
