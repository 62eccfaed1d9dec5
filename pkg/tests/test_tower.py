import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expmapkit.errors import InvalidInput
from expmapkit.tower import (
    EQUAL,
    GREATER,
    INFINITY,
    LESS,
    TowerMagnitude,
    iterated_exp,
    iterated_log_need,
    normalize,
    tower_add,
    tower_add_float,
    tower_cmp,
    tower_exp,
    tower_log,
    tower_scale,
)

from .oracles import TOWERS

levels = st.integers(0, 6)
small_x = st.floats(0.0, 4.0)


@pytest.mark.parametrize("x, n, level, mantissa", TOWERS)
def test_iterated_exp_matches_reference(x, n, level, mantissa):
    t = iterated_exp(x, n)
    assert t.level == level
    assert t.mantissa == pytest.approx(mantissa, rel=1e-14, abs=1e-15)


def test_examples():
    assert iterated_exp(0.0, 1).to_float() == 1.0
    assert iterated_exp(1.0, 2).to_float() == pytest.approx(15.154262241479262, rel=1e-15)
    assert tower_cmp(iterated_exp(5.0, 0), iterated_exp(math.log(5.0), 1)) == EQUAL
    assert tower_cmp(iterated_exp(1.0, 2), iterated_exp(100.0, 0)) == LESS
    assert tower_cmp(iterated_exp(1.0, 3), iterated_exp(4.0, 2)) == LESS


def test_iterated_log_need():
    assert iterated_log_need(2 * math.pi, 0) == pytest.approx(2 * math.pi)
    assert iterated_log_need(6 * math.pi, 1) == pytest.approx(2.9365, abs=1e-4)
    assert iterated_log_need(0.5, 3) == 0.0
    for v, j in [(1e5, 2), (50.0, 1), (3.0, 3)]:
        x = iterated_log_need(v, j)
        assert tower_cmp(iterated_exp(x, j), TowerMagnitude.from_float(v)) != LESS


def test_canonical_band():
    t = normalize(0, 1e200)
    assert t.level == 3 and 1.0 <= t.mantissa < math.e
    assert normalize(4, 0.5) == TowerMagnitude(3, math.exp(0.5))
    assert normalize(2, -math.inf) == TowerMagnitude(0, 1.0)
    assert normalize(0, math.inf) is INFINITY


@pytest.mark.parametrize("bad", [(0, -1.0), (0, math.nan)])
def test_normalize_rejects(bad):
    with pytest.raises(InvalidInput):
        normalize(*bad)


def test_to_float_overflow():
    assert iterated_exp(1.0, 4).to_float() == math.inf
    assert not iterated_exp(1.0, 4).fits_float()
    assert iterated_exp(1.0, 3).fits_float()


def test_arithmetic_beyond_double_range():
    big = iterated_exp(2.0, 4)
    assert tower_add_float(big, 1e300) == big
    assert tower_log(tower_exp(big)) == big
    # a factor 2 is still visible three levels up, not four
    assert tower_cmp(tower_scale(iterated_exp(2.0, 3), 2.0), iterated_exp(2.0, 3)) == GREATER
    assert tower_cmp(tower_scale(big, 2.0), big) == EQUAL
    assert tower_add(big, TowerMagnitude.from_float(3.0)) == big
    assert tower_add(TowerMagnitude.from_float(2.0), TowerMagnitude.from_float(3.0)).to_float() == pytest.approx(5.0, rel=1e-14)
    assert tower_cmp(INFINITY, big) == GREATER


@given(small_x, levels)
def test_normalize_idempotent(x, n):
    t = iterated_exp(x, n)
    assert t.is_canonical()
    assert normalize(t.level, t.mantissa) == t


@given(st.lists(st.tuples(small_x, st.integers(0, 4)), min_size=3, max_size=3))
def test_cmp_transitive(triple):
    u, v, w = (iterated_exp(x, n) for x, n in triple)
    c_uv, c_vw, c_uw = tower_cmp(u, v), tower_cmp(v, w), tower_cmp(u, w)
    for c in (LESS, GREATER):
        if c_uv == c_vw == c:
            assert c_uw == c
    assert tower_cmp(v, u) == -c_uv


@given(st.floats(0.0, 1e290), st.floats(0.0, 1e290))
def test_order_embedding(x, y):
    u, v = TowerMagnitude.from_float(x), TowerMagnitude.from_float(y)
    if abs(x - y) > 1e-9 * max(x, y, 1.0):
        assert (tower_cmp(u, v) == LESS) == (x < y)


@given(small_x, st.integers(0, 5))
def test_matches_direct_evaluation(x, n):
    v = x
    for _ in range(n):
        if v > 700:
            return
        v = math.exp(v)
    if v < 1e300:
        assert iterated_exp(x, n).to_float() == pytest.approx(v, rel=1e-12)


def test_seeded_random_agreement():
    rng = np.random.default_rng(12)
    for _ in range(2000):
        x, n = rng.uniform(0, 3), int(rng.integers(0, 4))
        v = x
        for _ in range(n):
            v = math.exp(v) if v < 700 else math.inf
        if v < 1e300:
            assert iterated_exp(x, n).to_float() == pytest.approx(v, rel=1e-12)
