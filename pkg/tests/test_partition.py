import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from expmapkit.dynamics import TWO_PI
from expmapkit.errors import (
    GammaThroughSingularValue,
    InvalidInput,
    NonMonotoneCurves,
    OutOfTracedRange,
    PrefixTooShort,
)
from expmapkit.partition import (
    StripIndex,
    alpha_of,
    build_partition,
    check_elementary,
    exp_bound_holds,
    itinerary,
    kneading,
    minimal_exp_bound,
    periodicity_check,
    ray_itinerary,
    ray_orbit,
    strip_index,
)
from expmapkit.rays import ExternalAddress, RayPoint, RayPolyline, singular_ray, trace_ray

unique = StripIndex


def test_a0_partition_geometry(p0):
    assert p0.M == pytest.approx(TWO_PI)
    assert p0.alpha == pytest.approx(math.log(3 * (TWO_PI + 2)))
    for k, curve in p0.curves.items():
        assert np.allclose(curve.imag, TWO_PI * k, atol=1e-12)
    assert p0.c0 == 0.0


def test_strip_index_examples(p0):
    assert strip_index(p0, 1 + math.pi * 1j) == unique(0)
    assert strip_index(p0, 1 + 5 * math.pi * 1j) == unique(2)
    assert strip_index(p0, 1 + 0j, eps=0.01) == StripIndex(0, -1)
    assert str(strip_index(p0, 1 + 0j, eps=0.01)) == "Ambiguous(0, -1)"
    assert strip_index(p0, 1e6 + 1j) == unique(0)
    with pytest.raises(OutOfTracedRange):
        strip_index(p0, -50 + 1j)


@given(st.floats(-2.0, 30.0), st.floats(-20.0, 20.0), st.integers(-5, 5))
def test_strip_equivariance(p0, x, y, k):
    s0 = strip_index(p0, complex(x, y))
    s1 = strip_index(p0, complex(x, y + TWO_PI * k))
    assert set(c + k for c in s0.candidates()) & set(s1.candidates())


def test_itinerary_examples(p0):
    assert itinerary(p0, 1 + math.pi * 1j, 1).entries == [0]
    it = itinerary(p0, 0, 3)
    assert [str(s) for s in it.indices] == ["Ambiguous(0, -1)"] * 3
    for s in kneading(p0, 4).indices:
        assert s == StripIndex(0, -1)


def test_ray_itinerary_follows_address(p0):
    pt = trace_ray(0, ExternalAddress.parse(";const:1"), 3.0)
    it = ray_itinerary(p0, pt, 5)
    assert it.entries == [1, 1, 1, 1, 1]
    assert minimal_exp_bound(it) == pytest.approx(TWO_PI)
    pt = trace_ray(0, ExternalAddress.parse("2,0;per:1,3"), 2.0)
    assert ray_itinerary(p0, pt, 6).entries == pt.address.entries(6)


def test_negative_entries_sit_one_strip_lower(p0):
    # rays of negative address approach Im = 2 pi s from below
    pt = trace_ray(0, ExternalAddress.parse(";const:-1"), 3.0)
    it = ray_itinerary(p0, pt, 4)
    assert all(-2 in s.candidates() for s in it.indices)
    # past double range the iterate sits on the line itself
    assert it.indices[-1] == StripIndex(-1, -2)


def test_ray_orbit_matches_forward_iteration(p0):
    pt = trace_ray(0, ExternalAddress.parse("1;const:0"), 1.5)
    pts = ray_orbit(0, pt, 3)
    z = pt.z
    for re, im in pts:
        assert abs(complex(re, im) - z) < 1e-8 * max(1, abs(z))
        z = np.exp(z)


def test_a1_partition():
    p = build_partition(1.0, singular_ray(1.0), K=3)
    assert math.isfinite(p.M) and p.M > 0
    curves = p.curves
    for k in range(-3, 3):
        assert np.all(curves[k + 1].imag > curves[k].imag)
    it = kneading(p, 4)
    for s in it.indices:
        assert s.k == 0 or s.ambiguous


def test_complex_parameter_kneading():
    a = 0.5 + 0.01j
    p = build_partition(a, singular_ray(a))
    it = kneading(p, 4)
    assert len(it) >= 1
    assert all(isinstance(s.k, int) for s in it.indices)


def test_build_partition_errors():
    line = singular_ray(0.0)
    s = line.samples
    through = RayPolyline(line.address, s[:3] + (s[4], s[3]) + s[5:], 0j)
    with pytest.raises(NonMonotoneCurves):
        build_partition(0.0, through)
    bad = RayPolyline(line.address, line.samples + (RayPoint(line.address, 99.0, 0j, 1, 0.0),), 0j)
    with pytest.raises(GammaThroughSingularValue):
        build_partition(0.0, bad)
    with pytest.raises(InvalidInput):
        build_partition(0.0, line, K=0)


def test_minimal_exp_bound_examples():
    assert minimal_exp_bound([0, 0, 0]) == 0
    assert minimal_exp_bound([1]) == pytest.approx(TWO_PI)
    assert minimal_exp_bound([0, 3]) == pytest.approx(math.log(6 * math.pi))
    assert all(exp_bound_holds([0, 3, 100], minimal_exp_bound([0, 3, 100])))
    with pytest.raises(InvalidInput):
        minimal_exp_bound([])


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=12), st.integers(-50, 50))
def test_minimal_exp_bound_monotone(us, extra):
    assert minimal_exp_bound(us + [extra]) >= minimal_exp_bound(us)
    assert all(exp_bound_holds(us, minimal_exp_bound(us)))


def test_check_elementary_examples():
    rep = check_elementary(0, 1, 0)
    assert rep.holds and rep.alpha == pytest.approx(math.log(9))
    assert rep.lhs == pytest.approx(9) and rep.rhs == pytest.approx(1 + 1 + math.log(9))
    rep = check_elementary(0, 0, 0)
    assert rep.holds and rep.lhs == pytest.approx(6) and rep.rhs == pytest.approx(1 + math.log(6))
    with pytest.raises(InvalidInput):
        check_elementary(0, -1, 0)


@given(
    st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.sampled_from([0.0, 1.0, 5.0]),
)
def test_elementary_chain(z, a, M):
    rep = check_elementary(a, M, z)
    assert rep.holds and all(rep.link_ok) and rep.log_slack > 0


def test_check_elementary_far_right():
    rep = check_elementary(0.3, 2.0, complex(900.0, 1.0))
    assert rep.holds and math.isinf(rep.lhs)


def test_alpha():
    assert alpha_of(0, 1) == pytest.approx(math.log(9))


def test_periodicity_examples():
    assert periodicity_check([0] * 12, 4).period == 1
    assert str(periodicity_check([0, 1] * 6, 4)) == "consistent with period 2"
    assert periodicity_check([0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192], 5) is None
    with pytest.raises(PrefixTooShort):
        periodicity_check([0, 1], 2)


def test_periodicity_with_ambiguous_entries(p0):
    assert periodicity_check(kneading(p0, 5), 1).period == 1


def test_imaginary_part_bound(p0):
    rng = np.random.default_rng(3)
    for _ in range(30):
        s = ExternalAddress(tuple(int(x) for x in rng.integers(-3, 4, 2)), int(rng.integers(-3, 4)))
        pt = trace_ray(0, s, float(rng.uniform(0.6, 5)))
        it = ray_itinerary(p0, pt, 10)
        for (re, im), idx in zip(ray_orbit(0, pt, len(it)), it.indices):
            if re >= p0.R:
                assert min(abs(im - TWO_PI * c) for c in idx.candidates()) <= p0.M + 1e-6
