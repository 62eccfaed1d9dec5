"""Seeded property suites over the inequalities the toolkit relies on.

Each suite returns a dict with ``count``, ``violations``, ``worst`` (the
smallest slack, or the largest error for the tower suite) and ``passed``.
"""
from __future__ import annotations

import math

import numpy as np

from .dynamics import TWO_PI
from .partition import (
    build_partition,
    check_elementary,
    ray_itinerary,
    ray_orbit,
    strip_index,
)
from .probe import sandwich_check
from .rays import Constant, ExternalAddress, Periodic, singular_ray, trace_ray
from .tower import (
    EQUAL,
    GREATER,
    LESS,
    TowerMagnitude,
    iterated_exp,
    tower_cmp,
)

SUITES = ("elementary", "sandwich", "rays", "tower", "partition")


def _disk(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    th = rng.uniform(0.0, TWO_PI, n)
    return r * np.exp(1j * th)


def suite_elementary(rng, samples=100_000):
    zs = _disk(rng, samples, 30.0)
    As = _disk(rng, samples, 5.0)
    Ms = rng.choice([0.0, 1.0, 5.0], samples)
    bad = 0
    worst = math.inf
    broken_links = 0
    for z, a, M in zip(zs, As, Ms):
        rep = check_elementary(complex(a), float(M), complex(z))
        if not rep.holds:
            bad += 1
        if not all(rep.link_ok):
            broken_links += 1
        worst = min(worst, rep.log_slack)
    return {
        "count": samples,
        "violations": bad,
        "broken_links": broken_links,
        "worst": worst,
        "passed": bad == 0 and broken_links == 0 and worst > 0,
    }


def suite_sandwich(rng=None, anchors=(1.0, 2.0, 3.0), n=4):
    bad = 0
    worst = math.inf
    for x0 in anchors:
        rep = sandwich_check(0.0, complex(x0), x0, n)
        bad += sum(not (s.lower_ok and s.upper_ok) for s in rep.steps)
        worst = min([worst] + [s.lower_slack for s in rep.steps])
    return {"count": len(anchors) * (n + 1), "violations": bad, "worst": worst, "passed": bad == 0}


def random_address(rng, max_entry=3):
    prefix = tuple(int(x) for x in rng.integers(-max_entry, max_entry + 1, rng.integers(0, 4)))
    if rng.uniform() < 0.5:
        tail = Constant(int(rng.integers(-max_entry, max_entry + 1)))
    else:
        tail = Periodic(tuple(int(x) for x in rng.integers(-max_entry, max_entry + 1, 2)))
    return ExternalAddress(prefix, tail)


def exp_bound_violations(p, pt, m=15):
    """Entries of the ray point's itinerary breaking 2 pi |u_j| <= exp^j(|z| + alpha).

    Returns ``(literal, proved, itinerary)``: ``literal`` lists every j where the bound
    fails; ``proved`` lists the failures of the form that follows from the
    elementary chain, which at j = 0 reads 2 pi |u_0| <= |z| + M (the chain
    only starts to pay off after one step, and M may exceed alpha).
    """
    it = ray_itinerary(p, pt, m)
    x = abs(pt.z) + p.alpha
    literal, proved = [], []
    for j, idx in enumerate(it.indices):
        u = max(abs(c) for c in idx.candidates())
        lhs = TowerMagnitude.from_float(TWO_PI * u)
        if tower_cmp(lhs, iterated_exp(x, j)) == GREATER:
            literal.append(j)
        bound = iterated_exp(x, j) if j else TowerMagnitude.from_float(abs(pt.z) + p.M)
        if tower_cmp(lhs, bound) == GREATER:
            proved.append(j)
    return literal, proved, it


def suite_rays(rng, points=100, m=15, partition=None):
    """Exponential bound on ray itineraries, and |Im f^j(z) - 2 pi u_j| <= M
    where Re f^j(z) >= R."""
    p = partition if partition is not None else build_partition(0.0, singular_ray(0.0), K=2)
    bad = 0
    literal_bad = 0
    im_bad = 0
    worst = math.inf
    for _ in range(points):
        s = random_address(rng)
        t = float(rng.uniform(0.5, 5.0))
        pt = trace_ray(p.parameter, s, t)
        literal, proved, it = exp_bound_violations(p, pt, m)
        bad += len(proved)
        literal_bad += len(literal)
        u0 = max(abs(c) for c in it.indices[0].candidates())
        worst = min(worst, abs(pt.z) + p.M - TWO_PI * u0)
        for (re, im), idx in zip(ray_orbit(p.parameter, pt, len(it)), it.indices):
            if re >= p.R and math.isfinite(re):
                dev = min(abs(im - TWO_PI * c) for c in idx.candidates())
                if dev > p.M + 1e-6:
                    im_bad += 1
    return {
        "count": points,
        "violations": bad,
        "literal_violations": literal_bad,
        "imag_violations": im_bad,
        "worst": worst,
        "passed": bad == 0 and im_bad == 0,
    }


def _direct_iterated_exp(x, n):
    v = x
    for _ in range(n):
        if v > 709.0:
            return math.inf
        v = math.exp(v)
    return v


def suite_tower(rng, samples=10_000, rel_tol=1e-12):
    worst = 0.0
    checked = 0
    bad = 0
    for _ in range(samples):
        n = int(rng.integers(0, 6))
        x = float(rng.uniform(0.0, 4.0))
        v = _direct_iterated_exp(x, n)
        if not v < 1e300:
            continue
        checked += 1
        err = abs(iterated_exp(x, n).to_float() - v) / max(v, 1e-300)
        worst = max(worst, err)
        bad += err > rel_tol
    trans_bad = 0
    order_bad = 0
    for _ in range(samples):
        u, v, w = (
            iterated_exp(float(rng.uniform(0.0, 3.0)), int(rng.integers(0, 5))) for _ in range(3)
        )
        c_uv, c_vw, c_uw = tower_cmp(u, v), tower_cmp(v, w), tower_cmp(u, w)
        if c_uv == c_vw == LESS and c_uw != LESS:
            trans_bad += 1
        if c_uv == c_vw == GREATER and c_uw != GREATER:
            trans_bad += 1
        if c_uv == c_vw == EQUAL and c_uw != EQUAL:
            trans_bad += 1
        fu, fv = u.to_float(), v.to_float()
        if fu < 1e300 and fv < 1e300 and abs(fu - fv) > 1e-9 * max(fu, fv, 1.0):
            if (fu < fv) != (c_uv == LESS):
                order_bad += 1
    return {
        "count": checked,
        "violations": bad,
        "transitivity_violations": trans_bad,
        "order_violations": order_bad,
        "worst": worst,
        "passed": bad == 0 and trans_bad == 0 and order_bad == 0,
    }


def suite_partition(rng, samples=2000, partition=None):
    """strip_index(z + 2 pi i k) = strip_index(z) + k."""
    p = partition if partition is not None else build_partition(0.0, singular_ray(0.0), K=2)
    lo, hi = p.re_range
    bad = 0
    for _ in range(samples):
        z = complex(rng.uniform(lo, hi + 5.0), rng.uniform(-20.0, 20.0))
        k = int(rng.integers(-5, 6))
        s0 = strip_index(p, z)
        s1 = strip_index(p, z + complex(0.0, TWO_PI * k))
        if s0.ambiguous or s1.ambiguous:
            ok = bool(set(c + k for c in s0.candidates()) & set(s1.candidates()))
        else:
            ok = s1.k == s0.k + k
        bad += not ok
    return {"count": samples, "violations": bad, "worst": 0.0, "passed": bad == 0}


def run_suites(names=SUITES, seed=0, elementary_samples=100_000) -> dict:
    """Run the named suites, each from its own generator spawned from seed."""
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites: {sorted(unknown)}")
    children = np.random.SeedSequence(seed).spawn(len(SUITES))
    rngs = {name: np.random.default_rng(ch) for name, ch in zip(SUITES, children)}
    out = {}
    shared = None
    for name in SUITES:
        if name not in names:
            continue
        rng = rngs[name]
        if name == "elementary":
            out[name] = suite_elementary(rng, elementary_samples)
        elif name == "sandwich":
            out[name] = suite_sandwich(rng)
        elif name == "tower":
            out[name] = suite_tower(rng)
        else:
            if shared is None:
                shared = build_partition(0.0, singular_ray(0.0), K=2)
            if name == "rays":
                out[name] = suite_rays(rng, partition=shared)
            else:
                out[name] = suite_partition(rng, partition=shared)
    return out
