"""Strip partition from the singular ray, itineraries and kneading sequences,
exponential bounds on itineraries and the elementary inequality chain.

The curves eta_k are the preimages of gamma under f_a, that is the branches
Log(gamma - a) + 2 pi i k, and S_k is the strip between eta_k (below) and
eta_{k+1} (above).  With this labeling S_0 contains r + pi i for large r.
An itinerary entry u_j is the strip containing f^j(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import TWO_PI, as_parameter, step
from .errors import (
    GammaThroughSingularValue,
    InvalidInput,
    NonMonotoneCurves,
    OutOfTracedRange,
    PrefixTooShort,
    RangeExceeded,
)
from .rays import RayPoint, RayPolyline, _pullback
from .tower import (
    EXP_MAX_ARG,
    GREATER,
    iterated_exp,
    iterated_log_need,
    tower_cmp,
    TowerMagnitude,
)

DEFAULT_EPS = 1e-6
# beyond this |Im z| a double cannot resolve a strip of height 2 pi
_IM_RESOLVABLE = math.pi / 2.2e-16

BUDGET_EXHAUSTED = "BudgetExhausted"
LEFT_TRACED_REGION = "OrbitLeftTracedRegion"
ESCAPED = "Escaped"


@dataclass(frozen=True)
class StripIndex:
    """Strip k, or ``Ambiguous(k, alt)`` when within eps of a boundary."""

    k: int
    alt: int | None = None

    @property
    def ambiguous(self) -> bool:
        return self.alt is not None

    def candidates(self) -> tuple:
        return (self.k,) if self.alt is None else (self.k, self.alt)

    def __str__(self):
        if self.alt is None:
            return f"Unique({self.k})"
        return f"Ambiguous({self.k}, {self.alt})"


@dataclass(frozen=True, eq=False)
class Partition:
    parameter: complex
    gamma: RayPolyline
    K: int
    eta_re: np.ndarray = field(repr=False)
    eta_im: np.ndarray = field(repr=False)
    R: float
    M: float
    alpha: float

    @property
    def c0(self) -> float:
        """Imaginary offset of eta_0 at its right end (the asymptote)."""
        return float(self.eta_im[-1])

    def curve(self, k: int) -> np.ndarray:
        return self.eta_re + 1j * (self.eta_im + TWO_PI * k)

    @property
    def curves(self) -> dict:
        return {k: self.curve(k) for k in range(-self.K, self.K + 1)}

    @property
    def re_range(self) -> tuple:
        return float(self.eta_re[0]), float(self.eta_re[-1])

    def constants(self) -> dict:
        return {"M": self.M, "alpha": self.alpha, "R": self.R}


def alpha_of(a, M: float) -> float:
    return math.log(3.0 * (abs(complex(a)) + M + 2.0))


def build_partition(a, gamma: RayPolyline, K: int = 2, R: float = 0.0) -> Partition:
    a = as_parameter(a)
    if K < 1:
        raise InvalidInput("K must be at least 1")
    zs = np.asarray(gamma.zs, dtype=complex)
    # gamma starts at a itself; that endpoint has no preimage
    if zs.size and zs[0] == a:
        zs = zs[1:]
    if np.any(zs == a):
        raise GammaThroughSingularValue("a sample of gamma equals the singular value")
    if zs.size < 2:
        raise InvalidInput("gamma needs at least two samples besides a")
    logs = np.log(zs - a)
    # continuous branch, principal at the right end
    im = np.unwrap(logs.imag[::-1])[::-1]
    re = logs.real
    if not np.all(np.diff(re) > 0):
        raise NonMonotoneCurves("Re eta_0 is not strictly increasing along gamma")
    lo = im
    hi = im + TWO_PI
    keep = re >= R
    keep[-1] = True  # the right end stands for the horizontal asymptote
    M = float(max(np.abs(lo[keep]).max(), np.abs(hi[keep]).max()))
    return Partition(a, gamma, int(K), re, im, float(R), M, alpha_of(a, M))


def _lower_boundary(p: Partition, x: float) -> float:
    if x < p.eta_re[0]:
        raise OutOfTracedRange(f"Re z = {x!r} is left of the traced curves")
    if x >= p.eta_re[-1]:
        return p.c0
    return float(np.interp(x, p.eta_re, p.eta_im))


def _classify(y_rel: float, eps: float) -> StripIndex:
    k = math.floor(y_rel / TWO_PI)
    d = y_rel - TWO_PI * k
    if d < eps:
        return StripIndex(k, k - 1)
    if TWO_PI - d < eps:
        return StripIndex(k, k + 1)
    return StripIndex(k)


def strip_index(p: Partition, z: complex, eps: float = DEFAULT_EPS) -> StripIndex:
    z = complex(z)
    return _classify(z.imag - _lower_boundary(p, z.real), eps)


@dataclass(frozen=True)
class Itinerary:
    indices: tuple
    truncation: str

    @property
    def entries(self) -> list:
        return [s.k for s in self.indices]

    @property
    def flags(self) -> list:
        return ["Unique" if s.alt is None else str(s) for s in self.indices]

    def __len__(self):
        return len(self.indices)


def itinerary(p: Partition, z: complex, m: int, eps: float = DEFAULT_EPS) -> Itinerary:
    """u_j = strip of f^j(z) for j < m, truncated when the orbit leaves the
    traced region to the left or leaves double range."""
    if m < 1:
        raise InvalidInput("m must be at least 1")
    w = complex(z)
    out = []
    for j in range(m):
        if abs(w.imag) > _IM_RESOLVABLE:
            return Itinerary(tuple(out), ESCAPED)
        try:
            out.append(strip_index(p, w, eps))
        except OutOfTracedRange:
            return Itinerary(tuple(out), LEFT_TRACED_REGION)
        if j + 1 < m:
            try:
                w = step(p.parameter, w)
            except RangeExceeded:
                return Itinerary(tuple(out), ESCAPED)
    return Itinerary(tuple(out), BUDGET_EXHAUSTED)


def kneading(p: Partition, m: int, eps: float = DEFAULT_EPS) -> Itinerary:
    return itinerary(p, p.parameter, m, eps)


def ray_orbit(a, point: RayPoint, m: int) -> list:
    """f^j(z) for j < m for a traced ray point, as ``(re, im)`` pairs.

    Iterates are read off the pullback chain rather than iterated forward.
    Beyond double range ``re`` is ``inf`` and ``im`` is 2 pi s_j plus a
    correction below double resolution.
    """
    a = as_parameter(a)
    s = point.address
    d = max(point.depth, m)
    entries = s.entries(d + 1)
    tr = _pullback(a, entries, point.t, d, TWO_PI * entries[d], complex(0.0, TWO_PI * entries[d - 1]))
    out = []
    for j in range(m):
        if j < len(tr.chain):
            out.append((tr.chain[j].real, tr.chain[j].imag))
        else:
            out.append((math.inf, TWO_PI * entries[j]))
    return out


def ray_itinerary(p: Partition, point: RayPoint, m: int, eps: float = DEFAULT_EPS) -> Itinerary:
    """Itinerary of a ray point, continued past double range through its
    address: far right, f^j(z) sits at height 2 pi s_j over the asymptote."""
    out = []
    for x, y in ray_orbit(p.parameter, point, m):
        try:
            lower = p.c0 if math.isinf(x) else _lower_boundary(p, x)
        except OutOfTracedRange:
            return Itinerary(tuple(out), LEFT_TRACED_REGION)
        out.append(_classify(y - lower, eps))
    return Itinerary(tuple(out), BUDGET_EXHAUSTED)


def _abs_entries(it) -> list:
    if isinstance(it, Itinerary):
        return [max(abs(c) for c in s.candidates()) for s in it.indices]
    return [abs(int(u)) for u in it]


def minimal_exp_bound(it) -> float:
    """Smallest x >= 0 with 2 pi |u_j| <= exp^j(x) on the whole prefix.

    Ambiguous entries count with the larger |u|.
    """
    us = _abs_entries(it)
    if not us:
        raise InvalidInput("itinerary has no entries")
    return max(iterated_log_need(TWO_PI * u, j) if u else 0.0 for j, u in enumerate(us))


def exp_bound_holds(it, x: float) -> list:
    """Per-entry check of 2 pi |u_j| <= exp^j(x) in tower arithmetic."""
    out = []
    for j, u in enumerate(_abs_entries(it)):
        lhs = TowerMagnitude.from_float(TWO_PI * u)
        out.append(tower_cmp(lhs, iterated_exp(x, j)) != GREATER)
    return out


# ---------------------------------------------------------------------------
# the elementary chain


@dataclass(frozen=True)
class ChainReport:
    holds: bool
    alpha: float
    log_links: tuple
    links: tuple
    link_ok: tuple
    log_slack: float

    @property
    def lhs(self) -> float:
        return self.links[0]

    @property
    def rhs(self) -> float:
        return self.links[-1]


def _ln_exp_plus(x: float, c: float) -> float:
    """ln(exp(x) + c) for c >= 0."""
    if x <= EXP_MAX_ARG:
        return math.log(math.exp(x) + c)
    return x + math.log1p(c * math.exp(-x))


def check_elementary(a, M: float, z: complex, tol: float = 1e-12) -> ChainReport:
    """exp(|z|+alpha) = 3(|a|+M+2)e^|z| >= e^|z| + 2(|a|+M+2)
    >= e^Re z + |a| + M + ln 3 + (|a|+M+2) >= e^Re z + |a| + M + alpha
    >= |f(z)| + M + alpha, evaluated as logarithms."""
    a = as_parameter(a)
    if not M >= 0:
        raise InvalidInput("M must be nonnegative")
    z = complex(z)
    r, x = abs(z), z.real
    c = abs(a) + M + 2.0
    alpha = math.log(3.0 * c)
    logs = [
        r + alpha,
        math.log(3.0 * c) + r,
        _ln_exp_plus(r, 2.0 * c),
        _ln_exp_plus(x, abs(a) + M + math.log(3.0) + c),
        _ln_exp_plus(x, abs(a) + M + alpha),
    ]
    if x <= EXP_MAX_ARG:
        logs.append(math.log(abs(step(a, z)) + M + alpha))
    else:
        # |e^z + a| = e^x |1 + a e^-z|
        ln_f = x + math.log(abs(1.0 + a * complex(math.cos(-z.imag), math.sin(-z.imag)) * math.exp(-x)))
        logs.append(ln_f + math.log1p((M + alpha) * math.exp(-ln_f)))
    ok = [abs(logs[0] - logs[1]) <= tol * max(1.0, abs(logs[0]))]
    for u, v in zip(logs[1:], logs[2:]):
        ok.append(u >= v - tol * max(1.0, abs(u)))
    links = tuple(math.exp(v) if v <= EXP_MAX_ARG else math.inf for v in logs)
    slack = logs[0] - logs[-1]
    return ChainReport(slack >= -tol * max(1.0, abs(logs[0])), alpha, tuple(logs), links, tuple(ok), slack)


# ---------------------------------------------------------------------------
# periodicity


@dataclass(frozen=True)
class PeriodResult:
    period: int

    def __str__(self):
        return f"consistent with period {self.period}"


def periodicity_check(it, p_max: int):
    """Smallest p <= p_max with u_{j+p} = u_j on the whole prefix (ambiguous
    entries match either candidate), or None.  Only ever "consistent with"."""
    if isinstance(it, Itinerary):
        cands = [set(s.candidates()) for s in it.indices]
    else:
        cands = [{int(u)} for u in it]
    if p_max < 1:
        raise InvalidInput("p_max must be at least 1")
    if len(cands) < 3 * p_max:
        raise PrefixTooShort(f"need {3 * p_max} entries, have {len(cands)}")
    for p in range(1, p_max + 1):
        if all(cands[j] & cands[j + p] for j in range(len(cands) - p)):
            return PeriodResult(p)
    return None
