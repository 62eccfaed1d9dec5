"""Dynamic rays of f_a traced by pulling back tail seeds along an external
address.

The potential of a ray point is normalized by F(t) = exp(t) - 1/2: the point
of address s at potential t is the limit of

    w_depth = F^depth(t) + 2 pi i s_depth,
    w_j     = Log(w_{j+1} - a) + 2 pi i s_j,

so that f_a maps the point (s, t) to the point (shift(s), F(t)).  Seeds whose
real part overflows are started one level down from their asymptotic form.

The residual of a trace is the distance between the depth and depth - 1
approximations.  It is computed by propagating that difference through the
pullback chain (not by subtracting two rounded points), and it is also kept as
``decay = -ln(residual)`` in tower form, because it drops below double range
after a handful of levels.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    DEFAULT_T,
    TWO_PI,
    as_parameter,
    inverse_branch,
    orbit,
)
from .errors import (
    IncompatibleAddress,
    InvalidInput,
    LocateFailed,
    NotConverged,
    NotEscaping,
    PullbackHitSingularValue,
    SingularValueHit,
)
from .tower import (
    EXP_MAX_ARG,
    INFINITY,
    ZERO,
    TowerMagnitude,
    iterated_log_need,
    normalize,
    tower_add,
    tower_add_float,
    tower_cmp,
    GREATER,
)

T_MIN = 0.05
DEFAULT_DEPTH = 12
DEFAULT_TOL = 1e-9
DIST_TOL = 1e-6
# offset of the potential map F(t) = exp(t) - POTENTIAL_SHIFT
POTENTIAL_SHIFT = 0.5
# below this |difference| the residual is carried as a logarithm
_LOG_SWITCH = -650.0


# --------------------------------------------------------------------------
# addresses


@dataclass(frozen=True)
class Constant:
    k: int

    def __str__(self):
        return f"const:{self.k}"


@dataclass(frozen=True)
class Periodic:
    word: tuple

    def __post_init__(self):
        word = tuple(int(x) for x in self.word)
        if not word:
            raise InvalidInput("periodic tail needs a nonempty word")
        object.__setattr__(self, "word", word)

    def __str__(self):
        return "per:" + ",".join(str(x) for x in self.word)


def _entry_need(s: int, j: int) -> float:
    return iterated_log_need(TWO_PI * abs(s), j) if s else 0.0


@dataclass(frozen=True)
class ExternalAddress:
    """The sequence s_0 s_1 ... given by a finite prefix and a tail rule.

    ``witness`` is an x_s >= 0 with 2 pi |s_j| <= exp^j(x_s) for every j; the
    smallest one is computed when none is given.  The stored form is
    canonical: prefix entries that merely repeat the tail are absorbed into
    it, so equal sequences compare equal.
    """

    prefix: tuple = ()
    tail: Constant | Periodic = Constant(0)
    witness: float | None = None

    def __post_init__(self):
        prefix = [int(x) for x in self.prefix]
        tail = self.tail
        if isinstance(tail, int):
            tail = Constant(tail)
        if not isinstance(tail, (Constant, Periodic)):
            raise InvalidInput(f"unsupported tail {tail!r}")
        if isinstance(tail, Periodic):
            word = tail.word
            # shortest period of the word
            for p in range(1, len(word) + 1):
                if len(word) % p == 0 and word == word[:p] * (len(word) // p):
                    word = word[:p]
                    break
            tail = Constant(word[0]) if len(word) == 1 else Periodic(word)
        while prefix:
            if isinstance(tail, Constant) and prefix[-1] == tail.k:
                prefix.pop()
            elif isinstance(tail, Periodic) and prefix[-1] == tail.word[-1]:
                tail = Periodic((prefix.pop(),) + tail.word[:-1])
            else:
                break
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "tail", tail)
        need = self.minimal_witness()
        if self.witness is None:
            object.__setattr__(self, "witness", need)
        elif not self.witness >= need - 1e-12:
            raise IncompatibleAddress(
                f"witness {self.witness!r} too small; entries need x_s >= {need!r}"
            )

    def entry(self, j: int) -> int:
        if j < 0:
            raise InvalidInput("address index must be nonnegative")
        m = len(self.prefix)
        if j < m:
            return self.prefix[j]
        if isinstance(self.tail, Constant):
            return self.tail.k
        word = self.tail.word
        return word[(j - m) % len(word)]

    def entries(self, n: int) -> list:
        return [self.entry(j) for j in range(n)]

    def period_length(self) -> int:
        return 1 if isinstance(self.tail, Constant) else len(self.tail.word)

    def minimal_witness(self) -> float:
        # entries are bounded, and the need of a fixed value only drops with j,
        # so one pass over prefix plus one tail period finds the maximum
        n = len(self.prefix) + self.period_length()
        return max(_entry_need(self.entry(j), j) for j in range(n))

    def shift(self) -> "ExternalAddress":
        """The address s_1 s_2 ..."""
        if self.prefix:
            return ExternalAddress(self.prefix[1:], self.tail)
        if isinstance(self.tail, Constant):
            return self
        w = self.tail.word
        return ExternalAddress((), Periodic(w[1:] + w[:1]))

    def add_to_first(self, c: int) -> "ExternalAddress":
        n = len(self.prefix) + self.period_length()
        seq = self.entries(n)
        seq[0] += int(c)
        return ExternalAddress(seq, self.tail)

    def negated(self) -> "ExternalAddress":
        tail = (
            Constant(-self.tail.k)
            if isinstance(self.tail, Constant)
            else Periodic(tuple(-x for x in self.tail.word))
        )
        return ExternalAddress(tuple(-x for x in self.prefix), tail)

    def __str__(self):
        return ",".join(str(x) for x in self.prefix) + ";" + str(self.tail)

    @classmethod
    def parse(cls, text: str) -> "ExternalAddress":
        """Parse ``"prefix;tail"`` such as ``"0,1;const:0"`` or ``";per:0,1"``.

        A string without ``;`` is read as a bare tail.
        """
        text = text.strip()
        head, sep, rest = text.rpartition(";")
        if not sep:
            head, rest = "", text
        try:
            prefix = tuple(int(x) for x in head.split(",") if x.strip()) if head.strip() else ()
            kind, _, body = rest.strip().partition(":")
            kind = kind.strip()
            if kind == "const":
                tail = Constant(int(body))
            elif kind == "per":
                tail = Periodic(tuple(int(x) for x in body.split(",")))
            else:
                raise ValueError(f"unknown tail kind {kind!r}")
        except ValueError as exc:
            raise InvalidInput(f"malformed address {text!r}: {exc}") from exc
        return cls(prefix, tail)


# --------------------------------------------------------------------------
# ray points


@dataclass(frozen=True)
class RayPoint:
    """A traced point; ``decay`` is -ln(residual) as a tower (infinite when
    the two approximations agree exactly, zero when residual >= 1)."""

    address: ExternalAddress
    t: float
    z: complex
    depth: int
    residual: float
    decay: TowerMagnitude = field(default=ZERO, compare=False)

    def within(self, tol: float) -> bool:
        return self.residual <= tol


def residual_below(p: RayPoint, q: RayPoint, factor: float = 0.5) -> bool:
    """True when residual(p) < factor * residual(q), compared in tower form
    when either residual is below double range."""
    if not 0 < factor:
        raise InvalidInput("factor must be positive")
    if p.residual > 0 and q.residual > 0:
        return p.residual < factor * q.residual
    if q.decay.is_infinite:
        return False
    if p.decay.is_infinite:
        return True
    bar = tower_add_float(q.decay, math.log(1.0 / factor)) if factor < 1 else q.decay
    return tower_cmp(p.decay, bar) == GREATER


@dataclass(frozen=True)
class RayPolyline:
    address: ExternalAddress
    samples: tuple
    parameter: complex = 0j
    located_t: float | None = None
    anchored: bool = False

    @property
    def ts(self) -> np.ndarray:
        return np.array([p.t for p in self.samples])

    @property
    def zs(self) -> np.ndarray:
        return np.array([p.z for p in self.samples], dtype=complex)

    def max_residual(self) -> float:
        return max(p.residual for p in self.samples)


# --------------------------------------------------------------------------
# pullback core


def potential_map(t: float) -> float:
    return math.exp(t) - POTENTIAL_SHIFT


def potential_inverse(x: float) -> float:
    if not x > -POTENTIAL_SHIFT:
        raise InvalidInput(f"{x!r} is outside the range of the potential map")
    return math.log(x + POTENTIAL_SHIFT)


def _potentials(t: float, d: int) -> list:
    """F^j(t) for j = 0..J, stopping at d or at the first value whose image
    overflows."""
    xs = [float(t)]
    while len(xs) <= d and xs[-1] <= EXP_MAX_ARG:
        xs.append(potential_map(xs[-1]))
    return xs


def _potential_tower(xs: list, j: int) -> TowerMagnitude:
    """F^j(t) as a tower, for any j (exact beyond float range up to -1/2)."""
    J = len(xs) - 1
    if j <= J:
        return TowerMagnitude.from_float(max(xs[j], 0.0))
    return normalize(j - J, xs[J])


def _log1p_c(u: complex) -> complex:
    """Principal Log(1 + u), accurate for small u."""
    ur, ui = u.real, u.imag
    if abs(ur) < 0.5 and abs(ui) < 0.5:
        re = 0.5 * math.log1p(2.0 * ur + ur * ur + ui * ui)
    else:
        re = math.log(abs(complex(1.0 + ur, ui)))
    return complex(re, math.atan2(ui, 1.0 + ur))


def _scaled(c: complex, x: float) -> tuple:
    """c * exp(-x) together with ln|c| - x (the product may underflow)."""
    if c == 0:
        return 0j, -math.inf
    lnmag = math.log(abs(c)) - x
    if lnmag < -740.0:
        return 0j, lnmag
    return c * math.exp(lnmag - math.log(abs(c))), lnmag


@dataclass
class _Trace:
    z: complex
    residual: float
    decay: TowerMagnitude
    chain: list


def _pullback(a, entries, t, d, y_top, c_prev):
    """Pull the level-d seed F^d(t) + i*y_top back to level 0 along
    ``entries`` (s_0..s_d), and measure the distance to the depth d-1
    approximation whose seed is F^{d-1}(t) + c_prev."""
    xs = _potentials(t, d)
    J = len(xs) - 1
    if J == d:
        w = complex(xs[d], y_top)
    else:
        # one level below the first overflowing seed
        y_next = y_top if J + 1 == d else TWO_PI * entries[J + 1]
        u, _ = _scaled(complex(-POTENTIAL_SHIFT - a.real, y_next - a.imag), xs[J])
        w = xs[J] + _log1p_c(u) + complex(0.0, TWO_PI * entries[J])
    chain = [w]
    for j in range(J - 1, -1, -1):
        try:
            w = inverse_branch(a, w, entries[j])
        except SingularValueHit as exc:
            raise PullbackHitSingularValue(
                f"pullback hit the singular value at level {j + 1}"
            ) from exc
        chain.append(w)
    chain.reverse()  # chain[j] = w_j for j <= J

    # difference between the depth-d and depth-(d-1) points at level d-1
    c_top = complex(-POTENTIAL_SHIFT, y_top) - a
    offset = complex(0.0, TWO_PI * entries[d - 1]) - c_prev
    lam = None  # -ln|delta| once the difference leaves double range
    delta = 0j
    if d - 1 <= J:
        u, lnmag = _scaled(c_top, xs[d - 1])
        delta = _log1p_c(u) + offset
        if u == 0 and offset == 0:
            if c_top == 0:
                return _Trace(chain[0], 0.0, INFINITY, chain)
            lam = -lnmag
    else:
        if c_top == 0 and offset == 0:
            return _Trace(chain[0], 0.0, INFINITY, chain)
        lam = tower_add_float(_potential_tower(xs, d - 1), -math.log(abs(c_top)))
    if lam is None and delta == 0:
        return _Trace(chain[0], 0.0, INFINITY, chain)

    for j in range(d - 2, -1, -1):
        if j + 1 <= J:
            v = chain[j + 1] - a
            ln_v = math.log(abs(v))
        else:
            v = None
            ln_v = _potential_tower(xs, j)  # ln F^{j+1}(t) ~ F^j(t)
        if lam is None:
            if math.log(abs(delta)) - ln_v < _LOG_SWITCH:
                lam = ln_v - math.log(abs(delta))
                continue
            r = delta / v
            if abs(r) < 0.5:
                delta = -_log1p_c(-r)
            else:
                delta = cmath.log(v) - cmath.log(v - delta)
            if delta == 0:
                return _Trace(chain[0], 0.0, INFINITY, chain)
        else:
            lam = _lam_add(lam, ln_v)

    if lam is None:
        res = abs(delta)
        decay = TowerMagnitude.from_float(-math.log(res)) if res < 1.0 else ZERO
        return _Trace(chain[0], res, decay, chain)
    if isinstance(lam, TowerMagnitude):
        lam_f = lam.to_float()
        if not math.isfinite(lam_f):
            return _Trace(chain[0], 0.0, lam, chain)
        lam = lam_f
    res = math.exp(-lam) if lam < 745.0 else 0.0
    return _Trace(chain[0], res, TowerMagnitude.from_float(max(lam, 0.0)), chain)


def _lam_add(lam, ln_v):
    if isinstance(lam, TowerMagnitude) or isinstance(ln_v, TowerMagnitude):
        lt = lam if isinstance(lam, TowerMagnitude) else None
        vt = ln_v if isinstance(ln_v, TowerMagnitude) else None
        if lt is not None and vt is not None:
            return tower_add(lt, vt)
        if lt is not None:
            return tower_add_float(lt, ln_v)
        return tower_add_float(vt, lam)
    return lam + ln_v


def _check_compatible(s: ExternalAddress, t: float, depth: int):
    # 2 pi |s_j| <= exp^j(t + x_s) for j <= depth
    x = t + s.witness
    for j in range(min(depth, len(s.prefix) + s.period_length()) + 1):
        need = s.entry(j)
        if need and x < _entry_need(need, j) - 1e-12:
            raise IncompatibleAddress(f"entry s_{j} = {need} exceeds exp^{j}(t + x_s)")


def trace_ray(
    a,
    s: ExternalAddress,
    t: float,
    depth: int = DEFAULT_DEPTH,
    tol: float = DEFAULT_TOL,
    t_min: float = T_MIN,
) -> RayPoint:
    """The point of potential t on the ray of address s."""
    a = as_parameter(a)
    if isinstance(s, str):
        s = ExternalAddress.parse(s)
    if not math.isfinite(t) or t < t_min:
        raise InvalidInput(f"potential must be >= {t_min}, got {t!r}")
    if depth < 1:
        raise InvalidInput("depth must be at least 1")
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    _check_compatible(s, t, depth)
    entries = s.entries(depth + 1)
    tr = _pullback(
        a, entries, t, depth, TWO_PI * entries[depth], complex(0.0, TWO_PI * entries[depth - 1])
    )
    if not tr.residual <= tol:
        raise NotConverged(
            f"residual {tr.residual:.3e} > tol {tol:.1e} at t = {t!r}", t=t, residual=tr.residual
        )
    return RayPoint(s, float(t), tr.z, depth, tr.residual, tr.decay)


def trace_polyline(
    a,
    s: ExternalAddress,
    t_lo: float,
    t_hi: float,
    count: int,
    depth: int = DEFAULT_DEPTH,
    tol: float = DEFAULT_TOL,
) -> RayPolyline:
    """``count`` geometrically spaced potentials in [t_lo, t_hi]."""
    if not 0 < t_lo < t_hi:
        raise InvalidInput("need 0 < t_lo < t_hi")
    if count < 2:
        raise InvalidInput("count must be at least 2")
    if isinstance(s, str):
        s = ExternalAddress.parse(s)
    a = as_parameter(a)
    ts = np.geomspace(t_lo, t_hi, count)
    samples = []
    for t in ts:
        samples.append(_trace_with_t(a, s, float(t), depth, tol, min(T_MIN, t_lo)))
    return RayPolyline(s, tuple(samples), a)


def _trace_with_t(a, s, t, depth, tol, t_min):
    try:
        return trace_ray(a, s, t, depth, tol, t_min)
    except PullbackHitSingularValue as exc:
        raise PullbackHitSingularValue(f"{exc} (t = {t!r})") from exc


# --------------------------------------------------------------------------
# the singular value on its ray


@dataclass(frozen=True)
class AddressEstimate:
    entries: tuple
    confident: tuple

    def __iter__(self):
        return iter(self.entries)


def _escaping_orbit(a, n_max, T):
    orb = orbit(a, a, n_max=n_max, T=T)
    if not orb.escaped:
        raise NotEscaping(f"orbit of a = {a!r} is {orb.describe()} at budget {n_max}")
    return orb


def _orbit_to_overflow(a, n_max):
    """Float iterates f^0(a), ..., f^K(a) with Re f^K(a) > EXP_MAX_ARG."""
    z = a
    pts = [z]
    for _ in range(n_max + 64):
        if z.real > EXP_MAX_ARG:
            return pts
        z = cmath.exp(z) + a
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            break
        pts.append(z)
    raise LocateFailed(f"orbit of {a!r} did not reach the edge of double range")


def address_of_orbit(a, n: int, n_max: int = 1000, T: float = DEFAULT_T, margin: float = 0.1):
    """s_j = round(Im f^j(a) / 2 pi) for j < n, with confidence flags.

    An entry is low-confidence when Im f^j(a) lies within ``margin`` of an
    odd multiple of pi.  Entries past double range are known only for real
    orbits.
    """
    a = as_parameter(a)
    if n < 1:
        raise InvalidInput("n must be at least 1")
    _escaping_orbit(a, max(n_max, n), T)
    pts = _orbit_to_overflow(a, max(n_max, n))
    entries, flags = [], []
    for j in range(n):
        if j < len(pts):
            y = pts[j].imag
        elif a.imag == 0.0:
            y = 0.0
        else:
            raise LocateFailed(f"Im f^{j}(a) is beyond double range")
        k = round(y / TWO_PI)
        entries.append(int(k))
        # distance to the nearest odd multiple of pi
        dist = abs(abs(y - TWO_PI * k) - math.pi)
        flags.append(dist >= margin)
    return AddressEstimate(tuple(entries), tuple(flags))


def _locate_potential(x: float, k: int) -> float:
    for _ in range(k):
        if not x > -POTENTIAL_SHIFT:
            raise LocateFailed("the orbit of a is below the range of the potential map")
        x = potential_inverse(x)
    return x


def _branch_indices(a, pts):
    out = []
    for j in range(len(pts) - 1):
        arg = cmath.phase(complex(pts[j + 1] - a))
        out.append(int(round((pts[j].imag - arg) / TWO_PI)))
    return out


def singular_ray(
    a,
    n_max: int = 1000,
    T: float = DEFAULT_T,
    count: int = 40,
    span: float = 10.0,
    first_offset: float = 1e-6,
    depth: int = DEFAULT_DEPTH,
    tol: float = DEFAULT_TOL,
    dist_tol: float = DIST_TOL,
) -> RayPolyline:
    """The curve from a to infinity along its own ray.

    The potential of a is located from the last iterate in double range.  Real
    orbits are traced on the address 000...; otherwise the seed at that level
    keeps the exact imaginary part of f^K(a) and is pulled back along the
    orbit's own branches (``anchored``).
    """
    a = as_parameter(a)
    _escaping_orbit(a, n_max, T)
    pts = _orbit_to_overflow(a, n_max)
    K = len(pts) - 1
    t_a = _locate_potential(pts[K].real, K)
    ts = [t_a] + list(t_a + np.geomspace(first_offset, span, count - 1))
    if a.imag == 0.0:
        s = ExternalAddress((), Constant(0))
        d = max(depth, K + 2)
        samples = tuple(_trace_with_t(a, s, float(t), d, tol, min(T_MIN, t_a)) for t in ts)
        line = RayPolyline(s, samples, a, t_a, False)
    else:
        line = _anchored_polyline(a, pts, ts, depth, tol)
    if abs(line.samples[0].z - a) > dist_tol:
        raise LocateFailed(
            f"first sample {line.samples[0].z!r} is {abs(line.samples[0].z - a):.2e} from a"
        )
    return line


def _anchored_polyline(a, pts, ts, depth, tol):
    K = len(pts) - 1
    branch = _branch_indices(a, pts)
    s = ExternalAddress(tuple(branch), Constant(int(round(pts[K].imag / TWO_PI))))
    entries = branch + [s.entry(K)]
    t_a = float(ts[0])
    # the depth K-1 seed is anchored on f^{K-1}(a) the same way, so both
    # approximations pass through a at t_a
    c_prev = pts[K - 1] - _potentials(t_a, K - 1)[K - 1]
    samples = []
    for t in ts:
        tr = _pullback(a, entries, float(t), K, pts[K].imag, c_prev)
        if tr.residual <= tol:
            samples.append(RayPoint(s, float(t), tr.z, K, tr.residual, tr.decay))
            continue
        # far from a the unknown deep entries no longer matter
        try:
            samples.append(trace_ray(a, s, float(t), max(depth, K + 2), tol, t_min=-math.inf))
        except (NotConverged, PullbackHitSingularValue) as exc:
            raise LocateFailed(f"trace near the singular value failed at t = {t!r}: {exc}") from exc
    return RayPolyline(s, tuple(samples), a, t_a, True)


NON_ENDPOINT = "NonEndpoint"
POSSIBLY_ENDPOINT = "PossiblyEndpoint"
UNDETERMINED = "Undetermined"


def is_endpoint_heuristic(
    a,
    n_max: int = 1000,
    T: float = DEFAULT_T,
    below: float = 0.05,
    count: int = 8,
    tol: float = DEFAULT_TOL,
    dist_tol: float = DIST_TOL,
) -> str:
    """NonEndpoint, PossiblyEndpoint or Undetermined; never a certainty.

    Traces the ray of a at potentials just below the located potential.
    """
    a = as_parameter(a)
    _escaping_orbit(a, n_max, T)
    try:
        line = singular_ray(a, n_max=n_max, T=T, tol=tol, dist_tol=dist_tol)
    except (LocateFailed, NotConverged, PullbackHitSingularValue):
        return UNDETERMINED
    if line.anchored:
        return UNDETERMINED
    t_a = line.located_t
    depth = line.samples[0].depth
    lower = t_a - np.geomspace(below, 1e-6, count) * max(1.0, abs(t_a))
    pts = []
    try:
        for t in lower:
            pts.append(trace_ray(a, line.address, float(t), depth, tol, t_min=-math.inf))
    except (NotConverged, PullbackHitSingularValue, InvalidInput):
        return POSSIBLY_ENDPOINT
    poly = np.array([p.z for p in pts] + [p.z for p in line.samples[:2]])
    if _polyline_distance(poly, a) <= dist_tol:
        return NON_ENDPOINT
    return UNDETERMINED


def _polyline_distance(zs: np.ndarray, p: complex) -> float:
    best = math.inf
    for u, v in zip(zs[:-1], zs[1:]):
        d = v - u
        den = abs(d) ** 2
        s = 0.0 if den == 0 else min(1.0, max(0.0, ((p - u) * d.conjugate()).real / den))
        best = min(best, abs(u + s * d - p))
    return best
