"""Overflow-safe magnitudes of the form exp^level(mantissa).

A :class:`TowerMagnitude` stores a nonnegative real as ``level`` applications
of ``exp`` to a ``mantissa``.  The canonical form keeps the mantissa in the
band ``[0, e)`` at the lowest possible level, so one ``log``/``exp`` moves
exactly one level and every level covers a disjoint range of values::

    level 0: [0, e)    level 1: [e, e^e)    level 2: [e^e, e^e^e)  ...

Values are immutable; all functions here are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInput

E = math.e
BAND_HI = E
MANTISSA_TOL = 1e-12
# exp() of anything above this overflows a double
EXP_MAX_ARG = 709.782712893384

LESS, EQUAL, GREATER = -1, 0, 1

_BELOW_E = math.nextafter(E, 0.0)


@dataclass(frozen=True)
class TowerMagnitude:
    """The value exp^level(mantissa); ``level == 0`` is the raw mantissa.

    Use :func:`normalize` (or the ``from_float`` / ``iterated_exp``
    constructors) to obtain the canonical representative.  Comparison
    operators go through :func:`tower_cmp` and are tolerant at 1e-12 on the
    aligned mantissa; ``==`` compares fields exactly.
    """

    level: int
    mantissa: float

    def __post_init__(self):
        if self.level < 0 or int(self.level) != self.level:
            raise InvalidInput(f"tower level must be a nonnegative integer, got {self.level!r}")
        if math.isnan(self.mantissa):
            raise InvalidInput("tower mantissa is NaN")
        if self.level == 0 and self.mantissa < 0:
            raise InvalidInput("a level-0 tower holds a nonnegative value")

    @classmethod
    def from_float(cls, x: float) -> "TowerMagnitude":
        return normalize(0, x)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.mantissa)

    def is_canonical(self) -> bool:
        return normalize(self.level, self.mantissa) == self

    def to_float(self) -> float:
        """Return the value as a double, ``inf`` when it does not fit."""
        v = self.mantissa
        for _ in range(self.level):
            if v > EXP_MAX_ARG:
                return math.inf
            v = math.exp(v)
        return v

    def fits_float(self) -> bool:
        return math.isfinite(self.to_float())

    def __lt__(self, other):
        return tower_cmp(self, _coerce(other)) == LESS

    def __le__(self, other):
        return tower_cmp(self, _coerce(other)) != GREATER

    def __gt__(self, other):
        return tower_cmp(self, _coerce(other)) == GREATER

    def __ge__(self, other):
        return tower_cmp(self, _coerce(other)) != LESS

    def __repr__(self):
        return f"TowerMagnitude(level={self.level}, mantissa={self.mantissa!r})"


INFINITY = TowerMagnitude(0, math.inf)
ZERO = TowerMagnitude(0, 0.0)


def _coerce(x) -> TowerMagnitude:
    if isinstance(x, TowerMagnitude):
        return x
    return TowerMagnitude.from_float(float(x))


def normalize(level: int, mantissa: float) -> TowerMagnitude:
    """Canonical representative of exp^level(mantissa)."""
    if math.isnan(mantissa):
        raise InvalidInput("cannot normalize NaN")
    if math.isinf(mantissa):
        if mantissa < 0:
            if level == 0:
                raise InvalidInput("negative infinity is not a magnitude")
            # exp(-inf) = 0
            return normalize(level - 1, 0.0)
        return INFINITY
    m = float(mantissa)
    lvl = int(level)
    if lvl == 0 and m < 0:
        raise InvalidInput(f"magnitude must be nonnegative, got {m!r}")
    ascended = False
    while m >= BAND_HI:
        m = math.log(m)
        lvl += 1
        ascended = True
    if ascended and m < 1.0:
        # ln(x) >= 1 for x >= e; undo the last-bit rounding
        m = 1.0
    while lvl > 0 and m < 1.0:
        m = min(math.exp(m), _BELOW_E)
        lvl -= 1
    return TowerMagnitude(lvl, m)


def iterated_exp(x: float, n: int) -> TowerMagnitude:
    """exp^n(x) as a canonical tower.

    Exponentials are applied in double precision as long as they fit, so the
    result agrees with direct evaluation whenever the latter is finite.
    """
    if n < 0:
        raise InvalidInput("n must be nonnegative")
    if not math.isfinite(x):
        raise InvalidInput("x must be finite")
    v = float(x)
    done = 0
    while done < n and v <= EXP_MAX_ARG:
        v = math.exp(v)
        done += 1
    if v < 0:
        # only possible when n == 0
        raise InvalidInput("exp^0(x) of a negative x is not a magnitude")
    return normalize(n - done, v)


def tower_cmp(u: TowerMagnitude, v: TowerMagnitude, tol: float = MANTISSA_TOL) -> int:
    """Three-way comparison: LESS (-1), EQUAL (0) or GREATER (1).

    The lower-level operand is lifted to the other's level by taking
    logarithms of its mantissa; the aligned mantissas are then compared with
    absolute tolerance ``tol``.
    """
    if u.is_infinite or v.is_infinite:
        if u.is_infinite and v.is_infinite:
            return EQUAL
        return GREATER if u.is_infinite else LESS
    if u.level == v.level:
        diff = u.mantissa - v.mantissa
    else:
        lo, hi, sign = (u, v, 1) if u.level < v.level else (v, u, -1)
        m = lo.mantissa
        for _ in range(hi.level - lo.level):
            if m <= 0.0:
                return LESS if sign == 1 else GREATER
            m = math.log(m)
        diff = sign * (m - hi.mantissa)
    if abs(diff) <= tol:
        return EQUAL
    return GREATER if diff > 0 else LESS


def tower_max(u: TowerMagnitude, v: TowerMagnitude) -> TowerMagnitude:
    return u if tower_cmp(u, v) != LESS else v


def tower_exp(u: TowerMagnitude) -> TowerMagnitude:
    if u.is_infinite:
        return INFINITY
    return normalize(u.level + 1, u.mantissa)


def tower_log(u: TowerMagnitude) -> TowerMagnitude:
    """ln(u) for u >= 1."""
    if u.is_infinite:
        return INFINITY
    if u.level == 0:
        if u.mantissa < 1.0:
            raise InvalidInput("tower_log needs a value >= 1")
        return normalize(0, math.log(u.mantissa))
    return normalize(u.level - 1, u.mantissa)


def tower_add_float(u: TowerMagnitude, c: float) -> TowerMagnitude:
    """u + c, clamped at 0.  Exact to double precision when u fits a float;
    otherwise c is below the resolution of u and u is returned unchanged."""
    if u.is_infinite:
        return INFINITY
    x = u.to_float()
    if math.isfinite(x):
        return normalize(0, max(x + c, 0.0))
    return u


def tower_scale(u: TowerMagnitude, c: float) -> TowerMagnitude:
    """c * u for c > 0."""
    if c <= 0:
        raise InvalidInput("scale factor must be positive")
    if u.is_infinite:
        return INFINITY
    x = u.to_float()
    if math.isfinite(x) and math.isfinite(x * c):
        return normalize(0, x * c)
    # ln(c*u) = ln(c) + ln(u); u is far above 1 here
    return tower_exp(tower_add_float(tower_log(u), math.log(c)))


def tower_add(u: TowerMagnitude, v: TowerMagnitude) -> TowerMagnitude:
    if u.is_infinite or v.is_infinite:
        return INFINITY
    x, y = u.to_float(), v.to_float()
    if math.isfinite(x + y):
        return normalize(0, x + y)
    big, small = (u, v) if tower_cmp(u, v) != LESS else (v, u)
    log_big = tower_log(big).to_float()
    if not math.isfinite(log_big) or tower_cmp(small, TowerMagnitude(0, 1.0)) == LESS:
        return big
    log_small = tower_log(small).to_float()
    return tower_exp(normalize(0, log_big + math.log1p(math.exp(log_small - log_big))))


def iterated_log_need(v: float, j: int) -> float:
    """Smallest x >= 0 with exp^j(x) >= v (up to clamping at 0).

    L_0(v) = v and L_j(v) = ln(max(L_{j-1}(v), 1)).
    """
    if not v > 0:
        raise InvalidInput("v must be positive")
    if j < 0:
        raise InvalidInput("j must be nonnegative")
    x = float(v)
    for _ in range(j):
        x = math.log(max(x, 1.0))
    return max(x, 0.0)
