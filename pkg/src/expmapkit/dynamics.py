"""The exponential map f_a(z) = exp(z) + a: single steps, inverse branches and
finite-budget orbits with a heuristic escape rule.

The escape rule is: the real part exceeds ``T`` at step n and a real-part
lower bound stays above ``T`` for ``certify_steps`` further steps, all within
the step budget.  Those
steps are tracked in tower arithmetic once they leave double range.  When
the imaginary part is too large for its phase to be known, the bound falls
back to the modulus (``TowerStep.phase_known`` is then False); that
over-approximates fast right-moving escape.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

from .errors import InvalidInput, RangeExceeded, SingularValueHit
from .tower import EXP_MAX_ARG, TowerMagnitude, normalize, tower_add_float, tower_exp

TWO_PI = 2.0 * math.pi
DEFAULT_T = 50.0
DEFAULT_CERTIFY = 2
# relative rounding of a double, used for phase-error estimates
_EPS = 2.0 ** -52
# past this phase error cos(Im z) is treated as unknown
_PHASE_ERR_MAX = 0.25

# Stand-in for an iterate whose real part is below double range; its image
# under f_a is a to double precision (exp of it underflows to 0).
BELOW_RANGE = complex(-math.inf, 0.0)


def as_parameter(a) -> complex:
    a = complex(a)
    if not (math.isfinite(a.real) and math.isfinite(a.imag)):
        raise InvalidInput(f"parameter must be finite, got {a!r}")
    return a


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def step(a: complex, z: complex) -> complex:
    """exp(z) + a, raising :class:`RangeExceeded` when exp overflows."""
    z = complex(z)
    if not _finite(z):
        raise InvalidInput(f"z must be finite, got {z!r}")
    if z.real > EXP_MAX_ARG:
        raise RangeExceeded(f"exp(Re z) overflows at Re z = {z.real!r}")
    try:
        return cmath.exp(z) + a
    except OverflowError as exc:
        raise RangeExceeded(str(exc)) from exc


def inverse_branch(a: complex, w: complex, k: int) -> complex:
    """Log(w - a) + 2 pi i k with the principal Log (imaginary part in (-pi, pi])."""
    d = complex(w) - a
    if d == 0:
        raise SingularValueHit(f"{a!r} is omitted by f_a and has no preimage")
    if d.imag == 0.0:
        # drop a negative zero so the cut maps to +pi
        d = complex(d.real, 0.0)
    return cmath.log(d) + complex(0.0, TWO_PI * k)


class Status(enum.Enum):
    ESCAPED = "EscapedAt"
    BOUNDED = "BoundedWithinBudget"
    AMBIGUOUS = "AmbiguousNearBoundary"


@dataclass(frozen=True)
class TowerStep:
    """Lower bound on Re f^j(z) once it has left double range."""

    re_lower: TowerMagnitude
    phase_known: bool


@dataclass(frozen=True)
class Orbit:
    parameter: complex
    start: complex
    points: tuple
    status: Status
    escape_step: int | None = None
    tower_tail: tuple = field(default=())

    @property
    def escaped(self) -> bool:
        return self.status is Status.ESCAPED

    def describe(self) -> str:
        if self.status is Status.ESCAPED:
            return f"EscapedAt({self.escape_step})"
        return self.status.value


def _phase_error(z: complex) -> float:
    """Rough absolute error of Im z after the step that produced z."""
    mag = abs(z)
    return 4.0 * _EPS * mag * max(1.0, math.log(mag)) if mag > 1.0 else 4.0 * _EPS


def _exact_real(a: complex, z: complex) -> bool:
    return z.imag == 0.0 and a.imag == 0.0


def _certify(a: complex, z: complex, T: float, certify_steps: int):
    """Check that Re stays above T for ``certify_steps`` steps after z.

    Returns ``(ok, tail)`` where ``tail`` lists the tower bounds used once
    the iterates left double range.
    """
    abs_a = abs(a)
    tail = []
    cur = z
    lower = None  # TowerMagnitude once we left double range
    exact = False
    for _ in range(certify_steps):
        if lower is None:
            if cur.real <= EXP_MAX_ARG:
                cur = cmath.exp(cur) + a
                if not cur.real > T:
                    return False, tail
                continue
            if _exact_real(a, cur):
                log_cos, exact, known = 0.0, True, True
            else:
                err = _phase_error(cur)
                known = err <= _PHASE_ERR_MAX
                if known:
                    cos_lo = math.cos(cur.imag) - err
                    if cos_lo <= 0.0:
                        return False, tail
                    log_cos = math.log(cos_lo)
                else:
                    # phase lost: continue on the modulus
                    log_cos = 0.0
            lower = tower_add_float(normalize(1, cur.real + log_cos), -abs_a)
        else:
            known = exact
            lower = tower_add_float(tower_exp(lower), -abs_a)
        if not lower > T:
            return False, tail
        tail.append(TowerStep(lower, known))
    return True, tail


def _run(a, z, n0, n_max, T, certify_steps, points=None):
    """Iterate from z (the n0-th iterate) and classify.

    Returns ``(status, escape_step, tower_tail)``.  When ``points`` is a
    list, every computed iterate is appended to it.
    """
    n = n0
    while True:
        # certification steps count against the budget
        if z.real > T and n + certify_steps <= n_max:
            ok, tail = _certify(a, z, T, certify_steps)
            if ok:
                return Status.ESCAPED, n, tuple(tail)
        if n >= n_max:
            return Status.BOUNDED, None, ()
        if z.real <= EXP_MAX_ARG:
            z = cmath.exp(z) + a
            n += 1
            if points is not None:
                points.append(z)
            continue
        # exp(z) overflows; the next iterate is representable only in sign
        if _exact_real(a, z):
            cos_y, err = 1.0, 0.0
        else:
            cos_y, err = math.cos(z.imag), _phase_error(z)
        if err > _PHASE_ERR_MAX or cos_y >= -err:
            return Status.AMBIGUOUS, None, ()
        # Re f(z) is hugely negative, so f^2(z) = a to double precision
        if points is not None:
            points.append(BELOW_RANGE)
        n += 1
        if n >= n_max:
            return Status.BOUNDED, None, ()
        z = complex(a)
        n += 1
        if points is not None:
            points.append(z)


def orbit(
    a: complex,
    z: complex,
    n_max: int = 1000,
    T: float = DEFAULT_T,
    certify_steps: int = DEFAULT_CERTIFY,
) -> Orbit:
    """Iterate f_a from z for at most ``n_max`` steps and classify the orbit."""
    a = as_parameter(a)
    z = complex(z)
    if not _finite(z):
        raise InvalidInput(f"start point must be finite, got {z!r}")
    if n_max < 1:
        raise InvalidInput("n_max must be at least 1")
    if not T >= 20:
        raise InvalidInput("escape threshold T must be at least 20")
    if certify_steps < 0:
        raise InvalidInput("certify_steps must be nonnegative")
    points = [z]
    status, n, tail = _run(a, z, 0, n_max, T, certify_steps, points)
    return Orbit(a, z, tuple(points), status, n, tail)


def first_passage(a, z, n0, n_max, T=DEFAULT_T, certify_steps=DEFAULT_CERTIFY):
    """Escape step of the orbit continuing from the n0-th iterate z, or None."""
    status, n, _ = _run(complex(a), complex(z), n0, n_max, T, certify_steps)
    return n if status is Status.ESCAPED else None
