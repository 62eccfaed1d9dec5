"""Parameter classification, escape grids, component labeling, grid-scale
disconnection witnesses and the pullback sandwich check."""
from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .dynamics import (
    DEFAULT_CERTIFY,
    DEFAULT_T,
    _exact_real,
    _phase_error,
    _PHASE_ERR_MAX,
    _run,
    as_parameter,
    orbit,
)
from .errors import ExpMapError, InvalidInput, PreconditionViolated
from .tower import (
    EXP_MAX_ARG,
    GREATER,
    LESS,
    TowerMagnitude,
    iterated_exp,
    normalize,
    tower_add_float,
    tower_cmp,
    tower_scale,
)

SENTINEL = 0xFFFFFFFF

# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class SingularEscapes:
    escape_step: int
    name = "SingularEscapes"


@dataclass(frozen=True)
class AttractingCycle:
    period: int
    multiplier_modulus: float
    name = "AttractingCycle"


@dataclass(frozen=True)
class Undetermined:
    budgets: dict = field(default_factory=dict)
    name = "Undetermined"


def classify_parameter(
    a,
    n_max: int = 1000,
    p_max: int = 16,
    burn_in: int = 500,
    tol: float = 1e-9,
    T: float = DEFAULT_T,
):
    """SingularEscapes, AttractingCycle or Undetermined.

    Parabolic and Siegel parameters land in Undetermined, as does anything
    the budgets cannot settle.
    """
    a = as_parameter(a)
    if n_max < 1 or p_max < 1 or burn_in < 0 or not tol > 0:
        raise InvalidInput("budgets must be positive")
    budgets = {"n_max": n_max, "p_max": p_max, "burn_in": burn_in}
    orb = orbit(a, a, n_max=n_max, T=T)
    if orb.escaped:
        return SingularEscapes(orb.escape_step)
    pts = [a]
    z = a
    try:
        for _ in range(max(n_max, burn_in) + p_max):
            z = cmath.exp(z) + a
            pts.append(z)
    except OverflowError:
        return Undetermined(budgets)
    # the end of the orbit is the most converged part
    i = len(pts) - 1 - p_max
    zi = pts[i]
    for p in range(1, p_max + 1):
        if abs(pts[i + p] - zi) < tol * max(1.0, abs(zi)):
            mult = 1.0
            for m in range(i, i + p):
                mult *= abs(pts[m + 1] - a)  # |exp(z_m)|
            if mult < 1.0 - tol:
                return AttractingCycle(p, mult)
            return Undetermined(budgets)
    return Undetermined(budgets)


@dataclass(frozen=True)
class KneadingEvidence:
    accessible: bool
    period: int | None


@dataclass(frozen=True)
class Prediction:
    verdict: str
    conditional: bool = False

    def to_dict(self):
        return {"verdict": self.verdict, "conditional": self.conditional}


def predict_connectivity(cls, kneading: KneadingEvidence | None = None) -> Prediction:
    """Connected when a escapes, Disconnected for an attracting cycle.

    Otherwise Connected only with evidence of an accessible singular value
    and a kneading prefix not consistent with any tested period, flagged as
    conditional on those hypotheses.
    """
    if isinstance(cls, SingularEscapes):
        return Prediction("Connected")
    if isinstance(cls, AttractingCycle):
        return Prediction("Disconnected")
    if kneading is not None and kneading.accessible and kneading.period is None:
        return Prediction("Connected", conditional=True)
    return Prediction("Unknown")


def class_to_dict(cls) -> dict:
    out = {"class": cls.name}
    if isinstance(cls, SingularEscapes):
        out["escape_step"] = cls.escape_step
    elif isinstance(cls, AttractingCycle):
        out["period"] = cls.period
        out["multiplier_modulus"] = cls.multiplier_modulus
    else:
        out["budgets"] = dict(cls.budgets)
    return out


# ---------------------------------------------------------------------------
# escape grids


@dataclass(frozen=True, eq=False)
class EscapeGrid:
    parameter: complex
    box: tuple
    width: int
    height: int
    n_max: int
    T: float
    cells: np.ndarray = field(repr=False)

    @property
    def escaped(self) -> np.ndarray:
        return self.cells != SENTINEL

    def cell_center(self, row: int, col: int) -> complex:
        re_lo, re_hi, im_lo, im_hi = self.box
        dx = (re_hi - re_lo) / self.width
        dy = (im_hi - im_lo) / self.height
        return complex(re_lo + (col + 0.5) * dx, im_hi - (row + 0.5) * dy)


def cell_centers(box, width, height) -> np.ndarray:
    """Complex centers, row 0 at the top (imaginary part im_hi)."""
    re_lo, re_hi, im_lo, im_hi = box
    dx = (re_hi - re_lo) / width
    dy = (im_hi - im_lo) / height
    re = re_lo + (np.arange(width) + 0.5) * dx
    im = im_hi - (np.arange(height) + 0.5) * dy
    return re[None, :] + 1j * im[:, None]


def escape_grid(
    a,
    box,
    resolution,
    n_max: int = 200,
    T: float = DEFAULT_T,
    certify_steps: int = DEFAULT_CERTIFY,
) -> EscapeGrid:
    """First-passage step of every cell center under the escape rule of
    ``orbit``, or SENTINEL."""
    a = as_parameter(a)
    width, height = (int(v) for v in resolution)
    re_lo, re_hi, im_lo, im_hi = (float(v) for v in box)
    if width < 2 or height < 2:
        raise InvalidInput("resolution must be at least 2x2")
    if not (re_lo < re_hi and im_lo < im_hi):
        raise InvalidInput("box is degenerate")
    if n_max < 1 or not T >= 20:
        raise InvalidInput("need n_max >= 1 and T >= 20")
    box = (re_lo, re_hi, im_lo, im_hi)
    z = cell_centers(box, width, height).ravel()
    cells = np.full(z.size, SENTINEL, dtype=np.uint32)
    active = np.arange(z.size)
    cap = min(T, EXP_MAX_ARG)
    n = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while active.size:
            zs = z[active]
            hot = zs.real > cap
            # cells past the threshold finish on the scalar path, which
            # handles certification and overflow exactly like orbit()
            for idx, zz in zip(active[hot], zs[hot]):
                status, k, _ = _run(a, complex(zz), n, n_max, T, certify_steps)
                if k is not None:
                    cells[idx] = k
            active = active[~hot]
            if n >= n_max:
                break
            z[active] = np.exp(z[active]) + a
            n += 1
    return EscapeGrid(a, box, width, height, int(n_max), float(T), cells.reshape(height, width))


# ---------------------------------------------------------------------------
# components

_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True, eq=False)
class ComponentStats:
    count: int
    sizes: tuple
    labels: np.ndarray = field(repr=False)

    def to_dict(self):
        return {"count": self.count, "sizes": list(self.sizes)}


def _mask_of(g, which):
    if isinstance(g, EscapeGrid):
        esc = g.escaped
    else:
        esc = np.asarray(g, dtype=bool)
    if which == "escaping":
        return esc
    if which == "nonescaping":
        return ~esc
    raise InvalidInput(f"which must be 'escaping' or 'nonescaping', got {which!r}")


def label_mask(mask: np.ndarray, connectivity: int = 4) -> ComponentStats:
    if connectivity not in (4, 8):
        raise InvalidInput("connectivity must be 4 or 8")
    raw, count = ndimage.label(mask, structure=_FOUR if connectivity == 4 else _EIGHT)
    if count == 0:
        return ComponentStats(0, (), raw)
    sizes = np.bincount(raw.ravel(), minlength=count + 1)[1:]
    # largest first; ties keep scan order
    order = np.argsort(-sizes, kind="stable")
    remap = np.zeros(count + 1, dtype=raw.dtype)
    remap[order + 1] = np.arange(1, count + 1)
    return ComponentStats(int(count), tuple(int(s) for s in sizes[order]), remap[raw])


def label_components(g, which: str = "escaping", connectivity: int = 4) -> ComponentStats:
    """Connected components of the escaping (or non-escaping) cells; ids are
    1..count by decreasing size, 0 marks the other cells."""
    return label_mask(_mask_of(g, which), connectivity)


@dataclass(frozen=True, eq=False)
class Witness:
    blocker_id: int
    blocker: np.ndarray = field(repr=False)
    separated: tuple
    touches_boundary: bool
    reaches_right_edge: bool

    def to_dict(self):
        return {
            "blocker_id": self.blocker_id,
            "blocker_size": int(self.blocker.sum()),
            "separated": [list(map(int, c)) for c in self.separated],
            "touches_boundary": self.touches_boundary,
            "reaches_right_edge": self.reaches_right_edge,
        }


def _touches_boundary(mask):
    return bool(mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any())


def disconnection_witness(g, min_blocker: int = 3):
    """First non-escaping 4-component (in scan order) whose removal leaves
    two escaping cells in different 8-components of the rest of the box.

    Blockers smaller than ``min_blocker`` cells are skipped; fewer than three
    4-connected cells cannot cut an 8-connected complement.
    """
    esc = _mask_of(g, "escaping")
    if esc.sum() < 2:
        return None
    blockers, count = ndimage.label(~esc, structure=_FOUR)
    if count == 0:
        return None
    sizes = np.bincount(blockers.ravel(), minlength=count + 1)
    flat_esc = np.flatnonzero(esc.ravel())
    for bid in range(1, count + 1):
        if sizes[bid] < min_blocker:
            continue
        blocker = blockers == bid
        comp, ncomp = ndimage.label(~blocker, structure=_EIGHT)
        if ncomp < 2:
            continue
        ids = comp.ravel()[flat_esc]
        first = ids[0]
        other = np.flatnonzero(ids != first)
        if other.size == 0:
            continue
        h, w = esc.shape
        c1 = divmod(int(flat_esc[0]), w)
        c2 = divmod(int(flat_esc[other[0]]), w)
        wit = Witness(
            bid,
            blocker,
            (c1, c2),
            _touches_boundary(blocker),
            bool(blocker[:, -2:].any()),
        )
        if not verify_witness(esc, wit):
            raise ExpMapError("witness failed its independent recheck")
        return wit
    return None


def _bfs(allowed, start, neighbors):
    h, w = allowed.shape
    seen = np.zeros_like(allowed, dtype=bool)
    seen[start] = True
    todo = deque([start])
    while todo:
        r, c = todo.popleft()
        for dr, dc in neighbors:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and allowed[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                todo.append((rr, cc))
    return seen


N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
N8 = N4 + ((1, 1), (1, -1), (-1, 1), (-1, -1))


def verify_witness(g, wit: Witness) -> bool:
    """Recheck a witness by breadth-first search, independently of the
    labeling used to find it."""
    esc = _mask_of(g, "escaping")
    blocker = np.asarray(wit.blocker, dtype=bool)
    if not blocker.any() or (blocker & esc).any():
        return False
    start = tuple(np.argwhere(blocker)[0])
    if not np.array_equal(_bfs(blocker, start, N4), blocker):
        return False
    (c1, c2) = wit.separated
    if not (esc[c1] and esc[c2]) or blocker[c1] or blocker[c2]:
        return False
    if _bfs(~blocker, tuple(c1), N8)[tuple(c2)]:
        return False
    return wit.touches_boundary == _touches_boundary(blocker)


# ---------------------------------------------------------------------------
# sandwich estimates


@dataclass(frozen=True)
class SandwichStep:
    j: int
    modulus: TowerMagnitude
    lower_ok: bool
    upper_ok: bool
    lower_slack: float
    upper_slack: float


@dataclass(frozen=True)
class SandwichReport:
    holds: bool
    steps: tuple


def tower_orbit_moduli(a, z, n: int) -> list:
    """|f^j(z)| for j = 0..n as towers.

    Past double range an iterate is followed through a lower bound on its real
    part, which needs the phase of the imaginary part; exactly real orbits
    keep it forever.
    """
    a = as_parameter(a)
    z = complex(z)
    out = [TowerMagnitude.from_float(abs(z))]
    re_t = None  # tower real part once it left double range
    exact = False
    for _ in range(n):
        if re_t is None:
            if z.real <= EXP_MAX_ARG:
                z = cmath.exp(z) + a
                out.append(TowerMagnitude.from_float(abs(z)))
                continue
            exact = _exact_real(a, z)
            if exact:
                log_cos = 0.0
            else:
                if _phase_error(z) > _PHASE_ERR_MAX or math.cos(z.imag) <= 0:
                    raise PreconditionViolated("orbit phase is lost before step n")
                log_cos = math.log(math.cos(z.imag))
            # |f(z)| = e^Re z up to |a|, far below tower resolution here
            out.append(normalize(1, z.real))
            re_t = tower_add_float(normalize(1, z.real + log_cos), a.real)
            continue
        if not exact:
            raise PreconditionViolated("orbit phase is lost before step n")
        out.append(tower_add_float(normalize(re_t.level + 1, re_t.mantissa), 0.0))
        re_t = out[-1]
    return out


def _slack(big: TowerMagnitude, small: TowerMagnitude, c: float) -> float:
    """big - small + c as a float; beyond double range inf when the towers
    are identical or ordered, nan when they only agree to tower resolution."""
    x, y = big.to_float(), small.to_float()
    if math.isfinite(x) and math.isfinite(y):
        return x - y + c
    if big == small:
        return c
    cmp = tower_cmp(big, small)
    if cmp == GREATER:
        return math.inf
    return -math.inf if cmp == LESS else math.nan


def sandwich_check(a, z, x0: float, n: int, anchor_factor: float = 2.0) -> SandwichReport:
    """exp^j(x0) - 1 <= |f^j(z)| <= 2 exp^j(x0) + 1 for j = 0..n."""
    if n < 0 or not x0 >= 0:
        raise InvalidInput("need n >= 0 and x0 >= 0")
    mods = tower_orbit_moduli(a, z, n)
    target = iterated_exp(x0, n)
    if (
        tower_cmp(mods[n], tower_scale(target, anchor_factor)) == GREATER
        or tower_cmp(tower_scale(mods[n], anchor_factor), target) == LESS
    ):
        raise PreconditionViolated(f"|f^{n}(z)| is not within a factor {anchor_factor} of exp^{n}(x0)")
    steps = []
    for j, m in enumerate(mods):
        e = iterated_exp(x0, j)
        lo = tower_add_float(e, -1.0)
        hi = tower_add_float(tower_scale(e, 2.0), 1.0)
        lower_ok = tower_cmp(m, lo) != LESS
        upper_ok = tower_cmp(m, hi) != GREATER
        lower_slack = _slack(m, e, 1.0)
        # 2e + 1 - m; when m is exactly e this is e + 1
        upper_slack = e.to_float() + 1.0 if m == e else _slack(tower_scale(e, 2.0), m, 1.0)
        steps.append(SandwichStep(j, m, lower_ok, upper_ok, lower_slack, upper_slack))
    return SandwichReport(all(s.lower_ok and s.upper_ok for s in steps), tuple(steps))
