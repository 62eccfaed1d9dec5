"""Numerical toolkit for the exponential family f_a(z) = exp(z) + a.

Escape-time orbits with iterated-exponential magnitudes, dynamic rays by
inverse-branch pullback, strip partitions and itineraries, parameter
classification and grid-scale connectivity probes.
"""
from .dynamics import Orbit, Status, first_passage, inverse_branch, orbit, step
from .errors import (
    ConfigError,
    ExpMapError,
    GammaThroughSingularValue,
    IncompatibleAddress,
    InvalidInput,
    LocateFailed,
    NonMonotoneCurves,
    NotConverged,
    NotEscaping,
    OutOfTracedRange,
    PrefixTooShort,
    PreconditionViolated,
    PullbackHitSingularValue,
    RangeExceeded,
    SingularValueHit,
)
from .partition import (
    Itinerary,
    Partition,
    StripIndex,
    build_partition,
    check_elementary,
    exp_bound_holds,
    itinerary,
    kneading,
    minimal_exp_bound,
    periodicity_check,
    ray_itinerary,
    strip_index,
)
from .probe import (
    AttractingCycle,
    EscapeGrid,
    KneadingEvidence,
    Prediction,
    SingularEscapes,
    Undetermined,
    Witness,
    classify_parameter,
    disconnection_witness,
    escape_grid,
    label_components,
    predict_connectivity,
    sandwich_check,
    verify_witness,
)
from .rays import (
    Constant,
    ExternalAddress,
    Periodic,
    RayPoint,
    RayPolyline,
    address_of_orbit,
    is_endpoint_heuristic,
    singular_ray,
    trace_polyline,
    trace_ray,
)
from .tower import TowerMagnitude, iterated_exp, tower_cmp

__version__ = "0.1.0"

__all__ = [
    "AttractingCycle",
    "ConfigError",
    "Constant",
    "EscapeGrid",
    "ExpMapError",
    "ExternalAddress",
    "GammaThroughSingularValue",
    "IncompatibleAddress",
    "InvalidInput",
    "Itinerary",
    "KneadingEvidence",
    "LocateFailed",
    "NonMonotoneCurves",
    "NotConverged",
    "NotEscaping",
    "Orbit",
    "OutOfTracedRange",
    "Partition",
    "Periodic",
    "PreconditionViolated",
    "Prediction",
    "PrefixTooShort",
    "PullbackHitSingularValue",
    "RangeExceeded",
    "RayPoint",
    "RayPolyline",
    "SingularEscapes",
    "SingularValueHit",
    "Status",
    "StripIndex",
    "TowerMagnitude",
    "Undetermined",
    "Witness",
    "address_of_orbit",
    "build_partition",
    "check_elementary",
    "classify_parameter",
    "disconnection_witness",
    "escape_grid",
    "exp_bound_holds",
    "first_passage",
    "inverse_branch",
    "is_endpoint_heuristic",
    "iterated_exp",
    "itinerary",
    "kneading",
    "label_components",
    "minimal_exp_bound",
    "orbit",
    "periodicity_check",
    "predict_connectivity",
    "ray_itinerary",
    "sandwich_check",
    "singular_ray",
    "step",
    "strip_index",
    "tower_cmp",
    "trace_polyline",
    "trace_ray",
    "verify_witness",
]
