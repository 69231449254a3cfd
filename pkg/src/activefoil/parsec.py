"""Crest-and-edge airfoil parameterization (PARSEC family).

Eleven physically meaningful parameters fix each surface of the airfoil
through a six-term half-integer-power series

    s(ell) = sum_{j=1..6} a_j * ell**(j - 1/2)

whose coefficients solve a 6x6 linear equality-constraint system: crest
interpolation, trailing-edge height, zero crest slope, trailing-edge
slope, crest curvature, and the leading-edge radius through the first
coefficient ``a_1 = +/- sqrt(2 * r_le)`` (plus for the upper surface).

Parameter layout (JSON keys x1..x11):

    x1  upper crest chordwise position      x7  trailing-edge direction [deg]
    x2  lower crest chordwise position      x8  trailing-edge wedge half-angle [deg]
    x3  upper crest height                  x9  upper crest curvature
    x4  lower crest height                  x10 lower crest curvature
    x5  trailing-edge height offset         x11 leading-edge radius
    x6  trailing-edge half-thickness

Convention note: the two trailing-edge angles enter as slopes

    ds_U/dell(1) = tan((x7 - x8) * pi / 180)
    ds_L/dell(1) = tan((x7 + x8) * pi / 180)

i.e. x7 steers the mean camber direction at the trailing edge and x8
opens the wedge.  Other sign/offset conventions exist in the wild; all
results in this package are self-consistent with the one above.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConditioningError, ContractViolation, DomainError
from .geometry import (
    AirfoilSurfacePair,
    BasisKind,
    BasisSpec,
    ShapeCoefficients,
    Surface,
)
from .sampling import ParameterBox

TERM_COUNT = 6
CONDITION_LIMIT = 1e12
RESIDUAL_LIMIT = 1e-10

_BASIS = BasisSpec(BasisKind.HALF_INTEGER, TERM_COUNT)
_EXPS = _BASIS.exponents()


@dataclass(frozen=True)
class ParsecParams:
    upper_crest_x: float
    lower_crest_x: float
    upper_crest_y: float
    lower_crest_y: float
    te_y: float
    te_half_thickness: float
    te_angle_deg: float
    te_wedge_deg: float
    upper_curvature: float
    lower_curvature: float
    le_radius: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise DomainError(f"{f.name} must be finite")
            object.__setattr__(self, f.name, float(value))
        for name in ("upper_crest_x", "lower_crest_x"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise DomainError(f"{name} must lie strictly inside (0, 1), got {value}")
        if self.le_radius <= 0.0:
            raise DomainError("le_radius must be positive")
        if self.te_half_thickness < 0.0:
            raise DomainError("te_half_thickness must be non-negative")

    @classmethod
    def from_sequence(cls, values) -> "ParsecParams":
        vals = list(values)
        if len(vals) != 11:
            raise ContractViolation(f"expected 11 parameters, got {len(vals)}")
        return cls(*vals)

    @classmethod
    def from_mapping(cls, mapping) -> "ParsecParams":
        missing = [k for k in JSON_KEYS if k not in mapping]
        if missing:
            raise ContractViolation(f"missing parameter keys: {missing}")
        return cls.from_sequence([mapping[k] for k in JSON_KEYS])

    def to_sequence(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]

    def to_mapping(self) -> dict:
        return dict(zip(JSON_KEYS, self.to_sequence()))

    def to_json(self) -> str:
        return json.dumps(self.to_mapping(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ParsecParams":
        return cls.from_mapping(json.loads(text))


JSON_KEYS = tuple(f"x{i}" for i in range(1, 12))


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    surface: str


def leading_edge_coefficient(radius: float, surface: str) -> float:
    """First series coefficient from the leading-edge radius: +/- sqrt(2 * radius)."""
    if radius <= 0.0:
        raise DomainError("leading-edge radius must be positive")
    root = math.sqrt(2.0 * radius)
    if surface == "upper":
        return root
    if surface == "lower":
        return -root
    raise ContractViolation(f"surface must be 'upper' or 'lower', got {surface!r}")


def build_constraint_system(params: ParsecParams, surface: str) -> ConstraintSystem:
    """Assemble the 6x6 system M a = p for one surface."""
    if surface == "upper":
        ell_int = params.upper_crest_x
        crest_y = params.upper_crest_y
        te_height = params.te_y + params.te_half_thickness
        te_slope = math.tan(math.radians(params.te_angle_deg - params.te_wedge_deg))
        curvature = params.upper_curvature
    elif surface == "lower":
        ell_int = params.lower_crest_x
        crest_y = params.lower_crest_y
        te_height = params.te_y - params.te_half_thickness
        te_slope = math.tan(math.radians(params.te_angle_deg + params.te_wedge_deg))
        curvature = params.lower_curvature
    else:
        raise ContractViolation(f"surface must be 'upper' or 'lower', got {surface!r}")

    e = _EXPS
    matrix = np.vstack(
        [
            ell_int**e,                            # height at the crest
            np.ones(TERM_COUNT),                   # height at the trailing edge
            e * ell_int ** (e - 1.0),              # slope at the crest (set to zero)
            e.copy(),                              # slope at the trailing edge
            e * (e - 1.0) * ell_int ** (e - 2.0),  # curvature at the crest
            np.eye(TERM_COUNT)[0],                 # leading-edge radius via a_1
        ]
    )
    rhs = np.array(
        [
            crest_y,
            te_height,
            0.0,
            te_slope,
            curvature,
            leading_edge_coefficient(params.le_radius, surface),
        ]
    )
    return ConstraintSystem(matrix=matrix, rhs=rhs, surface=surface)


def _solve_one(system: ConstraintSystem) -> np.ndarray:
    cond = np.linalg.cond(system.matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        ell_int = system.matrix[0, 0] ** 2.0  # first row is ell_int ** 1/2, ...
        raise ConditioningError(
            f"{system.surface} constraint system too ill-conditioned "
            f"(cond ~ {cond:.3e} at crest position {ell_int:.6g})"
        )
    a = np.linalg.solve(system.matrix, system.rhs)
    residual = float(np.max(np.abs(system.matrix @ a - system.rhs)))
    if residual > RESIDUAL_LIMIT:
        raise ConditioningError(
            f"{system.surface} solve residual {residual:.3e} exceeds {RESIDUAL_LIMIT:g}"
        )
    return a


def solve_coefficients(params: ParsecParams) -> AirfoilSurfacePair:
    """Solve both surfaces; returns half-integer-power series of six terms each."""
    upper = _solve_one(build_constraint_system(params, "upper"))
    lower = _solve_one(build_constraint_system(params, "lower"))
    return AirfoilSurfacePair(
        upper=Surface(_BASIS, ShapeCoefficients(upper)),
        lower=Surface(_BASIS, ShapeCoefficients(lower)),
    )


# +/-20% box around parameters fitted to the NACA 0012 (upper/lower
# crest at 30.25% chord, half-thickness 0.06).  Stored literally with
# each interval already in (lower, upper) order; the trailing-edge
# height row is symmetric about zero so the box cannot be regenerated
# from its centre with make_box.
_BASELINE_LOWER = (0.242, 0.242, 0.048, -0.072, -0.004, 0.008,
                   -3.335, 7.4, -0.6, 0.4, 0.012)
_BASELINE_UPPER = (0.363, 0.363, 0.072, -0.048, 0.004, 0.012,
                   -2.223, 11.1, -0.4, 0.6, 0.018)


def baseline_box() -> ParameterBox:
    """Built-in parameter box around the NACA-0012 fit (CLI name parsec-table2)."""
    return ParameterBox(
        lower=np.array(_BASELINE_LOWER),
        upper=np.array(_BASELINE_UPPER),
        labels=JSON_KEYS,
    )


def baseline_center() -> ParsecParams:
    box = baseline_box()
    return ParsecParams.from_sequence(0.5 * (box.lower + box.upper))
