"""L_p norms on the torus with respect to normalized Lebesgue measure.

Every integral is a periodic rectangle rule (equal weights, divide by M^d),
which is exact for trigonometric polynomials of per-axis degree <= M-1 and
spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError
from .poly import GridSpec, evaluate, evaluate_at

if TYPE_CHECKING:
    from .poly import FloatArray, TrigPoly

logger = logging.getLogger(__name__)

# sup-norm polishing
_SUP_MIN_POINTS = 64
_REFINE_CANDIDATES = 16
_CANDIDATE_FLOOR = 0.98
GOLDEN_XTOL = 1e-12
_GOLDEN_MAXITER = 200


def format_number(x: float) -> str:
    """Shortest text that parses back to x: "inf", "3", "1.5".

    >>> format_number(3.0), format_number(0.1), format_number(float("inf"))
    ('3', '0.1', 'inf')
    """
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    short = f"{x:g}"
    return short if float(short) == x else repr(x)


class NormMethod(Enum):
    PARSEVAL = "parseval"
    EXACT_RECTANGLE = "exact-rectangle"
    ADAPTIVE_RECTANGLE = "adaptive-rectangle"
    GRID_MAX_REFINED = "grid-max-refined"

    def __repr__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class NormSpec:
    """Lebesgue exponent p in [1, inf]."""

    exponent: float

    def __post_init__(self) -> None:
        exponent = float(self.exponent)
        if math.isnan(exponent) or exponent < 1.0:
            msg = f"exponent must satisfy p >= 1, provided p={self.exponent}"
            raise DomainError(msg)
        object.__setattr__(self, "exponent", exponent)

    @classmethod
    def parse(cls, text: str | float) -> NormSpec:
        """Accepts a decimal or the token "inf" (any case)."""
        if isinstance(text, str):
            token = text.strip()
            if token.lower() == "inf":
                return cls(math.inf)
            try:
                return cls(float(token))
            except ValueError as e:
                msg = f"exponent must be a decimal or 'inf', provided {text!r}"
                raise DomainError(msg) from e
        return cls(float(text))

    @property
    def is_sup(self) -> bool:
        return math.isinf(self.exponent)

    @property
    def is_even_integer(self) -> bool:
        if self.is_sup:
            return False
        rounded = round(self.exponent)
        return rounded == self.exponent and rounded % 2 == 0

    def __str__(self) -> str:
        return format_number(self.exponent)


L1 = NormSpec(1.0)
L2 = NormSpec(2.0)
SUP = NormSpec(math.inf)


@dataclass(frozen=True, slots=True)
class QuadConfig:
    """Rectangle-rule settings.

    max_grid_points caps M^d for every grid this module evaluates; once the
    next doubling would pass it, refinement stops and the last relative change
    is reported as the error estimate.
    """

    oversample: int = 16
    rel_tol: float = 1e-9
    max_doublings: int = 6
    max_grid_points: int = 2**22

    def __post_init__(self) -> None:
        if self.max_grid_points < 1:
            msg = f"max_grid_points must be >= 1, provided {self.max_grid_points=}"
            raise DomainError(msg)
        if self.oversample < 1:
            msg = f"oversample must be >= 1, provided {self.oversample=}"
            raise DomainError(msg)
        if not self.rel_tol > 0:
            msg = f"rel_tol must be positive, provided {self.rel_tol=}"
            raise DomainError(msg)
        if self.max_doublings < 0:
            msg = f"max_doublings must be >= 0, provided {self.max_doublings=}"
            raise DomainError(msg)


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True, slots=True)
class NormValue:
    value: float
    error_estimate: float
    method: NormMethod


def norm(poly: TrigPoly, spec: NormSpec, cfg: QuadConfig = DEFAULT_QUAD) -> NormValue:
    """||T||_p, dispatched on the exponent.

    p = 2 uses Parseval, even integer p an exact rectangle rule on p*n+1
    points per axis, other finite p an adaptive rectangle rule, p = inf the
    refined grid maximum. Constants (n = 0) are exact for every p.
    """
    if poly.degree == 0:
        return NormValue(abs(float(poly.coeffs[0])), 0.0, NormMethod.PARSEVAL)
    if spec.is_sup:
        return sup_norm(poly, cfg)
    p = spec.exponent
    if p == 2.0:
        return NormValue(norm_l2_parseval(poly), 0.0, NormMethod.PARSEVAL)
    if spec.is_even_integer:
        points = round(p) * poly.degree + 1
        return NormValue(
            rectangle_norm(poly, p, points), 0.0, NormMethod.EXACT_RECTANGLE
        )
    return _adaptive_norm(poly, p, cfg)


def norm_l2_parseval(poly: TrigPoly) -> float:
    return float(np.linalg.norm(poly.coeffs))


def rectangle_norm(poly: TrigPoly, p: float, points: int) -> float:
    """(M^-d sum_j |T(x_j)|^p)^(1/p) on the M-per-axis equispaced grid."""
    if math.isinf(p) or p < 1.0:
        msg = f"rectangle rule needs finite p >= 1, provided {p=}"
        raise DomainError(msg)
    values = np.abs(evaluate(poly, GridSpec(poly.dimension, points)))
    return float(np.mean(values**p) ** (1.0 / p))


def axis_points_cap(cfg: QuadConfig, dimension: int) -> int:
    """Largest M with M^d <= cfg.max_grid_points (at least 1).

    >>> axis_points_cap(QuadConfig(max_grid_points=2**22), 4)
    45
    """
    m = max(int(cfg.max_grid_points ** (1.0 / dimension)), 1)
    while (m + 1) ** dimension <= cfg.max_grid_points:
        m += 1
    while m > 1 and m**dimension > cfg.max_grid_points:
        m -= 1
    return m


def _relative_change(coarse: float, fine: float) -> float:
    return abs(fine - coarse) / fine if fine > 0 else 0.0


def _adaptive_norm(poly: TrigPoly, p: float, cfg: QuadConfig) -> NormValue:
    cap = axis_points_cap(cfg, poly.dimension)
    points = min(cfg.oversample * poly.basis.axis_size, cap)
    value = rectangle_norm(poly, p, points)
    change = math.inf
    capped = False
    for _ in range(cfg.max_doublings):
        if 2 * points > cap:
            capped = True
            break
        points *= 2
        refined = rectangle_norm(poly, p, points)
        change = _relative_change(value, refined)
        value = refined
        if change < cfg.rel_tol:
            return NormValue(value, change, NormMethod.ADAPTIVE_RECTANGLE)
    if capped and math.isinf(change) and points > 1:
        # no doubling fit under the cap; compare against the half grid instead
        change = _relative_change(rectangle_norm(poly, p, points // 2), value)
    logger.debug(
        "quadrature: p=%g n=%d d=%d stopped at M=%d without rel_tol=%g (last change %.3g%s)",
        p,
        poly.degree,
        poly.dimension,
        points,
        cfg.rel_tol,
        change,
        ", grid cap reached" if capped else "",
    )
    return NormValue(value, change, NormMethod.ADAPTIVE_RECTANGLE)


def sup_norm(poly: TrigPoly, cfg: QuadConfig = DEFAULT_QUAD) -> NormValue:
    """max |T| from a dense grid, polished by golden-section search per axis.

    Every discrete local maximum within 2% of the grid maximum is polished.
    error_estimate is the gain of the polish over the raw grid maximum.
    """
    if poly.degree == 0:
        return NormValue(abs(float(poly.coeffs[0])), 0.0, NormMethod.PARSEVAL)
    points = max(cfg.oversample * poly.basis.axis_size, _SUP_MIN_POINTS)
    points = max(min(points, axis_points_cap(cfg, poly.dimension)), poly.basis.axis_size)
    grid = GridSpec(poly.dimension, points)
    magnitudes = np.abs(evaluate(poly, grid))
    grid_max = float(magnitudes.max())

    peaks = magnitudes >= _CANDIDATE_FLOOR * grid_max
    for axis in range(poly.dimension):
        peaks &= magnitudes >= np.roll(magnitudes, 1, axis=axis)
        peaks &= magnitudes >= np.roll(magnitudes, -1, axis=axis)
    candidates = np.flatnonzero(peaks)
    order = np.argsort(-magnitudes.ravel()[candidates], kind="stable")
    candidates = candidates[order[:_REFINE_CANDIDATES]]

    nodes = grid.nodes
    step = 2.0 * math.pi / points
    best = grid_max
    for flat_index in candidates:
        index = np.unravel_index(flat_index, magnitudes.shape)
        best = max(best, _polish(poly, nodes[list(index)], step))
    return NormValue(best, best - grid_max, NormMethod.GRID_MAX_REFINED)


def _polish(poly: TrigPoly, start: FloatArray, step: float) -> float:
    """Coordinate-wise golden-section ascent of |T| inside one grid cell per axis."""
    x = np.array(start, dtype=np.float64)
    best = abs(evaluate_at(poly, x))
    for axis in range(poly.dimension):

        def objective(t: float, axis: int = axis) -> float:
            y = x.copy()
            y[axis] = t
            return -abs(evaluate_at(poly, y))

        centre = x[axis]
        result = None
        # a tie with a neighbouring node breaks the three-point bracket
        for bracket in ((centre - step, centre, centre + step), (centre - step, centre + step)):
            try:
                result = minimize_scalar(
                    objective,
                    bracket=bracket,
                    method="golden",
                    options={"xtol": GOLDEN_XTOL, "maxiter": _GOLDEN_MAXITER},
                )
                break
            except (ValueError, RuntimeError):
                continue
        if result is None:  # |T| flat along this axis
            continue
        if -result.fun > best:
            best = float(-result.fun)
            x[axis] = result.x
    return best
