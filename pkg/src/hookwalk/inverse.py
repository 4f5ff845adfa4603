"""Inverse transforms: diagrams back from their transition measures.

Atomic measures invert to rectangular diagrams by bracketed root finding on
the partial-fraction identities; densities invert to slope functions through
the arccot formulas, and slopes integrate back to a piecewise-linear diagram
anchored so the hinge condition holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagram import Interval, PiecewiseLinearDiagram, RectangularDiagram
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    StepFunction,
    difference_quotient_integral_step,
    find_root_bracketed,
)
from .transition import AtomicMeasure, DensityGrid

__all__ = [
    "InteriorInverseParams",
    "SlopeFunction",
    "rect_from_exterior_atoms",
    "rect_from_interior_atoms",
    "interior_support_bounds",
    "slope_from_exterior_density",
    "slope_from_interior_density",
    "diagram_from_slopes",
]


@dataclass(frozen=True)
class InteriorInverseParams:
    """Area and center of the sought diagram.

    The interior measure alone does not determine the diagram; both
    parameters are always supplied explicitly, never inferred.
    """

    area: float
    center: float

    def __post_init__(self) -> None:
        if not self.area > 0.0:
            raise ValueError(f"area must be positive, got {self.area}")


@dataclass(frozen=True)
class SlopeFunction:
    """Recovered derivative values on interior grid points."""

    grid: np.ndarray
    values: np.ndarray
    interval: Interval

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float).copy()
        vals = np.asarray(self.values, dtype=float).copy()
        if grid.shape != vals.shape or grid.ndim != 1 or len(grid) == 0:
            raise ValueError("grid and values must be matching 1-d arrays")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must strictly increase")
        if grid[0] <= self.interval.a or grid[-1] >= self.interval.b:
            raise ValueError("grid must lie strictly inside the interval")
        if np.any(np.abs(vals) >= 1.0):
            raise ValueError("slope values must lie strictly inside (-1, 1)")
        grid.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)


def rect_from_exterior_atoms(m: AtomicMeasure) -> RectangularDiagram:
    """Rectangular diagram whose exterior transition measure is m.

    Minima are the atoms; maxima are the roots of sum w_k/(x - x_k) = 0, one
    in each gap.  Roots are found on the equivalent polynomial
    sum_k w_k prod_{i != k} (x - x_i), which has no poles at the brackets.
    """
    locs = m.locations
    w = m.weights
    n = len(locs)
    if n == 1:
        return RectangularDiagram(locs, [])

    def poly(x: float) -> float:
        terms = []
        for k in range(n):
            others = np.delete(locs, k)
            terms.append(w[k] * np.prod(x - others))
        return math.fsum(terms)

    maxima = [find_root_bracketed(poly, float(locs[k]), float(locs[k + 1]))
              for k in range(n - 1)]
    return RectangularDiagram(locs, maxima)


def interior_support_bounds(m: AtomicMeasure,
                            params: InteriorInverseParams) -> tuple[float, float]:
    """Bounds [lo, hi] guaranteed to bracket the reconstructed minima.

    From the quadratic comparison in the support argument: the outer root of
    -(A/2)/(x - y) + x - z with y the nearest extreme atom, which majorises
    the actual partial-fraction sum outside the atoms.
    """
    area, z = params.area, params.center
    y_lo, y_hi = float(m.locations[0]), float(m.locations[-1])
    hi = 0.5 * (y_hi + z + math.sqrt((y_hi - z) ** 2 + 2.0 * area))
    lo = 0.5 * (y_lo + z - math.sqrt((y_lo - z) ** 2 + 2.0 * area))
    return lo, hi


def rect_from_interior_atoms(m: AtomicMeasure,
                             params: InteriorInverseParams) -> RectangularDiagram:
    """Rectangular diagram with interior measure m, given area and center.

    Maxima are the atoms; the n minima are the roots of
    -(A/2) sum w_k/(x - y_k) + x - z, one in each atom gap and one outside
    each extreme atom within the support bounds.  Root finding runs on the
    pole-free polynomial (x - z) prod (x - y_i) - (A/2) sum w_k prod_{i != k}
    (x - y_i).
    """
    y = m.locations
    w = m.weights
    area, z = params.area, params.center
    nm1 = len(y)

    def poly(x: float) -> float:
        lead = (x - z) * np.prod(x - y)
        terms = [lead]
        for k in range(nm1):
            others = np.delete(y, k)
            terms.append(-0.5 * area * w[k] * np.prod(x - others))
        return math.fsum(terms)

    lo, hi = interior_support_bounds(m, params)
    pad = 1e-9 * (abs(hi - lo) + 1.0)
    brackets = [(lo - pad, float(y[0]))]
    brackets += [(float(y[k]), float(y[k + 1])) for k in range(nm1 - 1)]
    brackets += [(float(y[-1]), hi + pad)]
    minima = [find_root_bracketed(poly, blo, bhi) for blo, bhi in brackets]
    return RectangularDiagram(minima, y)


def _arccot(v: float) -> float:
    """Inverse cotangent valued in (0, pi), continuous across v = 0."""
    return math.atan2(1.0, v)


def _inversion_bracket(g, x: float,
                       cfg: QuadratureConfig) -> tuple[float, float, float]:
    """(density at x, hilbert offset, log ratio) shared by both inversions."""
    if isinstance(g, DensityGrid):
        a, b = g.interval.a, g.interval.b
        gx = g.value_at(x)
        if gx <= 0.0:
            raise ValueError(f"density must be positive at x={x}, got {gx}")
        offset = g.hilbert_offset(x, cfg)
    elif isinstance(g, StepFunction):
        a, b = g.interval
        gx = float(g(x))
        if gx <= 0.0:
            raise ValueError(f"density must be positive at x={x}, got {gx}")
        offset = difference_quotient_integral_step(g, x)
    else:
        raise TypeError(f"density must be a DensityGrid or StepFunction, "
                        f"got {type(g).__name__}")
    if not a < x < b:
        raise ValueError(f"x={x} must lie inside ({a}, {b})")
    return gx, offset, math.log((b - x) / (x - a))


def slope_from_exterior_density(g, x: float,
                                cfg: QuadratureConfig = DEFAULT_QUADRATURE
                                ) -> float:
    """Diagram slope at x recovered from the exterior density.

    -1 + (2/pi) arccot[(1/pi)(log((b-x)/(x-a)) + hilbert_offset(x)/g(x))],
    with arccot valued in (0, pi).  ``g`` is a DensityGrid (linearly
    interpolated smooth part) or a StepFunction (closed-form offset).
    """
    gx, offset, logratio = _inversion_bracket(g, x, cfg)
    arg = (logratio + offset / gx) / math.pi
    return -1.0 + (2.0 / math.pi) * _arccot(arg)


def slope_from_interior_density(h, params: InteriorInverseParams, x: float,
                                cfg: QuadratureConfig = DEFAULT_QUADRATURE
                                ) -> float:
    """Diagram slope at x recovered from the interior density and (A, z).

    +1 - (2/pi) arccot[(1/pi)(log((b-x)/(x-a)) + (hilbert_offset(x)
    + 2(x-z)/A)/h(x))].
    """
    hx, offset, logratio = _inversion_bracket(h, x, cfg)
    arg = (logratio
           + (offset + 2.0 * (x - params.center) / params.area) / hx) / math.pi
    return 1.0 - (2.0 / math.pi) * _arccot(arg)


def diagram_from_slopes(s: SlopeFunction) -> PiecewiseLinearDiagram:
    """Integrate a slope function into a piecewise-linear diagram.

    The anchor value(a) = (b - a - integral of slope)/2 makes the hinge
    condition hold exactly; slopes extend as constants from the outermost
    grid points to the interval ends.
    """
    a, b = s.interval.a, s.interval.b
    t = np.concatenate([[a], s.grid, [b]])
    v_ext = np.concatenate([[s.values[0]], s.values, [s.values[-1]]])
    # Trapezoid antiderivative of the piecewise-linear slope interpolant.
    increments = 0.5 * (v_ext[1:] + v_ext[:-1]) * np.diff(t)
    total = math.fsum(increments)
    v0 = 0.5 * ((b - a) - total)
    values = v0 + np.concatenate([[0.0], np.cumsum(increments)])
    return PiecewiseLinearDiagram(np.column_stack([t, values]))
