"""Forward transforms: transition measures of both hook walks.

Rectangular diagrams get atomic measures through exact product formulas; the
smooth/piecewise-linear classes get densities through the explicit
cosine-power-exponential formulas, in both rotated and unrotated coordinates.
The Cauchy-transform identities tying measures to the diagram's charge are
exposed as residual computations for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .diagram import (
    DiagramError,
    Interval,
    PiecewiseLinearDiagram,
    RectangularDiagram,
    SmoothDiagram,
    UnrotatedDiagram,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    StepFunction,
    difference_quotient_integral,
    difference_quotient_integral_step,
    integrate_endpoint_singular,
)

__all__ = [
    "AtomicMeasure",
    "DensityGrid",
    "exterior_atoms",
    "interior_atoms",
    "exterior_density",
    "interior_density",
    "exterior_mass",
    "interior_mass",
    "density_grid",
    "density_cdf",
    "exterior_density_unrotated",
    "interior_density_unrotated",
    "started_interior_density",
    "cauchy_identity_residual",
]


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported probability measure with strictly increasing atoms."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        loc = np.asarray(self.locations, dtype=float).copy()
        w = np.asarray(self.weights, dtype=float).copy()
        if loc.shape != w.shape or loc.ndim != 1 or len(loc) == 0:
            raise ValueError("locations and weights must be matching 1-d arrays")
        if not np.all(np.diff(loc) > 0):
            raise ValueError("atom locations must strictly increase")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        total = math.fsum(w)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {total}")
        loc.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.locations)

    def cdf(self, x):
        idx = np.searchsorted(self.locations, np.asarray(x, dtype=float),
                              side="right")
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        out = cum[idx]
        return float(out) if np.ndim(x) == 0 else out

    def cauchy_transform(self, x: float) -> float:
        """Sum of w_k / (x - loc_k) for x off the support."""
        return math.fsum(self.weights / (x - self.locations))


def exterior_atoms(d: RectangularDiagram) -> AtomicMeasure:
    """Exterior transition measure of a rectangular diagram.

    Atom at each minimum x_k with weight prod_i (x_k - y_i) / prod_{i != k}
    (x_k - x_i), computed as a product of paired sub-unit ratios so long
    interlacing sequences neither overflow nor underflow.
    """
    x = d.minima
    y = d.maxima
    n = len(x)
    weights = np.empty(n)
    for k in range(n):
        left = (x[k] - y[:k]) / (x[k] - x[:k])
        right = (x[k] - y[k:]) / (x[k] - x[k + 1:])
        weights[k] = np.prod(left) * np.prod(right)
    return AtomicMeasure(x, weights)


def interior_atoms(d: RectangularDiagram) -> AtomicMeasure:
    """Interior transition measure of a rectangular diagram.

    Atom at each maximum y_k with weight -(2/A) prod_i (y_k - x_i) /
    prod_{i != k} (y_k - y_i); the trivial diagram has no interior measure.
    Evaluated by pairing each denominator with a neighbouring numerator
    factor, which is an exact rearrangement of the defining ratio.
    """
    if d.is_trivial:
        raise DiagramError("the trivial diagram has no interior transition measure")
    x = d.minima
    y = d.maxima
    area = d.area
    m = len(y)
    weights = np.empty(m)
    for k in range(m):
        left = (y[k] - x[:k]) / (y[k] - y[:k])
        right = (y[k] - x[k + 2:]) / (y[k] - y[k + 1:])
        core = (y[k] - x[k]) * (x[k + 1] - y[k])
        weights[k] = (2.0 / area) * core * np.prod(left) * np.prod(right)
    return AtomicMeasure(y, weights)


def _interior_atoms_direct(d: RectangularDiagram) -> np.ndarray:
    # Literal ratio-of-products form, kept for the cross-check test.
    x, y, area = d.minima, d.maxima, d.area
    out = np.empty(len(y))
    for k in range(len(y)):
        num = np.prod(y[k] - x)
        den = np.prod(np.delete(y[k] - y, k)) if len(y) > 1 else 1.0
        out[k] = -(2.0 / area) * num / den
    return out


def _exponent_integral(d, x: float, cfg: QuadratureConfig) -> float:
    """Integral of (slope(u) - slope(x)) / (u - x) over the interval."""
    if isinstance(d, SmoothDiagram):
        return difference_quotient_integral(
            d.derivative, None, x, d.interval.as_tuple(), cfg)
    return difference_quotient_integral_step(d.slope_step(), x)


def _check_density_point(d, x: float) -> None:
    a, b = d.interval.a, d.interval.b
    if not a < x < b:
        raise DiagramError(f"density defined only on the open interval ({a}, {b})")


def exterior_density(d, x: float,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Density of the exterior transition measure at x.

    (1/pi) cos(pi w/2) (x-a)^{-(1+w)/2} (b-x)^{-(1-w)/2}
    exp((1/2) * integral of (slope(u)-w)/(u-x)), with w = slope(x).
    Breakpoints of piecewise-linear diagrams are rejected (slope undefined).
    """
    _check_density_point(d, x)
    w = d.slope(x)
    a, b = d.interval.a, d.interval.b
    expo = _exponent_integral(d, x, cfg)
    return ((1.0 / math.pi) * math.cos(0.5 * math.pi * w)
            * (x - a) ** (-0.5 * (1.0 + w)) * (b - x) ** (-0.5 * (1.0 - w))
            * math.exp(0.5 * expo))


def interior_density(d, x: float,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Density of the interior transition measure at x (nontrivial diagrams).

    (2/(pi A)) cos(pi w/2) (x-a)^{(1+w)/2} (b-x)^{(1-w)/2}
    exp(-(1/2) * integral of (slope(u)-w)/(u-x)).
    """
    _check_density_point(d, x)
    area = d.area
    if area <= 0.0:
        raise DiagramError("interior density requires positive area")
    w = d.slope(x)
    a, b = d.interval.a, d.interval.b
    expo = _exponent_integral(d, x, cfg)
    return ((2.0 / (math.pi * area)) * math.cos(0.5 * math.pi * w)
            * (x - a) ** (0.5 * (1.0 + w)) * (b - x) ** (0.5 * (1.0 - w))
            * math.exp(-0.5 * expo))


def _density_pieces(d, kind: str) -> tuple[list[float], list[tuple[float, float]]]:
    """Split points and per-piece edge exponents for integrating a density.

    At the interval ends the exponents are -(1 +- w)/2 (negated for the
    interior walk); at an interior slope jump of size j the density behaves
    like |x - t|^{-j/2} (exterior) or |x - t|^{+j/2} (interior).
    """
    a, b = d.interval.a, d.interval.b
    sgn = -1.0 if kind == "exterior" else 1.0
    if isinstance(d, SmoothDiagram):
        alpha = sgn * 0.5 * (1.0 + d.slope(a))
        beta = sgn * 0.5 * (1.0 - d.slope(b))
        return [a, b], [(alpha, beta)]
    bx, _ = d.graph_breakpoints()
    slopes = d.segment_slopes
    points = [a]
    exps: list[tuple[float, float]] = []
    left_exp = sgn * 0.5 * (1.0 + slopes[0])
    for i in range(len(slopes) - 1):
        jump = slopes[i + 1] - slopes[i]
        if jump == 0.0:
            continue
        points.append(float(bx[i + 1]))
        exps.append((left_exp, sgn * 0.5 * jump))
        left_exp = sgn * 0.5 * jump
    points.append(b)
    exps.append((left_exp, sgn * 0.5 * (1.0 - slopes[-1])))
    return points, exps


def _integrate_density(d, kind: str, fn: Callable[[float], float] | None,
                       cfg: QuadratureConfig,
                       upto: float | None = None) -> float:
    """Integral of density(x) * fn(x) over [a, upto] with singular handling."""
    dens = exterior_density if kind == "exterior" else interior_density
    points, exps = _density_pieces(d, kind)
    total = 0.0
    for (lo, hi), (alo, ahi) in zip(zip(points[:-1], points[1:]), exps):
        if upto is not None:
            if lo >= upto:
                break
            if hi > upto:
                hi, ahi = upto, 0.0
        f = (lambda x: dens(d, x, cfg)) if fn is None else \
            (lambda x: dens(d, x, cfg) * fn(x))
        total += integrate_endpoint_singular(f, (lo, hi), alo, ahi, cfg)
    return total


def exterior_mass(d, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Total mass of the exterior density (1 when the formulas are right)."""
    return _integrate_density(d, "exterior", None, cfg)


def interior_mass(d, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Total mass of the interior density."""
    return _integrate_density(d, "interior", None, cfg)


@dataclass(frozen=True)
class DensityGrid:
    """Density sampled on interior grid points, with its analytic structure.

    Besides the open-interval samples this records the two endpoint exponents
    and any interior singular points (slope-jump locations with their local
    exponents), so that integration and inversion can factor the algebraic
    behaviour out and interpolate only the smooth remainder.
    """

    grid: np.ndarray
    values: np.ndarray
    interval: Interval
    kind: str
    alpha: float
    beta: float
    singular_points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float).copy()
        vals = np.asarray(self.values, dtype=float).copy()
        if grid.shape != vals.shape or grid.ndim != 1 or len(grid) < 2:
            raise ValueError("grid and values must be matching 1-d arrays")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must strictly increase")
        a, b = self.interval.a, self.interval.b
        if grid[0] <= a or grid[-1] >= b:
            raise ValueError("grid points must lie strictly inside the interval")
        if np.any(vals < 0):
            raise ValueError("density values must be nonnegative")
        if self.kind not in ("exterior", "interior"):
            raise ValueError(f"kind must be exterior|interior, got {self.kind}")
        grid.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "singular_points",
                           tuple((float(t), float(g))
                                 for t, g in self.singular_points))
        object.__setattr__(self, "_smooth", vals / self._weight(grid))

    def _weight(self, u):
        us = np.asarray(u, dtype=float)
        a, b = self.interval.a, self.interval.b
        w = (us - a) ** self.alpha * (b - us) ** self.beta
        for t, g in self.singular_points:
            w = w * np.abs(us - t) ** g
        return w

    def value_at(self, u):
        """Density at u: algebraic weight times interpolated smooth part."""
        us = np.asarray(u, dtype=float)
        smooth = np.interp(us, self.grid, self._smooth)
        out = self._weight(us) * smooth
        return float(out) if np.ndim(u) == 0 else out

    def _pieces(self, extra: Sequence[float] = ()) -> list[tuple[float, float, float, float]]:
        """(lo, hi, exponent_lo, exponent_hi) pieces covering [a, b]."""
        a, b = self.interval.a, self.interval.b
        exps = {a: self.alpha, b: self.beta}
        for t, g in self.singular_points:
            exps[t] = g
        cuts = sorted(set([a, b, *(t for t, _ in self.singular_points),
                           *map(float, extra)]))
        return [(lo, hi, exps.get(lo, 0.0), exps.get(hi, 0.0))
                for lo, hi in zip(cuts[:-1], cuts[1:])]

    def integrate(self, fn: Callable[[float], float] | None = None,
                  lo: float | None = None, hi: float | None = None,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
        """Integral of density * fn over [lo, hi] (default: whole interval)."""
        a, b = self.interval.a, self.interval.b
        lo = a if lo is None else max(lo, a)
        hi = b if hi is None else min(hi, b)
        total = 0.0
        for plo, phi, elo, ehi in self._pieces(extra=[lo, hi]):
            if phi <= lo or plo >= hi:
                continue
            f = self.value_at if fn is None else \
                (lambda u: self.value_at(u) * fn(u))
            total += integrate_endpoint_singular(f, (plo, phi), elo, ehi, cfg)
        return total

    def mass(self, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
        return self.integrate(cfg=cfg)

    def moment(self, n: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
        return self.integrate(lambda u: u ** n, cfg=cfg)

    def hilbert_offset(self, x: float,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
        """Integral of (density(u) - density(x)) / (u - x) over [a, b]."""
        a, b = self.interval.a, self.interval.b
        if not a < x < b:
            raise ValueError(f"x={x} must lie inside ({a}, {b})")
        gx = self.value_at(x)

        def f(u: float) -> float:
            du = u - x
            if du == 0.0:
                return 0.0
            return (self.value_at(u) - gx) / du

        total = 0.0
        for plo, phi, elo, ehi in self._pieces(extra=[x]):
            total += integrate_endpoint_singular(f, (plo, phi), elo, ehi, cfg)
        return total


def density_grid(d, kind: str, num: int,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> DensityGrid:
    """Sample the analytic density on ``num`` midpoints of [a, b].

    Grid points colliding with slope breakpoints are nudged by a quarter
    spacing.  The grid records endpoint exponents and interior slope-jump
    singularities so downstream integration stays accurate.
    """
    a, b = d.interval.a, d.interval.b
    spacing = (b - a) / num
    grid = a + spacing * (np.arange(num) + 0.5)
    points, exps = _density_pieces(d, kind)
    interior_cuts = points[1:-1]
    for t in interior_cuts:
        hits = np.nonzero(grid == t)[0]
        grid[hits] += 0.25 * spacing
    dens = exterior_density if kind == "exterior" else interior_density
    values = np.array([dens(d, float(x), cfg) for x in grid])
    alpha = exps[0][0]
    beta = exps[-1][1]
    sing = tuple((t, exps[i][1]) for i, t in enumerate(interior_cuts))
    return DensityGrid(grid, values, d.interval, kind, alpha, beta, sing)


def density_cdf(d, kind: str, xs,
                cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> np.ndarray:
    """Analytic-density CDF evaluated at sorted points xs."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(np.diff(xs) < 0):
        raise ValueError("xs must be sorted")
    out = np.empty_like(xs)
    prev_x = d.interval.a
    acc = 0.0
    for i, x in enumerate(xs):
        x = min(max(x, d.interval.a), d.interval.b)
        if x > prev_x:
            acc += _integrate_density_between(d, kind, prev_x, x, cfg)
            prev_x = x
        out[i] = acc
    return out


def _integrate_density_between(d, kind: str, lo: float, hi: float,
                               cfg: QuadratureConfig) -> float:
    dens = exterior_density if kind == "exterior" else interior_density
    points, exps = _density_pieces(d, kind)
    exp_at = {points[0]: exps[0][0], points[-1]: exps[-1][1]}
    for i, t in enumerate(points[1:-1]):
        exp_at[t] = exps[i][1]
    cuts = sorted(set([lo, hi, *(p for p in points if lo < p < hi)]))
    total = 0.0
    for plo, phi in zip(cuts[:-1], cuts[1:]):
        total += integrate_endpoint_singular(
            lambda x: dens(d, x, cfg), (plo, phi),
            exp_at.get(plo, 0.0), exp_at.get(phi, 0.0), cfg)
    return total


# ---------------------------------------------------------------------------
# Cauchy-transform identities (charge vs measure)


def _charge_cauchy_integral(d, x: float, cfg: QuadratureConfig) -> float:
    """Integral over the real line of d(charge)/(t - x).

    The charge density is (slope(t) - sgn(t))/2, which vanishes wherever the
    diagram follows the cone on the same side of the origin; the integrand is
    supported on [min(a, 0), max(b, 0)].
    """
    a, b, z = d.interval.a, d.interval.b, d.center

    def piece_const(lo: float, hi: float, slope: float, sg: float) -> float:
        c = 0.5 * (slope - sg)
        if c == 0.0 or hi <= lo:
            return 0.0
        return c * (math.log(abs(hi - x)) - math.log(abs(lo - x)))

    total = 0.0
    # Cone stretches between the support and the origin.
    if a > 0.0:
        total += piece_const(0.0, a, -1.0, 1.0)
    if b < 0.0:
        total += piece_const(b, 0.0, 1.0, -1.0)
    cuts = sorted(set([a, b, *([0.0] if a < 0.0 < b else [])]))
    if isinstance(d, SmoothDiagram):
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            sg = 1.0 if lo >= 0.0 else -1.0
            total += integrate_endpoint_singular(
                lambda t: 0.5 * (d.slope(t) - sg) / (t - x), (lo, hi),
                0.0, 0.0, cfg)
    else:
        bx, _ = d.graph_breakpoints()
        slopes = d.segment_slopes
        for i, (lo, hi) in enumerate(zip(bx[:-1], bx[1:])):
            if lo < 0.0 < hi:
                total += piece_const(float(lo), 0.0, float(slopes[i]), -1.0)
                total += piece_const(0.0, float(hi), float(slopes[i]), 1.0)
            else:
                sg = 1.0 if lo >= 0.0 else -1.0
                total += piece_const(float(lo), float(hi), float(slopes[i]), sg)
    return total


def _measure_cauchy_transform(d, kind: str, x: float,
                              cfg: QuadratureConfig) -> float:
    """Integral of measure-density/(x - t); atoms for rectangular diagrams."""
    if isinstance(d, RectangularDiagram):
        m = exterior_atoms(d) if kind == "exterior" else interior_atoms(d)
        return m.cauchy_transform(x)
    return _integrate_density(d, kind, lambda t: 1.0 / (x - t), cfg)


def cauchy_identity_residual(d, x_outside: float, kind: str,
                             cfg: QuadratureConfig = DEFAULT_QUADRATURE
                             ) -> tuple[float, float]:
    """Both sides of the charge/measure Cauchy identity at a point off [a, b].

    exterior:  integral d_mu(t)/(x-t)  vs  (1/x) exp(+integral d_sigma/(t-x))
    interior:  -(A/2) integral d_nu(t)/(x-t) + x - z  vs
               x exp(-integral d_sigma/(t-x))
    Returns (measure side, charge side).
    """
    a, b = d.interval.a, d.interval.b
    if a <= x_outside <= b:
        raise DiagramError(f"x={x_outside} must lie outside [{a}, {b}]")
    if kind not in ("exterior", "interior"):
        raise ValueError(f"kind must be exterior|interior, got {kind}")
    charge = _charge_cauchy_integral(d, x_outside, cfg)
    if kind == "exterior":
        lhs = _measure_cauchy_transform(d, "exterior", x_outside, cfg)
        rhs = math.exp(charge) / x_outside
    else:
        area = d.area
        if area <= 0.0:
            raise DiagramError("interior identity requires positive area")
        cauchy = _measure_cauchy_transform(d, "interior", x_outside, cfg)
        lhs = -0.5 * area * cauchy + x_outside - d.center
        rhs = x_outside * math.exp(-charge)
    return lhs, rhs


# ---------------------------------------------------------------------------
# Unrotated coordinates


def _unrotated_exponent_integral(f: UnrotatedDiagram, x: float,
                                 lo: float, hi: float,
                                 cfg: QuadratureConfig) -> float:
    """Integral of (f'(u) - f'(x)) / ((1 + f'(x)) (u - x + f(u) - f(x)))."""
    fx = f.evaluate(x)
    fpx = f.slope(x)
    scale = 1.0 + fpx

    def integrand(u: float) -> float:
        du = u - x
        if du == 0.0:
            return 0.0
        return (f.slope(u) - fpx) / (scale * (du + f.evaluate(u) - fx))

    from .numerics import _tanh_sinh
    if lo < x < hi:
        return _tanh_sinh(integrand, lo, x, cfg) + _tanh_sinh(integrand, x, hi, cfg)
    return _tanh_sinh(integrand, lo, hi, cfg)


def exterior_density_unrotated(f: UnrotatedDiagram, x: float,
                               cfg: QuadratureConfig = DEFAULT_QUADRATURE
                               ) -> float:
    """Exterior transition density for an increasing diagram f.

    (1/pi)(1+f') sin(pi/(1+f')) (x-a+f(x))^{-f'/(1+f')}
    (b-x+f(b)-f(x))^{-1/(1+f')} exp(+J), where J is the unrotated
    difference-quotient exponent integral.  Equals the rotated density times
    the Jacobian (1 + f'(x))/sqrt(2).
    """
    a, b = f.interval.a, f.interval.b
    if not a < x < b:
        raise DiagramError(f"density defined only inside ({a}, {b})")
    fp = f.slope(x)
    fx = f.evaluate(x)
    r = 1.0 + fp
    expo = _unrotated_exponent_integral(f, x, a, b, cfg)
    return ((1.0 / math.pi) * r * math.sin(math.pi / r)
            * (x - a + fx) ** (-fp / r)
            * (b - x + f.top - fx) ** (-1.0 / r)
            * math.exp(expo))


def interior_density_unrotated(f: UnrotatedDiagram, x: float,
                               cfg: QuadratureConfig = DEFAULT_QUADRATURE
                               ) -> float:
    """Interior transition density for an increasing diagram f.

    (1/(pi A))(1+f') sin(pi/(1+f')) (x-a+f(x))^{+f'/(1+f')}
    (b-x+f(b)-f(x))^{+1/(1+f')} exp(-J) with A the area under f.  Equals the
    rotated interior density times the Jacobian (1 + f'(x))/sqrt(2).
    """
    a, b = f.interval.a, f.interval.b
    if not a < x < b:
        raise DiagramError(f"density defined only inside ({a}, {b})")
    area = f.area
    fp = f.slope(x)
    fx = f.evaluate(x)
    r = 1.0 + fp
    expo = _unrotated_exponent_integral(f, x, a, b, cfg)
    return ((1.0 / (math.pi * area)) * r * math.sin(math.pi / r)
            * (x - a + fx) ** (fp / r)
            * (b - x + f.top - fx) ** (1.0 / r)
            * math.exp(-expo))


def started_interior_density(f: UnrotatedDiagram, s: float, t: float, x: float,
                             cfg: QuadratureConfig = DEFAULT_QUADRATURE
                             ) -> float:
    """Limit density of the interior walk started from the point (s, t).

    Supported on (f_inverse(t), s):
    (1/pi)(1+f') sin(pi/(1+f')) (x - f^{-1}(t) + f(x) - t)^{-1/(1+f')}
    (s - x + f(s) - f(x))^{-f'/(1+f')} exp(-J over [f^{-1}(t), s]).
    """
    a, b = f.interval.a, f.interval.b
    if not (a <= s <= b and -1e-12 <= t <= f.evaluate(s) + 1e-12):
        raise DiagramError(f"start ({s}, {t}) is not in the diagram's domain")
    left = f.f_inverse(t)
    if not left < x < s:
        raise DiagramError(f"x={x} outside the support ({left}, {s})")
    fp = f.slope(x)
    fx = f.evaluate(x)
    r = 1.0 + fp
    expo = _unrotated_exponent_integral(f, x, left, s, cfg)
    return ((1.0 / math.pi) * r * math.sin(math.pi / r)
            * (x - left + fx - t) ** (-1.0 / r)
            * (s - x + f.evaluate(s) - fx) ** (-fp / r)
            * math.exp(-expo))
