"""Continual Young diagram representations and conversions.

A (rotated) diagram is a 1-Lipschitz function on an interval [a, b] whose
graph hinges on the cone x -> |x - z| at both ends (a + value(a) = b -
value(b) = ... defines the center z); outside [a, b] every diagram equals the
cone.  Four concrete families are provided: rectangular (slopes exactly +-1,
encoded by interlacing minima/maxima), piecewise linear with slopes strictly
inside (-1, 1), smooth (caller-supplied evaluator and derivative), and
unrotated (increasing functions f with f(a) = 0, relating to rotated diagrams
through the 45-degree change of variables).

All diagrams are immutable after validated construction and safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    StepFunction,
    integrate_endpoint_singular,
)

__all__ = [
    "DiagramError",
    "Interval",
    "RectangularDiagram",
    "PiecewiseLinearDiagram",
    "ConstantSlopeDiagram",
    "SmoothDiagram",
    "UnrotatedDiagram",
    "UnrotatedPolyDiagram",
    "constant_slope_diagram",
    "trivial_diagram",
    "rotate",
    "unrotate",
    "rectangular_approximation",
    "step_approximation",
    "parse_diagram",
    "serialize_diagram",
]

HINGE_TOL = 1e-12
_SQRT2 = math.sqrt(2.0)


class DiagramError(ValueError):
    """Invalid diagram data or an operation outside a diagram's domain."""


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise DiagramError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    def as_tuple(self) -> tuple[float, float]:
        return (self.a, self.b)


def _readonly(arr) -> np.ndarray:
    out = np.asarray(arr, dtype=float)
    out = out.copy()
    out.flags.writeable = False
    return out


class _PiecewiseGraph:
    """Shared behaviour for diagrams with an explicit breakpoint graph."""

    # subclasses set: interval, _bx (breakpoint abscissae covering [a, b]),
    # _bv (values there), center

    def evaluate(self, x):
        """Diagram value at x; outside [a, b] this is |x - center|."""
        xs = np.asarray(x, dtype=float)
        inside = (xs >= self.interval.a) & (xs <= self.interval.b)
        vals = np.where(inside, np.interp(xs, self._bx, self._bv),
                        np.abs(xs - self.center))
        return float(vals) if np.ndim(x) == 0 else vals

    def graph_breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Abscissae and values of the graph's breakpoints over [a, b]."""
        return self._bx, self._bv

    @cached_property
    def segment_slopes(self) -> np.ndarray:
        return _readonly(np.diff(self._bv) / np.diff(self._bx))

    def slope(self, x: float) -> float:
        """One-sided-free derivative; raises at breakpoints where undefined."""
        a, b = self.interval.a, self.interval.b
        if x < a or x > b:
            if x == self.center:
                raise DiagramError(f"slope undefined at the cone apex {x}")
            return math.copysign(1.0, x - self.center)
        idx = np.searchsorted(self._bx, x)
        if idx < len(self._bx) and self._bx[idx] == x and 0 < idx < len(self._bx) - 1:
            left = self.segment_slopes[idx - 1]
            right = self.segment_slopes[idx]
            if left != right:
                raise DiagramError(f"slope undefined at breakpoint x={x}")
            return float(left)
        if x == self._bx[0]:
            return float(self.segment_slopes[0])
        if x == self._bx[-1]:
            return float(self.segment_slopes[-1])
        return float(self.segment_slopes[np.searchsorted(self._bx, x) - 1])

    def slope_step(self) -> StepFunction:
        """The derivative as a step function over [a, b]."""
        return StepFunction(self._bx, self.segment_slopes)

    @cached_property
    def area(self) -> float:
        """Integral of evaluate(x) - |x - z| over [a, b]."""
        bx, bv = self._bx, self._bv
        omega = float(np.sum(0.5 * (bv[1:] + bv[:-1]) * np.diff(bx)))
        a, b, z = self.interval.a, self.interval.b, self.center
        cone = 0.5 * ((z - a) ** 2 + (b - z) ** 2)
        return omega - cone


class RectangularDiagram(_PiecewiseGraph):
    """Diagram with slopes exactly +-1, given by interlacing extrema.

    ``minima`` x_1 < ... < x_n and ``maxima`` y_1 < ... < y_{n-1} must
    strictly interlace.  n = 1 is the trivial diagram x -> |x - z|.  The
    interval defaults to the support hull [x_1, x_n] (padded for the trivial
    diagram) and may be any superset of it.
    """

    def __init__(self, minima: Sequence[float], maxima: Sequence[float],
                 interval: Interval | tuple[float, float] | None = None):
        minima = _readonly(minima)
        maxima = _readonly(maxima)
        n = len(minima)
        if n < 1:
            raise DiagramError("need at least one minimum")
        if len(maxima) != n - 1:
            raise DiagramError(
                f"need exactly {n - 1} maxima for {n} minima, got {len(maxima)}")
        inter = np.empty(2 * n - 1)
        inter[0::2] = minima
        inter[1::2] = maxima
        if not np.all(np.diff(inter) > 0):
            raise DiagramError("minima and maxima must strictly interlace")
        z = math.fsum(minima) - math.fsum(maxima)
        if interval is None:
            if n == 1:
                interval = Interval(z - 1.0, z + 1.0)
            else:
                interval = Interval(float(minima[0]), float(minima[-1]))
        elif not isinstance(interval, Interval):
            interval = Interval(float(interval[0]), float(interval[1]))
        if interval.a > minima[0] or interval.b < minima[-1]:
            raise DiagramError("interval must contain all extrema")
        self.minima = minima
        self.maxima = maxima
        self.interval = interval
        self.center = z

        # Values at the extrema by slope-(+-1) propagation from the cone.
        core_x = inter
        signed = np.diff(core_x)
        signed[1::2] *= -1.0  # rise to each maximum, fall to the next minimum
        core_v = (z - core_x[0]) + np.concatenate([[0.0], np.cumsum(signed)])
        bx = [core_x]
        bv = [core_v]
        if interval.a < core_x[0]:
            bx.insert(0, [interval.a])
            bv.insert(0, [z - interval.a])
        if interval.b > core_x[-1]:
            bx.append([interval.b])
            bv.append([interval.b - z])
        self._bx = _readonly(np.concatenate(bx))
        self._bv = _readonly(np.concatenate(bv))

    @property
    def n(self) -> int:
        return len(self.minima)

    @property
    def is_trivial(self) -> bool:
        return len(self.minima) == 1

    @cached_property
    def area(self) -> float:
        # 2 * sum_{j <= k} (y_j - x_j)(x_{k+1} - y_k), exact for rectangular.
        x, y = self.minima, self.maxima
        rises = y - x[:-1]
        falls = x[1:] - y
        return 2.0 * float(np.cumsum(rises) @ falls)

    def extremum_values(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagram values at (minima, maxima)."""
        vals = np.interp(np.concatenate([self.minima, self.maxima]),
                         self._bx, self._bv)
        return vals[:len(self.minima)], vals[len(self.minima):]

    def __repr__(self) -> str:
        return (f"RectangularDiagram(minima={self.minima.tolist()}, "
                f"maxima={self.maxima.tolist()}, interval={self.interval})")


def trivial_diagram(center: float = 0.0,
                    interval: Interval | tuple[float, float] | None = None
                    ) -> RectangularDiagram:
    """The diagram x -> |x - center|."""
    return RectangularDiagram([center], [], interval)


class PiecewiseLinearDiagram(_PiecewiseGraph):
    """Piecewise-linear diagram with all segment slopes strictly in (-1, 1).

    ``breakpoints`` is an ordered list of (t, value) pairs; the interval is
    [t_0, t_m].  The hinge condition t_0 + v_0 = t_m - v_m must hold to
    1e-12 and every breakpoint must lie on or above the cone.
    """

    def __init__(self, breakpoints: Sequence[tuple[float, float]]):
        pts = np.asarray(breakpoints, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise DiagramError("need at least two (t, value) breakpoints")
        t = pts[:, 0]
        v = pts[:, 1]
        if not np.all(np.diff(t) > 0):
            raise DiagramError("breakpoint abscissae must strictly increase")
        slopes = np.diff(v) / np.diff(t)
        if not np.all(np.abs(slopes) < 1.0):
            raise DiagramError(
                f"segment slopes must lie strictly inside (-1, 1); got "
                f"extremes [{slopes.min()}, {slopes.max()}]")
        z = t[0] + v[0]
        hinge = abs(z - (t[-1] - v[-1]))
        if hinge > HINGE_TOL:
            raise DiagramError(
                f"hinge condition violated by {hinge:.3e} (> {HINGE_TOL})")
        if np.any(v < np.abs(t - z) - HINGE_TOL):
            raise DiagramError("diagram dips below the cone |x - z|")
        self.interval = Interval(float(t[0]), float(t[-1]))
        self.center = float(z)
        self._bx = _readonly(t)
        self._bv = _readonly(v)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.column_stack([self._bx, self._bv])

    def __repr__(self) -> str:
        return f"PiecewiseLinearDiagram({self.breakpoints.tolist()})"


class ConstantSlopeDiagram(PiecewiseLinearDiagram):
    """Single-segment diagram of constant slope c on a given interval.

    The hinge pins the end values: value(a) = (b - a)(1 - c)/2.
    """

    def __init__(self, slope: float, interval: Interval | tuple[float, float]):
        if not isinstance(interval, Interval):
            interval = Interval(float(interval[0]), float(interval[1]))
        if not -1.0 < slope < 1.0:
            raise DiagramError(f"slope must be in (-1, 1), got {slope}")
        a, b = interval.a, interval.b
        va = 0.5 * (b - a) * (1.0 - slope)
        vb = va + slope * (b - a)
        self.constant_slope = float(slope)
        super().__init__([(a, va), (b, vb)])


def constant_slope_diagram(slope: float,
                           interval: Interval | tuple[float, float]
                           ) -> ConstantSlopeDiagram:
    return ConstantSlopeDiagram(slope, interval)


def _probe_points(a: float, b: float, n: int = 513) -> np.ndarray:
    return np.linspace(a, b, n)


class SmoothDiagram:
    """Diagram given by an evaluator and its exact derivative.

    ``slope_bounds`` = (c1, c2) with -1 < c1 <= c2 < 1 must bound the
    derivative everywhere; this is verified on a probe grid along with the
    hinge condition and the cone inequality.  No numerical differentiation
    happens anywhere: the caller owns the derivative's accuracy.
    """

    def __init__(self, evaluator: Callable, derivative: Callable,
                 interval: Interval | tuple[float, float],
                 slope_bounds: tuple[float, float]):
        if not isinstance(interval, Interval):
            interval = Interval(float(interval[0]), float(interval[1]))
        c1, c2 = float(slope_bounds[0]), float(slope_bounds[1])
        if not (-1.0 < c1 <= c2 < 1.0):
            raise DiagramError(
                f"slope bounds must satisfy -1 < c1 <= c2 < 1, got ({c1}, {c2})")
        a, b = interval.a, interval.b
        z = a + float(evaluator(a))
        hinge = abs(z - (b - float(evaluator(b))))
        if hinge > HINGE_TOL:
            raise DiagramError(
                f"hinge condition violated by {hinge:.3e} (> {HINGE_TOL})")
        probes = _probe_points(a, b)
        dv = np.asarray(derivative(probes), dtype=float)
        slack = 1e-9
        if np.any(dv < c1 - slack) or np.any(dv > c2 + slack):
            raise DiagramError(
                f"derivative leaves [{c1}, {c2}] on probe grid: "
                f"range [{dv.min()}, {dv.max()}]")
        vals = np.asarray(evaluator(probes), dtype=float)
        if np.any(vals < np.abs(probes - z) - 1e-9):
            raise DiagramError("diagram dips below the cone |x - z| on probes")
        self.evaluator = evaluator
        self.derivative = derivative
        self.interval = interval
        self.slope_bounds = (c1, c2)
        self.center = z

    def evaluate(self, x):
        xs = np.asarray(x, dtype=float)
        inside = (xs >= self.interval.a) & (xs <= self.interval.b)
        clipped = np.clip(xs, self.interval.a, self.interval.b)
        vals = np.where(inside, self.evaluator(clipped), np.abs(xs - self.center))
        return float(vals) if np.ndim(x) == 0 else vals

    def slope(self, x: float) -> float:
        a, b = self.interval.a, self.interval.b
        if x < a or x > b:
            if x == self.center:
                raise DiagramError(f"slope undefined at the cone apex {x}")
            return math.copysign(1.0, x - self.center)
        return float(self.derivative(x))

    def graph_breakpoints(self):
        return None

    @cached_property
    def area(self) -> float:
        a, b, z = self.interval.a, self.interval.b, self.center
        gap = lambda x: self.evaluate(x) - abs(x - z)
        cfg = DEFAULT_QUADRATURE
        if a < z < b:
            return (integrate_endpoint_singular(gap, (a, z), cfg=cfg)
                    + integrate_endpoint_singular(gap, (z, b), cfg=cfg))
        return integrate_endpoint_singular(gap, (a, b), cfg=cfg)


class UnrotatedDiagram:
    """Increasing function f on [a, b] with f(a) = 0, given with derivative.

    ``derivative_bounds`` = (m, M) with 0 < m <= M < inf must bound f'
    everywhere (probe-checked).  ``f_inverse`` solves f by bisection, which is
    well posed because f' >= m > 0.
    """

    def __init__(self, evaluator: Callable, derivative: Callable,
                 interval: Interval | tuple[float, float],
                 derivative_bounds: tuple[float, float]):
        if not isinstance(interval, Interval):
            interval = Interval(float(interval[0]), float(interval[1]))
        m, big = float(derivative_bounds[0]), float(derivative_bounds[1])
        if not (0.0 < m <= big < math.inf):
            raise DiagramError(
                f"derivative bounds must satisfy 0 < m <= M < inf, got ({m}, {big})")
        a, b = interval.a, interval.b
        fa = float(evaluator(a))
        if abs(fa) > 1e-12 * max(1.0, abs(float(evaluator(b)))):
            raise DiagramError(f"f(a) must vanish, got {fa}")
        probes = _probe_points(a, b)
        dv = np.asarray(derivative(probes), dtype=float)
        slack = 1e-9 * max(1.0, big)
        if np.any(dv < m - slack) or np.any(dv > big + slack):
            raise DiagramError(
                f"derivative leaves [{m}, {big}] on probe grid: "
                f"range [{dv.min()}, {dv.max()}]")
        self.evaluator = evaluator
        self.derivative = derivative
        self.interval = interval
        self.derivative_bounds = (m, big)

    def evaluate(self, x):
        vals = self.evaluator(np.asarray(x, dtype=float))
        return float(vals) if np.ndim(x) == 0 else np.asarray(vals, dtype=float)

    def slope(self, x):
        vals = self.derivative(np.asarray(x, dtype=float))
        return float(vals) if np.ndim(x) == 0 else np.asarray(vals, dtype=float)

    @property
    def top(self) -> float:
        return self.evaluate(self.interval.b)

    def f_inverse(self, y, tol: float = 1e-13):
        """Solve f(x) = y on [a, b] by bisection (vectorized)."""
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        lo = np.full_like(ys, self.interval.a)
        hi = np.full_like(ys, self.interval.b)
        span = self.interval.width
        steps = max(10, int(math.ceil(math.log2(span / tol))) + 2)
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.evaluator(mid)) < ys
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        return float(out[0]) if np.ndim(y) == 0 else out

    @cached_property
    def area(self) -> float:
        """Integral of f over [a, b] (the domain's area)."""
        return integrate_endpoint_singular(
            lambda x: self.evaluate(x), self.interval.as_tuple())


class UnrotatedPolyDiagram(UnrotatedDiagram):
    """Unrotated diagram defined by polynomial coefficients (ascending)."""

    def __init__(self, coeffs: Sequence[float],
                 interval: Interval | tuple[float, float]):
        poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        dpoly = poly.deriv()
        if not isinstance(interval, Interval):
            interval = Interval(float(interval[0]), float(interval[1]))
        probes = _probe_points(interval.a, interval.b, 2049)
        dv = dpoly(probes)
        self.coeffs = _readonly(coeffs)
        super().__init__(poly, dpoly, interval,
                         (float(dv.min()), float(dv.max())))


def _bisect_increasing(fn: Callable, target, lo: float, hi: float,
                       tol: float = 1e-13):
    """Solve fn(x) = target for increasing fn, vectorized over target."""
    ts = np.atleast_1d(np.asarray(target, dtype=float))
    los = np.full_like(ts, lo)
    his = np.full_like(ts, hi)
    steps = max(10, int(math.ceil(math.log2(max(hi - lo, tol) / tol))) + 2)
    for _ in range(steps):
        mid = 0.5 * (los + his)
        below = np.asarray(fn(mid)) < ts
        los = np.where(below, mid, los)
        his = np.where(below, his, mid)
    out = 0.5 * (los + his)
    return float(out[0]) if np.ndim(target) == 0 else out


def rotate(f: UnrotatedDiagram) -> SmoothDiagram:
    """Rotated view of an unrotated diagram.

    The change of variables t = (x + f(x))/sqrt(2) maps [a, b] to
    [a/sqrt(2), (b + f(b))/sqrt(2)], with value (f(x) + b - x)/sqrt(2) and
    slope 1 - 2/(1 + f'(x)); t(x) is inverted by bisection to 1e-13.
    """
    a, b = f.interval.a, f.interval.b
    fb = f.evaluate(b)
    ta = a / _SQRT2
    tb = (b + fb) / _SQRT2

    def x_of_t(t):
        return _bisect_increasing(
            lambda x: (x + f.evaluate(x)) / _SQRT2, t, a, b)

    def evaluator(t):
        x = x_of_t(t)
        return (f.evaluate(x) + b - x) / _SQRT2

    def derivative(t):
        x = x_of_t(t)
        return 1.0 - 2.0 / (1.0 + f.slope(x))

    m, big = f.derivative_bounds
    c1 = (m - 1.0) / (m + 1.0)
    c2 = (big - 1.0) / (big + 1.0)
    return SmoothDiagram(evaluator, derivative, (ta, tb), (c1, c2))


def unrotate(d: SmoothDiagram) -> UnrotatedDiagram:
    """Inverse of :func:`rotate`; requires slope bounds strictly inside (-1, 1)."""
    ta, tb = d.interval.a, d.interval.b
    b_un = _SQRT2 * d.center
    a_un = _SQRT2 * ta

    def t_of_x(x):
        return _bisect_increasing(
            lambda t: (t - d.evaluate(t)) * _SQRT2, 2.0 * np.asarray(x) - b_un,
            ta, tb)

    def evaluator(x):
        t = t_of_x(x)
        return _SQRT2 * t - np.asarray(x, dtype=float)

    def derivative(x):
        t = t_of_x(x)
        w = np.asarray(d.derivative(t), dtype=float)
        return 2.0 / (1.0 - w) - 1.0

    c1, c2 = d.slope_bounds
    m = 2.0 / (1.0 - c1) - 1.0
    big = 2.0 / (1.0 - c2) - 1.0
    return UnrotatedDiagram(evaluator, derivative, (a_un, b_un), (m, big))


def rectangular_approximation(d: PiecewiseLinearDiagram,
                              n: int) -> RectangularDiagram:
    """Rectangular diagram interpolating d at n-equipartitions of each segment.

    Minima sit at the equipartition points with d's values there; each maximum
    is the meeting point of the slope +1 / slope -1 lines through consecutive
    minima, i.e. midpoint + (segment width) * slope / (2n) within a segment.
    """
    if n < 1:
        raise DiagramError(f"n must be >= 1, got {n}")
    bx, bv = d.graph_breakpoints()
    xs: list[np.ndarray] = []
    for left, right in zip(bx[:-1], bx[1:]):
        pts = left + (right - left) * np.arange(n) / n
        xs.append(pts)
    xs.append(np.array([bx[-1]]))
    minima = np.concatenate(xs)
    values = np.interp(minima, bx, bv)
    maxima = 0.5 * (minima[:-1] + minima[1:]) + 0.5 * (values[1:] - values[:-1])
    return RectangularDiagram(minima, maxima, d.interval)


def step_approximation(g: Callable, interval: Interval | tuple[float, float],
                       n: int, pieces: Sequence[float] | None = None
                       ) -> StepFunction:
    """Piecewise-constant approximation of g by cell averages.

    Each smoothness piece (default: the whole interval) is split into 2^n
    equal cells; the value on a cell is the average of g there, computed with
    a fixed 5-point Gauss rule.
    """
    if n < 0:
        raise DiagramError(f"n must be >= 0, got {n}")
    if isinstance(interval, Interval):
        a, b = interval.a, interval.b
    else:
        a, b = float(interval[0]), float(interval[1])
    if pieces is None:
        bounds = np.array([a, b])
    else:
        bounds = np.asarray(sorted(set([a, b, *map(float, pieces)])))
        if bounds[0] != a or bounds[-1] != b:
            raise DiagramError("pieces must lie inside the interval")
    nodes, weights = np.polynomial.legendre.leggauss(5)
    edges_all: list[float] = [float(bounds[0])]
    vals: list[float] = []
    for left, right in zip(bounds[:-1], bounds[1:]):
        cells = np.linspace(left, right, 2 ** n + 1)
        for lo, hi in zip(cells[:-1], cells[1:]):
            mid = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo)
            avg = float(np.dot(weights, np.asarray(g(mid + half * nodes),
                                                   dtype=float))) / 2.0
            vals.append(avg)
            edges_all.append(float(hi))
    return StepFunction(np.array(edges_all), np.array(vals))


# ---------------------------------------------------------------------------
# Diagram spec (de)serialization


def parse_diagram(spec: dict):
    """Build a diagram from its JSON-able spec dict."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DiagramError("diagram spec must be a dict with a 'kind' tag")
    kind = spec["kind"]
    try:
        if kind == "rectangular":
            return RectangularDiagram(spec["minima"], spec["maxima"],
                                      tuple(spec["interval"]))
        if kind == "piecewise_linear":
            return PiecewiseLinearDiagram([tuple(p) for p in spec["breakpoints"]])
        if kind == "constant_slope":
            return ConstantSlopeDiagram(spec["slope"], tuple(spec["interval"]))
        if kind == "unrotated_poly":
            return UnrotatedPolyDiagram(spec["coeffs"], tuple(spec["interval"]))
    except KeyError as exc:
        raise DiagramError(f"spec for kind '{kind}' missing field {exc}") from exc
    raise DiagramError(f"unknown diagram kind '{kind}'")


def serialize_diagram(d) -> dict:
    """Spec dict for a diagram; round-trips bit-identically through parse."""
    if isinstance(d, ConstantSlopeDiagram):
        return {"kind": "constant_slope", "slope": d.constant_slope,
                "interval": [d.interval.a, d.interval.b]}
    if isinstance(d, RectangularDiagram):
        return {"kind": "rectangular", "minima": d.minima.tolist(),
                "maxima": d.maxima.tolist(),
                "interval": [d.interval.a, d.interval.b]}
    if isinstance(d, PiecewiseLinearDiagram):
        return {"kind": "piecewise_linear",
                "breakpoints": [list(p) for p in d.breakpoints.tolist()]}
    if isinstance(d, UnrotatedPolyDiagram):
        return {"kind": "unrotated_poly", "coeffs": d.coeffs.tolist(),
                "interval": [d.interval.a, d.interval.b]}
    raise DiagramError(f"cannot serialize diagrams of type {type(d).__name__}")
