"""Quadrature, bracketed root finding, and partition enumeration.

Every other module consumes these: endpoint-singular integration via a
double-exponential (tanh-sinh) change of variables, difference-quotient
integrals with a removable singularity, Brent root refinement, and integer
partitions as multiplicity maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "BracketError",
    "DEFAULT_QUADRATURE",
    "StepFunction",
    "Partition",
    "integrate_endpoint_singular",
    "difference_quotient_integral",
    "difference_quotient_integral_step",
    "find_root_bracketed",
    "partitions",
]


class QuadratureError(RuntimeError):
    """Adaptive refinement exhausted its level budget.

    ``estimates`` holds the last two refinement values so callers can inspect
    how far apart the final levels were.
    """

    def __init__(self, message: str, estimates: tuple[float, float] | None = None):
        super().__init__(message)
        self.estimates = estimates


class BracketError(ValueError):
    """Root bracket does not straddle a sign change."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    max_levels: int = 12

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol <= 1e-2:
            raise ValueError(f"rel_tol must be in (0, 1e-2], got {self.rel_tol}")
        if not 1 <= self.max_levels <= 20:
            raise ValueError(f"max_levels must be in [1, 20], got {self.max_levels}")


DEFAULT_QUADRATURE = QuadratureConfig()

# Past |t| ~ 6.5 the transformed node distance from the endpoint underflows
# along with its weight; nothing representable remains out there.
_T_MAX = 6.5
_HALF_PI = math.pi / 2.0


def _tanh_sinh(f: Callable[[float], float], a: float, b: float,
               cfg: QuadratureConfig) -> float:
    """Trapezoid sums of f under x = mid + half*tanh((pi/2) sinh t), h halving."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    if half == 0.0:
        return 0.0

    def contrib(t: float) -> tuple[float, float]:
        s = _HALF_PI * math.sinh(t)
        # sech^2(s) ~ 4 exp(-2|s|) past the overflow range of cosh.
        if abs(s) > 300.0:
            sech2 = 4.0 * math.exp(-2.0 * abs(s))
        else:
            sech2 = 1.0 / math.cosh(s) ** 2
        w = half * _HALF_PI * math.cosh(t) * sech2
        if w == 0.0:
            return 0.0, 0.0
        x = mid + half * math.tanh(s)
        fx = f(x)
        return w * fx, abs(w * fx)

    h = 1.0
    total, l1 = contrib(0.0)
    k = 1
    while k * h <= _T_MAX:
        for t in (k * h, -k * h):
            v, av = contrib(t)
            total += v
            l1 += av
        k += 1
    prev = total * h

    estimate = prev
    for _ in range(cfg.max_levels):
        h *= 0.5
        t = h
        while t <= _T_MAX:
            for tt in (t, -t):
                v, av = contrib(tt)
                total += v
                l1 += av
            t += 2.0 * h
        prev = estimate
        estimate = total * h
        # Noise floor proportional to the L1 mass keeps exact-zero and
        # cancelling integrands from spinning forever.
        if abs(estimate - prev) <= cfg.rel_tol * abs(estimate) + 4e-16 * l1 * h * 2.0:
            return estimate
    raise QuadratureError(
        f"tanh-sinh failed to converge on [{a}, {b}] within "
        f"{cfg.max_levels} levels (last two estimates {prev}, {estimate})",
        estimates=(prev, estimate),
    )


def _singular_half(f: Callable[[float], float], edge: float, inner: float,
                   exponent: float, cfg: QuadratureConfig) -> float:
    """Positively-oriented integral of f over the span between edge and inner.

    f ~ C|x-edge|^exponent near ``edge``.  Substituting x = edge ± u^q with
    q = 1/(1+exponent) bounds the composite integrand; the innermost layer of
    relative width 1e-5, where evaluating f(x) would hit the quantization of
    x-edge, is replaced by a two-term power-law tail fitted from f at depths
    delta and delta/2.
    """
    width = abs(inner - edge)
    if width == 0.0:
        return 0.0
    sign = 1.0 if inner > edge else -1.0
    q = 1.0 / (1.0 + exponent) if exponent < 0.0 else 1.0
    upper = width ** (1.0 / q)
    u_floor = (4.0 * np.finfo(float).eps * max(abs(edge), 1.0)) ** (1.0 / q)

    # Truncate the innermost layer and replace it by a fitted two-term
    # power-law tail: f is never evaluated where x - edge is dominated by
    # quantization, regardless of the exponent's sign.
    delta = 1e-5 * width
    u_low = delta ** (1.0 / q)
    d1, d2 = delta, 0.5 * delta
    f1 = f(edge + sign * d1)
    f2 = f(edge + sign * d2)
    det = d1 ** exponent * d2 ** exponent * (d2 - d1)
    c0 = (f1 * d2 ** (exponent + 1.0) - f2 * d1 ** (exponent + 1.0)) / det
    c1 = (f2 * d1 ** exponent - f1 * d2 ** exponent) / det
    tail = (c0 * delta ** (1.0 + exponent) / (1.0 + exponent)
            + c1 * delta ** (2.0 + exponent) / (2.0 + exponent))

    def composite(u: float) -> float:
        if u < u_floor:
            u = u_floor
        x = edge + sign * u ** q
        if x == edge:
            u = u_floor
            x = edge + sign * u ** q
        return f(x) * q * u ** (q - 1.0)

    return _tanh_sinh(composite, u_low, upper, cfg) + tail


def integrate_endpoint_singular(f: Callable[[float], float],
                                interval: tuple[float, float] | Sequence[float],
                                alpha: float = 0.0,
                                beta: float = 0.0,
                                cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Integrate f over [a, b] allowing integrable endpoint singularities.

    ``alpha`` and ``beta`` are the algebraic exponents of the full integrand
    at a and b: f(x) ~ (x-a)^alpha near a and ~ (b-x)^beta near b.  Both must
    exceed -1; zero (or positive, for integrands vanishing at an endpoint)
    disables the singular handling on that side.
    """
    a, b = float(interval[0]), float(interval[1])
    if not (alpha > -1.0 and beta > -1.0):
        raise ValueError(f"endpoint exponents must be > -1, got {alpha}, {beta}")
    if a == b:
        return 0.0
    if a > b:
        return -integrate_endpoint_singular(f, (b, a), beta, alpha, cfg)
    mid = 0.5 * (a + b)
    return (_singular_half(f, a, mid, alpha, cfg)
            + _singular_half(f, b, mid, beta, cfg))


def difference_quotient_integral(f: Callable[[float], float],
                                 fprime_at_x: float | None,
                                 x: float,
                                 interval: tuple[float, float] | Sequence[float],
                                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Integral of (f(u) - f(x))/(u - x) over [a, b] with x inside.

    The singularity at u = x is removable; ``fprime_at_x`` is the limit value
    of the quotient there (pass None to use 0.0 — only nodes colliding with x
    at machine precision ever see it, and their weights are O(u - x)).
    The interval is split at x so the double-exponential map clusters nodes
    at the removable point on both sides.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < x < b:
        raise ValueError(f"x={x} must lie strictly inside [{a}, {b}]")
    fx = f(x)
    limit = 0.0 if fprime_at_x is None else float(fprime_at_x)

    def quot(u: float) -> float:
        du = u - x
        if du == 0.0:
            return limit
        return (f(u) - fx) / du

    def piece(lo: float, hi: float) -> float:
        # A sliver next to x is pure cancellation noise for the quadrature;
        # a midpoint rectangle is already exact beyond machine precision.
        if hi - lo < 1e-8 * (b - a):
            return (hi - lo) * quot(0.5 * (lo + hi))
        return _tanh_sinh(quot, lo, hi, cfg)

    return piece(a, x) + piece(x, b)


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on [edges[0], edges[-1]].

    ``values[j]`` holds on [edges[j], edges[j+1]); at interior edges the left
    step wins (the documented tie-break), and calls outside the domain clamp
    to the first/last step.
    """

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if edges.ndim != 1 or values.ndim != 1 or len(edges) != len(values) + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        if not np.all(np.diff(edges) > 0):
            raise ValueError("edges must be strictly increasing")
        edges.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    def __call__(self, x):
        idx = np.searchsorted(self.edges, x, side="left") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        out = self.values[idx]
        return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def difference_quotient_integral_step(step: StepFunction, x: float) -> float:
    """Closed form of the difference-quotient integral for a step function.

    Sum over steps [s_j, e_j] of (v_j - v(x)) * (log|e_j - x| - log|s_j - x|);
    the step containing x contributes zero.  At a genuine jump edge the value
    v(x) comes from the left step and the integral diverges; the signed
    infinity is returned rather than raised.
    """
    vx = step(x)
    edges = step.edges
    values = step.values
    terms = []
    for j, vj in enumerate(values):
        if vj == vx:
            continue
        lo = abs(edges[j] - x)
        hi = abs(edges[j + 1] - x)
        log_lo = math.log(lo) if lo > 0.0 else -math.inf
        log_hi = math.log(hi) if hi > 0.0 else -math.inf
        terms.append((vj - vx) * (log_hi - log_lo))
    return math.fsum(terms) if terms else 0.0


def find_root_bracketed(g: Callable[[float], float], lo: float, hi: float,
                        tol: float = 1e-13) -> float:
    """Root of g on [lo, hi] given a sign change, via Brent refinement."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if math.copysign(1.0, glo) == math.copysign(1.0, ghi):
        raise BracketError(f"g({lo})={glo} and g({hi})={ghi} do not change sign")
    return float(brentq(g, lo, hi, xtol=tol, rtol=8.9e-16))


@dataclass(frozen=True)
class Partition:
    """Integer partition as a multiplicity map part -> count."""

    multiplicities: dict[int, int]

    @property
    def n(self) -> int:
        return sum(k * c for k, c in self.multiplicities.items())

    @property
    def num_parts(self) -> int:
        return sum(self.multiplicities.values())


def partitions(n: int) -> list[Partition]:
    """All partitions of n, each exactly once, as multiplicity maps.

    Guarded to 1 <= n <= 40 against combinatorial blowup.
    """
    if not isinstance(n, int) or not 1 <= n <= 40:
        raise ValueError(f"n must be an integer in [1, 40], got {n}")
    out: list[Partition] = []
    parts: list[int] = []

    def rec(remaining: int, max_part: int) -> None:
        if remaining == 0:
            mult: dict[int, int] = {}
            for p in parts:
                mult[p] = mult.get(p, 0) + 1
            out.append(Partition(mult))
            return
        for k in range(min(remaining, max_part), 0, -1):
            parts.append(k)
            rec(remaining - k, k)
            parts.pop()

    rec(n, n)
    return out
