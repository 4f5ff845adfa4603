"""Charge and measure moments and the partition-sum relations between them.

The charge of a diagram is (value(x) - |x|)/2; its power-sum-like moments
determine the exterior and interior measure moments through exponential
generating-function identities, giving an independent consistency oracle on
the transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagram import RectangularDiagram, SmoothDiagram
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    integrate_endpoint_singular,
    partitions,
)
from .transition import AtomicMeasure, DensityGrid

__all__ = [
    "MomentVector",
    "charge_moments",
    "exterior_moments_from_charge",
    "interior_moments_from_charge",
    "charge_moments_from_exterior",
    "measure_moments",
]

MAX_ORDER = 40


@dataclass(frozen=True)
class MomentVector:
    """Moment sequence; charge moments start at order 1, measure moments at 0."""

    kind: str  # "charge" | "exterior" | "interior"
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float).copy()
        if self.kind not in ("charge", "exterior", "interior"):
            raise ValueError(f"unknown moment kind {self.kind}")
        if self.kind != "charge":
            if len(vals) == 0 or abs(vals[0] - 1.0) > 1e-9:
                raise ValueError("measure moments must start with order 0 = 1")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def start(self) -> int:
        return 1 if self.kind == "charge" else 0

    @property
    def max_order(self) -> int:
        return self.start + len(self.values) - 1

    def order(self, n: int) -> float:
        if not self.start <= n <= self.max_order:
            raise IndexError(f"order {n} outside [{self.start}, {self.max_order}]")
        return float(self.values[n - self.start])


def _check_order(n: int) -> None:
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"max order must be in [1, {MAX_ORDER}], got {n}")


def charge_moments(d, max_order: int,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> MomentVector:
    """Moments -n * integral of u^{n-1} d(charge), orders 1..max_order.

    Exact power sums (minima minus maxima) for rectangular diagrams; piecewise
    closed forms for piecewise-linear ones; quadrature for smooth diagrams.
    The cone stretch between the support and the origin contributes a^n (when
    a > 0) or b^n (when b < 0) in closed form.
    """
    _check_order(max_order)
    orders = np.arange(1, max_order + 1)
    if isinstance(d, RectangularDiagram):
        vals = [math.fsum(d.minima ** n) - math.fsum(d.maxima ** n)
                for n in orders]
        return MomentVector("charge", np.array(vals))

    a, b = d.interval.a, d.interval.b
    vals = np.zeros(max_order)
    if a > 0.0:
        vals += a ** orders.astype(float)
    elif b < 0.0:
        vals += b ** orders.astype(float)

    if isinstance(d, SmoothDiagram):
        cuts = sorted(set([a, b, *([0.0] if a < 0.0 < b else [])]))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            sg = 1.0 if lo >= 0.0 else -1.0
            for i, n in enumerate(orders):
                vals[i] += integrate_endpoint_singular(
                    lambda u: -n * u ** (n - 1) * 0.5 * (d.slope(u) - sg),
                    (lo, hi), 0.0, 0.0, cfg)
        return MomentVector("charge", vals)

    # Piecewise linear: -n * integral u^{n-1} (s - sgn)/2 = -(s - sgn)/2 *
    # (hi^n - lo^n) on each constant-sign, constant-slope stretch.
    bx, _ = d.graph_breakpoints()
    slopes = d.segment_slopes
    for i, (lo, hi) in enumerate(zip(bx[:-1], bx[1:])):
        sub = [(float(lo), float(hi))]
        if lo < 0.0 < hi:
            sub = [(float(lo), 0.0), (0.0, float(hi))]
        for slo, shi in sub:
            sg = 1.0 if slo >= 0.0 else -1.0
            c = 0.5 * (float(slopes[i]) - sg)
            if c == 0.0:
                continue
            for j, n in enumerate(orders):
                vals[j] -= c * (shi ** n - slo ** n)
    return MomentVector("charge", vals)


def _partition_sum(charge: np.ndarray, n: int, signed: bool) -> float:
    """Sum over partitions of n of prod_k (p_k/k)^{m_k} / m_k!.

    With ``signed`` the term carries (-1)^{(number of parts) + 1}.
    """
    terms = []
    for part in partitions(n):
        term = 1.0
        for k, mult in part.multiplicities.items():
            term *= (charge[k - 1] / k) ** mult / math.factorial(mult)
        if signed and part.num_parts % 2 == 0:
            term = -term
        terms.append(term)
    return math.fsum(terms)


def exterior_moments_from_charge(p: MomentVector) -> MomentVector:
    """Exterior measure moments from charge moments (orders 0..max).

    Order n is the sum over partitions of n of prod (p_k/k)^{m_k}/m_k!.
    """
    if p.kind != "charge":
        raise ValueError("input must be a charge moment vector")
    n_max = p.max_order
    vals = np.empty(n_max + 1)
    vals[0] = 1.0
    for n in range(1, n_max + 1):
        vals[n] = _partition_sum(p.values, n, signed=False)
    return MomentVector("exterior", vals)


def interior_moments_from_charge(p: MomentVector, area: float,
                                 center: float | None = None) -> MomentVector:
    """Interior measure moments from charge moments, orders 0..max-2.

    Order n-2 is (2/A) * signed partition sum over partitions of n.  The
    center is accepted for interface symmetry with the inverse transform; the
    expansion itself consistency-requires center = p_1 and uses only the area.
    """
    if p.kind != "charge":
        raise ValueError("input must be a charge moment vector")
    if area <= 0.0:
        raise ValueError(f"area must be positive, got {area}")
    if p.max_order < 2:
        raise ValueError("need charge moments through order 2")
    vals = np.empty(p.max_order - 1)
    for n in range(2, p.max_order + 1):
        vals[n - 2] = (2.0 / area) * _partition_sum(p.values, n, signed=True)
    return MomentVector("interior", vals)


def charge_moments_from_exterior(h: MomentVector) -> MomentVector:
    """Inverse of :func:`exterior_moments_from_charge`.

    Recursive inversion of the partition-sum relation: stripping the
    single-part partition leaves n*h_n = sum_{k=1}^{n} p_k h_{n-k}, solved for
    p_n order by order.
    """
    if h.kind != "exterior":
        raise ValueError("input must be an exterior moment vector")
    n_max = h.max_order
    p = np.zeros(n_max)
    for n in range(1, n_max + 1):
        acc = n * h.order(n)
        for k in range(1, n):
            acc -= p[k - 1] * h.order(n - k)
        p[n - 1] = acc
    return MomentVector("charge", p)


def measure_moments(m, max_order: int,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                    kind: str | None = None) -> MomentVector:
    """Raw moments of a measure: weighted power sums or singular quadrature.

    ``kind`` labels which walk an atomic measure belongs to (grids carry
    their own label); it defaults to "exterior".
    """
    _check_order(max_order)
    if isinstance(m, AtomicMeasure):
        vals = [1.0] + [math.fsum(m.weights * m.locations ** n)
                        for n in range(1, max_order + 1)]
        kind = kind or "exterior"
    elif isinstance(m, DensityGrid):
        vals = [1.0] + [m.moment(n, cfg) for n in range(1, max_order + 1)]
        kind = m.kind
    else:
        raise TypeError(f"cannot take moments of {type(m).__name__}")
    return MomentVector(kind, np.array(vals))
