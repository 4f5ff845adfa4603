"""Fractional parts of the critical points of t(t-1)...(t-n).

The derivative of the falling product has exactly one root in each integer
gap (k, k+1); the fractional parts approach a universal arccot-of-logit
curve.  Roots are located on the logarithmic-derivative sum 1/(x - 0) + ...
+ 1/(x - n), never by expanding the polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["RootProfile", "derivative_root_fractional_parts", "limit_curve"]

_MAX_N = 100_000


@dataclass(frozen=True)
class RootProfile:
    n: int
    lambdas: np.ndarray

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=float).copy()
        if len(lam) != self.n:
            raise ValueError(f"expected {self.n} fractional parts, got {len(lam)}")
        if np.any(lam <= 0.0) or np.any(lam >= 1.0):
            raise ValueError("fractional parts must lie strictly in (0, 1)")
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)


def _kahan_sum(a: np.ndarray, axis: int) -> np.ndarray:
    total = np.zeros(a.shape[:axis] + a.shape[axis + 1:])
    comp = np.zeros_like(total)
    for sl in np.moveaxis(a, axis, 0):
        y = sl - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _log_derivative_sum(x: np.ndarray, n: int) -> np.ndarray:
    """Compensated sum over j = 0..n of 1/(x - j), vectorized over x."""
    j = np.arange(n + 1, dtype=float)
    return _kahan_sum(1.0 / (x[:, None] - j[None, :]), axis=1)


def derivative_root_fractional_parts(n: int, tol: float = 1e-13,
                                     chunk: int = 4_000_000) -> RootProfile:
    """Fractional parts of the n roots of the derivative of t(t-1)...(t-n).

    Each root is bracketed in its gap (k, k+1) by the sign change of the
    logarithmic-derivative sum (verified before refinement: positive near k,
    negative near k+1) and bisected to ``tol``.
    """
    if not 1 <= n <= _MAX_N:
        raise ValueError(f"n must be in [1, {_MAX_N}], got {n}")
    lambdas = np.empty(n)
    block = max(1, chunk // (n + 1))
    pad = 1e-9
    for start in range(0, n, block):
        ks = np.arange(start, min(start + block, n), dtype=float)
        lo = ks + pad
        hi = ks + 1.0 - pad
        s_lo = _log_derivative_sum(lo, n)
        s_hi = _log_derivative_sum(hi, n)
        if np.any(s_lo <= 0.0) or np.any(s_hi >= 0.0):
            raise RuntimeError("bracket sign verification failed")
        steps = int(math.ceil(math.log2(1.0 / tol))) + 1
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            positive = _log_derivative_sum(mid, n) > 0.0
            lo = np.where(positive, mid, lo)
            hi = np.where(positive, hi, mid)
        lambdas[int(ks[0]):int(ks[-1]) + 1] = 0.5 * (lo + hi) - ks
    return RootProfile(n, lambdas)


def limit_curve(x: float) -> float:
    """Limiting fractional-part curve (1/pi) arccot((1/pi) log((1-x)/x)).

    Defined for 0 < x < 1, strictly increasing, value 1/2 at the midpoint;
    arccot is the (0, pi)-valued branch.
    """
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    return math.atan2(1.0, math.log((1.0 - x) / x) / math.pi) / math.pi
