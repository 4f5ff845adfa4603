"""Monte Carlo hook walks validating the analytic transition measures.

A walk step replaces the current point by a point drawn uniformly (by arc
length) from its hook, the union of the two diagonal rays to the graph;
iterating converges to a point on the graph whose x-coordinate follows the
transition measure.  Walks stop once the current point is within
``stop_epsilon`` vertical distance of the graph.

Randomness is counter-based and per-sample: draw i of sample j under master
seed s is uniform(s, j, i), a chained SplitMix64 finalizer (see README), so
results are identical no matter how samples are batched or parallelized.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diagram import DiagramError, RectangularDiagram, UnrotatedDiagram

__all__ = [
    "WalkConfig",
    "WalkSample",
    "EmpiricalCDF",
    "exterior_walk_sample",
    "interior_walk_sample",
    "interior_walk_from",
    "simulate_samples",
    "simulate",
    "ks_distance",
]


@dataclass(frozen=True)
class WalkConfig:
    stop_epsilon: float = 1e-9
    max_steps: int = 10_000
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not self.stop_epsilon > 0.0:
            raise ValueError("stop_epsilon must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class WalkSample:
    limit_x: float
    steps_taken: int
    truncated: bool


class EmpiricalCDF:
    """Sorted sample locations with staircase CDF evaluation."""

    def __init__(self, locations):
        loc = np.sort(np.asarray(locations, dtype=float))
        loc.flags.writeable = False
        self.locations = loc
        self.count = len(loc)

    def cdf(self, x):
        idx = np.searchsorted(self.locations, np.asarray(x, dtype=float),
                              side="right")
        out = idx / self.count
        return float(out) if np.ndim(x) == 0 else out


def ks_distance(e: EmpiricalCDF, analytic_cdf) -> float:
    """sup over sample points of |empirical - analytic| (both step sides)."""
    n = e.count
    f = np.asarray([analytic_cdf(x) for x in e.locations], dtype=float)
    steps_hi = np.arange(1, n + 1) / n
    steps_lo = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(f - steps_hi), np.abs(f - steps_lo))))


# ---------------------------------------------------------------------------
# Counter-based per-sample uniforms

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _mix(x: np.ndarray) -> np.ndarray:
    x = (x + _GAMMA).astype(np.uint64)
    x ^= x >> np.uint64(30)
    x *= _M1
    x ^= x >> np.uint64(27)
    x *= _M2
    x ^= x >> np.uint64(31)
    return x


def _uniforms(master_seed: int, sample_indices: np.ndarray,
              draw_indices: np.ndarray) -> np.ndarray:
    """Uniforms in [0, 1): mix(mix(mix(seed) ^ sample) ^ draw) >> 11 / 2^53."""
    seed = np.uint64(master_seed & _MASK)
    h = _mix(np.asarray([seed], dtype=np.uint64))[0]
    h = _mix(h ^ sample_indices.astype(np.uint64))
    h = _mix(h ^ draw_indices.astype(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


# ---------------------------------------------------------------------------
# Hook-ray endpoints

_PARALLEL_TOL = 1e-12


def _ray_endpoints_pl(bx, bv, beta, gamma, slopes, x, y, kind):
    """Left and right hook-ray endpoint abscissae against a breakpoint graph.

    Exterior rays go down (the point sits above the graph in the dual
    domain), interior rays go up.  Overlaps with parallel slope-(+-1)
    segments are included whole: the searchsorted side picks the far end of
    any equal run, and an exactly-parallel selected segment resolves to its
    far breakpoint.
    """
    if kind == "exterior":
        i_l = np.searchsorted(beta, x - y, side="left")
        i_r = np.searchsorted(gamma, x + y, side="right")
    else:
        i_l = np.searchsorted(gamma, x + y, side="left")
        i_r = np.searchsorted(beta, x - y, side="right")
    i_l = np.clip(i_l, 1, len(bx) - 1)
    i_r = np.clip(i_r, 1, len(bx) - 1)

    s_l = slopes[i_l - 1]
    s_r = slopes[i_r - 1]
    if kind == "exterior":
        den_l = 1.0 - s_l
        num_l = bv[i_l - 1] - s_l * bx[i_l - 1] + x - y
        den_r = 1.0 + s_r
        num_r = x + y - bv[i_r - 1] + s_r * bx[i_r - 1]
    else:
        den_l = 1.0 + s_l
        num_l = x + y - bv[i_l - 1] + s_l * bx[i_l - 1]
        den_r = 1.0 - s_r
        num_r = bv[i_r - 1] - s_r * bx[i_r - 1] + x - y
    with np.errstate(divide="ignore", invalid="ignore"):
        c = num_l / den_l
        e = num_r / den_r
    par_l = np.abs(den_l) < _PARALLEL_TOL
    par_r = np.abs(den_r) < _PARALLEL_TOL
    if np.any(par_l):
        c = np.where(par_l, bx[i_l - 1], c)
    if np.any(par_r):
        e = np.where(par_r, bx[i_r], e)
    c = np.minimum(c, x)
    e = np.maximum(e, x)
    return c, e


def _ray_endpoints_bisect(d, x, y, kind, iters: int = 60):
    """Hook endpoints by monotone bisection on the evaluator (smooth case)."""
    a, b, z = d.interval.a, d.interval.b, d.center
    if kind == "exterior":
        lo_l = np.maximum(0.5 * (x - y + z), a)
        hi_r = np.minimum(0.5 * (x + y + z), b)

        def above_l(p):
            return (y - x + p) - d.evaluate(p) >= 0.0

        def above_r(p):
            return (y + x - p) - d.evaluate(p) >= 0.0
    else:
        wa = d.evaluate(a)
        wb = d.evaluate(b)
        lo_l = np.maximum(x - 0.5 * (wa + (x - a) - y), a)
        hi_r = np.minimum(x + 0.5 * (wb + (b - x) - y), b)

        def above_l(p):
            return d.evaluate(p) - (y + x - p) >= 0.0

        def above_r(p):
            return d.evaluate(p) - (y - x + p) >= 0.0

    lo, hi = lo_l, x.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = above_l(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    c = 0.5 * (lo + hi)
    lo, hi = x.copy(), hi_r
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = above_r(mid)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    e = 0.5 * (lo + hi)
    return c, e


def _hook_endpoints(d, x, y, kind):
    graph = d.graph_breakpoints()
    if graph is None:
        return _ray_endpoints_bisect(d, x, y, kind)
    bx, bv = graph
    beta = bx - bv
    gamma = bx + bv
    return _ray_endpoints_pl(bx, bv, beta, gamma, d.segment_slopes, x, y, kind)


# ---------------------------------------------------------------------------
# Rotated-coordinate walks


def _vertical_distance(d, x, y, kind):
    return y - d.evaluate(x) if kind == "exterior" else d.evaluate(x) - y


def _run_rotated(d, kind: str, sample_indices: np.ndarray, cfg: WalkConfig):
    n = len(sample_indices)
    idx = np.asarray(sample_indices, dtype=np.uint64)
    draw = np.zeros(n, dtype=np.uint64)
    a, b, z = d.interval.a, d.interval.b, d.center

    if kind == "exterior":
        x = np.full(n, a + b - z)
        y = np.full(n, b - a)
    elif kind == "interior":
        if isinstance(d, RectangularDiagram) and d.is_trivial:
            raise DiagramError("the trivial diagram has no interior walk")
        if d.area <= 0.0:
            raise DiagramError("interior walk requires positive area")
        x = np.empty(n)
        y = np.empty(n)
        pending = np.arange(n)
        height = b - a  # roof bound on the diagram's height
        while len(pending):
            u1 = _uniforms(cfg.master_seed, idx[pending], draw[pending])
            u2 = _uniforms(cfg.master_seed, idx[pending],
                           draw[pending] + np.uint64(1))
            draw[pending] += np.uint64(2)
            px = a + (b - a) * u1
            py = height * u2
            ok = (np.abs(px - z) < py) & (py < d.evaluate(px))
            x[pending[ok]] = px[ok]
            y[pending[ok]] = py[ok]
            pending = pending[~ok]
    else:
        raise ValueError(f"kind must be exterior|interior, got {kind}")

    limit_x = np.empty(n)
    steps = np.zeros(n, dtype=int)
    truncated = np.zeros(n, dtype=bool)
    active = np.arange(n)
    eps = cfg.stop_epsilon

    done = _vertical_distance(d, x, y, kind) <= eps
    limit_x[active[done]] = x[done]
    active = active[~done]
    x, y, = x[~done], y[~done]

    step_count = 0
    while len(active):
        if step_count >= cfg.max_steps:
            limit_x[active] = x
            truncated[active] = True
            steps[active] = step_count
            break
        c, e = _hook_endpoints(d, x, y, kind)
        total = e - c
        u = _uniforms(cfg.master_seed, idx[active], draw[active])
        draw[active] += np.uint64(1)
        w = c + u * total
        stalled = total <= 4.0 * np.finfo(float).eps * (abs(b - a))
        w = np.where(stalled, x, w)
        if kind == "exterior":
            y = y - np.abs(x - w)
        else:
            y = y + np.abs(x - w)
        x = w
        step_count += 1
        dist = _vertical_distance(d, x, y, kind)
        done = (dist <= eps) | stalled
        if np.any(done):
            limit_x[active[done]] = x[done]
            steps[active[done]] = step_count
            active = active[~done]
            x, y = x[~done], y[~done]
    return limit_x, steps, truncated


# ---------------------------------------------------------------------------
# Unrotated-coordinate walks (L-shaped hooks)


def _run_unrotated(f: UnrotatedDiagram, kind: str,
                   sample_indices: np.ndarray, cfg: WalkConfig,
                   start: tuple[float, float] | None = None):
    n = len(sample_indices)
    idx = np.asarray(sample_indices, dtype=np.uint64)
    draw = np.zeros(n, dtype=np.uint64)
    a, b = f.interval.a, f.interval.b
    top = f.top

    if start is not None:
        s0, t0 = float(start[0]), float(start[1])
        if not (a <= s0 <= b and -1e-12 <= t0 <= f.evaluate(s0) + 1e-12):
            raise DiagramError(f"start ({s0}, {t0}) outside the domain")
        x = np.full(n, s0)
        y = np.full(n, t0)
    elif kind == "interior":
        x = np.empty(n)
        y = np.empty(n)
        pending = np.arange(n)
        while len(pending):
            u1 = _uniforms(cfg.master_seed, idx[pending], draw[pending])
            u2 = _uniforms(cfg.master_seed, idx[pending],
                           draw[pending] + np.uint64(1))
            draw[pending] += np.uint64(2)
            px = a + (b - a) * u1
            py = top * u2
            ok = py < f.evaluate(px)
            x[pending[ok]] = px[ok]
            y[pending[ok]] = py[ok]
            pending = pending[~ok]
    elif kind == "exterior":
        x = np.full(n, a)
        y = np.full(n, top)
    else:
        raise ValueError(f"kind must be exterior|interior, got {kind}")

    limit_x = np.empty(n)
    steps = np.zeros(n, dtype=int)
    truncated = np.zeros(n, dtype=bool)
    active = np.arange(n)
    eps = cfg.stop_epsilon

    def vdist(x, y):
        return y - f.evaluate(x) if kind == "exterior" else f.evaluate(x) - y

    done = vdist(x, y) <= eps
    limit_x[active[done]] = x[done]
    active = active[~done]
    x, y = x[~done], y[~done]

    step_count = 0
    while len(active):
        if step_count >= cfg.max_steps:
            limit_x[active] = x
            truncated[active] = True
            steps[active] = step_count
            break
        finv = f.f_inverse(y)
        u = _uniforms(cfg.master_seed, idx[active], draw[active])
        draw[active] += np.uint64(1)
        if kind == "interior":
            # Hook: left along y to the graph, up along x to the graph.
            lh = x - finv
            lv = f.evaluate(x) - y
            w = u * (lh + lv)
            on_h = w < lh
            x = np.where(on_h, finv + w, x)
            y = np.where(on_h, y, y + (w - lh))
        else:
            # Hook: down along x to the graph, right along y to the graph.
            lv = y - f.evaluate(x)
            lhr = finv - x
            w = u * (lv + lhr)
            on_v = w < lv
            y = np.where(on_v, y - w, y)
            x = np.where(on_v, x, x + (w - lv))
        step_count += 1
        dist = vdist(x, y)
        done = dist <= eps
        if np.any(done):
            limit_x[active[done]] = x[done]
            steps[active[done]] = step_count
            active = active[~done]
            x, y = x[~done], y[~done]
    return limit_x, steps, truncated


# ---------------------------------------------------------------------------
# Drivers


def _run(d, kind: str, sample_indices: np.ndarray, cfg: WalkConfig,
         start: tuple[float, float] | None = None):
    if isinstance(d, UnrotatedDiagram):
        return _run_unrotated(d, kind, sample_indices, cfg, start)
    if start is not None:
        raise DiagramError("fixed starting points apply to unrotated diagrams")
    return _run_rotated(d, kind, sample_indices, cfg)


def exterior_walk_sample(d, cfg: WalkConfig, sample_index: int) -> WalkSample:
    lx, st, tr = _run(d, "exterior", np.array([sample_index]), cfg)
    return WalkSample(float(lx[0]), int(st[0]), bool(tr[0]))


def interior_walk_sample(d, cfg: WalkConfig, sample_index: int) -> WalkSample:
    lx, st, tr = _run(d, "interior", np.array([sample_index]), cfg)
    return WalkSample(float(lx[0]), int(st[0]), bool(tr[0]))


def interior_walk_from(f: UnrotatedDiagram, s: float, t: float,
                       cfg: WalkConfig, sample_index: int) -> WalkSample:
    lx, st, tr = _run(f, "interior", np.array([sample_index]), cfg, start=(s, t))
    return WalkSample(float(lx[0]), int(st[0]), bool(tr[0]))


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("HOOKWALK_THREADS", "1")))
    except ValueError:
        return 1


def simulate_samples(d, kind: str, n_samples: int, cfg: WalkConfig,
                     start: tuple[float, float] | None = None,
                     threads: int | None = None) -> list[WalkSample]:
    """n_samples independent walk samples, index order, seed-reproducible."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    threads = _default_threads() if threads is None else max(1, threads)
    indices = np.arange(n_samples)
    if threads == 1 or n_samples < 2 * threads:
        lx, st, tr = _run(d, kind, indices, cfg, start)
    else:
        chunks = np.array_split(indices, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda ch: _run(d, kind, ch, cfg, start), chunks))
        lx = np.concatenate([p[0] for p in parts])
        st = np.concatenate([p[1] for p in parts])
        tr = np.concatenate([p[2] for p in parts])
    return [WalkSample(float(x), int(s), bool(t))
            for x, s, t in zip(lx, st, tr)]


def simulate(d, kind: str, n_samples: int, cfg: WalkConfig,
             start: tuple[float, float] | None = None,
             threads: int | None = None) -> EmpiricalCDF:
    """Empirical CDF of the walk's limit points (truncated samples included)."""
    samples = simulate_samples(d, kind, n_samples, cfg, start, threads)
    return EmpiricalCDF([s.limit_x for s in samples])
