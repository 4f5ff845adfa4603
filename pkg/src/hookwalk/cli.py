"""Command-line front end.

Subcommands: density, atoms, invert, walk, moments, verify, roots, convert.
CSV carries gridded/plot data, JSON carries structured results; floats are
printed with 17 significant digits so emitted files re-parse losslessly.
Exit codes: 0 success, 1 invalid input, 2 identity check failed, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .diagram import (
    DiagramError,
    PiecewiseLinearDiagram,
    RectangularDiagram,
    ConstantSlopeDiagram,
    UnrotatedDiagram,
    parse_diagram,
    rectangular_approximation,
    serialize_diagram,
)
from .inverse import (
    InteriorInverseParams,
    SlopeFunction,
    diagram_from_slopes,
    slope_from_exterior_density,
    slope_from_interior_density,
)
from .moments import (
    charge_moments,
    exterior_moments_from_charge,
    interior_moments_from_charge,
)
from .numerics import QuadratureConfig, QuadratureError, integrate_endpoint_singular
from .polyroots import derivative_root_fractional_parts, limit_curve
from .transition import (
    DensityGrid,
    cauchy_identity_residual,
    density_grid,
    exterior_atoms,
    exterior_density_unrotated,
    exterior_mass,
    interior_atoms,
    interior_density_unrotated,
    interior_mass,
    started_interior_density,
)
from .walk import WalkConfig, EmpiricalCDF, ks_distance, simulate_samples

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IDENTITY = 2
EXIT_NUMERICAL = 3


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_diagram(path: str):
    with open(path) as fh:
        return parse_diagram(json.load(fh))


def _out_stream(path: str | None):
    return open(path, "w") if path else sys.stdout


def _write(path: str | None, text: str) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _quad_cfg(args) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=args.tol_quadrature)


def _require_rotated(d):
    if isinstance(d, UnrotatedDiagram):
        raise DiagramError("this operation needs a rotated diagram "
                           "(rectangular, piecewise_linear, constant_slope)")
    return d


def _cmd_density(args) -> int:
    d = _load_diagram(args.diagram)
    cfg = _quad_cfg(args)
    lines = ["x,density"]
    if args.unrotated:
        if not isinstance(d, UnrotatedDiagram):
            raise DiagramError("--unrotated needs an unrotated_poly diagram")
        a, b = d.interval.a, d.interval.b
        xs = a + (b - a) * (np.arange(args.grid) + 0.5) / args.grid
        dens = exterior_density_unrotated if args.walk == "exterior" \
            else interior_density_unrotated
        for x in xs:
            lines.append(f"{_fmt(x)},{_fmt(dens(d, float(x), cfg))}")
    else:
        _require_rotated(d)
        grid = density_grid(d, args.walk, args.grid, cfg)
        for x, v in zip(grid.grid, grid.values):
            lines.append(f"{_fmt(x)},{_fmt(v)}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_atoms(args) -> int:
    d = _load_diagram(args.diagram)
    if not isinstance(d, RectangularDiagram):
        raise DiagramError("atoms are defined for rectangular diagrams")
    m = exterior_atoms(d) if args.walk == "exterior" else interior_atoms(d)
    payload = {_fmt(loc): float(w) for loc, w in zip(m.locations, m.weights)}
    _write(args.out, json.dumps(payload) + "\n")
    return EXIT_OK


def _cmd_invert(args) -> int:
    rows = np.loadtxt(args.density, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[1] != 2:
        raise DiagramError("density CSV must have two columns x,density")
    a, b = args.interval
    if not a < b:
        raise DiagramError("interval must satisfy a < b")
    from .diagram import Interval
    grid = DensityGrid(rows[:, 0], rows[:, 1], Interval(a, b), args.walk,
                       alpha=args.alpha, beta=args.beta)
    cfg = _quad_cfg(args)
    if args.walk == "interior":
        if args.area is None or args.center is None:
            raise DiagramError("interior inversion requires --area and --center")
        params = InteriorInverseParams(args.area, args.center)
        slopes = [slope_from_interior_density(grid, params, float(x), cfg)
                  for x in grid.grid]
    else:
        slopes = [slope_from_exterior_density(grid, float(x), cfg)
                  for x in grid.grid]
    diag = diagram_from_slopes(
        SlopeFunction(grid.grid, np.asarray(slopes), grid.interval))
    _write(args.out, json.dumps(serialize_diagram(diag)) + "\n")
    return EXIT_OK


def _analytic_cdf(d, kind: str, cfg: QuadratureConfig):
    """CDF callable for KS reporting, when the diagram supports one."""
    if isinstance(d, RectangularDiagram):
        m = exterior_atoms(d) if kind == "exterior" else interior_atoms(d)
        return m.cdf
    if isinstance(d, PiecewiseLinearDiagram):
        grid = density_grid(d, kind, 512, cfg)
        a, b = d.interval.a, d.interval.b
        # Cosine-clustered anchors resolve the root-like CDF at the endpoints.
        theta = np.linspace(0.0, math.pi, 129)
        anchors = a + (b - a) * 0.5 * (1.0 - np.cos(theta))
        masses = np.empty_like(anchors)
        masses[0] = 0.0
        for i in range(1, len(anchors)):
            masses[i] = masses[i - 1] + grid.integrate(
                lo=float(anchors[i - 1]), hi=float(anchors[i]), cfg=cfg)

        def cdf(x):
            return float(np.interp(x, anchors, masses, left=0.0, right=1.0))

        return cdf
    return None


def _cmd_walk(args) -> int:
    d = _load_diagram(args.diagram)
    cfg = WalkConfig(master_seed=args.seed, stop_epsilon=args.stop_epsilon,
                     max_steps=args.max_steps)
    start = None
    if args.start is not None:
        if not isinstance(d, UnrotatedDiagram):
            raise DiagramError("--start s,t applies to unrotated diagrams")
        parts = args.start.split(",")
        if len(parts) != 2:
            raise DiagramError("--start needs the form s,t")
        start = (float(parts[0]), float(parts[1]))
    samples = simulate_samples(d, args.walk, args.samples, cfg, start=start,
                               threads=args.threads)
    lines = ["sample_index,limit_x,steps,truncated"]
    for i, s in enumerate(samples):
        lines.append(f"{i},{_fmt(s.limit_x)},{s.steps_taken},{int(s.truncated)}")
    _write(args.out, "\n".join(lines) + "\n")

    xs = [s.limit_x for s in samples]
    summary = {
        "samples": len(samples),
        "mean": float(np.mean(xs)),
        "truncated": int(sum(s.truncated for s in samples)),
        "seed": args.seed,
        "walk": args.walk,
    }
    qcfg = QuadratureConfig(rel_tol=1e-7)
    cdf = None if start is not None else _analytic_cdf(d, args.walk, qcfg)
    if cdf is not None:
        summary["ks_vs_analytic"] = ks_distance(EmpiricalCDF(xs), cdf)
    text = json.dumps(summary) + "\n"
    if args.summary:
        _write(args.summary, text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def _cmd_moments(args) -> int:
    d = _load_diagram(args.diagram)
    _require_rotated(d)
    cfg = _quad_cfg(args)
    p = charge_moments(d, args.max_order, cfg)
    h = exterior_moments_from_charge(p)
    payload = {
        "center": d.center,
        "area": d.area,
        "charge": p.values.tolist(),
        "exterior_measure": h.values.tolist(),
    }
    if d.area > 0.0 and args.max_order >= 2:
        g = interior_moments_from_charge(p, d.area, d.center)
        payload["interior_measure"] = g.values.tolist()
    else:
        payload["interior_measure"] = None
    _write(args.out, json.dumps(payload) + "\n")
    return EXIT_OK


def _identity_residuals(d, identity: str, cfg: QuadratureConfig) -> dict:
    if identity == "pi":
        if isinstance(d, UnrotatedDiagram):
            mass = integrate_endpoint_singular(
                lambda x: exterior_density_unrotated(d, x, cfg),
                d.interval.as_tuple(),
                -d.slope(d.interval.a) / (1.0 + d.slope(d.interval.a)),
                -1.0 / (1.0 + d.slope(d.interval.b)), cfg)
        else:
            mass = exterior_mass(d, cfg)
        return {"residual": abs(mass - 1.0), "mass": mass}
    if identity == "area":
        if isinstance(d, UnrotatedDiagram):
            mass = integrate_endpoint_singular(
                lambda x: interior_density_unrotated(d, x, cfg),
                d.interval.as_tuple(),
                d.slope(d.interval.a) / (1.0 + d.slope(d.interval.a)),
                1.0 / (1.0 + d.slope(d.interval.b)), cfg)
        else:
            mass = interior_mass(d, cfg)
        return {"residual": abs(mass - 1.0), "mass": mass}
    if identity == "cauchy":
        _require_rotated(d)
        x = d.interval.b + 1.0
        out = {}
        worst = 0.0
        for kind in ("exterior", "interior"):
            if kind == "interior" and d.area <= 0.0:
                continue
            lhs, rhs = cauchy_identity_residual(d, x, kind, cfg)
            out[kind] = {"lhs": lhs, "rhs": rhs}
            worst = max(worst, abs(lhs - rhs))
        out["residual"] = worst
        return out
    if identity == "thm9":
        if not isinstance(d, UnrotatedDiagram):
            raise DiagramError("thm9 applies to unrotated diagrams")
        a, b = d.interval.a, d.interval.b
        s, t = b, 0.0
        x = 0.5 * (a + b)
        lhs = started_interior_density(d, s, t, x, cfg)
        fx = d.evaluate(x)
        fp = d.slope(x)
        r = 1.0 + fp
        i1 = integrate_endpoint_singular(
            lambda v: started_interior_density(d, v, t, x, cfg),
            (x, s), -fp / r, 0.0, cfg)
        i2 = integrate_endpoint_singular(
            lambda v: started_interior_density(d, s, v, x, cfg),
            (t, fx), 0.0, -1.0 / r, cfg)
        denom = s - d.f_inverse(t) + d.evaluate(s) - t
        rhs = (i1 + i2) / denom
        return {"residual": abs(lhs - rhs), "lhs": lhs, "rhs": rhs}
    if identity == "thm10":
        if not isinstance(d, UnrotatedDiagram):
            raise DiagramError("thm10 applies to unrotated diagrams")
        a, b = d.interval.a, d.interval.b
        x = 0.5 * (a + b)
        closed = interior_density_unrotated(d, x, cfg)
        fx = d.evaluate(x)
        fp = d.slope(x)
        r = 1.0 + fp

        def inner(s):
            return integrate_endpoint_singular(
                lambda t: started_interior_density(d, s, t, x, cfg),
                (0.0, fx), 0.0, -1.0 / r, cfg)

        double = integrate_endpoint_singular(inner, (x, b), -fp / r, 0.0, cfg)
        mixture = double / d.area
        return {"residual": abs(closed - mixture), "closed_form": closed,
                "mixture": mixture}
    raise DiagramError(f"unknown identity '{identity}'")


def _cmd_verify(args) -> int:
    d = _load_diagram(args.diagram)
    cfg = _quad_cfg(args)
    report = _identity_residuals(d, args.identity, cfg)
    report["identity"] = args.identity
    report["tol"] = args.tol
    report["pass"] = bool(report["residual"] < args.tol)
    _write(args.out, json.dumps(report) + "\n")
    return EXIT_OK if report["pass"] else EXIT_IDENTITY


def _cmd_roots(args) -> int:
    profile = derivative_root_fractional_parts(args.n)
    lines = ["k,lambda,limit_curve"]
    for k, lam in enumerate(profile.lambdas):
        # The curve is undefined at 0; the k = 0 row reports its midpoint value.
        x = k / args.n if k > 0 else 0.5 / args.n
        lines.append(f"{k},{_fmt(lam)},{_fmt(limit_curve(x))}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_convert(args) -> int:
    d = _load_diagram(args.diagram)
    if args.to == "canonical":
        out = d
    elif args.to == "rectangular":
        if not isinstance(d, PiecewiseLinearDiagram):
            raise DiagramError("rectangular conversion needs a piecewise-linear "
                               "or constant_slope diagram")
        if args.n is None:
            raise DiagramError("--to rectangular requires --n")
        out = rectangular_approximation(d, args.n)
    elif args.to == "piecewise_linear":
        if not isinstance(d, PiecewiseLinearDiagram):
            raise DiagramError("piecewise_linear conversion needs a "
                               "piecewise-linear family diagram")
        out = PiecewiseLinearDiagram(d.breakpoints)
    else:
        raise DiagramError(f"unknown conversion target '{args.to}'")
    _write(args.out, json.dumps(serialize_diagram(out)) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hookwalk",
        description="Hook-walk transition measures of continual Young "
                    "diagrams: densities, atoms, inversion, simulation, and "
                    "identity verification.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--tol-quadrature", type=float, default=1e-9,
                        help="relative quadrature tolerance (default 1e-9)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="densities on a grid (CSV x,density)")
    p.add_argument("--diagram", required=True)
    p.add_argument("--walk", choices=["exterior", "interior"], required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--unrotated", action="store_true",
                   help="evaluate the unrotated-coordinate density")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("atoms", help="atomic measure of a rectangular diagram "
                                     "(JSON location -> weight)")
    p.add_argument("--diagram", required=True)
    p.add_argument("--walk", choices=["exterior", "interior"], required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_atoms)

    p = sub.add_parser("invert", help="reconstruct a diagram from a density CSV")
    p.add_argument("--density", required=True, help="CSV x,density")
    p.add_argument("--walk", choices=["exterior", "interior"], required=True)
    p.add_argument("--interval", type=float, nargs=2, required=True,
                   metavar=("A", "B"), help="support interval of the density")
    p.add_argument("--area", type=float, help="diagram area (interior walk)")
    p.add_argument("--center", type=float, help="diagram center (interior walk)")
    p.add_argument("--alpha", type=float, default=0.0,
                   help="density exponent at the left endpoint")
    p.add_argument("--beta", type=float, default=0.0,
                   help="density exponent at the right endpoint")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("walk", help="Monte Carlo walk samples (CSV) "
                                    "+ JSON summary")
    p.add_argument("--diagram", required=True)
    p.add_argument("--walk", choices=["exterior", "interior"], required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", help="s,t starting point (unrotated diagrams)")
    p.add_argument("--stop-epsilon", type=float, default=1e-9)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--threads", type=int, default=None,
                   help="worker count (default: HOOKWALK_THREADS or 1)")
    p.add_argument("--out", help="CSV destination (default stdout)")
    p.add_argument("--summary", help="JSON summary destination (default stderr)")
    p.set_defaults(func=_cmd_walk)

    p = sub.add_parser("moments", help="charge/measure moment vectors (JSON)")
    p.add_argument("--diagram", required=True)
    p.add_argument("--max-order", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("verify", help="check an integral identity; "
                                      "exit 2 when out of tolerance")
    p.add_argument("--diagram", required=True)
    p.add_argument("--identity", required=True,
                   choices=["pi", "area", "cauchy", "thm9", "thm10"])
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("roots", help="fractional parts of derivative roots "
                                     "(CSV k,lambda,limit_curve)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_roots)

    p = sub.add_parser("convert", help="convert between diagram spec kinds")
    p.add_argument("--diagram", required=True)
    p.add_argument("--to", required=True,
                   choices=["canonical", "rectangular", "piecewise_linear"])
    p.add_argument("--n", type=int, help="subdivisions per segment "
                                         "(rectangular target)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_convert)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except QuadratureError as exc:
        sys.stderr.write(f"error: numerical non-convergence: {exc}\n")
        return EXIT_NUMERICAL
    except (DiagramError, ValueError, TypeError, OSError,
            json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
