"""Hook walks on continual Young diagrams and their transition measures.

Forward transforms (diagram -> measure), their explicit inverses
(measure -> diagram), moment-identity oracles, Monte Carlo walk simulation,
and a CLI tying them together.
"""

__version__ = "0.1.0"

from .diagram import (
    ConstantSlopeDiagram,
    DiagramError,
    Interval,
    PiecewiseLinearDiagram,
    RectangularDiagram,
    SmoothDiagram,
    UnrotatedDiagram,
    UnrotatedPolyDiagram,
    constant_slope_diagram,
    parse_diagram,
    rectangular_approximation,
    rotate,
    serialize_diagram,
    step_approximation,
    trivial_diagram,
    unrotate,
)
from .inverse import (
    InteriorInverseParams,
    SlopeFunction,
    diagram_from_slopes,
    rect_from_exterior_atoms,
    rect_from_interior_atoms,
    slope_from_exterior_density,
    slope_from_interior_density,
)
from .moments import (
    MomentVector,
    charge_moments,
    charge_moments_from_exterior,
    exterior_moments_from_charge,
    interior_moments_from_charge,
    measure_moments,
)
from .numerics import (
    BracketError,
    Partition,
    QuadratureConfig,
    QuadratureError,
    StepFunction,
    difference_quotient_integral,
    difference_quotient_integral_step,
    find_root_bracketed,
    integrate_endpoint_singular,
    partitions,
)
from .polyroots import RootProfile, derivative_root_fractional_parts, limit_curve
from .transition import (
    AtomicMeasure,
    DensityGrid,
    cauchy_identity_residual,
    density_cdf,
    density_grid,
    exterior_atoms,
    exterior_density,
    exterior_density_unrotated,
    exterior_mass,
    interior_atoms,
    interior_density,
    interior_density_unrotated,
    interior_mass,
    started_interior_density,
)
from .walk import (
    EmpiricalCDF,
    WalkConfig,
    WalkSample,
    exterior_walk_sample,
    interior_walk_from,
    interior_walk_sample,
    ks_distance,
    simulate,
    simulate_samples,
)
