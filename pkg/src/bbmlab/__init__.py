"""bbmlab: Monte Carlo lab for distance-restricted fractional energies.

The library estimates three double-integral energies of a scalar field on a
bounded domain -- the full singular-kernel energy, its restriction to the
cone |x-y| < tau*d(x), and a geodesic-distance variant -- and studies their
(1-s)-scaled limits as the smoothness parameter s approaches 1.
"""

from .config import ConfigError, ExperimentConfig
from .functions import (
    GradientPNorm,
    Linear,
    Power,
    Quadratic,
    SmoothTrig,
    TestFunction,
    constant,
    function_from_spec,
    gradient_p_norm,
    w1p_membership,
)
from .geometry import (
    Ball,
    Box,
    Cusp,
    Domain,
    ExhaustionLevel,
    ExhaustionView,
    GeometryError,
    Interval,
    Polygon,
    domain_from_spec,
    exhaustion_subdomain,
    geodesic_distance,
)
from .limits import (
    SweepResult,
    Verdict,
    divergence_verdict,
    extrapolate,
    farpart_decay_verdict,
    regime_sweep,
    step5_decomposition,
    sweep,
    theorem_verdict,
)
from .maximal import (
    ScalarField,
    TGrid,
    constant_field,
    default_t_grid,
    directional_maximal,
    gradient_magnitude_field,
    indicator_field,
    spherical_maximal,
    verify_lp_bound,
    verify_pointwise_bound,
)
from .rng import RandomStream
from .seminorm import (
    Budgets,
    EnergyEstimate,
    SeminormParams,
    SharpConstant,
    classical_energy,
    far_part_energy,
    geodesic_energy,
    k_constant,
    k_constant_quadrature,
    k_constant_sphere_mc,
    local_energy,
    sphere_area,
    truncated_energy,
)

__version__ = "0.1.0"
