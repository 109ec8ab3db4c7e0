"""Simulation and verification toolkit for convex hulls of Poisson-Gaussian
point clouds: sampling, hull geometry, the critical-radius rescaling,
per-vertex functionals, cumulant algebra, theorem-bound evaluators and a
Monte Carlo experiment harness with a CLI front end."""

from . import errors
from .bounds import (
    BoundConstants,
    concentration_bound,
    cumulant_bound,
    envelope_bounds,
    mdp_assess,
    ss_bounds,
    ss_parameters,
    statistic_exponent,
    weights,
)
from .cumulants import (
    CumulantVector,
    bell_number,
    complete_bell,
    cumulants_from_moments,
    factorial_inequalities,
    k_statistics,
    moments_from_cumulants,
    partial_bell,
    set_partitions,
    stirling2,
    touchard_moment,
)
from .functionals import (
    FunctionalAtoms,
    TestFunction,
    pair,
    test_function_library,
    xi_face,
    xi_volume,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    agreement_audit,
    exponent_fit,
    ks_distance,
    run_experiment,
)
from .hull import (
    Polytope,
    convex_hull,
    f_vector,
    facet_solid_angle,
    is_vertex_oracle,
    polytope_volume,
    unit_ball_volume,
    vertex_face_incidence,
)
from .rescale import (
    RescaledPoint,
    critical_radius,
    extreme_points,
    intensity_density,
    minimal_admissible_lambda,
    paraboloid_contains,
    radius_identity_sides,
    scale_point,
    unscale_point,
)
from .sampler import (
    CoupledSamplePath,
    GaussianSample,
    extend_sample,
    read_sample,
    sample_poisson_gaussian,
    substream,
    write_sample,
)

__version__ = "0.1.0"
