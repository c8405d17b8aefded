"""Rank-g Schottky groups: construction, limit-set dimension, sector measures,
period matrices and hexagon inequalities."""

from .errors import *  # noqa: F401,F403
from .groups import (
    Circle,
    CirclePairing,
    SchottkyGroupSpec,
    ValidationReport,
    build_from_circles,
    build_from_coordinates,
    conjugate_spec,
    fundamental_domain_contains,
    normalize,
    pair_circles,
    spec_from_dict,
    spec_on_rays,
    spec_to_dict,
    symmetric_spec,
    validate_classical,
)
from .hexagon import hexagon_d, hexagon_e, inequality_suite, q_norm
from .measures import (
    bounds_report,
    dimension_bracket,
    mean_displacement,
    mean_norm_estimate,
    pressure_exponent,
    sector_measures,
    verify_decomposition,
)
from .moebius import (
    INF,
    ORIGIN,
    H3Point,
    MoebiusMap,
    apply_sphere,
    compose,
    cross_ratio,
    h3_displacement,
    loxodromic_data,
    poisson_kernel,
)
from .periods import annulus_extremal_length, length_q_inequality, period_matrix, tail_certificate

__version__ = "0.1.0"
