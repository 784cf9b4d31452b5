"""Elliptic first-order systems: ellipticity constants, spectral solves,
and near-operator fixed-point iteration on the periodic torus.

The pieces fit together in three layers:

* ``tensor``, ``ellipticity``, ``sampling`` work with constant-coefficient
  tensors A and measure ellipticity and operator nearness.
* ``grid``, ``linear``, ``fieldfile`` discretize the torus, invert
  A:Du = f mode by mode, and serialize fields.
* ``nonlinear``, ``oracle``, ``catalog`` iterate fully nonlinear systems
  toward the fixed point, cross-check against dense linear algebra, and
  provide ready-made example systems.
"""

from .catalog import (
    cauchy_riemann,
    dirac,
    generalized_cauchy_riemann,
    lipschitz_perturbation,
    parse_catalog_ref,
    variable_linear,
)
from .ellipticity import (
    EllipticityReport,
    NearnessReport,
    NonEllipticError,
    cached_nu,
    ellipticity_constant,
    is_strictly_elliptic,
    nearness_constant,
)
from .fieldfile import read_field, write_field
from .grid import (
    GridFunction,
    PeriodicGrid,
    dft_forward,
    dft_inverse,
    gradient,
    norm_l2,
    norm_l2star,
    project_mean_zero,
    random_band_limited,
)
from .linear import (
    MultiplierPlan,
    RegularizerSequence,
    riesz_constant,
    solve_linear,
    solve_representation,
    verify_apriori,
)
from .nonlinear import (
    DivergenceError,
    IterationTrace,
    NonlinearOperator,
    campanato_solve,
    near_operator_check,
    verify_comparison,
)
from .oracle import assemble_dense, brute_nu, solve_dense
from .sampling import SamplingPlan, rng_from_seed, unit_sphere_points
from .tensor import ConstantTensor, contract, direction_matrix, operator_norm

__version__ = "0.1.0"

__all__ = [
    "ConstantTensor",
    "DivergenceError",
    "EllipticityReport",
    "GridFunction",
    "IterationTrace",
    "MultiplierPlan",
    "NearnessReport",
    "NonEllipticError",
    "NonlinearOperator",
    "PeriodicGrid",
    "RegularizerSequence",
    "SamplingPlan",
    "assemble_dense",
    "brute_nu",
    "cached_nu",
    "campanato_solve",
    "cauchy_riemann",
    "contract",
    "dft_forward",
    "dft_inverse",
    "dirac",
    "direction_matrix",
    "ellipticity_constant",
    "generalized_cauchy_riemann",
    "gradient",
    "is_strictly_elliptic",
    "lipschitz_perturbation",
    "near_operator_check",
    "nearness_constant",
    "norm_l2",
    "norm_l2star",
    "operator_norm",
    "parse_catalog_ref",
    "project_mean_zero",
    "random_band_limited",
    "read_field",
    "riesz_constant",
    "rng_from_seed",
    "solve_dense",
    "solve_linear",
    "solve_representation",
    "unit_sphere_points",
    "variable_linear",
    "verify_apriori",
    "verify_comparison",
    "write_field",
    "__version__",
]
