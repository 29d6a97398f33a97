"""Homogeneous elliptic operators: symbols, polynomial actions, growth spaces,
torus multipliers, finite-part pairings and the Kelvin transform."""
from .dn import (
    DNSystem,
    check_dn_ellipticity,
    diagonal_system,
    dn_cofactor,
    dn_det,
    dn_validate,
    random_dn_system,
    stokes,
    verify_cofactor_identity,
)
from .finitepart import FinitePartQuad, FinitePartResult, PolyGaussian, SampledTestFunction, finite_part_pairing
from .growth import (
    AnalyticField,
    GrowthProfile,
    QuadratureSpec,
    RadiusLadder,
    ball_norm,
    ball_norms,
    check_embedding_sandwich,
    check_integration,
    check_product,
    classify,
    fit_exponent,
    m_norm,
    weighted_norm,
)
from .kelvin import (
    BoundaryData,
    ExteriorDomain,
    exterior_solve,
    invert_point,
    kelvin_transform,
    solve_ball_dirichlet,
    transform_data,
)
from .polyaction import (
    FormulaViolation,
    Polynomial,
    harmonic_space,
    nu,
    operator_matrix,
    poly_apply,
    poly_preimage,
    surjectivity_check,
)
from .symbols import (
    ScalarOperator,
    bilaplacian,
    builtin_operator,
    cauchy_riemann,
    check_ellipticity,
    eval_symbol,
    fourier_symbol,
    laplacian,
    op_add,
    op_multiply,
    op_power,
    op_scale,
    partial,
)
from .torus import (
    GridField,
    GridSpec,
    VectorGridField,
    cz_ratio,
    cz_survey,
    derivative_field,
    read_grid,
    solve_scalar,
    solve_system,
    solve_system_cofactor,
    spectral_apply,
    write_grid,
)

__version__ = "0.1.0"
