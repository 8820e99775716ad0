"""Certified computation in Lipschitz free p-spaces over finite metric
spaces: exact norms, cube-lattice retractions with two-sided Lipschitz
bounds, and dyadic basis decompositions with quantitative norming
constants."""

from .constants import (
    bm_bound,
    c_const,
    c_const_sup_oracle,
    retraction_bounds,
    rho,
    tau,
)
from .cubes import CubeComplex, find_cube, lambda_support, lambda_weight, scalar_coeff
from .dyadic import (
    BasisCombination,
    BasisIndex,
    analyze,
    basis_element,
    basis_norm_check,
    hat_decompose,
    line_path,
    molecule_decompose,
    step_decompose,
    synthesize,
    verify_norming,
)
from .freenorm import (
    Decomposition,
    DualCertificate,
    FreeElement,
    Molecule,
    dual_lower_bound,
    evaluate,
    exact_norm_p1,
    exact_norm_small,
    p_cost,
    restricted_norm,
    upper_bound_from,
)
from .metric import (
    DyadicPoint,
    PointedFiniteMetric,
    coordinate_level,
    dyadic_grid,
    holder_distort,
    l1_space,
    level_of,
    neighbors,
)
from .retraction import (
    RetractionContext,
    SamplerConfig,
    build_context,
    estimate_lipschitz,
    lipschitz_upper_decomposition,
    lower_bound_witness,
    rescale_check,
    retract,
    translate_element,
)

__all__ = [name for name in dir() if not name.startswith("_")]
