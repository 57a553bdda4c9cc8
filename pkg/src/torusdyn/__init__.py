"""torusdyn: exact classification of toral automorphisms and numerical
experiments on their volume-preserving perturbations."""

from .errors import (
    BudgetError,
    InputError,
    InvariantError,
    NotErgodicError,
    NumericsError,
    OutOfHypothesesError,
    TorusDynError,
)
from .intmatrix import IntMatrix, matrix_from_json, matrix_to_json
from .intpoly import (
    IntPoly,
    count_real_roots,
    count_unitary_roots,
    cyclotomic,
    cyclotomic_free,
    is_poly_in_xm,
    is_reciprocal,
    reciprocal_part,
)
from .lattice import Lattice, hnf_rows, invariant_factors, is_cyclic_vector, kernel_lattice, saturate, snf
from .zfactor import factor_z, is_irreducible_z
from .splitting import (
    AdaptedNorm,
    ClassificationReport,
    Splitting,
    adapted_norm,
    center_dimension,
    classify,
    compute_splitting,
    exact_modulus_counts,
    unit_disk_root_count,
)
from .pseudo_anosov import (
    PASubspace,
    orbit_sublattice,
    pa_condition_cyclic_sample,
    pa_condition_polynomial,
    pseudo_anosov_subspace,
)
from .diophantine import (
    badly_approximable_search_dim4,
    badly_approximable_search_dim6,
    center_norm_minimum,
    center_plane_chart,
    lattice_ball,
)
from .perturbed import PerturbedMap, Shear, TrigProfile, salem_example
from .manifolds import GraphPatch, LeafSolver, graph_transform, measure_kappa
from .holonomy import (
    commutation_defect,
    deck_holonomy,
    deck_lipschitz_fit,
    deviation_profile,
    holonomy_lipschitz_probe,
)
from .saturation import (
    PLCurve,
    SaturationSet,
    build_saturation_set,
    cone_member,
    coverage_check,
    find_overlap_translation,
    overlap_translation_linear,
    winding_curve,
)
from .winding import winding_number, winding_number_2d

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
