"""Indefinite abstract interpolation: Pontryagin-space tools, rational
matrix functions, de Branges-Rovnyak spaces, unitary colligations and
the resolvent-matrix description of solutions."""

__version__ = "0.1.0"

from .errors import (AipError, DeterminateCase, DomainError, ExtensionInfeasible, InvalidInput,
                     KLConsistencyError, NotGeneralizedSchur, NotSimple, NumericalRankFailure,
                     ParseError, PencilSingular, PoleError, UnsupportedPoleStructure,
                     ValidationError)
from .pontryagin import (GramSpace, Inertia, KernelEvaluator, estimate_kernel_signature,
                         indefinite_adjoint, inertia, isometry_residual,
                         negative_squares_estimate, unitarity_residual)
from .ratfun import (BlaschkePotapovProduct, RationalMatrixFunction, bp_degree, bp_evaluate,
                     delta_pinv, krein_langer_left, krein_langer_right, schur_membership)
from .hardy import (BoundaryFunction, CircleGrid, DBRSpace, dbr_inner, dbr_membership,
                    model_space_basis, project_minus, project_plus)
from .colligation import (Colligation, characteristic_function, check_kernel_factorization,
                          ds_kernel, fourier_representation, functional_model, is_simple,
                          random_colligation)
from .aip import (AipData, ResolventMatrix, SolutionReport, build_isometry_v,
                  build_unitary_extension, check_j_inner, check_potapov_class,
                  encode_nevanlinna_pick, lft_solve, pencil_regularity, phi_map,
                  random_instance, resolvent_matrix, validate, verify_solution)
from .serialize import instance_from_json, instance_to_json, load_instance, parse_instance
