"""Exact openness/regularity certificates for sampled set-valued maps."""

__version__ = "0.1.0"

from .coincidence import (CoincidenceInstance, FixpointReport, fix_set,
                          parametric_fix, sufficient_report, suggested_radii,
                          sweep_fixp, verify_fixp_bound,
                          verify_fixp_bound_alt)
from .composition import (CompositionCertificate, ConclusionRow,
                          HypothesisCheck, PreconditionError, RateConstants,
                          certify_lyusternik_graves, certify_main_const,
                          certify_op_comp, certify_part_A, certify_part_B)
from .ekeland import (DISCRETIZATION_GAP, SUCCESS, EkelandPoint,
                      ScaledMaxNorm, SolveResult, ekeland_point,
                      solve_inclusion)
from .implicit import (EstimateReport, GammaInstance, GammaReport,
                       HypothesisRefuted, ImplicitInstance, VerificationError,
                       bound_lip_S, bound_reg_S, gamma_map, implicit_map,
                       sweep_gamma, sweep_pSx, sweep_xSp,
                       verify_gamma_lipschitz, verify_pSx_estimate,
                       verify_xSp_estimate)
from .instance import CapExceeded, InstanceError, InstanceFile, load_instance
from .maps import (BiMultiMap, MultiMap, ParamMultiMap, bimultimap,
                   compose_g, constant_map, difference, from_linear,
                   identity_map, image_of_set, localize, multimap,
                   param_multimap, subtraction_bimap)
from .metric import (GridSpace, OffGridError, Point, PointSet, as_point,
                     ball, distance_point_set, distance_set_set, grid_1d,
                     grid_space, inclusion_defect, nearest_in, product_space,
                     uncovered_witness)
from .moduli import (EquivalenceReport, LinearModuli, ModulusReport,
                     NeighborhoodConfig, check_equivalence_around,
                     check_equivalence_at, estimate_hemreg_at,
                     estimate_lip_around, estimate_lop_around,
                     estimate_partial, estimate_plop_at, estimate_psdclm_at,
                     estimate_reg_around, linear_operator_moduli,
                     recheck_report)
