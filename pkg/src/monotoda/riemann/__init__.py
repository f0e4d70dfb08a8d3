"""Periods, Abel map and theta-divisor data of hyperelliptic curves."""
from .homology import (BranchData, HomologyBasis, HomologyError, branch_points,
                       chain_intersections, cover_monodromy, cyclic_basis, homology_basis)
from .periods import (IndefiniteTauError, PeriodData, PeriodMatrixError, chain_periods,
                      lattice_coords, lattice_defect, periods, reduce_to_cell, toda_periods)
from .es import (ESData, ESInfeasibleError, ESReport, UData, es_residual, es_solve,
                 gamma_infinity_periods, half_period_defect, oriented_cyclic_periods,
                 pullback_vector)
from .abel import (AbelMap, AbelPoint, CurvePoint, RiemannConstants, abel_map, base_point_data,
                   inf_minus, inf_plus, involution, random_point, riemann_constants)
from .reducibility import (CofactorReport, ReducibilityReport, block_C, cofactor_identity,
                           cover_M, cover_matrices, covering_curve_n2, cyclic_block_matrices,
                           cyclic_index_rotation, poincare_defect, random_cyclic_blocks,
                           reducibility_check, synthetic_period_blocks, theta_rotation_defect)
