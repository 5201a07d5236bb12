from .options import DesignOptions
from .single import GridSearchSpec, optimal_single, single_objective, simplex_grid, exhaustive_search
from .clustering import kmeanspp_seed, center_update, fixed_point_residual
from .dca import DcProblem, dc_transform, dc_objective, dca_gradient, convex_subproblem
from .discrete import design_kmeanspp, design_dca, round_soft_assignment
from .continuous import (
    PreferenceSpec, SampleSet, sample_preference, evaluation_sample,
    design_sampling, design_continuous_saa, evaluate_expected_bits,
)
from .geometry import PartitionN3, exact_partition_n3, exact_iteration_n3, design_exact_n3
from .twouser import (
    JointPreference, TwoUserBudget, TwoUserDesign, TwoUserSoftAssignment, TwoUserResult,
    joint_pref_alpha, two_user_cost, twouser_self_decodable_bits,
    design_twouser_kmeanspp, design_twouser_dca,
)
