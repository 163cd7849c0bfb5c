"""poalab: exact price-of-anarchy computation and incentive/utility design.

Classes of generalized congestion games (and distributed welfare games) are
described by basis function pairs; tractable linear programs characterize the
exact price of anarchy, synthesize PoA-minimizing generating functions, and
drive the construction of matching worst-case instances.  A brute-force game
oracle validates every LP result independently.
"""

from .basis import (BasisPair, Side, bpr_basis, bpr_pair, from_congestion,
                    from_incentivized, load_basis_class, marginal_contribution_welfare,
                    marginal_cost_pair, perception_affine_basis, perception_pair,
                    polynomial_basis, polynomial_marginal_cost_basis,
                    random_concave_welfare, save_basis_class)
from .characterize import (PoaReport, bilo_upper_bound, characterize_cost,
                           characterize_welfare, check_reduction_equivalence)
from .game_oracle import (ConvergenceError, GameInstance, OracleReport,
                          best_response_dynamics, check_generalized_smoothness,
                          enumerate_equilibria, game_from_json, game_to_json, load_game,
                          make_game, poa_bound_from_certificate, potential_value,
                          random_in_class_game, save_game, system_value, user_cost)
from .index_set import Triplet, TripletSet, enumerate_full, enumerate_reduced
from .lp_core import (DEFAULT_TOLERANCES, LinearProgram, LpSolution, LpStatus,
                      SolverFailureError, SolverTolerances, solve,
                      solve_two_var_geometric)
from .optimize import (FixedIncentiveResult, OptimalRule, class_poa_from_rules,
                       optimize_cost_rule, optimize_fixed_incentive,
                       optimize_welfare_rule, pair_from_rule)
from .rng import Xoshiro256StarStar
from .worstcase import (RecipeExtractionError, Scenario, WorstCaseRecipe, build_game,
                        certificate_profiles, extract_recipe, slope_balance_residual)

__version__ = "0.1.0"
