"""Heat exchanger network synthesis: utility targets, matches and multistage models."""
from .matches import (COLD_UTILITY, HOT_UTILITY, MatchInstance, MatchPlan, MatchPlanReport,
                      UnbalancedInstanceError, build_matches_milp, greedy_packing_matches,
                      lower_bound_matches, lp_round_matches, match_instance_from_streams,
                      min_matches_single_interval_exact, min_matches_subset_oracle,
                      random_match_instance, routable_by_flow, route_on_matches,
                      single_interval_matches, solve_matches_exact, validate_match_plan,
                      water_filling_matches)
from .multistage import (MONOTONICITY, MultistageCandidate, alternating_multistage_heuristic,
                         build_multistage_qp, check_multistage_solution, energy_balance_optimum)
from .streams import (COLD, HOT, HensInstance, Stream, TemperatureGrid, UtilityTarget,
                      build_temperature_intervals, min_utility_cascade,
                      transshipment_utility_lp, utility_energy_lower_bound, validate_hens)

__all__ = [
    "COLD", "COLD_UTILITY", "HOT", "HOT_UTILITY", "MONOTONICITY", "HensInstance",
    "MatchInstance", "MatchPlan", "MatchPlanReport", "MultistageCandidate", "Stream",
    "TemperatureGrid", "UnbalancedInstanceError", "UtilityTarget",
    "alternating_multistage_heuristic", "build_matches_milp", "build_multistage_qp",
    "build_temperature_intervals", "check_multistage_solution", "energy_balance_optimum",
    "greedy_packing_matches", "lower_bound_matches", "lp_round_matches",
    "match_instance_from_streams", "min_matches_single_interval_exact",
    "min_matches_subset_oracle", "min_utility_cascade", "random_match_instance",
    "routable_by_flow", "route_on_matches", "single_interval_matches", "solve_matches_exact",
    "transshipment_utility_lp", "utility_energy_lower_bound", "validate_hens",
    "validate_match_plan", "water_filling_matches",
]
