"""State-task network scheduling: model, MILP builders, heuristics."""
from .heuristics import greedy_list_schedule, lp_relaxation_bound, lp_round_schedule
from .models import (MultiUnitTaskError, build_continuous_time_model, build_discrete_time_model,
                     schedule_from_assignment)
from .stn import (Schedule, ScheduleEntry, State, StateTaskNetwork, Task, UnitOption, inventories,
                  makespan, task_order, validate_schedule, validate_stn)

__all__ = [
    "MultiUnitTaskError", "Schedule", "ScheduleEntry", "State", "StateTaskNetwork", "Task",
    "UnitOption", "build_continuous_time_model", "build_discrete_time_model",
    "greedy_list_schedule", "inventories", "lp_relaxation_bound", "lp_round_schedule", "makespan",
    "schedule_from_assignment", "task_order", "validate_schedule", "validate_stn",
]
