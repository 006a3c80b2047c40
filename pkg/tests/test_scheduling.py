import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import enumerate_min_makespan
from pseapprox import export_lp_text
from pseapprox.instances import random_stn, read_instance_file, to_domain
from pseapprox.scheduling import (MultiUnitTaskError, Schedule, ScheduleEntry, State,
                                  StateTaskNetwork, Task, UnitOption, build_continuous_time_model,
                                  build_discrete_time_model, greedy_list_schedule,
                                  lp_relaxation_bound, lp_round_schedule, makespan,
                                  schedule_from_assignment, validate_schedule, validate_stn)
from pseapprox.solvers import solve_milp


@pytest.fixture
def one_task(instance_path):
    return to_domain(read_instance_file(instance_path("stn_one_task.json")))


@pytest.fixture
def chain(instance_path):
    return to_domain(read_instance_file(instance_path("stn_two_task_chain.json")))


def test_validate_stn(one_task):
    assert validate_stn(one_task).ok
    bad = StateTaskNetwork([State("a"), State("b")],
                           [Task("T", [UnitOption("U", 1, (0, 1))], {}, {"a": 0.5, "b": 0.4})], 2)
    assert not validate_stn(bad).ok


def test_figure_shaped_recipe_is_valid():
    # heating, two reactions and a separation sharing a reactor
    states = [State("feedA"), State("feedB"), State("hotA"), State("int"), State("impure"),
              State("p1", 5), State("p2", 5)]
    tasks = [
        Task("heat", [UnitOption("heater", 1, (0, 10))], {"feedA": 1}, {"hotA": 1}),
        Task("r1", [UnitOption("reactor", 2, (0, 10))], {"feedB": 0.5, "hotA": 0.5}, {"int": 1}),
        Task("r2", [UnitOption("reactor", 2, (0, 10))], {"int": 1}, {"impure": 1}),
        Task("sep", [UnitOption("still", 1, (0, 10))], {"impure": 1}, {"p1": 0.5, "p2": 0.5}),
    ]
    assert validate_stn(StateTaskNetwork(states, tasks, 8)).ok


def test_discrete_model_binary_count(one_task):
    m = build_discrete_time_model(one_task)
    assert len(m.integer_ids) == len(one_task.tasks) * len(one_task.units) * one_task.horizon == 3


def test_exact_makespans(one_task, chain):
    for stn, expected in ((one_task, 2), (chain, 2)):
        out = solve_milp(build_discrete_time_model(stn))
        assert out.optimal and out.objective == pytest.approx(expected)
        assert enumerate_min_makespan(stn) == expected
        assert validate_schedule(stn, schedule_from_assignment(stn, out.primal)).ok


def test_discrete_model_is_reproducible(chain):
    a, b = build_discrete_time_model(chain), build_discrete_time_model(chain)
    assert sorted(map(repr, a.constraints)) == sorted(map(repr, b.constraints))


def test_continuous_model(one_task):
    m = build_continuous_time_model(one_task)
    rows = m.constraint_map
    assert rows["t_first"].rhs == 0 and rows["t_last"].rhs == one_task.horizon_time
    assert export_lp_text(m) == export_lp_text(build_continuous_time_model(one_task))
    out = solve_milp(m)
    task = one_task.tasks[0]
    assert out.optimal
    k = next(k for k in (1, 2, 3) if out.primal[f"xS(A,{k})"] > 0.5)
    assert out.primal[f"p(A,{k})"] == pytest.approx(task.alpha + task.beta * out.primal[f"b(A,{k})"])


def test_continuous_model_rejects_multi_unit_tasks():
    stn = StateTaskNetwork([State("s", 1)], [Task("T", [UnitOption("U1", 1, (0, 5)),
                                                         UnitOption("U2", 1, (0, 5))],
                                                  {}, {"s": 1})], 2)
    with pytest.raises(MultiUnitTaskError):
        build_continuous_time_model(stn)


def test_validate_schedule_cases(one_task, chain):
    good = Schedule((ScheduleEntry("A", "U", 0, 5.0, 2),))
    assert validate_schedule(one_task, good).ok
    big = Schedule((ScheduleEntry("A", "U", 0, 6.0, 2),))
    assert any("batch bound" in e for e in validate_schedule(one_task, big).errors)
    early = Schedule((ScheduleEntry("A", "U1", 0, 4.0, 1), ScheduleEntry("B", "U2", 0, 4.0, 1)))
    assert any("negative inventory" in e for e in validate_schedule(chain, early).errors)


def test_makespan_examples():
    assert makespan(Schedule()) == 0
    assert makespan(Schedule((ScheduleEntry("A", "U", 0, 1, 2),))) == 2
    two = Schedule((ScheduleEntry("A", "U", 0, 1, 2), ScheduleEntry("B", "V", 0, 1, 3)))
    assert makespan(two) == 3


def test_heuristics_on_files(one_task, chain):
    for stn in (one_task, chain):
        exact = solve_milp(build_discrete_time_model(stn)).objective
        for heur in (lp_round_schedule, greedy_list_schedule):
            res = heur(stn)
            assert res.ok and validate_schedule(stn, res.solution).ok
            assert res.solution.makespan >= exact - 1e-6
    res = lp_round_schedule(one_task)
    assert res.solution.makespan == 2


def test_greedy_packs_independent_tasks():
    stn = StateTaskNetwork([State("a", 2), State("b", 2)],
                           [Task("TA", [UnitOption("U", 2, (0, 5))], {}, {"a": 1}),
                            Task("TB", [UnitOption("U", 3, (0, 5))], {}, {"b": 1})], 6)
    res = greedy_list_schedule(stn)
    assert res.ok and res.solution.makespan == 5


def test_greedy_declares_failure_when_horizon_too_short():
    stn = StateTaskNetwork([State("a", 20)], [Task("T", [UnitOption("U", 2, (0, 5))], {}, {"a": 1})], 3)
    assert not greedy_list_schedule(stn).ok


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 1000))
def test_bound_ordering_on_random_chains(seed):
    stn = random_stn(seed, 2, 1, demand=8.0)
    exact = solve_milp(build_discrete_time_model(stn))
    lp = lp_relaxation_bound(stn)
    assert exact.optimal and lp <= exact.objective + 1e-6
    for heur in (lp_round_schedule, greedy_list_schedule):
        res = heur(stn)
        if res.ok:
            assert validate_schedule(stn, res.solution).ok
            assert res.solution.makespan >= exact.objective - 1e-6
