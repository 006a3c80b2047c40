import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_stream_set
from pseapprox.hens import (HensInstance, MatchInstance, MatchPlan, MultistageCandidate, Stream,
                            UnbalancedInstanceError, alternating_multistage_heuristic,
                            build_matches_milp, build_multistage_qp, build_temperature_intervals,
                            check_multistage_solution, energy_balance_optimum,
                            greedy_packing_matches, lower_bound_matches, lp_round_matches,
                            match_instance_from_streams, min_utility_cascade,
                            single_interval_matches, solve_matches_exact,
                            transshipment_utility_lp, utility_energy_lower_bound,
                            validate_hens, validate_match_plan, water_filling_matches)
from pseapprox.instances import read_instance_file, to_domain

HEURISTICS = (lp_round_matches, water_filling_matches, greedy_packing_matches)


def worked():
    return HensInstance([Stream("h1", "hot", 160, 60, 2)], [Stream("c1", "cold", 40, 140, 2)],
                        dt_min=10)


def deficit():
    return HensInstance([Stream("h1", "hot", 100, 50, 2)], [Stream("c1", "cold", 50, 100, 2.8)])


# --- grid and utilities ---------------------------------------------------------------------

def test_grid_worked_example():
    grid = build_temperature_intervals(worked())
    assert grid.boundaries == (150, 140, 50, 40)
    assert grid.sigma["h1"] == pytest.approx((20, 180, 0))
    assert grid.delta["c1"] == pytest.approx((0, 180, 20))


def test_validate_hens_flags_reversed_stream():
    assert validate_hens(worked()).ok
    bad = HensInstance([Stream("h1", "hot", 50, 60, 1)], [])
    assert not validate_hens(bad).ok


def test_cascade_examples():
    t = min_utility_cascade(worked())
    assert (t.hot_utility, t.cold_utility) == (0, 0)
    t = min_utility_cascade(deficit())
    assert t.hot_utility == pytest.approx(40) and t.cold_utility == pytest.approx(0)
    lone = HensInstance([Stream("h1", "hot", 100, 50, 2), Stream("h2", "hot", 80, 60, 1)], [])
    t = min_utility_cascade(lone)
    assert t.hot_utility == 0 and t.cold_utility == pytest.approx(lone.total_hot)


def test_utility_file(instance_path):
    inst = to_domain(read_instance_file(instance_path("hens_utility_deficit.json")))
    assert min_utility_cascade(inst) == transshipment_utility_lp(inst)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_cascade_equals_transshipment_lp(seed):
    inst = random_stream_set(np.random.default_rng(seed))
    a, b = min_utility_cascade(inst), transshipment_utility_lp(inst)
    assert a.hot_utility == pytest.approx(b.hot_utility, abs=1e-6)
    assert a.cold_utility == pytest.approx(b.cold_utility, abs=1e-6)
    assert a.cost >= utility_energy_lower_bound(inst) - 1e-6


# --- minimum matches ------------------------------------------------------------------------

def test_one_by_one_needs_one_match():
    mi = MatchInstance.single_interval([5], [5])
    plan, status = solve_matches_exact(mi)
    assert status == "optimal" and plan.count == 1


def test_matches_milp_binary_count():
    mi = MatchInstance.single_interval([6, 4], [5, 5])
    assert len(build_matches_milp(mi).integer_ids) == 4
    assert lower_bound_matches(mi) >= 2


def test_heuristics_on_small_example(instance_path):
    mi = match_instance_from_streams(to_domain(read_instance_file(
        instance_path("hens_matches_6_4_5_5.json"))))
    exact, _ = solve_matches_exact(mi)
    assert exact.count == 3
    for heur in HEURISTICS:
        res = heur(mi)
        assert res.ok and validate_match_plan(mi, res.solution).ok
        assert res.solution.count >= exact.count
        assert res.certificate.ratio >= 1


def test_single_interval_rule():
    res = single_interval_matches(MatchInstance.single_interval([6, 4], [5, 5]))
    assert res.ok and res.solution.count == 3
    res = single_interval_matches(MatchInstance.single_interval([3, 3, 3], [3, 3, 3]))
    assert res.solution.count == 3
    two = MatchInstance(["h1"], ["c1"], {"h1": (1, 0)}, {"c1": (0, 1)})
    with pytest.raises(ValueError):
        single_interval_matches(two)


def test_validator_catches_violations():
    mi = MatchInstance(["h1"], ["c1"], {"h1": (0, 5)}, {"c1": (5, 0)})
    upward = MatchPlan((("h1", "c1"),), {("h1", 1, "c1", 0): 5.0})
    assert any("hotter interval" in e for e in validate_match_plan(mi, upward).errors)
    flat = MatchInstance.single_interval([5], [5])
    closed = MatchPlan((), {("h1", 0, "c1", 0): 5.0})
    assert any("closed match" in e for e in validate_match_plan(flat, closed).errors)


def test_unbalanced_instance_rejected():
    with pytest.raises(UnbalancedInstanceError):
        MatchInstance.single_interval([5], [6]).check_routable()
    with pytest.raises(UnbalancedInstanceError):
        MatchInstance(["h1"], ["c1"], {"h1": (0, 5)}, {"c1": (5, 0)}).check_routable()


# --- multistage -----------------------------------------------------------------------------

def test_multistage_bilinear_rows():
    m = build_multistage_qp(worked(), 1)
    rows = set(m.products)
    assert rows == {"hot_heat(h1,c1,1)", "cold_heat(h1,c1,1)", "hot_mixing(h1,1)",
                    "cold_mixing(c1,1)"}


def test_energy_balance_candidate_is_clean_and_optimal():
    for inst in (worked(), deficit()):
        cand = energy_balance_optimum(inst)
        assert check_multistage_solution(inst, cand).feasible
        assert cand.cost(inst) == pytest.approx(utility_energy_lower_bound(inst))


def test_checker_reports_bounds_and_split():
    inst = worked()
    cand = energy_balance_optimum(inst)
    neg = MultistageCandidate(1, dict(cand.values, **{"fH(h1,c1,1)": -1.0}))
    assert any(lab.startswith("bound:") for lab in check_multistage_solution(inst, neg).labels())
    split = MultistageCandidate(1, dict(cand.values, **{"fH(h1,c1,1)": cand.get("fH", "h1", "c1", 1) / 2}))
    assert "hot_split(h1,1)" in check_multistage_solution(inst, split).labels()


def test_multistage_heuristic_without_cold_streams():
    inst = HensInstance([Stream("h1", "hot", 100, 50, 2)], [])
    res = alternating_multistage_heuristic(inst, 1)
    assert res.ok and res.solution.cost(inst) == pytest.approx(inst.total_hot)


def test_multistage_pair_file(instance_path):
    inst = to_domain(read_instance_file(instance_path("hens_multistage_pair.json")))
    res = alternating_multistage_heuristic(inst, 2, seed=3)
    assert res.ok and check_multistage_solution(inst, res.solution).feasible
    assert res.solution.cost(inst) >= utility_energy_lower_bound(inst) - 1e-6
