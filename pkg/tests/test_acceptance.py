"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict that the terminal summary prints,
then asserts, so a failure is both visible in the summary and red.
"""
import math
import os

import numpy as np
import pytest

from conftest import ACCEPTANCE, INSTANCES
from generators import enumerate_min_makespan, pooling_net_small, random_lp, random_stream_set
from pseapprox.cli import main
from pseapprox.hens import (HensInstance, MatchInstance, MultistageCandidate, Stream,
                            alternating_multistage_heuristic, build_matches_milp,
                            build_temperature_intervals, check_multistage_solution,
                            greedy_packing_matches, lower_bound_matches, lp_round_matches,
                            min_matches_single_interval_exact, min_matches_subset_oracle,
                            min_utility_cascade, random_match_instance, single_interval_matches,
                            solve_matches_exact, transshipment_utility_lp,
                            utility_energy_lower_bound, validate_match_plan, water_filling_matches)
from pseapprox.hens.multistage import t_var
from pseapprox.instances import read_instance_file, to_domain
from pseapprox.model import check_feasibility
from pseapprox.pooling import (Pool, PoolInput, PoolingNetwork, PoolOutput, alternating_heuristic,
                               build_p_formulation, build_pq_formulation,
                               classify_pooling_instance, discrete_to_solution,
                               discretize_proportions, grid_oracle_pooling, mccormick_bound,
                               p_assignment, pq_assignment)
from pseapprox.scheduling import (build_continuous_time_model, build_discrete_time_model,
                                  greedy_list_schedule, lp_relaxation_bound, lp_round_schedule,
                                  schedule_from_assignment, validate_schedule)
from pseapprox.solvers import (brute_force_binary_oracle, enumerate_vertices_oracle, solve_lp,
                               solve_milp)

INF = math.inf


def record(num, ok, detail):
    ACCEPTANCE[num] = (bool(ok), detail)
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


# --- 1. LP engine ---------------------------------------------------------------------------

def test_criterion_01_lp_matches_vertex_enumeration():
    rng = np.random.default_rng(101)
    bad = []
    for k in range(200):
        model = random_lp(rng)
        got, ref = solve_lp(model), enumerate_vertices_oracle(model)
        if got.status != ref.status:
            bad.append((k, got.status, ref.status))
        elif ref.optimal and abs(got.objective - ref.objective) > 1e-6:
            bad.append((k, got.objective, ref.objective))
    record(1, not bad, f"200 random LPs vs vertex enumeration, tol 1e-6, mismatches={bad[:3]}")
    assert not bad


# --- 2. MILP engine -------------------------------------------------------------------------

def test_criterion_02_milp_matches_brute_force():
    rng = np.random.default_rng(202)
    bad = []
    for k in range(100):
        model = random_lp(rng, max_vars=3, max_rows=6, integer_ids=int(rng.integers(1, 9)))
        got, ref = solve_milp(model), brute_force_binary_oracle(model)
        if ref.optimal != got.optimal:
            bad.append((k, got.status, ref.status))
        elif ref.optimal and abs(got.objective - ref.objective) > 1e-6:
            bad.append((k, got.objective, ref.objective))
    record(2, not bad, f"100 random MILPs (<=8 binaries) vs brute force, tol 1e-6, "
                       f"mismatches={bad[:3]}")
    assert not bad


# --- 3. minimum number of matches ------------------------------------------------------------

HEURISTICS = (lp_round_matches, water_filling_matches, greedy_packing_matches,
              single_interval_matches)


def test_criterion_03_min_matches():
    problems = []
    worked = MatchInstance.single_interval([6, 4], [5, 5])
    plan, status = solve_matches_exact(worked)
    if not (status == "optimal" and plan.count == 3 and min_matches_subset_oracle(worked) == 3):
        problems.append("worked instance optimum is not 3")
    rng = np.random.default_rng(303)
    for k in range(100):
        mi = random_match_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)),
                                   int(rng.integers(1, 4)))
        plan, status = solve_matches_exact(mi)
        opt = plan.count
        if status != "optimal" or opt != min_matches_subset_oracle(mi):
            problems.append((k, "exact", opt))
            continue
        if lower_bound_matches(mi) > opt:
            problems.append((k, "lower bound"))
        # single-interval greedy is defined for one interval only
        for heur in HEURISTICS if mi.intervals == 1 else HEURISTICS[:3]:
            res = heur(mi)
            if not (res.ok and validate_match_plan(mi, res.solution).ok
                    and res.solution.count >= opt and res.certificate.ratio >= 1):
                problems.append((k, heur.__name__))
    record(3, not problems, f"worked h=[6,4] c=[5,5] optimum 3; 100 random instances, "
                            f"exact == subset oracle, heuristics clean, problems={problems[:3]}")
    assert not problems


# --- 4. single interval ratio ---------------------------------------------------------------

def test_criterion_04_single_interval_ratio():
    rng = np.random.default_rng(404)
    worst, violators = 0.0, []
    for k in range(100):
        mi = random_match_instance(rng, int(rng.integers(1, 7)), int(rng.integers(1, 7)), 1)
        exact = min_matches_single_interval_exact([mi.sigma[i][0] for i in mi.hot],
                                                  [mi.delta[j][0] for j in mi.cold])
        ratio = single_interval_matches(mi).solution.count / exact
        worst = max(worst, ratio)
        if ratio > 2.0:
            violators.append((k, ratio))
    record(4, not violators, f"100 single-interval instances, worst ratio {worst:.4f} <= 2.0, "
                             f"violators={violators}")
    assert not violators


# --- 5. minimum utility ---------------------------------------------------------------------

def test_criterion_05_min_utility():
    problems = []
    worked = HensInstance([Stream("h1", "hot", 150, 50, 2)], [Stream("c1", "cold", 40, 160, 2)])
    tgt = min_utility_cascade(worked)
    if abs(tgt.hot_utility - 40) > 1e-9 or abs(tgt.cold_utility) > 1e-9:
        problems.append(("worked", tgt.hot_utility, tgt.cold_utility))
    rng = np.random.default_rng(505)
    for k in range(100):
        inst = random_stream_set(rng)
        cas, lp = min_utility_cascade(inst), transshipment_utility_lp(inst)
        if abs(cas.cost - lp.cost) > 1e-6:
            problems.append((k, cas.cost, lp.cost))
        if cas.cost < utility_energy_lower_bound(inst) - 1e-9:
            problems.append((k, "below energy bound"))
    record(5, not problems, f"worked Q_HU=40 Q_CU=0; 100 random stream sets cascade == LP "
                            f"within 1e-6 and >= energy bound, problems={problems[:3]}")
    assert not problems


# --- 6. pooling -----------------------------------------------------------------------------

def test_criterion_06_pooling():
    rng = np.random.default_rng(606)
    problems = []
    for seed in range(50):
        net = pooling_net_small(seed, rng)
        bp, bq = mccormick_bound(net, "p"), mccormick_bound(net, "pq")
        if bq < bp - 1e-6:
            problems.append((seed, "a", bp, bq))
        pw = [mccormick_bound(net, "pq", n) for n in (1, 2, 4)]
        if any(b < a - 1e-6 for a, b in zip(pw, pw[1:])):
            problems.append((seed, "d", pw))
        P = build_p_formulation(net)
        for res in (grid_oracle_pooling(net, 4, bound=bq), alternating_heuristic(net, bound=bq)):
            if not res.ok:
                problems.append((seed, "b", res.message))
                continue
            if not check_feasibility(P, p_assignment(net, res.solution), 1e-6).feasible \
                    or res.solution.objective < bq - 1e-6:
                problems.append((seed, "b"))
        out = solve_milp(discretize_proportions(net, 4))
        PQ = build_pq_formulation(net)
        sol = discrete_to_solution(net, out.primal)
        if not check_feasibility(PQ, pq_assignment(net, sol), 1e-6).feasible:
            problems.append((seed, "c"))
    record(6, not problems, f"50 nets |I|<=3 |L|<=2 |J|<=2 |K|=1: (a) PQ>=P (b) heuristics "
                            f"feasible >= bound (c) discretized maps back (d) piecewise "
                            f"monotone, problems={problems[:3]}")
    assert not problems


# --- 7. pooling classifier ------------------------------------------------------------------

def _net(n_i, n_l, n_j, n_k, x=None, y=None, z=(), fixed=False):
    attrs = [f"k{a}" for a in range(n_k)]
    inputs = [PoolInput(f"i{a}", 1.0, (0.0, INF) if fixed else (0.0, 10.0),
                        {k: float(a) for k in attrs}) for a in range(1, n_i + 1)]
    pools = [Pool(f"l{b}", INF if fixed else 10.0) for b in range(1, n_l + 1)]
    outputs = [PoolOutput(f"j{c}", 5.0, (3.0, 3.0) if fixed else (0.0, 10.0),
                          {k: (0.0, 2.0) for k in attrs}) for c in range(1, n_j + 1)]
    if x is None:
        x = [(i.id, l.id) for i in inputs for l in pools]
    if y is None:
        y = [(l.id, j.id) for l in pools for j in outputs]
    return PoolingNetwork(inputs, pools, outputs, x, y, z)


TABLE_ROWS = [
    ("|I|=1", _net(1, 1, 2, 1), "P", ""),
    ("|J|=1", _net(2, 2, 1, 1), "P", ""),
    ("|L|=1,Z=0", _net(3, 1, 3, 3), "NP-hard", "independent set"),
    ("|K|=1", _net(3, 2, 3, 1), "NP-hard", "exact cover by 3-sets"),
    ("|L|=1,Z=0,|I|=O(1)", _net(2, 1, 3, 3), "P", ""),
    ("|L|=1,Z=0,|J|=O(1)", _net(3, 1, 2, 3), "P", ""),
    ("|L|=1,Z=0,|K|=O(1)", _net(3, 1, 3, 2), "P", ""),
    ("|I|=2,|K|=1", _net(2, 2, 3, 1), "NP-hard", "exact cover by 3-sets"),
    ("|J|=2,|K|=1", _net(3, 2, 2, 1), "NP-hard", "exact cover by 3-sets"),
    ("|I|=|J|=2,|K|=1", _net(2, 2, 2, 1), "NP-hard", "partition"),
    ("min-pool-degree=1", _net(3, 3, 3, 2, x=[("i1", "l1"), ("i2", "l2"), ("i3", "l3")]),
     "P", ""),
    ("out-degree<=2",
     _net(3, 2, 3, 2, y=[("l1", "j1"), ("l1", "j2"), ("l2", "j2"), ("l2", "j3")]),
     "NP-hard", "maximum satisfiability"),
    ("in-degree<=2",
     _net(3, 2, 3, 2, x=[("i1", "l1"), ("i1", "l2"), ("i2", "l1"), ("i3", "l2")],
          y=[("l1", "j1"), ("l1", "j2"), ("l2", "j2"), ("l2", "j3")], z=[("i1", "j1")]),
     "NP-hard", "minimum satisfiability"),
    ("|L|=1,|K|=1,fixed-demand", _net(3, 1, 3, 1, z=[("i1", "j1")], fixed=True), "P", ""),
]


def test_criterion_07_classifier_table():
    wrong = []
    for rule, net, table_class, reduction in TABLE_ROWS:
        got = classify_pooling_instance(net)
        if (got.rule, got.table_class, got.reduction) != (rule, table_class, reduction):
            wrong.append((rule, got.rule, got.table_class))
    record(7, not wrong, f"{len(TABLE_ROWS)} handcrafted nets, one per table row, "
                         f"wrong={wrong}")
    assert not wrong


# --- 8. scheduling --------------------------------------------------------------------------

def test_criterion_08_scheduling():
    problems = []
    for name in ("stn_one_task.json", "stn_two_task_chain.json"):
        stn = to_domain(read_instance_file(os.path.join(INSTANCES, name)))
        out = solve_milp(build_discrete_time_model(stn))
        oracle = enumerate_min_makespan(stn)
        if not out.optimal or abs(out.objective - oracle) > 1e-6:
            problems.append((name, "exact", out.objective, oracle))
        lp = lp_relaxation_bound(stn)
        for heur in (lp_round_schedule, greedy_list_schedule):
            res = heur(stn)
            if not res.ok or not validate_schedule(stn, res.solution).ok:
                problems.append((name, heur.__name__, "invalid"))
                continue
            span = res.solution.makespan
            if span < lp - 1e-6 or span < out.objective - 1e-6:
                problems.append((name, heur.__name__, span))
        exact_sched = schedule_from_assignment(stn, out.primal)
        if not validate_schedule(stn, exact_sched).ok:
            problems.append((name, "exact schedule invalid"))
    stn = to_domain(read_instance_file(os.path.join(INSTANCES, "stn_one_task.json")))
    ct = solve_milp(build_continuous_time_model(stn))
    task = stn.tasks[0]
    if not ct.optimal:
        problems.append(("continuous", ct.status))
    else:
        for k in range(1, stn.horizon + 1):
            x = ct.primal[f"xS({task.id},{k})"]
            p, b = ct.primal[f"p({task.id},{k})"], ct.primal[f"b({task.id},{k})"]
            if abs(p - (task.alpha * x + task.beta * b)) > 1e-6:
                problems.append(("continuous", "ptime", k))
    record(8, not problems, f"1-task and 2-task chain: exact == enumeration, heuristics clean "
                            f"and >= exact >= LP, continuous-time ptime rows hold, "
                            f"problems={problems}")
    assert not problems


# --- 9. multistage --------------------------------------------------------------------------

def _pair_candidate():
    """Hand-built cost-0 candidate: one stage, the whole hot stream heats the whole cold one."""
    v = {"fH(h1,c1,1)": 1.0, "fC(h1,c1,1)": 1.0, "q(h1,c1,1)": 100.0,
         "tH(h1,c1,1)": 50.0, "tC(h1,c1,1)": 140.0, "QCU(h1)": 0.0, "QHU(c1)": 0.0,
         t_var("h1", 0): 150.0, t_var("h1", 1): 50.0,
         t_var("c1", 0): 140.0, t_var("c1", 1): 40.0}
    return MultistageCandidate(1, v)


def test_criterion_09_multistage():
    problems = []
    inst = HensInstance([Stream("h1", "hot", 150, 50, 1)], [Stream("c1", "cold", 40, 140, 1)])
    cand = _pair_candidate()
    rep = check_multistage_solution(inst, cand)
    if not rep.feasible or cand.cost(inst) != 0.0:
        problems.append(("pair", rep.labels()))
    rng = np.random.default_rng(909)
    for k in range(25):
        inst = random_stream_set(rng)
        res = alternating_multistage_heuristic(inst, 2, seed=k)
        if not res.ok:
            problems.append((k, res.message))
            continue
        if not check_multistage_solution(inst, res.solution).feasible:
            problems.append((k, "checker"))
        if res.solution.cost(inst) < utility_energy_lower_bound(inst) - 1e-6:
            problems.append((k, "below bound"))
    record(9, not problems, f"pair candidate checker-clean with cost 0; 25 random instances "
                            f"alternating heuristic clean and >= energy bound, "
                            f"problems={problems[:3]}")
    assert not problems


# --- 10. determinism ------------------------------------------------------------------------

SUITE = {
    "seed": 7,
    "cells": [
        {"problem": "pooling", "method": "alternating", "instance": "pooling_haverly.json"},
        {"problem": "pooling", "method": "piecewise", "options": {"pieces": 2},
         "generate": {"kind": "pooling", "seed": 3,
                      "sizes": {"n_inputs": 2, "n_pools": 1, "n_outputs": 2}}},
        {"problem": "stn", "method": "lp-round", "instance": "stn_two_task_chain.json"},
        {"problem": "stn", "method": "greedy", "generate": {"kind": "stn", "seed": 1}},
        {"problem": "hens-matches", "method": "greedy-packing",
         "instance": "hens_matches_6_4_5_5.json"},
        {"problem": "hens-matches", "method": "water-filling",
         "generate": {"kind": "hens", "seed": 5, "sizes": {"n_hot": 2, "n_cold": 2}}},
        {"problem": "hens-utility", "method": "cascade", "instance": "hens_utility_deficit.json"},
        {"problem": "hens-multistage", "method": "alternating", "options": {"stages": 2},
         "instance": "hens_multistage_pair.json"},
    ],
}


def test_criterion_10_bench_determinism(tmp_path):
    import json
    suite = tmp_path / "suite.json"
    for name in {c["instance"] for c in SUITE["cells"] if "instance" in c}:
        (tmp_path / name).write_bytes(open(os.path.join(INSTANCES, name), "rb").read())
    suite.write_text(json.dumps(SUITE))
    outs = []
    for run in range(2):
        path = tmp_path / f"run{run}.csv"
        code = main(["bench", "--suite", str(suite), "--out", str(path)])
        outs.append((code, path.read_bytes()))
    rows = outs[0][1].decode().splitlines()
    ok = outs[0] == outs[1] and outs[0][0] == 0 and len(rows) == len(SUITE["cells"]) + 1
    record(10, ok, f"bench suite of {len(SUITE['cells'])} cells run twice, byte-identical CSV")
    assert ok
