import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseapprox import LinearModel, ModelBuilder, check_feasibility
from pseapprox.instances import random_pooling_network, read_instance_file, to_domain
from pseapprox.pooling import (GridSizeError, Pool, PoolInput, PoolingNetwork, PoolOutput,
                               UnboundedProductError, alternating_heuristic, bilinear_bounds,
                               build_p_formulation, build_pq_formulation,
                               classify_pooling_instance, discrete_to_solution,
                               discretize_proportions, grid_oracle_pooling, mccormick_bound,
                               p_assignment, piecewise_mccormick_relax, pq_assignment,
                               validate_network)
from pseapprox.solvers import solve_lp, solve_milp

INF = math.inf


def one_pool(q_lo=1.0, q_hi=2.0):
    return PoolingNetwork(
        [PoolInput("i1", 1, (0, 10), {"k": 1}), PoolInput("i2", 2, (0, 10), {"k": 3})],
        [Pool("l1", 10)], [PoolOutput("j1", 5, (0, 10), {"k": (q_lo, q_hi)})],
        [("i1", "l1"), ("i2", "l1")], [("l1", "j1")])


def blending_only():
    return PoolingNetwork([PoolInput("i1", 1, (0, 5), {"k": 1})], [],
                          [PoolOutput("j1", 3, (0, 4), {"k": (0, 2)})], z_arcs=[("i1", "j1")])


@pytest.fixture
def haverly(instance_path):
    return to_domain(read_instance_file(instance_path("pooling_haverly.json")))


# --- network validation ---------------------------------------------------------------------

def test_validate_blending_net_notes_no_pools():
    rep = validate_network(blending_only())
    assert rep.ok and any("no pools" in w for w in rep.warnings)


def test_validate_flags_misplaced_arc():
    net = one_pool()
    bad = PoolingNetwork(net.inputs, net.pools, net.outputs, [("i1", "j1")], net.y_arcs)
    assert not validate_network(bad).ok


def test_validate_haverly_and_degenerate_pool(haverly):
    assert validate_network(haverly).ok
    net = PoolingNetwork(haverly.inputs, haverly.pools + (Pool("idle"),), haverly.outputs,
                         haverly.x_arcs, haverly.y_arcs, haverly.z_arcs)
    assert any("degenerate" in w for w in validate_network(net).warnings)


# --- formulations ---------------------------------------------------------------------------

def test_p_formulation_row_counts():
    m = build_p_formulation(one_pool())
    labels = [c.label for c in m.constraints]
    assert sum(lab.startswith("blend(") for lab in labels) == 1
    assert sum(lab.startswith("quality_") for lab in labels) == 2


def test_blending_net_is_linear_and_formulations_agree():
    net = blending_only()
    p, pq = build_p_formulation(net), build_pq_formulation(net)
    assert isinstance(p, LinearModel) and isinstance(pq, LinearModel)
    assert solve_lp(p).objective == pytest.approx(solve_lp(pq).objective)


def test_no_quality_bounds_leave_a_flow_lp():
    net = one_pool(0.0, INF)
    m = build_p_formulation(net)
    assert not any(lab.startswith("quality") for lab in m.products)


def test_pq_has_fraction_row():
    m = build_pq_formulation(one_pool())
    q_ids = [v.id for v in m.variables if v.id.startswith("q(")]
    assert q_ids == ["q(i1,l1)", "q(i2,l1)"]
    row = m.base.constraint_map["fractions(l1)"]
    assert row.rhs == 1 and sorted(row.expr.variables()) == q_ids


def test_haverly_values(haverly):
    assert mccormick_bound(haverly, "p") == pytest.approx(-500)
    assert mccormick_bound(haverly, "pq") >= mccormick_bound(haverly, "p") - 1e-6
    res = alternating_heuristic(haverly)
    assert res.ok and res.solution.objective == pytest.approx(-400)
    assert check_feasibility(build_p_formulation(haverly), p_assignment(haverly, res.solution),
                             1e-6).feasible
    grid = grid_oracle_pooling(haverly, 10)
    assert grid.solution.objective >= mccormick_bound(haverly, "pq") - 1e-6


# --- relaxations ----------------------------------------------------------------------------

def _product_model(hi):
    mb = ModelBuilder()
    mb.add_var("a", 0, hi)
    mb.add_var("b", 0, hi)
    mb.add_var("r", -INF, INF)
    mb.add_constraint("prod", {"r": -1}, "=", 0, products=[("a", "b", 1)])
    mb.set_objective({"r": 1})
    return mb.build()


def _envelope_range(hi, a, b):
    model = _product_model(hi)
    relax = piecewise_mccormick_relax(model, 1, {"a": (0, hi), "b": (0, hi)})
    out = []
    for sense in ("min", "max"):
        mb = ModelBuilder()
        for v in relax.variables:
            lo_, hi_ = (a, a) if v.id == "a" else (b, b) if v.id == "b" else (v.lower, v.upper)
            mb.add_var(v.id, lo_, hi_, v.integrality)
        for c in relax.constraints:
            mb.add_constraint(c.label, c.expr.terms, c.sense, c.rhs, constant=c.expr.constant)
        mb.set_objective({"r": 1}, sense)
        out.append(solve_lp(mb.build()).objective)
    return out


def test_envelope_tight_at_corner():
    assert _envelope_range(1, 1, 1) == pytest.approx([1, 1])


def test_envelope_range_at_interior_point():
    assert _envelope_range(2, 1, 1) == pytest.approx([0, 2])


def test_unbounded_product_rejected():
    mb = ModelBuilder()
    mb.add_var("a")
    mb.add_var("b", 0, 1)
    mb.add_constraint("p", {}, "<=", 1, products=[("a", "b", 1)])
    with pytest.raises(UnboundedProductError):
        piecewise_mccormick_relax(mb.build(), 1, {"a": (0, INF), "b": (0, 1)})


def test_piecewise_is_milp_only_with_pieces(haverly):
    m = build_pq_formulation(haverly)
    bounds = bilinear_bounds(haverly, m)
    assert not piecewise_mccormick_relax(m, 1, bounds).is_mip
    assert piecewise_mccormick_relax(m, 4, bounds).is_mip
    b1, b4 = mccormick_bound(haverly, "pq", 1), mccormick_bound(haverly, "pq", 4)
    assert b4 >= b1 - 1e-6


def test_discretize_resolution_one_picks_one_input(haverly):
    out = solve_milp(discretize_proportions(haverly, 1))
    sol = discrete_to_solution(haverly, out.primal)
    for q in sol.q.values():
        assert q in (0.0, 1.0) or q == pytest.approx(0) or q == pytest.approx(1)
    assert check_feasibility(build_pq_formulation(haverly), pq_assignment(haverly, sol),
                             1e-6).feasible
    assert sol.objective >= mccormick_bound(haverly, "pq") - 1e-6


# --- heuristics -----------------------------------------------------------------------------

def test_blending_net_heuristics_exact():
    net = blending_only()
    res = alternating_heuristic(net)
    assert res.ok and res.certificate.ratio == 1 and "exact" in res.certificate.flags
    assert grid_oracle_pooling(net).solution.objective == pytest.approx(res.solution.objective)


def test_single_input_pools_exact_in_one_pass():
    net = PoolingNetwork(
        [PoolInput("i1", 1, (0, 10), {"k": 1})], [Pool("l1", 10)],
        [PoolOutput("j1", 5, (0, 10), {"k": (0, 2)})], [("i1", "l1")], [("l1", "j1")])
    res = alternating_heuristic(net)
    assert res.ok
    assert res.solution.objective == pytest.approx(mccormick_bound(net, "pq"))


def test_grid_size_limit():
    net = random_pooling_network(0, 4, 2, 1, 1)
    with pytest.raises(GridSizeError):
        grid_oracle_pooling(net, 2)


def test_grid_refinement_never_worse(haverly):
    coarse = grid_oracle_pooling(haverly, 2).solution.objective
    fine = grid_oracle_pooling(haverly, 4).solution.objective
    assert fine <= coarse + 1e-9


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10_000))
def test_relaxation_ordering_and_heuristic_feasibility(seed):
    rng = np.random.default_rng(seed)
    net = random_pooling_network(seed, int(rng.integers(1, 3)), 1, int(rng.integers(1, 3)), 1)
    bp, bq = mccormick_bound(net, "p"), mccormick_bound(net, "pq")
    assert bq >= bp - 1e-6
    res = alternating_heuristic(net)
    assert res.ok
    assert check_feasibility(build_p_formulation(net), p_assignment(net, res.solution),
                             1e-6).feasible
    assert res.solution.objective >= bq - 1e-6


# --- classifier -----------------------------------------------------------------------------

def test_classifier_examples(instance_path):
    single = to_domain(read_instance_file(instance_path("pooling_single_input.json")))
    assert classify_pooling_instance(single).complexity == "P"
    inputs = [PoolInput(f"i{a}", 1, (0, 9), {f"k{k}": a for k in range(3)}) for a in range(5)]
    outputs = [PoolOutput(f"j{a}", 1, (0, 9), {f"k{k}": (0, 2) for k in range(3)})
               for a in range(5)]
    net = PoolingNetwork(inputs, [Pool("l1", 9)], outputs, [(i.id, "l1") for i in inputs],
                         [("l1", j.id) for j in outputs])
    got = classify_pooling_instance(net, 2)
    assert got.complexity == "strongly NP-hard" and got.reduction == "independent set"
    assert classify_pooling_instance(net, 5).complexity == "P"


def test_classifier_in_degree_one_pools():
    net = random_pooling_network(1, 2, 2, 3, 1)
    x = [("i1", "l1"), ("i2", "l2")]
    net = PoolingNetwork(net.inputs, net.pools, net.outputs, x, net.y_arcs, net.z_arcs)
    assert classify_pooling_instance(net).rule == "min-pool-degree=1"


def test_classifier_is_pure(haverly):
    assert classify_pooling_instance(haverly) == classify_pooling_instance(haverly)
