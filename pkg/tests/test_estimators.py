import pytest
from sklearn.base import clone

from pseapprox.estimators import EXACT, METHODS, PROBLEMS, make_solver
from pseapprox.hens import HensInstance, Stream
from pseapprox.instances import read_instance_file, to_domain


def test_registry_covers_every_problem():
    assert {p for p, _ in METHODS} == set(PROBLEMS)
    assert set(EXACT) == set(PROBLEMS)


def test_params_round_trip_and_clone():
    s = make_solver("hens-multistage", "alternating", stages=2, seed=5, unrelated=1)
    assert s.get_params()["stages"] == 2 and s.get_params()["seed"] == 5
    s.set_params(max_iters=3)
    assert clone(s).get_params() == s.get_params()


def test_unknown_method():
    with pytest.raises(KeyError):
        make_solver("stn", "simulated-annealing")


def test_fit_sets_outcome(instance_path):
    stn = to_domain(read_instance_file(instance_path("stn_one_task.json")))
    s = make_solver("stn", "greedy").fit(stn)
    assert s.status_ == "ok" and s.objective_ == 2 and s.ratio_ >= 1


def test_wrong_instance_type():
    with pytest.raises(TypeError):
        make_solver("stn", "greedy").fit("not an instance")


def test_failures_become_status():
    unbalanced = HensInstance([Stream("h1", "hot", 100, 50, 1)], [Stream("c1", "cold", 10, 20, 1)])
    s = make_solver("hens-matches", "single-interval").fit(unbalanced)
    # three temperature intervals, so the single-interval rule refuses
    assert s.status_ == "failed" and s.objective_ is None and s.ratio_ is None
