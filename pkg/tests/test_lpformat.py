from pseapprox import ModelBuilder, export_lp_text
from pseapprox.hens import HensInstance, MatchInstance, Stream, build_matches_milp, build_multistage_qp


def test_trivial_model_is_five_lines():
    mb = ModelBuilder()
    mb.add_var("x")
    mb.add_constraint("c1", {"x": 1}, ">=", 1)
    mb.set_objective({"x": 1})
    text = export_lp_text(mb.build())
    assert text.splitlines() == ["minimize", " obj: x", "subject to", " c1: x >= 1", "end"]


def test_bounds_integrality_and_constants():
    mb = ModelBuilder("demo")
    mb.add_var("x", -1, 2.5)
    mb.add_var("y", float("-inf"), float("inf"))
    mb.add_var("b", 0, 1, "binary")
    mb.add_var("n", 0, 4, "integer")
    mb.add_constraint("r", {"x": 2, "y": -1}, "=", 3, constant=1)
    mb.set_objective({"b": -3, "n": 1}, "max", constant=0.5)
    lines = export_lp_text(mb.build()).splitlines()
    assert lines[0] == "\\ demo"
    assert lines[1] == "maximize"
    assert lines[2] == " obj: - 3 b + n + 0.5"
    assert " r: 2 x - y = 2" in lines
    assert " -1 <= x <= 2.5" in lines and " y free" in lines and " n <= 4" in lines
    assert lines[lines.index("binary") + 1] == " b"
    assert lines[lines.index("general") + 1] == " n"


def test_matches_export_has_one_binary_per_pair_and_is_deterministic():
    mi = MatchInstance.single_interval([6, 4], [5, 5])
    text = export_lp_text(build_matches_milp(mi))
    binaries = text.split("binary\n")[1].split("end")[0].split()
    assert sorted(binaries) == ["y(h1,c1)", "y(h1,c2)", "y(h2,c1)", "y(h2,c2)"]
    assert text == export_lp_text(build_matches_milp(mi))


def test_products_render_as_tokens():
    inst = HensInstance([Stream("h1", "hot", 150, 50, 1)], [Stream("c1", "cold", 40, 140, 1)])
    text = export_lp_text(build_multistage_qp(inst, 1))
    assert "[fH(h1,c1,1) * t(h1,0)]" in text
