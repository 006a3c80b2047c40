import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseapprox.hens import validate_hens
from pseapprox.instances import (REPORT_HEADER, InstanceParseError, InstanceSchemaError,
                                 RunRecord, envelope_for, generate_random, parse_instance,
                                 random_hens, read_instance_file, to_domain, write_instance,
                                 write_report)
from pseapprox.pooling import validate_network
from pseapprox.scheduling import validate_stn

FILES = ("pooling_haverly.json", "pooling_single_input.json", "stn_one_task.json",
         "stn_two_task_chain.json", "hens_matches_6_4_5_5.json", "hens_multistage_pair.json",
         "hens_utility_deficit.json")


@pytest.mark.parametrize("name", FILES)
def test_round_trip_of_shipped_files(instance_path, name):
    env = read_instance_file(instance_path(name))
    again = parse_instance(write_instance(env), env.name)
    assert again == env
    assert to_domain(envelope_for(to_domain(env), env.name)) == to_domain(env)


def test_missing_field_reports_path(instance_path):
    with open(instance_path("hens_utility_deficit.json"), encoding="utf-8") as fh:
        data = json.load(fh)
    del data["payload"]["hot"][0]["F"]
    with pytest.raises(InstanceSchemaError) as info:
        parse_instance(json.dumps(data))
    assert any(e.startswith("/payload/hot/0") for e in info.value.errors)


def test_syntax_error_has_position():
    with pytest.raises(InstanceParseError) as info:
        parse_instance('{\n  "kind": "hens",\n  oops\n}')
    assert info.value.line == 3 and info.value.column >= 1


def test_unknown_kind_rejected():
    with pytest.raises(InstanceSchemaError):
        parse_instance('{"kind": "boiler", "version": 1, "payload": {}}')


@pytest.mark.parametrize("kind", ["pooling", "stn", "hens"])
def test_generators_are_deterministic(kind):
    assert write_instance(generate_random(kind, 7)) == write_instance(generate_random(kind, 7))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_instances_are_valid(seed):
    assert validate_network(to_domain(generate_random("pooling", seed))).ok
    assert validate_stn(to_domain(generate_random("stn", seed))).ok
    inst = random_hens(seed, 2, 3, balanced=True)
    assert validate_hens(inst).ok
    assert inst.total_hot == pytest.approx(inst.total_cold)


def test_report_formatting():
    assert write_report([]) == ",".join(REPORT_HEADER) + "\n"
    text = write_report([RunRecord("a", "stn", "greedy", "failed", seed=3)])
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[1] == "a,stn,greedy,failed,,,,,3"
    full = write_report([RunRecord("b", "stn", "lp-round", "ok", 4.0, 2.0, 2.0, None, 0)])
    assert full.splitlines()[1].split(",")[4:7] == ["4", "2", "2"]
