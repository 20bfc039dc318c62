import math

import pytest

import selfx
from selfx.inference import (data_realizes, explain, infer_to_fixpoint,
                             quantity_realizes, render_explanation,
                             resource_ledger, trace_records)
from selfx.kb import INFERRED, UnknownFact

from conftest import load_bundled


def _realizing_pairs(kb):
    pairs = set()
    for rel in kb.instances_of("Realizing"):
        req = sorted(kb.query_role(rel.id, "requester"), key=lambda i: i.id)[0]
        prov = sorted(kb.query_role(rel.id, "provider"), key=lambda i: i.id)[0]
        pairs.add((kb.name_of(req.id) or req.id, kb.name_of(prov.id) or prov.id))
    return pairs


def _processing_summary(kb):
    out = set()
    for rel in kb.instances_of("Processing"):
        executors = frozenset(kb.name_of(i.id) for i in kb.query_role(rel.id, "executor"))
        inputs = frozenset(kb.name_of(i.id) for i in kb.query_role(rel.id, "input"))
        output = sorted(kb.query_role(rel.id, "output"), key=lambda i: i.id)[0]
        out.add((executors, inputs, kb.name_of(output.id)))
    return out


def _featured_data(kb, class_name, fmt=None, rate_min=None):
    featuring = kb.assert_instance("Featuring")
    datum = kb.assert_instance(class_name)
    kb.add_role(datum.id, "subject", featuring.id)
    if fmt is not None:
        want = kb.assert_instance("ROSmsgs", fmt)
        kb.add_role(want.id, "feature", featuring.id)
    if rate_min is not None:
        rate = kb.assert_instance("FPS", math.nan)
        kb.add_has(rate.id, kb.assert_instance("Min", rate_min).id)
        kb.add_role(rate.id, "feature", featuring.id)
    return datum


def _data_provider(kb, class_name, fmt, rate=None):
    datum = kb.assert_instance(class_name)
    kb.add_has(datum.id, kb.assert_instance("ROSmsgs", fmt).id)
    if rate is not None:
        kb.add_has(datum.id, kb.assert_instance("FPS", rate).id)
    return datum


# ----- realizing ------------------------------------------------------------

def test_data_realizing_in_scenario(inferred_scenario_kb):
    assert ("det_img", "img") in _realizing_pairs(inferred_scenario_kb)


def test_data_realizing_attaches_provider_location(inferred_scenario_kb):
    kb = inferred_scenario_kb
    locations = kb.query_has(kb.bindings["det_img"], "Location")
    assert {a.value for a in locations} == {"/image_raw"}
    link, = [l for l in kb.links.values()
             if l.kind == "has" and l.source == kb.bindings["det_img"]
             and l.name == "ROStopic"]
    assert link.origin == INFERRED


def test_data_rate_below_min_not_realized(kb):
    requester = _featured_data(kb, "Signal", fmt="fmt/a", rate_min=30.0)
    provider = _data_provider(kb, "Signal", "fmt/a", rate=20.0)
    assert not data_realizes(kb, kb.instance(requester.id), kb.instance(provider.id))
    infer_to_fixpoint(kb)
    assert _realizing_pairs(kb) == set()


def test_data_quality_never_constraint_checked(kb):
    requester = _featured_data(kb, "Signal", fmt="fmt/a")
    # feature an aspirational quality bound; the rule must ignore it
    featuring = next(iter(kb.query_role(requester.id, "subject")))
    wish = kb.assert_instance("Quality", math.nan)
    kb.add_has(wish.id, kb.assert_instance("Min", 0.9).id)
    kb.add_role(wish.id, "feature", featuring.id)
    provider = _data_provider(kb, "Signal", "fmt/a", rate=30.0)
    kb.add_has(provider.id, kb.assert_instance("Quality", math.nan).id)
    infer_to_fixpoint(kb)
    assert len(_realizing_pairs(kb)) == 1


def test_multiple_exact_rates_are_alternatives(kb):
    requester = _featured_data(kb, "Signal", fmt="fmt/a")
    featuring = next(iter(kb.query_role(requester.id, "subject")))
    rate = kb.assert_instance("FPS", math.nan)
    kb.add_has(rate.id, kb.assert_instance("Exact", 20.0).id)
    kb.add_has(rate.id, kb.assert_instance("Exact", 30.0).id)
    kb.add_role(rate.id, "feature", featuring.id)
    ok = _data_provider(kb, "Signal", "fmt/a", rate=20.0)
    bad = _data_provider(kb, "Signal", "fmt/a", rate=25.0)
    assert data_realizes(kb, requester, ok)
    assert not data_realizes(kb, requester, bad)


def test_resource_exact_mismatch(kb):
    featuring = kb.assert_instance("Featuring")
    request = kb.assert_instance("ElectricalPower")
    kb.add_role(request.id, "subject", featuring.id)
    voltage = kb.assert_instance("Voltage", "volt")
    kb.add_has(voltage.id, kb.assert_instance("Exact", 12.0).id)
    kb.add_role(voltage.id, "feature", featuring.id)
    provider = kb.assert_instance("ElectricalPower")
    supply = kb.assert_instance("Voltage", "volt")
    kb.add_has(provider.id, supply.id)
    kb.add_has(supply.id, kb.assert_instance("Exact", 5.0).id)
    assert not quantity_realizes(kb, request, provider)
    infer_to_fixpoint(kb)
    assert _realizing_pairs(kb) == set()


def test_resource_unit_strings_must_match(kb):
    featuring = kb.assert_instance("Featuring")
    request = kb.assert_instance("ElectricalPower")
    kb.add_role(request.id, "subject", featuring.id)
    amount = kb.assert_instance("Power", "Watt")
    kb.add_has(amount.id, kb.assert_instance("Min", 5.0).id)
    kb.add_role(amount.id, "feature", featuring.id)
    provider = kb.assert_instance("ElectricalPower")
    supply = kb.assert_instance("Power", "W")  # close, but not the same unit
    kb.add_has(provider.id, supply.id)
    kb.add_has(supply.id, kb.assert_instance("Exact", 10.0).id)
    assert not quantity_realizes(kb, request, provider)


def test_power_and_voltage_matched_in_scenario(inferred_scenario_kb):
    assert ("cam_power", "env_power") in _realizing_pairs(inferred_scenario_kb)


def test_phenomena_realizing_and_gates(inferred_scenario_kb):
    pairs = _realizing_pairs(inferred_scenario_kb)
    assert ("cam_light", "env_light") in pairs
    assert ("cam_air", "env_air") in pairs
    assert ("cam_light", "env_air") not in pairs  # class mismatch


def test_phenomena_intensity_below_min():
    kb = load_bundled(selfx.new_kb(), "camera.sxdl", "detector.sxdl",
                      "environment_dim.sxdl")
    infer_to_fixpoint(kb)
    assert ("cam_light", "env_light") not in _realizing_pairs(kb)


def test_sound_never_realizes_featured_light(kb):
    featuring = kb.assert_instance("Featuring")
    wanted = kb.assert_instance("Light")
    kb.add_role(wanted.id, "subject", featuring.id)
    glow = kb.assert_instance("Intensity", "Lumen")
    kb.add_has(glow.id, kb.assert_instance("Min", 10.0).id)
    kb.add_role(glow.id, "feature", featuring.id)
    noise = kb.assert_instance("Sound")
    level = kb.assert_instance("Intensity", "Lumen")
    kb.add_has(noise.id, level.id)
    kb.add_has(level.id, kb.assert_instance("Exact", 50.0).id)
    infer_to_fixpoint(kb)
    assert _realizing_pairs(kb) == set()


# ----- health ----------------------------------------------------------------

def test_health_inferred_true(inferred_scenario_kb):
    kb = inferred_scenario_kb
    health, = kb.query_has(kb.bindings["cam"], "HealthState")
    assert health.effective_value() is True
    assert health.value is False  # the asserted start state is untouched


def test_health_false_when_light_missing():
    kb = load_bundled(selfx.new_kb(), "camera.sxdl", "detector.sxdl",
                      "environment_dim.sxdl")
    infer_to_fixpoint(kb)
    health, = kb.query_has(kb.bindings["cam"], "HealthState")
    assert health.effective_value() is False


def test_component_without_health_untouched(kb):
    kb.define_class("Widget", "Sensor")
    widget = kb.assert_instance("Widget")
    infer_to_fixpoint(kb)
    assert kb.query_has(widget.id, "HealthState") == set()


def test_pinned_health_respected_for_one_run(scenario_kb):
    kb = scenario_kb
    infer_to_fixpoint(kb)
    health, = kb.query_has(kb.bindings["cam"], "HealthState")
    kb.set_attribute_value(health.id, False)
    infer_to_fixpoint(kb)
    assert health.effective_value() is False  # the pin stuck for this run
    assert len(list(kb.instances_of("Processing"))) == 1  # only the detector
    kb.dirty = True  # another change arrives; the pin has expired
    infer_to_fixpoint(kb)
    assert health.effective_value() is True
    assert len(list(kb.instances_of("Processing"))) == 3


# ----- processing --------------------------------------------------------------

def test_camera_processing_inputs_are_phenomena(inferred_scenario_kb):
    summary = _processing_summary(inferred_scenario_kb)
    assert (frozenset({"cam"}), frozenset({"cam_light", "cam_air"}), "img") in summary


def test_detector_partial_outputs(inferred_scenario_kb):
    summary = _processing_summary(inferred_scenario_kb)
    outputs = {out for _, _, out in summary}
    assert "rec_obj" in outputs
    assert "det_obj" not in outputs  # robot pose missing


def test_appliance_never_processes(kb):
    kb.define_class("Battery", "Appliance")
    battery = kb.assert_instance("Battery")
    power = kb.assert_instance("ElectricalPower")
    featuring = kb.assert_instance("Featuring")
    heat = kb.assert_instance("Light")
    kb.add_role(heat.id, "subject", featuring.id)
    glow = kb.assert_instance("Intensity", "Lumen")
    kb.add_has(glow.id, kb.assert_instance("Min", 0.0).id)
    kb.add_role(glow.id, "feature", featuring.id)
    require = kb.assert_instance("EnvironmentalRequirement")
    kb.add_role(require.id, "petitioner", battery.id)
    kb.add_role(require.id, "outcome", power.id)
    kb.add_role(require.id, "state", featuring.id)
    sun = kb.assert_instance("Light")
    lumen = kb.assert_instance("Intensity", "Lumen")
    kb.add_has(sun.id, lumen.id)
    kb.add_has(lumen.id, kb.assert_instance("Exact", 900.0).id)
    infer_to_fixpoint(kb)
    assert len(_realizing_pairs(kb)) == 1  # the requirement is realized
    assert list(kb.instances_of("Processing")) == []


def _chain(kb, n):
    """n functional components in a line; returns component ids."""
    comps = []
    provider = _data_provider(kb, "Signal", "fmt/src", rate=10.0)
    for i in range(n):
        comp = kb.assert_instance("Functional")
        request = _featured_data(kb, "Signal", fmt=f"fmt/src" if i == 0 else f"fmt/{i - 1}")
        output = _data_provider(kb, "Signal", f"fmt/{i}", rate=10.0)
        require = kb.assert_instance("FunctionalRequirement")
        kb.add_role(require.id, "petitioner", comp.id)
        kb.add_role(require.id, "output", output.id)
        featuring = next(iter(kb.query_role(request.id, "subject")))
        kb.add_role(require.id, "input", featuring.id)
        comps.append(comp.id)
    return comps


def test_three_chain_composites(kb):
    _chain(kb, 3)
    infer_to_fixpoint(kb)
    relations = list(kb.instances_of("Processing"))
    executor_sets = sorted(
        tuple(sorted(i.id for i in kb.query_role(r.id, "executor")))
        for r in relations)
    assert len(relations) == 6  # 3 base + AB + BC + ABC
    assert max(len(s) for s in executor_sets) == 3


def test_two_cycle_terminates(kb):
    a = kb.assert_instance("Functional")
    b = kb.assert_instance("Functional")
    out_a = _data_provider(kb, "Signal", "fmt/a", rate=10.0)
    out_b = _data_provider(kb, "Signal", "fmt/b", rate=10.0)
    req_a = _featured_data(kb, "Signal", fmt="fmt/b")  # A consumes B's output
    req_b = _featured_data(kb, "Signal", fmt="fmt/a")
    for comp, output, request in ((a, out_a, req_a), (b, out_b, req_b)):
        require = kb.assert_instance("FunctionalRequirement")
        kb.add_role(require.id, "petitioner", comp.id)
        kb.add_role(require.id, "output", output.id)
        featuring = next(iter(kb.query_role(request.id, "subject")))
        kb.add_role(require.id, "input", featuring.id)
    stats = infer_to_fixpoint(kb)
    relations = list(kb.instances_of("Processing"))
    assert len(relations) == 4  # A, B, AB, BA; executor repetition cut off
    assert stats.rounds < 10


# ----- fixpoint ----------------------------------------------------------------

def test_scenario_fixpoint_three_processings(inferred_scenario_kb):
    assert len(list(inferred_scenario_kb.instances_of("Processing"))) == 3


def test_fixpoint_idempotent(inferred_scenario_kb):
    kb = inferred_scenario_kb
    before = sorted(kb.instances), sorted(kb.links)
    stats = infer_to_fixpoint(kb)
    assert stats.total_added == 0 and stats.retracted == 0
    assert (sorted(kb.instances), sorted(kb.links)) == before


def test_fixpoint_on_schema_only(kb):
    stats = infer_to_fixpoint(kb)
    assert stats.rounds == 1 and stats.total_added == 0


def test_fixpoint_recomputes_after_mutation(inferred_scenario_kb):
    kb = inferred_scenario_kb
    n_before = len(list(kb.instances_of("Realizing")))
    intensity, = [a for a in kb.query_has(kb.bindings["env_light"], "Intensity")]
    exact, = kb.query_has(intensity.id, "Exact")
    kb.set_attribute_value(exact.id, 300.0)
    stats = infer_to_fixpoint(kb)
    assert stats.retracted > 0
    assert len(list(kb.instances_of("Realizing"))) == n_before - 1


def test_determinism_across_assertion_orders():
    orders = (("camera.sxdl", "detector.sxdl", "environment.sxdl"),
              ("camera.sxdl", "environment.sxdl", "detector.sxdl"))
    summaries = []
    for order in orders:
        kb = load_bundled(selfx.new_kb(), *order)
        infer_to_fixpoint(kb)
        summaries.append((_realizing_pairs(kb), _processing_summary(kb)))
    assert summaries[0] == summaries[1]


# ----- ledger and diagnostics ----------------------------------------------------

def test_ledger_remaining_time(inferred_scenario_kb):
    entry, = [e for e in resource_ledger(inferred_scenario_kb)
              if e.provider_name == "env_power"]
    assert entry.throughput == 10.0
    assert entry.capacity == 100.0
    assert entry.remaining_time == 10.0
    assert entry.committed_throughput == 5.0  # the camera's featured minimum


def test_ledger_capacity_over_throughput(kb):
    provider = kb.assert_instance("ElectricalPower")
    rate = kb.assert_instance("Power", "Watt")
    kb.add_has(provider.id, rate.id)
    kb.add_has(rate.id, kb.assert_instance("Exact", 5.0).id)
    cap = kb.assert_instance("Capacity", "Wh")
    kb.add_has(provider.id, cap.id)
    kb.add_has(cap.id, kb.assert_instance("Exact", 100.0).id)
    entry, = resource_ledger(kb)
    assert entry.remaining_time == 20.0


def test_overcommit_warning(kb):
    provider = kb.assert_instance("ElectricalPower")
    rate = kb.assert_instance("Power", "Watt")
    kb.add_has(provider.id, rate.id)
    kb.add_has(rate.id, kb.assert_instance("Exact", 10.0).id)
    for _ in range(2):
        featuring = kb.assert_instance("Featuring")
        request = kb.assert_instance("ElectricalPower")
        kb.add_role(request.id, "subject", featuring.id)
        amount = kb.assert_instance("Power", "Watt")
        kb.add_has(amount.id, kb.assert_instance("Min", 8.0).id)
        kb.add_role(amount.id, "feature", featuring.id)
    stats = infer_to_fixpoint(kb)
    assert any("over-committed" in d for d in stats.diagnostics)


def test_dangling_featuring_diagnostic(kb):
    comp = kb.assert_instance("Functional")
    output = kb.assert_instance("Signal")
    featuring = kb.assert_instance("Featuring")  # no subject, no features
    require = kb.assert_instance("FunctionalRequirement")
    kb.add_role(require.id, "petitioner", comp.id)
    kb.add_role(require.id, "output", output.id)
    kb.add_role(require.id, "input", featuring.id)
    stats = infer_to_fixpoint(kb)
    assert any("dangling featuring" in d for d in stats.diagnostics)


# ----- explanation ---------------------------------------------------------------

def test_explain_composite_cites_parts(inferred_scenario_kb):
    kb = inferred_scenario_kb
    composite, = [r for r in kb.instances_of("Processing")
                  if len(kb.query_role(r.id, "executor")) == 2]
    node = explain(kb, composite.id)
    assert node.rule == "processing-transitive"
    child_rules = sorted(c.rule for c in node.children)
    assert child_rules == ["processing", "processing", "realize-data"]
    rendering = render_explanation(kb, node)
    assert "processing-transitive" in rendering and "asserted" in rendering


def test_explain_asserted_fact_is_leaf(inferred_scenario_kb):
    kb = inferred_scenario_kb
    node = explain(kb, kb.bindings["cam"])
    assert node.rule is None and node.children == []


def test_explain_unknown_fact(inferred_scenario_kb):
    with pytest.raises(UnknownFact):
        explain(inferred_scenario_kb, "i99999")


def test_trace_records_complete(inferred_scenario_kb):
    kb = inferred_scenario_kb
    records = trace_records(kb)
    inferred = [i for i in kb.instances.values() if i.origin == INFERRED] \
        + [l for l in kb.links.values() if l.origin == INFERRED]
    assert len(records) == len(inferred)
    for record in records:
        assert set(record) == {"ruleName", "premiseIds", "conclusionId"}
        kb.fact(record["conclusionId"])
        for premise in record["premiseIds"]:
            kb.fact(premise)
