"""Forward-chaining rules over the knowledge base, run to a fixpoint.

Three realizing rules match featured (requested) creations against
provided ones: data on format and rate, resources and physical phenomena
on class, quantity units and range constraints. Component health follows
from realized services and environmental states. A processing relation
summarizes a component whose requirements for one product are all
realized, and composes transitively along output-to-input realizations.
Every inserted fact records its rule and premises, so conclusions can be
explained down to the asserted facts they rest on.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from .kb import INFERRED, Instance, KnowledgeBase
from .schema import (call_featurings, component_kind, features_of,
                     featurings_of, require_kind, requires_of, subjects_of)

EXACT_TOLERANCE = 1e-9

RULE_ORDER = (
    "realize-data",
    "realize-resource",
    "realize-phenomena",
    "infer-health",
    "processing",
    "processing-transitive",
)

PROCESSING_KINDS = ("Sensor", "Actuator", "Functional")


@dataclass(frozen=True)
class Derivation:
    rule: str
    premises: tuple[str, ...]
    conclusion: str


@dataclass
class FixpointStats:
    rounds: int = 0
    facts_added: dict[str, int] = field(default_factory=dict)
    retracted: int = 0
    wall_time: float = 0.0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def total_added(self) -> int:
        return sum(self.facts_added.values())


@dataclass
class LedgerEntry:
    provider: str
    provider_name: str
    committed_throughput: float
    throughput: Optional[float]
    capacity: Optional[float]
    remaining_time: Optional[float]


def _idnum(fact_id: str) -> int:
    return int(fact_id[1:])


def _by_id(items):
    return sorted(items, key=lambda x: _idnum(x.id))


def _num(value) -> Optional[float]:
    if isinstance(value, float) and not isinstance(value, bool) and value == value:
        return value
    return None


def _constraints_of(kb: KnowledgeBase, attr_id: str) -> list[tuple[str, float]]:
    """(kind, bound) pairs from the Exact/Min/Max children of an attribute."""
    out = []
    for kind in ("Exact", "Min", "Max"):
        for child in _by_id(kb.query_has(attr_id, kind)):
            bound = _num(child.effective_value())
            if bound is not None:
                out.append((kind, bound))
    return out


def _satisfies(value: Optional[float], constraints) -> bool:
    """Exact bounds are alternatives (equal to any one); Min/Max all bind."""
    if value is None:
        return not constraints
    exacts = [b for kind, b in constraints if kind == "Exact"]
    if exacts and not any(abs(value - b) <= EXACT_TOLERANCE for b in exacts):
        return False
    for kind, bound in constraints:
        if kind == "Min" and value < bound:
            return False
        if kind == "Max" and value > bound:
            return False
    return True


def _offered_values(kb: KnowledgeBase, attr_id: str) -> list[float]:
    """Concrete values a provider attribute offers (its Exact children)."""
    values = []
    for child in _by_id(kb.query_has(attr_id, "Exact")):
        v = _num(child.effective_value())
        if v is not None:
            values.append(v)
    return values


def featured_properties(kb: KnowledgeBase, creation_id: str) -> list[Instance]:
    out = []
    for featuring in featurings_of(kb, creation_id):
        out.extend(features_of(kb, featuring.id))
    return _by_id(out)


# ----- the realizing predicates (the per-pair match contract) ----------

def data_realizes(kb: KnowledgeBase, requester: Instance, provider: Instance) -> bool:
    """Provider data satisfies the formats and rate constraints the
    requester features. Quality is deliberately never checked."""
    featured = featured_properties(kb, requester.id)
    provider_formats = {a.effective_value()
                        for a in kb.query_has(provider.id, "Format")}
    rate_constraints: list[tuple[str, float]] = []
    for attr in featured:
        if attr.cls.is_a("Format"):
            if attr.effective_value() not in provider_formats:
                return False
        elif attr.cls.is_a("Rate"):
            rate_constraints.extend(_constraints_of(kb, attr.id))
    if rate_constraints:
        rates = [_num(a.effective_value()) for a in kb.query_has(provider.id, "Rate")]
        rates = [r for r in rates if r is not None]
        if not any(_satisfies(r, rate_constraints) for r in rates):
            return False
    return True


_QUANTITY_ROOTS = ("PhysicalQuantity", "Throughput", "Capacity")


def quantity_realizes(kb: KnowledgeBase, requester: Instance, provider: Instance) -> bool:
    """Provider resource/phenomena satisfies the requester: same creation
    class (or a subclass), and every featured quantity is matched by a
    provider attribute of that class with the same unit text whose offered
    value meets the featured range constraints."""
    if not provider.cls.is_a(requester.class_name):
        return False
    provider_attrs = [a for root in _QUANTITY_ROOTS
                      for a in kb.query_has(provider.id, root)]
    for attr in featured_properties(kb, requester.id):
        if not any(attr.cls.is_a(root) for root in _QUANTITY_ROOTS):
            continue
        constraints = _constraints_of(kb, attr.id)
        matched = False
        for cand in provider_attrs:
            if not cand.cls.is_a(attr.class_name):
                continue
            if cand.effective_value() != attr.effective_value():
                continue  # unit text must match exactly
            offered = _offered_values(kb, cand.id)
            if not constraints or any(_satisfies(v, constraints) for v in offered):
                matched = True
                break
        if not matched:
            return False
    return True


# ----- engine -----------------------------------------------------------

class Engine:
    """One rule-evaluation context over a knowledge base."""

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self.diagnostics: list[str] = []
        # canonical keys of relations already present (survives across rounds)
        self.realizing_keys: dict[tuple[str, str], str] = {}
        self.processing_keys: dict[tuple, str] = {}
        self._index_existing()

    def _index_existing(self):
        kb = self.kb
        for rel in kb.instances_of("Realizing"):
            req = _by_id(kb.query_role(rel.id, "requester"))
            prov = _by_id(kb.query_role(rel.id, "provider"))
            if req and prov:
                self.realizing_keys[(req[0].id, prov[0].id)] = rel.id
        for rel in kb.instances_of("Processing"):
            self.processing_keys[self._processing_key_of(rel.id)] = rel.id

    def _processing_key_of(self, rel_id: str) -> tuple:
        kb = self.kb
        execs = frozenset(i.id for i in kb.query_role(rel_id, "executor"))
        inputs = frozenset(i.id for i in kb.query_role(rel_id, "input"))
        outputs = _by_id(kb.query_role(rel_id, "output"))
        return (execs, inputs, outputs[0].id if outputs else "")

    def _derive(self, rule: str, premises, conclusion: str):
        self.kb.derivations[conclusion] = Derivation(rule, tuple(premises), conclusion)

    def _new_role(self, rule, premises, source, role, target) -> int:
        if self.kb.has_link("role", role, source, target):
            return 0
        link = self.kb.add_role(source, role, target, origin=INFERRED)
        self._derive(rule, premises, link.id)
        return 1

    # -- realizing rules --

    def _featured_split(self, root: str):
        """(requesters, providers) among instances below a creation root."""
        requesters, providers = [], []
        for inst in _by_id(self.kb.instances_of(root)):
            if featurings_of(self.kb, inst.id):
                requesters.append(inst)
            else:
                providers.append(inst)
        return requesters, providers

    def _insert_realizing(self, rule, requester, provider) -> int:
        key = (requester.id, provider.id)
        if key in self.realizing_keys:
            return 0
        kb = self.kb
        premises = [requester.id, provider.id]
        premises += [f.id for f in featurings_of(kb, requester.id)]
        rel = kb.assert_instance("Realizing", origin=INFERRED)
        self._derive(rule, premises, rel.id)
        added = 1
        added += self._new_role(rule, premises, rel.id, "requester", requester.id)
        added += self._new_role(rule, premises, rel.id, "provider", provider.id)
        self.realizing_keys[key] = rel.id
        if rule == "realize-data":
            # the requester now also knows where to fetch the data
            for loc in _by_id(kb.query_has(provider.id, "Location")):
                if not kb.has_link("has", loc.class_name, requester.id, loc.id):
                    link = kb.add_has(requester.id, loc.id, origin=INFERRED)
                    self._derive(rule, [rel.id], link.id)
                    added += 1
        return added

    def realize_data(self) -> int:
        requesters, providers = self._featured_split("Data")
        added = 0
        for requester in requesters:
            for provider in providers:
                if provider.id == requester.id:
                    continue
                if data_realizes(self.kb, requester, provider):
                    added += self._insert_realizing("realize-data", requester, provider)
        return added

    def _realize_quantity(self, rule: str, root: str) -> int:
        requesters, providers = self._featured_split(root)
        added = 0
        for requester in requesters:
            for provider in providers:
                if provider.id == requester.id:
                    continue
                if quantity_realizes(self.kb, requester, provider):
                    added += self._insert_realizing(rule, requester, provider)
        return added

    def realize_resource(self) -> int:
        return self._realize_quantity("realize-resource", "Resource")

    def realize_phenomena(self) -> int:
        return self._realize_quantity("realize-phenomena", "PhysicalPhenomena")

    # -- health --

    def _realized_requesters(self) -> set[str]:
        return {req for req, _ in self.realizing_keys}

    def infer_health(self) -> int:
        """Set HealthState from NFR/ER realization. Counts value changes."""
        kb = self.kb
        realized = self._realized_requesters()
        changed = 0
        for comp in _by_id(kb.instances_of("Component")):
            healths = _by_id(kb.query_has(comp.id, "HealthState"))
            if not healths:
                continue
            healthy = True
            for req in requires_of(kb, comp.id):
                if require_kind(req) not in ("NFR", "ER"):
                    continue
                for featuring in call_featurings(kb, req):
                    for subject in subjects_of(kb, featuring.id):
                        if subject.id not in realized:
                            healthy = False
            for health in healths:
                if kb.is_pinned(health.id):
                    continue
                if kb.set_inferred_value(health.id, healthy):
                    changed += 1
        return changed

    # -- processing --

    def _gating_subjects(self, require) -> tuple[list[str], list[str]]:
        """(all gating subject ids, the ones that count as inputs)."""
        kb = self.kb
        kind = require_kind(require)
        gating, inputs = [], []
        for featuring in call_featurings(kb, require):
            if not features_of(kb, featuring.id) and not subjects_of(kb, featuring.id):
                self.diagnostics.append(
                    f"dangling featuring {featuring.id} on {require.id}")
            for subject in subjects_of(kb, featuring.id):
                gating.append(subject.id)
                if kind == "FR" and subject.cls.is_a("Data"):
                    inputs.append(subject.id)
                elif kind == "ER" and subject.cls.is_a("PhysicalPhenomena"):
                    inputs.append(subject.id)
        return gating, inputs

    def _insert_processing(self, rule, executors, inputs, output_id, premises) -> int:
        key = (frozenset(executors), frozenset(inputs), output_id)
        if key in self.processing_keys:
            return 0
        kb = self.kb
        rel = kb.assert_instance("Processing", origin=INFERRED)
        self._derive(rule, premises, rel.id)
        added = 1
        for executor in sorted(executors, key=_idnum):
            added += self._new_role(rule, premises, rel.id, "executor", executor)
        for input_id in sorted(inputs, key=_idnum):
            added += self._new_role(rule, premises, rel.id, "input", input_id)
        added += self._new_role(rule, premises, rel.id, "output", output_id)
        self.processing_keys[key] = rel.id
        return added

    def processing(self) -> int:
        """Base rule: a sensor/actuator/functional with every requirement of
        one product realized, and health not False, processes that product.
        Appliances never do."""
        kb = self.kb
        realized = self._realized_requesters()
        added = 0
        for comp in _by_id(kb.instances_of("Component")):
            if component_kind(comp) not in PROCESSING_KINDS:
                continue
            healths = kb.query_has(comp.id, "HealthState")
            if any(h.effective_value() is False for h in healths):
                continue
            per_product: dict[str, list] = {}
            for req in requires_of(kb, comp.id):
                for product in products_sorted(kb, req):
                    per_product.setdefault(product.id, []).append(req)
            for output_id in sorted(per_product, key=_idnum):
                gating, inputs = [], []
                for req in per_product[output_id]:
                    g, i = self._gating_subjects(req)
                    gating.extend(g)
                    inputs.extend(i)
                if any(s not in realized for s in gating):
                    continue
                witnesses = sorted({self.realizing_keys[(s, p)]
                                    for (s, p) in self.realizing_keys
                                    if s in gating}, key=_idnum)
                premises = [comp.id, output_id] + witnesses
                added += self._insert_processing(
                    "processing", {comp.id}, set(inputs), output_id, premises)
        return added

    def processing_transitive(self) -> int:
        """Chain rule: when one processing's output realizes an input of
        another and no executor repeats, their composition processes the
        head's inputs into the tail's output."""
        kb = self.kb
        provider_to_realizings: dict[str, list[tuple[str, str]]] = {}
        for (req, prov), rel_id in self.realizing_keys.items():
            provider_to_realizings.setdefault(prov, []).append((req, rel_id))
        added = 0
        grew = True
        while grew:
            grew = False
            records = sorted(
                ((key, rel_id) for key, rel_id in self.processing_keys.items()),
                key=lambda kv: _idnum(kv[1]))
            for key1, rel1 in records:
                execs1, inputs1, out1 = key1
                for requester, realizing_id in provider_to_realizings.get(out1, ()):
                    for key2, rel2 in records:
                        execs2, inputs2, out2 = key2
                        if requester not in inputs2 or execs1 & execs2:
                            continue
                        grew_by = self._insert_processing(
                            "processing-transitive",
                            execs1 | execs2, inputs1, out2,
                            [rel1, rel2, realizing_id])
                        if grew_by:
                            grew = True
                            added += grew_by
        return added


def products_sorted(kb: KnowledgeBase, require) -> list[Instance]:
    prods = kb.query_role(require.id, "output") | kb.query_role(require.id, "outcome")
    return _by_id(prods)


# ----- orchestration ------------------------------------------------------

def infer_to_fixpoint(kb: KnowledgeBase, max_rounds: int = 1000) -> FixpointStats:
    """Run all rules in rounds until a round adds nothing.

    A dirty KB (asserted facts changed since the last run) is first wiped
    of inferred facts; a clean one keeps them, so an immediate second call
    adds zero facts. Value pins made by set_attribute_value hold for this
    run only.
    """
    start = time.perf_counter()
    stats = FixpointStats(facts_added={rule: 0 for rule in RULE_ORDER})
    if kb.dirty:
        stats.retracted = kb.retract_inferred()
    engine = Engine(kb)
    rules = (
        ("realize-data", engine.realize_data),
        ("realize-resource", engine.realize_resource),
        ("realize-phenomena", engine.realize_phenomena),
        ("infer-health", engine.infer_health),
        ("processing", engine.processing),
        ("processing-transitive", engine.processing_transitive),
    )
    while True:
        stats.rounds += 1
        round_added = 0
        for name, rule in rules:
            n = rule()
            stats.facts_added[name] += n
            round_added += n
        if round_added == 0:
            break
        if stats.rounds >= max_rounds:
            raise RuntimeError(f"no fixpoint within {max_rounds} rounds")
    engine.diagnostics.extend(_ledger_warnings(kb))
    stats.diagnostics = sorted(set(engine.diagnostics))
    kb.dirty = False
    kb.clear_pins()
    stats.wall_time = time.perf_counter() - start
    return stats


# ----- resource ledger ------------------------------------------------------

def _single_offered(kb: KnowledgeBase, owner_id: str, attr_root: str) -> Optional[float]:
    for attr in _by_id(kb.query_has(owner_id, attr_root)):
        offered = _offered_values(kb, attr.id)
        if offered:
            return offered[0]
    return None


def resource_ledger(kb: KnowledgeBase) -> list[LedgerEntry]:
    """Per-provider commitment bookkeeping over realized resource requests."""
    committed: dict[str, float] = {}
    for rel in _by_id(kb.instances_of("Realizing")):
        providers = _by_id(kb.query_role(rel.id, "provider"))
        requesters = _by_id(kb.query_role(rel.id, "requester"))
        if not providers or not requesters:
            continue
        provider = providers[0]
        if not provider.cls.is_a("Resource"):
            continue
        amount = 0.0
        for attr in featured_properties(kb, requesters[0].id):
            if not attr.cls.is_a("Throughput"):
                continue
            exacts = [b for k, b in _constraints_of(kb, attr.id) if k == "Exact"]
            mins = [b for k, b in _constraints_of(kb, attr.id) if k == "Min"]
            if exacts:
                amount += exacts[0]
            elif mins:
                amount += mins[0]
        committed[provider.id] = committed.get(provider.id, 0.0) + amount

    entries = []
    for inst in _by_id(kb.instances_of("Resource")):
        if featurings_of(kb, inst.id):
            continue  # featured requests are not providers
        throughput = _single_offered(kb, inst.id, "Throughput")
        capacity = _single_offered(kb, inst.id, "Capacity")
        remaining = None
        if throughput and capacity is not None and throughput > 0:
            remaining = capacity / throughput
        entries.append(LedgerEntry(
            provider=inst.id,
            provider_name=kb.name_of(inst.id) or inst.id,
            committed_throughput=committed.get(inst.id, 0.0),
            throughput=throughput,
            capacity=capacity,
            remaining_time=remaining,
        ))
    return entries


def _ledger_warnings(kb: KnowledgeBase) -> list[str]:
    warnings = []
    for entry in resource_ledger(kb):
        if entry.throughput is not None and entry.committed_throughput > entry.throughput:
            warnings.append(
                f"resource {entry.provider_name} over-committed: "
                f"{entry.committed_throughput:g} requested of {entry.throughput:g}")
    return warnings


# ----- explanation ------------------------------------------------------

@dataclass
class ExplainNode:
    fact_id: str
    rule: Optional[str]
    children: list["ExplainNode"] = field(default_factory=list)


def explain(kb: KnowledgeBase, fact_id: str) -> ExplainNode:
    """Derivation tree for a fact; asserted facts are leaves."""
    kb.fact(fact_id)  # raises UnknownFact
    derivation = kb.derivations.get(fact_id)
    if derivation is None:
        return ExplainNode(fact_id, None)
    children = [explain(kb, premise) for premise in derivation.premises]
    return ExplainNode(fact_id, derivation.rule, children)


def describe_fact(kb: KnowledgeBase, fact_id: str) -> str:
    fact = kb.fact(fact_id)
    if isinstance(fact, Instance):
        name = kb.name_of(fact_id)
        label = f"{fact_id} {fact.class_name}"
        if name:
            label += f" ({name})"
        if fact.cls.meta_kind == "Attribute":
            label += f" = {fact.effective_value()!r}"
        return label
    label = "has" + fact.name if fact.kind == "has" else fact.name
    return f"{fact_id} {fact.source} -[{label}]-> {fact.target}"


def render_explanation(kb: KnowledgeBase, node: ExplainNode, indent: int = 0) -> str:
    prefix = "  " * indent
    tag = f" [{node.rule}]" if node.rule else " [asserted]"
    lines = [prefix + describe_fact(kb, node.fact_id) + tag]
    for child in node.children:
        lines.append(render_explanation(kb, child, indent + 1))
    return "\n".join(lines)


def trace_records(kb: KnowledgeBase) -> list[dict]:
    """Machine-readable derivation log, one record per inferred fact."""
    records = []
    for conclusion in sorted(kb.derivations, key=lambda f: (f[0], _idnum(f))):
        derivation = kb.derivations[conclusion]
        records.append({
            "ruleName": derivation.rule,
            "premiseIds": list(derivation.premises),
            "conclusionId": derivation.conclusion,
        })
    return records


def trace_lines(kb: KnowledgeBase) -> str:
    return "\n".join(json.dumps(r) for r in trace_records(kb)) + "\n"
