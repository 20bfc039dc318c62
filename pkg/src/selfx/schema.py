"""Built-in ontology for component self-assessment, plus pattern validation.

Installs the fixed class hierarchy (components, creations, requirements,
properties) and the role vocabulary into a knowledge base, and checks
component instances against the four design patterns: a sensor turns an
environmental state into data, an actuator turns data into a physical
phenomenon, a functional maps data to data, and an appliance provides a
resource. The hierarchy is open: documents may subclass any of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kb import ATTRIBUTE, ENTITY, RELATION, Instance, KbError, KnowledgeBase

# (class, parent) in installation order; parents always precede children.
BUILTIN_CLASSES: tuple[tuple[str, str], ...] = (
    ("Component", ENTITY),
    ("Sensor", "Component"),
    ("Actuator", "Component"),
    ("Functional", "Component"),
    ("Appliance", "Component"),
    ("Creation", ENTITY),
    ("Data", "Creation"),
    ("Signal", "Data"),
    ("Information", "Data"),
    ("Knowledge", "Data"),
    ("Resource", "Creation"),
    ("ElectricalPower", "Resource"),
    ("Computation", "Resource"),
    ("Communication", "Resource"),
    ("PhysicalPhenomena", "Creation"),
    ("Light", "PhysicalPhenomena"),
    ("Sound", "PhysicalPhenomena"),
    ("Speed", "PhysicalPhenomena"),
    ("Air", "PhysicalPhenomena"),
    ("Require", RELATION),
    ("FunctionalRequirement", "Require"),
    ("NonFunctionalRequirement", "Require"),
    ("EnvironmentalRequirement", "Require"),
    ("Featuring", RELATION),
    ("Realizing", RELATION),
    ("Processing", RELATION),
    ("ProcessingRequirement", RELATION),
    ("Property", ATTRIBUTE),
    ("Quality", "Property"),
    ("Brightness", "Quality"),
    ("Contrast", "Quality"),
    ("Rate", "Property"),
    ("FPS", "Rate"),
    ("PS", "Rate"),
    ("Format", "Property"),
    ("ROSmsgs", "Format"),
    ("Location", "Property"),
    ("ROStopic", "Location"),
    ("Range", "Property"),
    ("Min", "Range"),
    ("Max", "Range"),
    ("Exact", "Range"),
    ("Capacity", "Property"),
    ("Throughput", "Property"),
    ("Power", "Throughput"),
    ("PhysicalQuantity", "Property"),
    ("Wavelength", "PhysicalQuantity"),
    ("Intensity", "PhysicalQuantity"),
    ("Voltage", "PhysicalQuantity"),
    ("Visibility", "PhysicalQuantity"),
    ("HealthState", "Property"),
    # behavior layer and environment snapshot support
    ("Behavior", ENTITY),
    ("Room", ENTITY),
    ("Name", ATTRIBUTE),
    ("Modality", ATTRIBUTE),
    ("Width", ATTRIBUTE),
    ("Length", ATTRIBUTE),
    ("Distance", ATTRIBUTE),
)

ROLE_NAMES = frozenset({
    "petitioner", "input", "service", "state", "output", "outcome",
    "subject", "feature", "requester", "provider", "executor", "effect",
})

REQUIRE_KINDS = {
    "FunctionalRequirement": "FR",
    "NonFunctionalRequirement": "NFR",
    "EnvironmentalRequirement": "ER",
}
CALL_ROLE = {"FR": "input", "NFR": "service", "ER": "state"}
SUBJECT_KIND = {"input": "Data", "service": "Resource", "state": "PhysicalPhenomena"}
PRODUCT_KIND = {
    "Sensor": "Data",
    "Actuator": "PhysicalPhenomena",
    "Functional": "Data",
    "Appliance": "Resource",
}
COMPONENT_KINDS = ("Sensor", "Actuator", "Functional", "Appliance")


def load_builtin_schema(kb: KnowledgeBase) -> int:
    """Install the full hierarchy. Fails before touching the KB on collision."""
    collisions = [name for name, _ in BUILTIN_CLASSES if name in kb.classes]
    if collisions:
        raise KbError(f"schema collision with existing classes: {collisions}")
    for name, parent in BUILTIN_CLASSES:
        kb.define_class(name, parent, builtin=True)
    return len(BUILTIN_CLASSES)


# ----- domain query helpers (shared with the rule engine) --------------

def requires_of(kb: KnowledgeBase, component_id: str) -> list[Instance]:
    rels = kb.query_role(component_id, "petitioner")
    return sorted((r for r in rels if r.cls.is_a("Require")), key=lambda r: r.id)


def require_kind(require: Instance) -> str:
    for cls, kind in REQUIRE_KINDS.items():
        if require.cls.is_a(cls):
            return kind
    return "Require"


def call_featurings(kb: KnowledgeBase, require: Instance) -> list[Instance]:
    role = CALL_ROLE.get(require_kind(require))
    if role is None:
        return []
    return sorted(kb.query_role(require.id, role), key=lambda i: i.id)


def products_of(kb: KnowledgeBase, require: Instance) -> list[Instance]:
    prods = kb.query_role(require.id, "output") | kb.query_role(require.id, "outcome")
    return sorted(prods, key=lambda i: i.id)


def subjects_of(kb: KnowledgeBase, featuring_id: str) -> list[Instance]:
    return sorted(kb.query_role(featuring_id, "subject"), key=lambda i: i.id)


def features_of(kb: KnowledgeBase, featuring_id: str) -> list[Instance]:
    return sorted(kb.query_role(featuring_id, "feature"), key=lambda i: i.id)


def featurings_of(kb: KnowledgeBase, creation_id: str) -> list[Instance]:
    """Featuring relations in which the creation plays the subject role."""
    rels = kb.query_role(creation_id, "subject")
    return sorted((f for f in rels if f.cls.is_a("Featuring")), key=lambda f: f.id)


def component_kind(instance: Instance) -> str:
    for kind in COMPONENT_KINDS:
        if instance.cls.is_a(kind):
            return kind
    return "Component"


# ----- validation ------------------------------------------------------

@dataclass
class ValidationReport:
    subject: str  # instance id
    subject_name: str
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, rule: str, message: str):
        self.violations.append((rule, message))


def validate_component(kb: KnowledgeBase, component_id: str) -> ValidationReport:
    """Check one component instance against its kind's design pattern."""
    comp = kb.instance(component_id)
    if not comp.cls.is_a("Component"):
        raise KbError(f"{comp.class_name!r} instance is not a component")
    kind = component_kind(comp)
    label = kb.name_of(component_id) or component_id
    report = ValidationReport(component_id, label)

    requires = requires_of(kb, component_id)
    if not requires:
        report.add("require-present", f"{label} petitions no Require relation")
        return report

    kinds_present = {require_kind(r) for r in requires}
    if kind == "Sensor" and "ER" not in kinds_present:
        report.add("kind-pattern", f"sensor {label} has no environmental requirement")
    if kind in ("Actuator", "Functional") and "FR" not in kinds_present:
        report.add("kind-pattern", f"{kind.lower()} {label} has no functional requirement")

    for req in requires:
        rkind = require_kind(req)
        call_role = CALL_ROLE.get(rkind)
        for featuring in call_featurings(kb, req):
            if not featuring.cls.is_a("Featuring"):
                report.add("kind-pattern",
                           f"{rkind} {req.id} {call_role} is not a Featuring")
                continue
            want = SUBJECT_KIND[call_role]
            for subject in subjects_of(kb, featuring.id):
                if not subject.cls.is_a(want):
                    report.add("kind-pattern",
                               f"{rkind} {req.id} calls for {subject.class_name}, "
                               f"expected a {want}")
            if not features_of(kb, featuring.id):
                report.add("featured-property",
                           f"featuring {featuring.id} used as a call features no property")
        want_product = PRODUCT_KIND.get(kind)
        if want_product:
            for product in products_of(kb, req):
                if not product.cls.is_a(want_product):
                    report.add("kind-pattern",
                               f"{kind.lower()} {label} product {product.class_name} "
                               f"is not a {want_product}")
    return report


def list_requirements(kb: KnowledgeBase, component_id: str) -> list[tuple]:
    """One tuple per Require the component petitions:
    (kind, call role, featuring ids, product ids)."""
    kb.instance(component_id)
    out = []
    for req in requires_of(kb, component_id):
        rkind = require_kind(req)
        out.append((
            rkind,
            CALL_ROLE.get(rkind, ""),
            tuple(f.id for f in call_featurings(kb, req)),
            tuple(p.id for p in products_of(kb, req)),
        ))
    return out
