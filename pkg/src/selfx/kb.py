"""Typed hypergraph store with a class registry, instances, and links.

Facts come in three kinds: concept classes arranged in a single-parent
hierarchy under the meta roots (Entity, Relation, Attribute), instances of
those classes (only attribute instances carry a value), and links. A role
link is queryable from both ends under the same role name; a has link
points one way at an attribute instance. Every instance and link has a
stable id and an origin, so the rule engine can retract its own
conclusions without touching what users asserted.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Union

ENTITY = "Entity"
RELATION = "Relation"
ATTRIBUTE = "Attribute"
META_ROOTS = (ENTITY, RELATION, ATTRIBUTE)

ASSERTED = "asserted"
INFERRED = "inferred"

# Attribute values: UTF-8 text, 64-bit float, boolean. float("nan") is the
# unknown-value sentinel and never comes out of arithmetic done here.
Scalar = Union[str, float, bool]


class KbError(Exception):
    """Domain error raised by knowledge-base operations."""


class UnknownFact(KbError):
    """An id did not resolve to a live instance or link."""


def is_nan(value) -> bool:
    return isinstance(value, float) and not isinstance(value, bool) and math.isnan(value)


def value_token(value: Optional[Scalar]) -> str:
    """Canonical text form of a value, with NaN folded to one token."""
    if value is None:
        return "<none>"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return "s:" + value


def same_value(a: Optional[Scalar], b: Optional[Scalar]) -> bool:
    return value_token(a) == value_token(b)


def _coerce(value):
    # ints arrive from callers and JSON; the value domain is 64-bit float
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return float(value)
    return value


@dataclass(eq=False)
class ConceptClass:
    name: str
    parent: Optional["ConceptClass"]
    meta_kind: str
    builtin: bool = False

    def ancestors(self) -> list[str]:
        """Names from this class up to its meta root, inclusive."""
        chain = []
        node: Optional[ConceptClass] = self
        while node is not None:
            chain.append(node.name)
            node = node.parent
        return chain

    def is_a(self, class_name: str) -> bool:
        return class_name in self.ancestors()

    def __repr__(self):
        return f"ConceptClass({self.name})"


@dataclass(eq=False)
class Instance:
    id: str
    cls: ConceptClass
    value: Optional[Scalar]
    origin: str
    # value written by the inference engine; cleared by retract_inferred
    inferred_value: Optional[Scalar] = None
    has_inferred_value: bool = False

    @property
    def class_name(self) -> str:
        return self.cls.name

    def effective_value(self) -> Optional[Scalar]:
        return self.inferred_value if self.has_inferred_value else self.value


@dataclass(eq=False)
class Link:
    id: str
    kind: str  # "role" | "has"
    name: str  # role name, or the attribute class name for has
    source: str
    target: str
    origin: str

    def key(self) -> tuple:
        return (self.kind, self.name, self.source, self.target)


ROLE = "role"
HAS = "has"


class KnowledgeBase:
    """Hypergraph store. Single writer, many readers between mutations."""

    def __init__(self):
        self.classes: dict[str, ConceptClass] = {}
        self.instances: dict[str, Instance] = {}
        self.links: dict[str, Link] = {}
        self.bindings: dict[str, str] = {}  # DSL name -> instance id
        self._binding_rev: dict[str, str] = {}
        self.derivations: dict = {}  # fact id -> Derivation
        self.dirty = False
        self._next_instance = 1
        self._next_link = 1
        self._link_keys: dict[tuple, str] = {}
        self._role_fwd: dict[tuple[str, str], set[str]] = {}
        self._role_rev: dict[tuple[str, str], set[str]] = {}
        self._has_fwd: dict[str, set[str]] = {}  # owner id -> link ids
        self._pinned: set[str] = set()
        for root in META_ROOTS:
            self.classes[root] = ConceptClass(root, None, root, builtin=True)

    # ----- classes ---------------------------------------------------

    def define_class(self, name: str, parent: str, builtin: bool = False) -> ConceptClass:
        """Register a class under `parent` (a class name or a meta root)."""
        if name in self.classes:
            raise KbError(f"class name already registered: {name!r}")
        parent_cls = self.classes.get(parent)
        if parent_cls is None:
            raise KbError(f"unknown parent class: {parent!r}")
        return self._register(ConceptClass(name, parent_cls, parent_cls.meta_kind, builtin))

    def _register(self, cls: ConceptClass) -> ConceptClass:
        self.classes[cls.name] = cls
        return cls

    def resolve_class(self, name: str) -> ConceptClass:
        cls = self.classes.get(name)
        if cls is None:
            raise KbError(f"unknown class: {name!r}")
        return cls

    def subclasses(self, class_name: str) -> set[str]:
        """Names of every class at or below `class_name`."""
        return {c.name for c in self.classes.values() if c.is_a(class_name)}

    # ----- instances -------------------------------------------------

    def assert_instance(self, class_name: str, value=None,
                        origin: str = ASSERTED) -> Instance:
        cls = self.resolve_class(class_name)
        value = _coerce(value)
        if cls.meta_kind == ATTRIBUTE:
            if value is None:
                raise KbError(f"attribute instance of {class_name!r} needs a value")
        elif value is not None:
            raise KbError(f"{class_name!r} is not an attribute class; it cannot carry a value")
        inst = Instance(f"i{self._next_instance}", cls, value, origin)
        self._next_instance += 1
        self.instances[inst.id] = inst
        if origin == ASSERTED:
            self.dirty = True
        return inst

    def instance(self, instance_id: str) -> Instance:
        inst = self.instances.get(instance_id)
        if inst is None:
            raise UnknownFact(f"unknown instance: {instance_id!r}")
        return inst

    def instances_of(self, class_name: str) -> Iterator[Instance]:
        """All instances whose class is `class_name` or a subclass of it."""
        if class_name not in self.classes:
            return iter(())
        names = self.subclasses(class_name)
        return (i for i in self.instances.values() if i.class_name in names)

    # ----- links -----------------------------------------------------

    def add_role(self, source: str, role_name: str, target: str,
                 origin: str = ASSERTED) -> Link:
        """Role link source -> target. Queryable from both ends."""
        self.instance(source)
        self.instance(target)
        if source == target:
            raise KbError(f"role link {role_name!r} cannot connect {source!r} to itself")
        return self._add_link(ROLE, role_name, source, target, origin)

    def add_has(self, owner: str, attribute: str, attr_class: Optional[str] = None,
                origin: str = ASSERTED) -> Link:
        """Has link from an owner to an attribute instance."""
        self.instance(owner)
        attr = self.instance(attribute)
        if attr.cls.meta_kind != ATTRIBUTE:
            raise KbError(f"has link must target an attribute instance, got {attr.class_name!r}")
        if attr_class is None:
            attr_class = attr.class_name
        elif not attr.cls.is_a(attr_class):
            raise KbError(f"{attr.class_name!r} instance does not fit has-{attr_class}")
        return self._add_link(HAS, attr_class, owner, attribute, origin)

    def _add_link(self, kind, name, source, target, origin) -> Link:
        key = (kind, name, source, target)
        existing_id = self._link_keys.get(key)
        if existing_id is not None:
            existing = self.links[existing_id]
            if origin == ASSERTED and existing.origin == INFERRED:
                existing.origin = ASSERTED  # user confirmation outlives retraction
                self.dirty = True
            return existing
        link = Link(f"e{self._next_link}", kind, name, source, target, origin)
        self._next_link += 1
        self.links[link.id] = link
        self._link_keys[key] = link.id
        if kind == ROLE:
            self._role_fwd.setdefault((source, name), set()).add(target)
            self._role_rev.setdefault((target, name), set()).add(source)
        else:
            self._has_fwd.setdefault(source, set()).add(link.id)
        if origin == ASSERTED:
            self.dirty = True
        return link

    def has_link(self, kind: str, name: str, source: str, target: str) -> bool:
        return (kind, name, source, target) in self._link_keys

    # ----- queries ---------------------------------------------------

    def query_role(self, instance_id: str, role_name: str) -> set[Instance]:
        """Instances linked to `instance_id` by `role_name`, either direction."""
        self.instance(instance_id)
        ids = set(self._role_fwd.get((instance_id, role_name), ()))
        ids |= self._role_rev.get((instance_id, role_name), set())
        return {self.instances[i] for i in ids}

    def role_targets(self, instance_id: str, role_name: str) -> set[Instance]:
        """Forward direction only: targets of role links out of `instance_id`."""
        self.instance(instance_id)
        ids = self._role_fwd.get((instance_id, role_name), ())
        return {self.instances[i] for i in ids}

    def query_has(self, instance_id: str, attr_class: str) -> set[Instance]:
        """Attributes of `instance_id` whose class is at or below `attr_class`."""
        self.instance(instance_id)
        out = set()
        for link_id in self._has_fwd.get(instance_id, ()):
            attr = self.instances[self.links[link_id].target]
            if attr.cls.is_a(attr_class):
                out.add(attr)
        return out

    def has_values(self, instance_id: str, attr_class: str) -> list[Scalar]:
        """Effective values of the `attr_class` attributes of an instance."""
        return [a.effective_value() for a in self.query_has(instance_id, attr_class)]

    # ----- mutation beyond assertion ----------------------------------

    def set_attribute_value(self, instance_id: str, new_value) -> Optional[Scalar]:
        """Replace an attribute's asserted value; pins it for one fixpoint run."""
        inst = self.instance(instance_id)
        if inst.cls.meta_kind != ATTRIBUTE:
            raise KbError(f"{inst.class_name!r} instance carries no value")
        previous = inst.value
        inst.value = _coerce(new_value)
        inst.inferred_value = None
        inst.has_inferred_value = False
        self._pinned.add(instance_id)
        self.dirty = True
        return previous

    def set_inferred_value(self, instance_id: str, value) -> bool:
        """Engine-side value override. Returns True when the effective value changed."""
        inst = self.instance(instance_id)
        changed = not same_value(inst.effective_value(), _coerce(value))
        inst.inferred_value = _coerce(value)
        inst.has_inferred_value = True
        return changed

    def is_pinned(self, instance_id: str) -> bool:
        return instance_id in self._pinned

    def clear_pins(self):
        self._pinned.clear()

    def retract_inferred(self) -> int:
        """Drop every inferred instance, link, and value override."""
        removed = 0
        doomed = {i.id for i in self.instances.values() if i.origin == INFERRED}
        for link in [l for l in self.links.values()
                     if l.origin == INFERRED or l.source in doomed or l.target in doomed]:
            self._remove_link(link)
            removed += 1
        for inst_id in doomed:
            del self.instances[inst_id]
            self.derivations.pop(inst_id, None)
            removed += 1
        for inst in self.instances.values():
            inst.inferred_value = None
            inst.has_inferred_value = False
        return removed

    def _remove_link(self, link: Link):
        del self.links[link.id]
        del self._link_keys[link.key()]
        self.derivations.pop(link.id, None)
        if link.kind == ROLE:
            self._role_fwd[(link.source, link.name)].discard(link.target)
            self._role_rev[(link.target, link.name)].discard(link.source)
        else:
            self._has_fwd[link.source].discard(link.id)

    # ----- fact bookkeeping -------------------------------------------

    def fact(self, fact_id: str):
        """Resolve an id to an Instance or a Link."""
        if fact_id in self.instances:
            return self.instances[fact_id]
        if fact_id in self.links:
            return self.links[fact_id]
        raise UnknownFact(f"unknown fact id: {fact_id!r}")

    def asserted_snapshot(self) -> tuple:
        """Canonical multiset of asserted facts, for isolation checks."""
        inst = sorted((i.class_name, value_token(i.value))
                      for i in self.instances.values() if i.origin == ASSERTED)
        links = sorted((l.kind, l.name, l.source, l.target)
                       for l in self.links.values() if l.origin == ASSERTED)
        return tuple(inst), tuple(links)

    def counts(self) -> tuple[int, int, int]:
        return len(self.classes), len(self.instances), len(self.links)

    def bind(self, name: str, instance_id: str):
        self.bindings[name] = instance_id
        self._binding_rev[instance_id] = name

    def name_of(self, instance_id: str) -> Optional[str]:
        return self._binding_rev.get(instance_id)

    def clone(self) -> "KnowledgeBase":
        return copy.deepcopy(self)

    def replace_with(self, other: "KnowledgeBase"):
        """Adopt another store's entire state (used for atomic loads)."""
        self.__dict__.update(other.__dict__)
