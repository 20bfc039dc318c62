"""Asserts a parsed document into a knowledge base, all or nothing.

The loader works on a clone of the target KB and swaps it in only when
every statement succeeded, so a failed load leaves the fact set exactly
as it was. Names declared by the document become persistent bindings on
the KB; later documents loaded into the same KB may reference them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..kb import ATTRIBUTE, KbError, KnowledgeBase
from .errors import SxdlLoadError
from .nodes import (AttrAssign, BehaviorDecl, ClassDecl, Document, EnvDecl,
                    InstanceDecl, LinkDecl)


@dataclass
class LoadReport:
    classes_added: int = 0
    instances_added: int = 0
    links_added: int = 0
    bindings: dict[str, str] = field(default_factory=dict)

    def summary(self) -> str:
        return (f"{self.classes_added} classes, {self.instances_added} instances, "
                f"{self.links_added} links")


def load(doc: Document, kb: KnowledgeBase) -> LoadReport:
    work = kb.clone()
    _, instances_before, links_before = work.counts()
    classes_before = len(work.classes)
    bindings: dict[str, str] = {}

    for stmt in doc.statements:
        _apply(work, stmt, bindings)

    kb.replace_with(work)
    report = LoadReport(
        classes_added=len(kb.classes) - classes_before,
        instances_added=len(kb.instances) - instances_before,
        links_added=len(kb.links) - links_before,
        bindings=bindings,
    )
    return report


def _fail(stmt, message: str):
    raise SxdlLoadError(message, stmt.line, stmt.col)


def _apply(kb: KnowledgeBase, stmt, bindings: dict[str, str]):
    if isinstance(stmt, ClassDecl):
        try:
            kb.define_class(stmt.name, stmt.parent)
        except KbError as exc:
            _fail(stmt, str(exc))
    elif isinstance(stmt, InstanceDecl):
        _apply_instance(kb, stmt, bindings)
    elif isinstance(stmt, EnvDecl):
        for inner in stmt.instances:
            _apply_instance(kb, inner, bindings)
    elif isinstance(stmt, LinkDecl):
        _apply_link(kb, stmt)
    elif isinstance(stmt, BehaviorDecl):
        _apply_behavior(kb, stmt, bindings)
    else:  # pragma: no cover - parser produces no other nodes
        _fail(stmt, f"unsupported statement {type(stmt).__name__}")


def _declare(kb: KnowledgeBase, stmt, name: str, class_name: str, value,
             bindings: dict[str, str]) -> str:
    if name in kb.bindings:
        _fail(stmt, f"name already bound in this KB: {name!r}")
    cls = kb.classes.get(class_name)
    if cls is None:
        _fail(stmt, f"unknown class: {class_name!r}")
    try:
        inst = kb.assert_instance(class_name, value)
    except KbError as exc:
        _fail(stmt, str(exc))
    kb.bind(name, inst.id)
    bindings[name] = inst.id
    return inst.id


def _apply_instance(kb: KnowledgeBase, stmt: InstanceDecl, bindings):
    owner = _declare(kb, stmt, stmt.name, stmt.class_name, stmt.value, bindings)
    for attr in stmt.attrs:
        _apply_attr(kb, owner, attr)
    for role in stmt.roles:
        target = kb.bindings.get(role.target)
        if target is None:
            raise SxdlLoadError(f"unknown instance: {role.target!r}", role.line, role.col)
        try:
            kb.add_role(owner, role.role, target)
        except KbError as exc:
            raise SxdlLoadError(str(exc), role.line, role.col)


def _apply_attr(kb: KnowledgeBase, owner: str, attr: AttrAssign) -> str:
    cls = kb.classes.get(attr.attr_class)
    if cls is None:
        raise SxdlLoadError(f"unknown class: {attr.attr_class!r}", attr.line, attr.col)
    if cls.meta_kind != ATTRIBUTE:
        raise SxdlLoadError(f"{attr.attr_class!r} is not an attribute class",
                            attr.line, attr.col)
    try:
        inst = kb.assert_instance(attr.attr_class, attr.value)
        kb.add_has(owner, inst.id)
    except KbError as exc:
        raise SxdlLoadError(str(exc), attr.line, attr.col)
    for child in attr.children:
        _apply_attr(kb, inst.id, child)
    return inst.id


def _apply_link(kb: KnowledgeBase, stmt: LinkDecl):
    source = kb.bindings.get(stmt.source)
    target = kb.bindings.get(stmt.target)
    if source is None:
        _fail(stmt, f"unknown instance: {stmt.source!r}")
    if target is None:
        _fail(stmt, f"unknown instance: {stmt.target!r}")
    label = stmt.label
    try:
        if label.startswith("has") and len(label) > 3:
            attr_class = label[3:]
            if attr_class not in kb.classes:
                _fail(stmt, f"unknown attribute class in link label: {attr_class!r}")
            kb.add_has(source, target, attr_class=attr_class)
        else:
            kb.add_role(source, label, target)
    except KbError as exc:
        _fail(stmt, str(exc))


def _apply_behavior(kb: KnowledgeBase, stmt: BehaviorDecl, bindings):
    behavior = _declare(kb, stmt, stmt.name, "Behavior", None, bindings)
    name_attr = kb.assert_instance("Name", stmt.name)
    kb.add_has(behavior, name_attr.id)
    effect_cls = kb.classes.get(stmt.effect_class)
    if effect_cls is None:
        _fail(stmt, f"unknown class: {stmt.effect_class!r}")
    if not effect_cls.is_a("Creation"):
        _fail(stmt, f"behavior effect class {stmt.effect_class!r} is not a Creation")
    effect = kb.assert_instance(stmt.effect_class)
    for attr in stmt.attrs:
        _apply_attr(kb, effect.id, attr)
    pr = kb.assert_instance("ProcessingRequirement")
    kb.add_role(pr.id, "petitioner", behavior)
    kb.add_role(pr.id, "effect", effect.id)
