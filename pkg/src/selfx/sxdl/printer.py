"""Canonical document output: asserted facts only, assertion order, LF."""

from __future__ import annotations

import math

from ..kb import ASSERTED, ATTRIBUTE, HAS, KnowledgeBase

HEADER = "// selfx knowledge dump"


def _literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    escaped = escaped.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return f'"{escaped}"'


def dump(kb: KnowledgeBase) -> str:
    """Emit a document that reloads to an isomorphic asserted fact set."""
    lines = [HEADER]

    for cls in kb.classes.values():
        if not cls.builtin:
            lines.append(f"class {cls.name} : {cls.parent.name};")

    names: dict[str, str] = {}
    used = set(kb.bindings)

    def name_for(instance_id: str) -> str:
        known = names.get(instance_id)
        if known:
            return known
        bound = kb.name_of(instance_id)
        if bound is None:
            bound = "n" + instance_id.lstrip("i")
            while bound in used:
                bound += "_"
            used.add(bound)
        names[instance_id] = bound
        return bound

    instances = sorted((i for i in kb.instances.values() if i.origin == ASSERTED),
                       key=lambda i: int(i.id[1:]))
    for inst in instances:
        name = name_for(inst.id)
        if inst.cls.meta_kind == ATTRIBUTE:
            lines.append(f"instance {name} : {inst.class_name} = {_literal(inst.value)};")
        else:
            lines.append(f"instance {name} : {inst.class_name};")

    links = sorted((l for l in kb.links.values() if l.origin == ASSERTED),
                   key=lambda l: int(l.id[1:]))
    for link in links:
        label = f"has{link.name}" if link.kind == HAS else link.name
        lines.append(f"link {name_for(link.source)}.{label} -> {name_for(link.target)};")

    return "\n".join(lines) + "\n"
