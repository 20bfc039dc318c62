"""Syntax tree for documents. Every node keeps its source position."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Literal = Union[str, float, bool]


@dataclass
class AttrAssign:
    """`has X = v;` or the nested `has X unit { ... }` form."""
    attr_class: str
    value: Literal
    children: list["AttrAssign"]
    line: int
    col: int


@dataclass
class RoleAssign:
    role: str
    target: str
    line: int
    col: int


@dataclass
class ClassDecl:
    name: str
    parent: str
    line: int
    col: int


@dataclass
class InstanceDecl:
    name: str
    class_name: str
    value: Optional[Literal]
    attrs: list[AttrAssign]
    roles: list[RoleAssign]
    line: int
    col: int


@dataclass
class LinkDecl:
    source: str
    label: str  # a role name, or has<AttributeClass>
    target: str
    line: int
    col: int


@dataclass
class EnvDecl:
    instances: list[InstanceDecl]
    line: int
    col: int


@dataclass
class BehaviorDecl:
    name: str
    effect_class: str
    attrs: list[AttrAssign]
    line: int
    col: int


Statement = Union[ClassDecl, InstanceDecl, LinkDecl, EnvDecl, BehaviorDecl]


@dataclass
class Document:
    statements: list[Statement] = field(default_factory=list)

    def __len__(self):
        return len(self.statements)
