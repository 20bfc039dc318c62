"""Single-pass recursive-descent parser.

Grammar (keywords are bit-exact; see README for the full reference):

    document     := statement*
    statement    := classDecl | instanceDecl | linkDecl | envDecl | behaviorDecl
    classDecl    := "class" IDENT ":" IDENT ";"
    instanceDecl := "instance" IDENT ":" IDENT ["=" literal] (body | ";")
    body         := "{" (attrAssign | roleAssign)* "}"
    attrAssign   := "has" IDENT "=" literal ";"
                  | "has" IDENT IDENT "{" attrAssign* "}"
    roleAssign   := "role" IDENT "->" IDENT ";"
    linkDecl     := "link" IDENT "." IDENT "->" IDENT ";"
    envDecl      := "environment" "{" instanceDecl* "}"
    behaviorDecl := "behavior" IDENT "{" "effect" ":" IDENT "{" attrAssign* "}" "}"
    literal      := STRING | NUMBER | "true" | "false" | "nan"

Instance names must be declared before they are referenced; class names
are resolved later, at load time, because they may live in the target KB.
"""

from __future__ import annotations

import math

from .errors import SxdlParseError
from .lexer import Token, tokenize
from .nodes import (AttrAssign, BehaviorDecl, ClassDecl, Document, EnvDecl,
                    InstanceDecl, LinkDecl, RoleAssign)

_LITERAL_KINDS = ("STRING", "NUMBER", "true", "false", "nan")


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.instance_names: set[str] = set()
        self.class_names: set[str] = set()

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.cur
        raise SxdlParseError(message, tok.line, tok.col, tok.text)

    def expect(self, kind: str, what: str = "") -> Token:
        if self.cur.kind != kind:
            want = what or kind.lower()
            raise SxdlParseError(f"expected {want}", self.cur.line, self.cur.col,
                                 self.cur.text or "<end of input>")
        return self.advance()

    # ----- grammar --------------------------------------------------

    def document(self) -> Document:
        doc = Document()
        while self.cur.kind != "EOF":
            doc.statements.append(self.statement())
        return doc

    def statement(self):
        kind = self.cur.kind
        if kind == "class":
            return self.class_decl()
        if kind == "instance":
            return self.instance_decl()
        if kind == "link":
            return self.link_decl()
        if kind == "environment":
            return self.env_decl()
        if kind == "behavior":
            return self.behavior_decl()
        self.error("expected a statement (class, instance, link, environment or behavior)")

    def class_decl(self) -> ClassDecl:
        start = self.advance()
        name = self.expect("IDENT", "class name")
        if name.text in self.class_names:
            self.error(f"duplicate class declaration: {name.text}", name)
        self.expect("COLON")
        parent = self.expect("IDENT", "parent class name")
        self.expect("SEMI")
        self.class_names.add(name.text)
        return ClassDecl(name.text, parent.text, start.line, start.col)

    def instance_decl(self) -> InstanceDecl:
        start = self.advance()
        name = self.expect("IDENT", "instance name")
        if name.text in self.instance_names:
            self.error(f"duplicate instance name: {name.text}", name)
        self.expect("COLON")
        class_name = self.expect("IDENT", "class name")
        value = None
        if self.cur.kind == "EQ":
            self.advance()
            value = self.literal()
        attrs: list[AttrAssign] = []
        roles: list[RoleAssign] = []
        if self.cur.kind == "SEMI":
            self.advance()
        else:
            self.expect("LBRACE", "'{' or ';'")
            while self.cur.kind != "RBRACE":
                if self.cur.kind == "has":
                    attrs.append(self.attr_assign())
                elif self.cur.kind == "role":
                    roles.append(self.role_assign())
                else:
                    self.error("expected 'has', 'role' or '}' in instance body")
            self.advance()
        # the declared name becomes referenceable only after its own body
        self.instance_names.add(name.text)
        return InstanceDecl(name.text, class_name.text, value, attrs, roles,
                            start.line, start.col)

    def attr_assign(self) -> AttrAssign:
        start = self.advance()  # has
        attr_class = self.expect("IDENT", "attribute class name")
        if self.cur.kind == "EQ":
            self.advance()
            value = self.literal()
            self.expect("SEMI")
            return AttrAssign(attr_class.text, value, [], start.line, start.col)
        unit = self.expect("IDENT", "'=' or a unit identifier")
        self.expect("LBRACE")
        children = []
        while self.cur.kind != "RBRACE":
            if self.cur.kind != "has":
                self.error("expected 'has' or '}' in nested attribute")
            children.append(self.attr_assign())
        self.advance()
        return AttrAssign(attr_class.text, unit.text, children, start.line, start.col)

    def role_assign(self) -> RoleAssign:
        start = self.advance()  # role
        role = self.expect("IDENT", "role name")
        self.expect("ARROW")
        target = self.expect("IDENT", "target instance name")
        self.check_reference(target)
        self.expect("SEMI")
        return RoleAssign(role.text, target.text, start.line, start.col)

    def link_decl(self) -> LinkDecl:
        start = self.advance()
        source = self.expect("IDENT", "source instance name")
        self.check_reference(source)
        self.expect("DOT")
        label = self.expect("IDENT", "role or has-attribute label")
        self.expect("ARROW")
        target = self.expect("IDENT", "target instance name")
        self.check_reference(target)
        self.expect("SEMI")
        return LinkDecl(source.text, label.text, target.text, start.line, start.col)

    def env_decl(self) -> EnvDecl:
        start = self.advance()
        self.expect("LBRACE")
        instances = []
        while self.cur.kind != "RBRACE":
            if self.cur.kind != "instance":
                self.error("expected 'instance' or '}' in environment block")
            instances.append(self.instance_decl())
        self.advance()
        return EnvDecl(instances, start.line, start.col)

    def behavior_decl(self) -> BehaviorDecl:
        start = self.advance()
        name = self.expect("IDENT", "behavior name")
        if name.text in self.instance_names:
            self.error(f"duplicate instance name: {name.text}", name)
        self.expect("LBRACE")
        effect_kw = self.expect("IDENT", "'effect'")
        if effect_kw.text != "effect":
            self.error("expected 'effect'", effect_kw)
        self.expect("COLON")
        effect_class = self.expect("IDENT", "effect class name")
        self.expect("LBRACE")
        attrs = []
        while self.cur.kind != "RBRACE":
            if self.cur.kind != "has":
                self.error("expected 'has' or '}' in effect block")
            attrs.append(self.attr_assign())
        self.advance()
        self.expect("RBRACE")
        self.instance_names.add(name.text)
        return BehaviorDecl(name.text, effect_class.text, attrs, start.line, start.col)

    def literal(self):
        tok = self.cur
        if tok.kind == "STRING":
            self.advance()
            return tok.text
        if tok.kind == "NUMBER":
            self.advance()
            return float(tok.text)
        if tok.kind == "true":
            self.advance()
            return True
        if tok.kind == "false":
            self.advance()
            return False
        if tok.kind == "nan":
            self.advance()
            return math.nan
        self.error("expected a literal (string, number, true, false or nan)")

    def check_reference(self, tok: Token):
        if tok.text not in self.instance_names:
            self.error(f"forward or unknown instance reference: {tok.text}", tok)


def parse(text: str) -> Document:
    """Parse a document. Raises SxdlParseError with line/column on any flaw."""
    return _Parser(text).document()
