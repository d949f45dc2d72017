"""Feature models, their JSON format and the standard CNF encoding.

JSON layout (one object per feature, nested through ``children``)::

    {"name": "Car", "kind": "boolean", "relation": null, "group": null,
     "children": [{"name": "Engine", "relation": "mandatory",
                   "group": "alternative", "children": [...]}],
     "constraints": ["Radio => Battery", "!(Gas & Electric)"]}

``constraints`` only appears on the root.  ``kind`` defaults to
``"boolean"``, ``relation`` to ``"optional"`` for non-root features, and
``group`` to ``null``.

Constraint grammar, loosest binding first::

    expr  := impl ("<=>" impl)*
    impl  := or ("=>" impl)?            right associative
    or    := and ("|" and)*
    and   := unary ("&" unary)*
    unary := "!" unary | "(" expr ")" | NAME

``NAME`` is a feature name; ``NAME'`` refers to the second ("static")
variable of a tristate feature.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .cnf import Assignment, Formula

KINDS = ("boolean", "tristate")
RELATIONS = ("mandatory", "optional")
GROUPS = ("or", "alternative")


class FeatureModelError(ValueError):
    pass


# ----------------------------------------------------------------- expressions

Expr = tuple  # ("var", name, static) | ("not", e) | ("and", [e]) | ("or", [e]) | ("imp", a, b) | ("iff", a, b)

_TOKEN = re.compile(r"\s*(<=>|=>|[!&|()]|[A-Za-z_][A-Za-z0-9_.]*'?)")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FeatureModelError(f"unexpected character at {pos} in {text!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, tok: Optional[str] = None) -> str:
        t = self.peek()
        if t is None or (tok is not None and t != tok):
            raise FeatureModelError(f"expected {tok or 'token'} in {self.text!r}")
        self.i += 1
        return t

    def parse(self) -> Expr:
        e = self.equiv()
        if self.peek() is not None:
            raise FeatureModelError(f"trailing {self.peek()!r} in {self.text!r}")
        return e

    def equiv(self) -> Expr:
        e = self.impl()
        while self.peek() == "<=>":
            self.take()
            e = ("iff", e, self.impl())
        return e

    def impl(self) -> Expr:
        e = self.disj()
        if self.peek() == "=>":
            self.take()
            return ("imp", e, self.impl())
        return e

    def disj(self) -> Expr:
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else ("or", parts)

    def conj(self) -> Expr:
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", parts)

    def unary(self) -> Expr:
        t = self.take()
        if t == "!":
            return ("not", self.unary())
        if t == "(":
            e = self.equiv()
            self.take(")")
            return e
        if t in ("&", "|", ")", "=>", "<=>"):
            raise FeatureModelError(f"unexpected {t!r} in {self.text!r}")
        if t.endswith("'"):
            return ("var", t[:-1], True)
        return ("var", t, False)


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


def expr_names(e: Expr) -> Iterator[tuple[str, bool]]:
    tag = e[0]
    if tag == "var":
        yield e[1], e[2]
    elif tag == "not":
        yield from expr_names(e[1])
    elif tag in ("and", "or"):
        for x in e[1]:
            yield from expr_names(x)
    else:
        yield from expr_names(e[1])
        yield from expr_names(e[2])


def evaluate(e: Expr, env: dict[tuple[str, bool], bool]) -> bool:
    tag = e[0]
    if tag == "var":
        return env[(e[1], e[2])]
    if tag == "not":
        return not evaluate(e[1], env)
    if tag == "and":
        return all(evaluate(x, env) for x in e[1])
    if tag == "or":
        return any(evaluate(x, env) for x in e[1])
    if tag == "imp":
        return (not evaluate(e[1], env)) or evaluate(e[2], env)
    return evaluate(e[1], env) == evaluate(e[2], env)


# ----------------------------------------------------------------------- model


@dataclass
class Feature:
    name: str
    kind: str = "boolean"
    relation: Optional[str] = None
    group: Optional[str] = None
    children: list["Feature"] = field(default_factory=list)

    def walk(self) -> Iterator["Feature"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class FeatureModel:
    root: Feature
    constraints: list[str] = field(default_factory=list)

    def __post_init__(self):
        self._validate()
        self.parsed = [parse_expr(c) for c in self.constraints]
        kinds = {f.name: f.kind for f in self.features()}
        for text, e in zip(self.constraints, self.parsed):
            for name, static in expr_names(e):
                if name not in kinds:
                    raise FeatureModelError(f"constraint {text!r} references unknown feature {name!r}")
                if static and kinds[name] != "tristate":
                    raise FeatureModelError(f"{name}' used but {name!r} is not tristate")

    def features(self) -> list[Feature]:
        return list(self.root.walk())

    def _validate(self) -> None:
        if self.root.relation is not None:
            raise FeatureModelError("root feature cannot have a relation")
        names = set()
        for f in self.root.walk():
            if f.name in names:
                raise FeatureModelError(f"duplicate feature name {f.name!r}")
            names.add(f.name)
            if f.kind not in KINDS:
                raise FeatureModelError(f"{f.name}: unknown kind {f.kind!r}")
            if f.group is not None:
                if f.group not in GROUPS:
                    raise FeatureModelError(f"{f.name}: unknown group {f.group!r}")
                if len(f.children) < 2:
                    raise FeatureModelError(f"{f.name}: group needs at least 2 children")
            for c in f.children:
                if c.relation not in RELATIONS:
                    raise FeatureModelError(f"{c.name}: relation must be one of {RELATIONS}")


def _feature_from_json(obj: dict, is_root: bool) -> Feature:
    if not isinstance(obj, dict) or "name" not in obj:
        raise FeatureModelError("every feature needs a name")
    relation = obj.get("relation")
    if not is_root and relation is None:
        relation = "optional"
    return Feature(
        name=str(obj["name"]),
        kind=obj.get("kind", "boolean"),
        relation=relation,
        group=obj.get("group"),
        children=[_feature_from_json(c, False) for c in obj.get("children", [])],
    )


def parse_fm(doc: Union[str, dict]) -> FeatureModel:
    if isinstance(doc, str):
        doc = json.loads(doc)
    root = _feature_from_json(doc, True)
    return FeatureModel(root, list(doc.get("constraints", [])))


def _feature_to_json(f: Feature) -> dict:
    out = {"name": f.name, "kind": f.kind, "relation": f.relation, "group": f.group}
    out["children"] = [_feature_to_json(c) for c in f.children]
    return out


def fm_to_json(fm: FeatureModel) -> dict:
    doc = _feature_to_json(fm.root)
    doc["constraints"] = list(fm.constraints)
    return doc


# -------------------------------------------------------------------- encoding


@dataclass
class VarMap:
    """Feature name to CNF variable(s).

    ``presence[name]`` is the selection variable ``a``; tristate features
    also get ``static[name]`` (``a'``).  ``aux`` lists Tseitin variables.
    """

    presence: dict[str, int] = field(default_factory=dict)
    static: dict[str, int] = field(default_factory=dict)
    aux: list[int] = field(default_factory=list)

    def feature_vars(self) -> list[int]:
        return sorted(list(self.presence.values()) + list(self.static.values()))

    def lookup(self, name: str, is_static: bool) -> int:
        return self.static[name] if is_static else self.presence[name]

    def as_dict(self) -> dict:
        return {"presence": self.presence, "static": self.static, "aux": self.aux}

    def decode(self, model: Assignment) -> dict[str, Union[bool, str]]:
        """Selected state per feature; tristates give ``static``/``module``/``absent``."""
        out: dict[str, Union[bool, str]] = {}
        for name, v in self.presence.items():
            if name in self.static:
                a, s = model[v], model[self.static[name]]
                out[name] = "static" if a and s else ("module" if a else "absent")
            else:
                out[name] = model[v]
        return out


def _literal(e: Expr, vm: VarMap) -> Optional[int]:
    if e[0] == "var":
        return vm.lookup(e[1], e[2])
    if e[0] == "not" and e[1][0] == "var":
        return -vm.lookup(e[1][1], e[1][2])
    return None


def _clause_literals(e: Expr, vm: VarMap) -> Optional[list[int]]:
    """Literals if ``e`` is already a single clause, else ``None``."""
    lit = _literal(e, vm)
    if lit is not None:
        return [lit]
    if e[0] == "or":
        out = []
        for x in e[1]:
            lits = _clause_literals(x, vm)
            if lits is None:
                return None
            out.extend(lits)
        return out
    if e[0] == "imp":
        a = _literal(e[1], vm)
        right = _clause_literals(e[2], vm)
        if a is None or right is None:
            return None
        return [-a] + right
    return None


class _Tseitin:
    def __init__(self, vm: VarMap, next_var: int, clauses: list):
        self.vm = vm
        self.next_var = next_var
        self.clauses = clauses

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        self.vm.aux.append(v)
        return v

    def lit(self, e: Expr) -> int:
        tag = e[0]
        if tag == "var":
            return self.vm.lookup(e[1], e[2])
        if tag == "not":
            return -self.lit(e[1])
        if tag == "imp":
            return self.lit(("or", [("not", e[1]), e[2]]))
        if tag == "iff":
            a, b = self.lit(e[1]), self.lit(e[2])
            z = self.fresh()
            self.clauses += [(-z, -a, b), (-z, a, -b), (z, a, b), (z, -a, -b)]
            return z
        lits = [self.lit(x) for x in e[1]]
        z = self.fresh()
        if tag == "and":
            self.clauses += [(-z, l) for l in lits]
            self.clauses.append((z,) + tuple(-l for l in lits))
        else:
            self.clauses.append((-z,) + tuple(lits))
            self.clauses += [(z, -l) for l in lits]
        return z


def _conjuncts(e: Expr) -> Iterator[Expr]:
    if e[0] == "and":
        for x in e[1]:
            yield from _conjuncts(x)
    else:
        yield e


def encode_fm(fm: FeatureModel) -> tuple[Formula, VarMap]:
    """Structural clauses, tristate clauses and Tseitin-encoded constraints.

    Variables are numbered in pre-order; a tristate feature's ``a'``
    directly follows its ``a``.  Constraint conjuncts that already are
    clauses are emitted verbatim, the rest through Tseitin definitions
    (full equivalences, so projected counts are preserved).
    """
    vm = VarMap()
    nv = 0
    for f in fm.root.walk():
        nv += 1
        vm.presence[f.name] = nv
        if f.kind == "tristate":
            nv += 1
            vm.static[f.name] = nv

    clauses: list[tuple[int, ...]] = [(vm.presence[fm.root.name],)]
    for f in fm.root.walk():
        p = vm.presence[f.name]
        if f.kind == "tristate":
            clauses.append((p, -vm.static[f.name]))
        kids = [vm.presence[c.name] for c in f.children]
        for c, cv in zip(f.children, kids):
            clauses.append((-cv, p))
            if c.relation == "mandatory":
                clauses.append((-p, cv))
        if f.group in GROUPS:
            clauses.append((-p,) + tuple(kids))
            if f.group == "alternative":
                for i in range(len(kids)):
                    for j in range(i + 1, len(kids)):
                        clauses.append((-kids[i], -kids[j]))

    ts = _Tseitin(vm, nv + 1, clauses)
    for e in fm.parsed:
        for part in _conjuncts(e):
            lits = _clause_literals(part, vm)
            if lits is None:
                clauses.append((ts.lit(part),))
            else:
                clauses.append(tuple(lits))
    return Formula(ts.next_var - 1, tuple(clauses)), vm


def ctcr(fm: FeatureModel) -> float:
    """Fraction of features mentioned by at least one cross-tree constraint."""
    total = len(fm.features())
    mentioned = {name for e in fm.parsed for name, _ in expr_names(e)}
    return len(mentioned) / total
