"""Template-based natural-language requirements from a class diagram."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional

from .core import Multiplicity, Relationship, RelationshipKind, UmlClass, UmlDiagram, validate

__all__ = [
    "Requirement",
    "ReqGenConfig",
    "DEFAULT_AUDIT_NAMES",
    "generate_requirements",
    "render_document",
    "trace_sidecar",
    "class_ref",
    "relationship_ref",
]

DEFAULT_AUDIT_NAMES = frozenset({"created_by", "created_at", "modified_by", "modified_at"})

FUNCTIONAL = "functional"
NON_FUNCTIONAL = "non_functional"
_KIND_LETTER = {FUNCTIONAL: "F", NON_FUNCTIONAL: "N"}


@dataclass(frozen=True)
class Requirement:
    id: str
    kind: str
    text: str
    trace: tuple[str, ...] = ()

    def line(self) -> str:
        return f"{self.id}: {self.text}"


@dataclass(frozen=True)
class ReqGenConfig:
    domain_prefix: str = "REQ"
    audit_attribute_names: frozenset[str] = DEFAULT_AUDIT_NAMES
    include_nonfunctional: bool = False
    # "literal" renders 1..1 / 0..*; "readable" renders "exactly one" / "zero or more"
    multiplicity_style: str = "literal"

    def __post_init__(self):
        if not self.domain_prefix.strip():
            raise ValueError("domain_prefix must be non-empty")
        if self.multiplicity_style not in ("literal", "readable"):
            raise ValueError(f"unknown multiplicity_style {self.multiplicity_style!r}")
        object.__setattr__(self, "audit_attribute_names", frozenset(self.audit_attribute_names))

    @classmethod
    def from_mapping(cls, data: dict) -> "ReqGenConfig":
        kwargs = {}
        if "domain_prefix" in data:
            kwargs["domain_prefix"] = str(data["domain_prefix"])
        if "audit_attribute_names" in data:
            kwargs["audit_attribute_names"] = frozenset(data["audit_attribute_names"])
        if "include_nonfunctional" in data:
            kwargs["include_nonfunctional"] = bool(data["include_nonfunctional"])
        if "multiplicity_style" in data:
            kwargs["multiplicity_style"] = str(data["multiplicity_style"])
        return cls(**kwargs)


def class_ref(c: UmlClass | str) -> str:
    return f"class:{c if isinstance(c, str) else c.name}"


def relationship_ref(index: int, r: Relationship) -> str:
    return f"relationship[{index}]:{r.describe()}"


def _audit_key(name: str) -> str:
    # CreatedBy, created_by and created-by are the same audit column
    return re.sub(r"[^0-9a-z]", "", name.casefold())


_READABLE = {
    (1, 1): "exactly one",
    (0, 1): "zero or one",
    (0, None): "zero or more",
    (1, None): "one or more",
}


def _quantity(m: Optional[Multiplicity], style: str) -> str:
    if m is None:
        return ""
    if style == "readable":
        words = _READABLE.get((m.lower, m.upper))
        if words:
            return words + " "
    return m.literal() + " "


def _instances(m: Optional[Multiplicity], style: str) -> str:
    if style == "readable" and m is not None and m.upper == 1:
        return "instance"
    return "instances"


def _either(names: list[str]) -> str:
    if len(names) == 1:
        return names[0]
    if len(names) == 2:
        return f"either {names[0]} or {names[1]}"
    return "either " + ", ".join(names[:-1]) + f", or {names[-1]}"


def _orient(r: Relationship) -> tuple[str, Optional[Multiplicity], str, Optional[Multiplicity]]:
    """``(subject, subject mult, object, object mult)`` for the association sentence.

    The sentence is written from the many side; when both ends agree, from
    the alphabetically first class.
    """
    sm, tm = r.source_multiplicity, r.target_multiplicity
    s_many = sm is not None and sm.is_many
    t_many = tm is not None and tm.is_many
    if t_many and not s_many:
        return r.target, tm, r.source, sm
    if s_many and not t_many:
        return r.source, sm, r.target, tm
    if r.target.casefold() < r.source.casefold():
        return r.target, tm, r.source, sm
    return r.source, sm, r.target, tm


class _Numberer:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.counters = {FUNCTIONAL: 0, NON_FUNCTIONAL: 0}

    def next(self, kind: str) -> str:
        self.counters[kind] += 1
        return f"{self.prefix}-{_KIND_LETTER[kind]}{self.counters[kind]:03d}"


def generate_requirements(diagram: UmlDiagram, cfg: ReqGenConfig = ReqGenConfig()) -> list[Requirement]:
    """Requirements in document order.

    Per class: a record requirement (a catalogue requirement for
    enumerations) and, when the class owns audit attributes, a separate
    audit requirement.  Then one association sentence per non-generalization
    relationship and one classification sentence per superclass.  With
    ``include_nonfunctional``, referential-integrity and naming-convention
    requirements follow.
    """
    problems = validate(diagram)
    if problems:
        raise ValueError("invalid diagram: " + "; ".join(p.message for p in problems))
    ids = _Numberer(cfg.domain_prefix)
    audit = {_audit_key(a) for a in cfg.audit_attribute_names}
    style = cfg.multiplicity_style
    reqs: list[Requirement] = []

    def add(kind: str, text: str, trace: list[str]):
        reqs.append(Requirement(ids.next(kind), kind, text, tuple(trace)))

    for c in diagram.classes:
        names = [a.name for a in c.attributes]
        if c.is_enumeration:
            values = f" with the values {', '.join(names)}" if names else ""
            add(
                FUNCTIONAL,
                f"The system shall maintain a corresponding catalogue of {c.name}{values}.",
                [class_ref(c)],
            )
            continue
        plain = [n for n in names if _audit_key(n) not in audit]
        audited = [n for n in names if _audit_key(n) in audit]
        if plain:
            text = f"The system shall record {c.name} information including {', '.join(plain)}."
        else:
            text = f"The system shall record {c.name} information."
        add(FUNCTIONAL, text, [class_ref(c)])
        if audited:
            add(
                FUNCTIONAL,
                f"The system shall record audit information for {c.name} including {', '.join(audited)}.",
                [class_ref(c)],
            )

    families: dict[str, list[tuple[int, Relationship]]] = {}
    for i, r in enumerate(diagram.relationships):
        if r.kind is RelationshipKind.GENERALIZATION:
            families.setdefault(r.target, []).append((i, r))
            continue
        subj, _, obj, obj_mult = _orient(r)
        add(
            FUNCTIONAL,
            f"The system shall associate each instance of {subj} with "
            f"{_quantity(obj_mult, style)}{_instances(obj_mult, style)} of {obj}.",
            [relationship_ref(i, r), class_ref(subj), class_ref(obj)],
        )

    for parent, members in families.items():
        subs = list(dict.fromkeys(r.source for _, r in members))
        add(
            FUNCTIONAL,
            f"The system shall maintain instances of {parent} classified as {_either(subs)}.",
            [class_ref(parent)] + [relationship_ref(i, r) for i, r in members],
        )

    if cfg.include_nonfunctional:
        for i, r in enumerate(diagram.relationships):
            if r.kind is RelationshipKind.GENERALIZATION:
                continue
            add(
                NON_FUNCTIONAL,
                f"The system shall enforce referential integrity between {r.source} and {r.target} records.",
                [relationship_ref(i, r)],
            )
        if diagram.classes:
            add(
                NON_FUNCTIONAL,
                "The system shall apply consistent naming conventions to all recorded entities and their attributes.",
                [class_ref(c) for c in diagram.classes],
            )
    return reqs


def _id_key(req_id: str):
    m = re.match(r"^(.*-)([A-Z])(\d+)$", req_id)
    if m:
        return (m.group(1), m.group(2), int(m.group(3)))
    return (req_id, "", 0)


def render_document(reqs: list[Requirement]) -> str:
    """One ``ID: text`` line per requirement, in id order."""
    seen = set()
    for r in reqs:
        if r.id in seen:
            raise ValueError(f"duplicate requirement id {r.id!r}")
        seen.add(r.id)
    return "".join(r.line() + "\n" for r in sorted(reqs, key=lambda r: _id_key(r.id)))


def trace_sidecar(reqs: list[Requirement]) -> str:
    """JSON mapping each requirement id to its kind and traced elements."""
    data = {r.id: {"kind": r.kind, "trace": list(r.trace)} for r in sorted(reqs, key=lambda r: _id_key(r.id))}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
