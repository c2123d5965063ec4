"""JSON intermediate model: schema validation and conversion to/from UmlDiagram."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema

from .core import (
    Multiplicity,
    Relationship,
    RelationshipKind,
    UmlAttribute,
    UmlClass,
    UmlDiagram,
    validate,
)

__all__ = [
    "SCHEMA_RESOURCE",
    "load_schema",
    "model_errors",
    "to_diagram",
    "from_diagram",
    "canonical_model",
]

SCHEMA_RESOURCE = "schemas/intermediate_model.schema.json"


@lru_cache(maxsize=1)
def load_schema() -> dict:
    text = resources.files("nomad").joinpath(SCHEMA_RESOURCE).read_text(encoding="utf-8")
    return json.loads(text)


@lru_cache(maxsize=1)
def _validator():
    schema = load_schema()
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


def model_errors(doc: Any) -> list[str]:
    """Schema violations, then referential problems; empty when usable."""
    errors = []
    for err in sorted(_validator().iter_errors(doc), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append(f"{where}: {err.message}")
    if errors:
        return errors
    try:
        diagram = to_diagram(doc)
    except ValueError as exc:
        return [str(exc)]
    return [v.message for v in validate(diagram)]


def _mult(value) -> Multiplicity | None:
    if value is None:
        return None
    return Multiplicity.parse(value)


def to_diagram(doc: dict) -> UmlDiagram:
    classes = tuple(
        UmlClass(
            name=c["name"],
            attributes=tuple(UmlAttribute(a) for a in c.get("attributes", [])),
            is_enumeration=bool(c.get("enumeration", False)),
            is_abstract=bool(c.get("abstract", False)),
        )
        for c in doc.get("classes", [])
    )
    rels = tuple(
        Relationship(
            source=r["source"],
            target=r["target"],
            kind=RelationshipKind.parse(r["type"]),
            source_multiplicity=_mult(r.get("sourceMultiplicity")),
            target_multiplicity=_mult(r.get("targetMultiplicity")),
            label=r.get("label"),
        )
        for r in doc.get("relationships", [])
    )
    return UmlDiagram(classes, rels, doc.get("title"))


def from_diagram(diagram: UmlDiagram) -> dict:
    """Intermediate model of a diagram.  Attribute types, visibility and
    operations have no place in the model and are dropped."""
    doc: dict = {
        "classes": [
            {
                "name": c.name,
                "attributes": [a.name for a in c.attributes],
                "enumeration": c.is_enumeration,
                "abstract": c.is_abstract,
            }
            for c in diagram.classes
        ],
        "relationships": [
            {
                "source": r.source,
                "target": r.target,
                "type": r.kind.value,
                "sourceMultiplicity": str(r.source_multiplicity) if r.source_multiplicity else None,
                "targetMultiplicity": str(r.target_multiplicity) if r.target_multiplicity else None,
                "label": r.label,
            }
            for r in diagram.relationships
        ],
    }
    if diagram.title:
        doc["title"] = diagram.title
    return doc


def canonical_model(doc: dict) -> dict:
    """Fill defaults and spell multiplicities canonically."""
    return from_diagram(to_diagram(doc))
