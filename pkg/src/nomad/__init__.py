"""Multi-agent UML class diagram generation, benchmark construction and evaluation.

Modules:

- core: diagram model, name normalization, validation
- plantuml: PlantUML reader and canonical writer
- schema: SQL DDL reader and reverse engineering to a gold diagram
- reqgen: template-based requirements from a diagram
- backends / pipeline / model: the five-stage LLM pipeline and its JSON model
- evaluator: P/R/F1 matching and the error taxonomy
- cli: the ``nomad`` command
"""

from .core import (
    Multiplicity,
    Relationship,
    RelationshipKind,
    UmlAttribute,
    UmlClass,
    UmlDiagram,
    equivalent,
    normalize_name,
    validate,
)
from .evaluator import EvalReport, evaluate
from .plantuml import emit_plantuml, parse_plantuml

__version__ = "0.1.0"

__all__ = [
    "Multiplicity",
    "Relationship",
    "RelationshipKind",
    "UmlAttribute",
    "UmlClass",
    "UmlDiagram",
    "equivalent",
    "normalize_name",
    "validate",
    "EvalReport",
    "evaluate",
    "emit_plantuml",
    "parse_plantuml",
]
