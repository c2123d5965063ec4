"""In-memory UML class diagram model, name normalization and validation.

All model types are frozen dataclasses holding tuples, so diagrams can be
hashed, shared between threads and used as dictionary keys.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

__all__ = [
    "RelationshipKind",
    "Multiplicity",
    "UmlAttribute",
    "UmlClass",
    "Relationship",
    "UmlDiagram",
    "Violation",
    "DanglingEndpoint",
    "DuplicateClass",
    "DuplicateAttribute",
    "GeneralizationMultiplicity",
    "normalize_name",
    "singularize",
    "validate",
    "canonical_form",
    "equivalent",
]


class RelationshipKind(str, enum.Enum):
    ASSOCIATION = "association"
    AGGREGATION = "aggregation"
    COMPOSITION = "composition"
    GENERALIZATION = "generalization"

    @classmethod
    def parse(cls, value: str) -> "RelationshipKind":
        key = value.strip().lower()
        aliases = {
            "inheritance": cls.GENERALIZATION,
            "generalisation": cls.GENERALIZATION,
            "extends": cls.GENERALIZATION,
            "realization": cls.GENERALIZATION,
        }
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True, order=True)
class Multiplicity:
    """Instance count range ``lower..upper``; ``upper=None`` means unbounded."""

    lower: int
    upper: Optional[int] = None

    def __post_init__(self):
        if self.lower < 0:
            raise ValueError(f"negative lower bound: {self.lower}")
        if self.upper is not None and self.upper < self.lower:
            raise ValueError(f"upper bound {self.upper} below lower bound {self.lower}")

    @property
    def is_many(self) -> bool:
        return self.upper is None or self.upper > 1

    @classmethod
    def parse(cls, text: str) -> "Multiplicity":
        """Parse ``"1"``, ``"*"``, ``"0..*"``, ``"1..n"`` and similar forms."""
        s = text.strip().replace(" ", "")
        if s in ("*", "n", "N", "m", "many"):
            return cls(0, None)
        if ".." in s:
            lo, _, hi = s.partition("..")
            lower = int(lo)
            upper = None if hi in ("*", "n", "N", "m", "many") else int(hi)
            return cls(lower, upper)
        n = int(s)
        return cls(n, n)

    def literal(self) -> str:
        """Always the ``m..n`` form, e.g. ``1..1`` or ``0..*``."""
        return f"{self.lower}..{'*' if self.upper is None else self.upper}"

    def __str__(self) -> str:
        if self.upper == self.lower:
            return str(self.lower)
        return self.literal()


ONE = Multiplicity(1, 1)
ZERO_OR_ONE = Multiplicity(0, 1)
MANY = Multiplicity(0, None)


@dataclass(frozen=True)
class UmlAttribute:
    name: str
    declared_type: Optional[str] = None
    visibility: Optional[str] = None

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("attribute name must be non-empty")


@dataclass(frozen=True)
class UmlClass:
    name: str
    attributes: tuple[UmlAttribute, ...] = ()
    is_enumeration: bool = False
    is_abstract: bool = False
    stereotype: Optional[str] = None
    # stored for round-trip fidelity only, never matched
    operations: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("class name must be non-empty")
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "operations", tuple(self.operations))

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]


@dataclass(frozen=True)
class Relationship:
    source: str
    target: str
    kind: RelationshipKind = RelationshipKind.ASSOCIATION
    source_multiplicity: Optional[Multiplicity] = None
    target_multiplicity: Optional[Multiplicity] = None
    label: Optional[str] = None

    def triple(self) -> tuple[str, str, RelationshipKind]:
        """Normalized ``(source, target, kind)`` used for matching."""
        return (normalize_name(self.source), normalize_name(self.target), self.kind)

    def describe(self) -> str:
        return f"{self.source} -[{self.kind.value}]-> {self.target}"


@dataclass(frozen=True)
class UmlDiagram:
    classes: tuple[UmlClass, ...] = ()
    relationships: tuple[Relationship, ...] = ()
    title: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "relationships", tuple(self.relationships))

    def class_named(self, name: str) -> Optional[UmlClass]:
        key = normalize_name(name)
        for c in self.classes:
            if normalize_name(c.name) == key:
                return c
        return None

    def element_count(self) -> int:
        """Classes plus attributes plus relationships."""
        return (
            len(self.classes)
            + sum(len(c.attributes) for c in self.classes)
            + len(self.relationships)
        )


# ---------------------------------------------------------------------------
# name normalization

_SEPARATORS = re.compile(r"[\s_\-]+")

# checked before any suffix rule
_IRREGULAR = {
    "children": "child",
    "people": "person",
    "men": "man",
    "women": "woman",
    "mice": "mouse",
    "geese": "goose",
    "feet": "foot",
    "teeth": "tooth",
    "oxen": "ox",
    "indices": "index",
    "vertices": "vertex",
    "matrices": "matrix",
    "appendices": "appendix",
    "analyses": "analysis",
    "diagnoses": "diagnosis",
    "theses": "thesis",
    "crises": "crisis",
    "criteria": "criterion",
    "phenomena": "phenomenon",
    "leaves": "leaf",
    "lives": "life",
    "wives": "wife",
    "knives": "knife",
    "halves": "half",
    "shelves": "shelf",
    "wolves": "wolf",
    "movies": "movie",
    "cookies": "cookie",
    "statuses": "status",
    "buses": "bus",
    "campuses": "campus",
    "viruses": "virus",
    "aliases": "alias",
    "quizzes": "quiz",
}

# already singular (or uncountable) despite the trailing "s"
_INVARIANT = {
    "series", "species", "news", "status", "bus", "campus", "virus", "alias",
    "analysis", "basis", "axis", "crisis", "diagnosis", "thesis", "bonus",
    "census", "corpus", "genus", "focus", "radius", "apparatus", "canvas",
    "gas", "lens", "atlas", "chassis", "ethics", "physics", "mathematics",
    "logistics", "statistics", "economics", "politics", "electronics",
    "address", "business", "process", "access", "class", "glass", "boss",
    "data", "sheep", "fish", "deer",
}


def singularize(word: str) -> str:
    """Singular form of one lowercase English word via a fixed rule table."""
    if word in _IRREGULAR:
        return _IRREGULAR[word]
    if word in _INVARIANT or len(word) < 4 or not word.endswith("s"):
        return word
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith(("xes", "ches", "shes", "zzes")):
        return word[:-2]
    if word.endswith(("ss", "us", "is")):
        return word
    return word[:-1]


def normalize_name(raw: str) -> str:
    """Canonical comparison key for class, attribute and relationship names.

    Case-folds, collapses runs of whitespace, underscores and hyphens into a
    single space, and singularizes the last word.

    >>> normalize_name("Order_Details")
    'order detail'
    >>> normalize_name("Categories")
    'category'
    """
    # upper() first so that normalize(x) == normalize(x.upper()) also holds
    # for characters whose lowercase and uppercase fold differently
    text = _SEPARATORS.sub(" ", raw.upper().casefold()).strip()
    if not text:
        return ""
    head, _, last = text.rpartition(" ")
    last = singularize(last)
    return f"{head} {last}" if head else last


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    @property
    def message(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class DanglingEndpoint(Violation):
    name: str

    @property
    def message(self) -> str:
        return f"relationship endpoint {self.name!r} is not a class of the diagram"


@dataclass(frozen=True)
class DuplicateClass(Violation):
    name: str

    @property
    def message(self) -> str:
        return f"more than one class normalizes to {self.name!r}"


@dataclass(frozen=True)
class DuplicateAttribute(Violation):
    class_name: str
    name: str

    @property
    def message(self) -> str:
        return f"class {self.class_name!r} has more than one attribute normalizing to {self.name!r}"


@dataclass(frozen=True)
class GeneralizationMultiplicity(Violation):
    source: str
    target: str

    @property
    def message(self) -> str:
        return f"generalization {self.source} -> {self.target} carries multiplicities"


def validate(diagram: UmlDiagram) -> list[Violation]:
    """Every structural invariant breach of ``diagram``; ``[]`` means valid."""
    out: list[Violation] = []
    counts = Counter(normalize_name(c.name) for c in diagram.classes)
    for name, n in counts.items():
        if n > 1:
            out.append(DuplicateClass(name))
    for c in diagram.classes:
        attr_counts = Counter(normalize_name(a.name) for a in c.attributes)
        for name, n in attr_counts.items():
            if n > 1:
                out.append(DuplicateAttribute(c.name, name))
    reported = set()
    for r in diagram.relationships:
        for end in (r.source, r.target):
            key = normalize_name(end)
            if key not in counts and end not in reported:
                reported.add(end)
                out.append(DanglingEndpoint(end))
        if r.kind is RelationshipKind.GENERALIZATION and (
            r.source_multiplicity is not None or r.target_multiplicity is not None
        ):
            out.append(GeneralizationMultiplicity(r.source, r.target))
    return out


def canonical_form(diagram: UmlDiagram):
    """Hashable, order-insensitive summary used for diagram equivalence.

    Classes compare by normalized name, kind flags and the set of normalized
    attribute names; relationships compare as a multiset of normalized
    triples with their multiplicities and labels.
    """
    classes = frozenset(
        (
            normalize_name(c.name),
            c.is_enumeration,
            c.is_abstract,
            frozenset((normalize_name(a.name), _strip(a.declared_type)) for a in c.attributes),
        )
        for c in diagram.classes
    )
    rels = Counter(
        (*r.triple(), r.source_multiplicity, r.target_multiplicity, _strip(r.label))
        for r in diagram.relationships
    )
    return classes, frozenset(rels.items())


def _strip(s: Optional[str]) -> Optional[str]:
    if s is None:
        return None
    s = " ".join(s.split())
    return s or None


def equivalent(a: UmlDiagram, b: UmlDiagram) -> bool:
    return canonical_form(a) == canonical_form(b)
