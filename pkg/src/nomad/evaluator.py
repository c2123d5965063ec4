"""Matching of generated against gold class diagrams.

Precision, recall and F1 over classes, attributes and relationships, with
relationships scored both strictly (same source, target and kind) and
relaxed (the two classes are connected at all), plus an error list
following the class/attribute/relationship taxonomy.

Names are compared after :func:`nomad.core.normalize_name`.  Attributes are
only counted inside matched classes, so a spurious or missing class is
penalised once, on the class dimension.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Iterable, Optional

from .core import RelationshipKind, UmlDiagram, normalize_name

__all__ = [
    "Prf",
    "MatchResult",
    "ErrorRecord",
    "EvalReport",
    "TAXONOMY",
    "AnnotationError",
    "match_classes",
    "match_attributes",
    "match_relationships",
    "compute_prf",
    "match",
    "classify_errors",
    "evaluate",
    "load_annotations",
    "macro_average",
    "render_table",
]

Triple = tuple[str, str, RelationshipKind]

CLASS, ATTRIBUTE, RELATIONSHIP = "Class", "Attribute", "Relationship"

TAXONOMY: dict[str, tuple[str, ...]] = {
    CLASS: ("Missing", "Extra", "Misrepresented"),
    ATTRIBUTE: ("Missing", "Extra", "Wrong"),
    RELATIONSHIP: ("Missing", "Extra", "Duplicate", "Misclassified"),
}

# only these need human judgement
SEMANTIC_CELLS = {(CLASS, "Misrepresented"), (ATTRIBUTE, "Wrong")}


@dataclass(frozen=True)
class Prf:
    precision: float
    recall: float
    f1: float


def compute_prf(
    gold_count: int,
    gen_count: int,
    matched_count: int,
    gen_matched_count: Optional[int] = None,
) -> Prf:
    """Precision, recall and F1 from set sizes.

    ``gen_matched_count`` is the precision numerator when it differs from the
    recall numerator (relaxed relationship matching).  With both sets empty
    everything is 1; an empty denominator facing a non-empty other side
    scores 0.
    """
    if gen_matched_count is None:
        gen_matched_count = matched_count
    if gold_count == 0 and gen_count == 0:
        return Prf(1.0, 1.0, 1.0)
    p = gen_matched_count / gen_count if gen_count else 0.0
    r = matched_count / gold_count if gold_count else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return Prf(p, r, f1)


@dataclass(frozen=True)
class MatchResult:
    matched_classes: frozenset[str]
    matched_attributes: frozenset[tuple[str, str]]
    matched_relationships_hard: frozenset[Triple]
    # gold triples with a connected counterpart in the generated diagram
    matched_relationships_soft: frozenset[Triple]
    # generated triples with a connected counterpart in gold
    matched_generated_soft: frozenset[Triple] = frozenset()


@dataclass(frozen=True)
class ErrorRecord:
    dimension: str
    error_type: str
    subject: str
    detail: str = ""

    def __post_init__(self):
        if self.error_type not in TAXONOMY.get(self.dimension, ()):
            raise ValueError(f"({self.dimension}, {self.error_type}) is not a taxonomy cell")


@dataclass(frozen=True)
class EvalReport:
    classes: Prf
    attributes: Prf
    relationships_strict: Prf
    relationships_relaxed: Prf
    average: float
    errors: tuple[ErrorRecord, ...] = ()

    def f1_row(self) -> list[float]:
        return [
            self.classes.f1,
            self.attributes.f1,
            self.relationships_strict.f1,
            self.relationships_relaxed.f1,
        ]

    def error_counts(self) -> dict[str, dict[str, int]]:
        counts = {dim: {t: 0 for t in types} for dim, types in TAXONOMY.items()}
        for e in self.errors:
            counts[e.dimension][e.error_type] += 1
        return counts

    def to_dict(self) -> dict:
        d = asdict(self)
        d["errors"] = [asdict(e) for e in self.errors]
        d["error_counts"] = self.error_counts()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# matching


def _class_names(d: UmlDiagram) -> set[str]:
    return {normalize_name(c.name) for c in d.classes}


def _attr_sets(d: UmlDiagram) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for c in d.classes:
        out.setdefault(normalize_name(c.name), set()).update(normalize_name(a.name) for a in c.attributes)
    return out


def match_classes(gold: UmlDiagram, gen: UmlDiagram) -> set[str]:
    return _class_names(gold) & _class_names(gen)


def match_attributes(gold: UmlDiagram, gen: UmlDiagram, matched_classes: Iterable[str]) -> set[tuple[str, str]]:
    ga, ma = _attr_sets(gold), _attr_sets(gen)
    return {(c, a) for c in matched_classes for a in ga.get(c, set()) & ma.get(c, set())}


def _triples(d: UmlDiagram) -> list[Triple]:
    return [r.triple() for r in d.relationships]


def _pairs(triples: Iterable[Triple]) -> set[frozenset[str]]:
    return {frozenset((s, t)) for s, t, _ in triples}


def match_relationships(gold: UmlDiagram, gen: UmlDiagram, mode: str = "hard") -> set[Triple]:
    """Gold triples matched under ``mode`` (``"hard"`` or ``"soft"``)."""
    gold_t, gen_t = set(_triples(gold)), set(_triples(gen))
    if mode == "hard":
        return gold_t & gen_t
    if mode == "soft":
        connected = _pairs(gen_t)
        return {t for t in gold_t if frozenset(t[:2]) in connected}
    raise ValueError(f"unknown mode {mode!r}")


def match(gold: UmlDiagram, gen: UmlDiagram) -> MatchResult:
    classes = match_classes(gold, gen)
    gold_pairs = _pairs(_triples(gold))
    return MatchResult(
        matched_classes=frozenset(classes),
        matched_attributes=frozenset(match_attributes(gold, gen, classes)),
        matched_relationships_hard=frozenset(match_relationships(gold, gen, "hard")),
        matched_relationships_soft=frozenset(match_relationships(gold, gen, "soft")),
        matched_generated_soft=frozenset(t for t in set(_triples(gen)) if frozenset(t[:2]) in gold_pairs),
    )


# ---------------------------------------------------------------------------
# error taxonomy


def _fmt(t: Triple) -> str:
    return f"{t[0]} -[{t[2].value}]-> {t[1]}"


def classify_errors(gold: UmlDiagram, gen: UmlDiagram, matches: MatchResult) -> list[ErrorRecord]:
    """Automatically detectable taxonomy errors, in a stable order.

    Class Misrepresented and Attribute Wrong need human judgement and are
    never produced here; see :func:`load_annotations`.
    """
    out: list[ErrorRecord] = []
    gold_c, gen_c = _class_names(gold), _class_names(gen)
    for c in sorted(gold_c - matches.matched_classes):
        out.append(ErrorRecord(CLASS, "Missing", c, "reference class not generated"))
    for c in sorted(gen_c - matches.matched_classes):
        out.append(ErrorRecord(CLASS, "Extra", c, "class absent from the reference"))

    ga, ma = _attr_sets(gold), _attr_sets(gen)
    for c in sorted(matches.matched_classes):
        for a in sorted(ga[c] - ma[c]):
            out.append(ErrorRecord(ATTRIBUTE, "Missing", f"{c}.{a}", "reference attribute not generated"))
        for a in sorted(ma[c] - ga[c]):
            out.append(ErrorRecord(ATTRIBUTE, "Extra", f"{c}.{a}", "attribute absent from the reference"))

    gold_t = set(_triples(gold))
    gen_counts = Counter(_triples(gen))
    gen_by_pair: dict[frozenset[str], list[Triple]] = {}
    for t in gen_counts:
        gen_by_pair.setdefault(frozenset(t[:2]), []).append(t)
    for t in sorted(gold_t - matches.matched_relationships_soft, key=_fmt):
        out.append(ErrorRecord(RELATIONSHIP, "Missing", _fmt(t), "no generated relationship connects these classes"))
    for t in sorted(matches.matched_relationships_soft - matches.matched_relationships_hard, key=_fmt):
        found = sorted(_fmt(g) for g in gen_by_pair[frozenset(t[:2])])
        out.append(ErrorRecord(RELATIONSHIP, "Misclassified", _fmt(t), "generated as " + "; ".join(found)))
    for t in sorted(set(gen_counts) - matches.matched_generated_soft, key=_fmt):
        out.append(ErrorRecord(RELATIONSHIP, "Extra", _fmt(t), "classes are not connected in the reference"))
    for t in sorted(gen_counts, key=_fmt):
        for copy in range(2, gen_counts[t] + 1):
            out.append(ErrorRecord(RELATIONSHIP, "Duplicate", _fmt(t), f"copy {copy} of {gen_counts[t]}"))
    return out


class AnnotationError(ValueError):
    pass


def load_annotations(path: str | Path) -> list[ErrorRecord]:
    """Read a human annotation overlay.

    The file is a JSON list of ``{"dimension", "error_type", "subject",
    "note"}`` objects (or an object with such a list under ``"errors"``).
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("errors", [])
    if not isinstance(data, list):
        raise AnnotationError("annotation overlay must be a list of records")
    out = []
    for i, item in enumerate(data):
        try:
            out.append(
                ErrorRecord(
                    str(item["dimension"]),
                    str(item["error_type"]),
                    str(item["subject"]),
                    str(item.get("note", item.get("detail", ""))),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise AnnotationError(f"annotation {i}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# composition


def evaluate(
    gold: UmlDiagram,
    gen: UmlDiagram,
    annotations: Optional[Iterable[ErrorRecord]] = None,
) -> EvalReport:
    m = match(gold, gen)
    gold_c, gen_c = _class_names(gold), _class_names(gen)
    classes = compute_prf(len(gold_c), len(gen_c), len(m.matched_classes))

    ga, ma = _attr_sets(gold), _attr_sets(gen)
    gold_attrs = sum(len(ga[c]) for c in m.matched_classes)
    gen_attrs = sum(len(ma[c]) for c in m.matched_classes)
    attributes = compute_prf(gold_attrs, gen_attrs, len(m.matched_attributes))

    gold_rels = len(set(_triples(gold)))
    # duplicates inflate the generated count but match only once
    gen_rels = len(gen.relationships)
    strict = compute_prf(gold_rels, gen_rels, len(m.matched_relationships_hard))
    relaxed = compute_prf(
        gold_rels,
        gen_rels,
        len(m.matched_relationships_soft),
        gen_matched_count=len(m.matched_generated_soft),
    )
    errors = classify_errors(gold, gen, m)
    if annotations:
        errors.extend(annotations)
    f1s = [classes.f1, attributes.f1, strict.f1, relaxed.f1]
    return EvalReport(classes, attributes, strict, relaxed, fmean(f1s), tuple(errors))


def macro_average(reports: list[EvalReport]) -> dict[str, float]:
    """Unweighted mean of each F1 column and of the averages."""
    if not reports:
        raise ValueError("no reports to average")
    cols = list(zip(*(r.f1_row() for r in reports)))
    keys = ("classes", "attributes", "relationships_strict", "relationships_relaxed")
    out = {k: fmean(c) for k, c in zip(keys, cols)}
    out["average"] = fmean(r.average for r in reports)
    return out


HEADER = ("Classes", "Attributes", "Relationships (S)", "Relationships (R)", "Average")


def render_table(rows: list[tuple[str, list[float]]]) -> str:
    """Plain-text F1 table: a label column then the five score columns."""
    label_w = max([len("Method")] + [len(label) for label, _ in rows])
    widths = [max(len(h), 6) for h in HEADER]
    lines = [
        "  ".join([f"{'Method':<{label_w}}"] + [f"{h:>{w}}" for h, w in zip(HEADER, widths)])
    ]
    for label, values in rows:
        cells = [f"{v:>{w}.4f}" for v, w in zip(values, widths)]
        lines.append("  ".join([f"{label:<{label_w}}"] + cells))
    return "\n".join(lines) + "\n"


def report_row(report: EvalReport) -> list[float]:
    return report.f1_row() + [report.average]
