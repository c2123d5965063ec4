"""Five-stage diagram generation pipeline.

Concept extraction, relationship comprehension, model integration and code
articulation run in sequence; an optional single-shot validator may then
revise the PlantUML.  Each stage talks to the LLM through an
:class:`~nomad.backends.LlmBackend` using a prompt template and a
constrained output format, and every exchange is kept in the transcript.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from string import Template
from typing import Any, Callable, Optional, Union

from .backends import DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE, BackendError, LlmBackend, LlmRequest
from .core import Multiplicity, RelationshipKind, UmlDiagram, normalize_name
from .model import load_schema, model_errors, to_diagram
from .plantuml import emit_plantuml, has_errors, parse_plantuml

log = logging.getLogger(__name__)

__all__ = [
    "STAGES",
    "CONCEPTS",
    "RELATIONSHIPS",
    "INTEGRATION",
    "ARTICULATION",
    "VALIDATION",
    "PipelineError",
    "FormatError",
    "SchemaError",
    "PromptSet",
    "Settings",
    "Entity",
    "ConceptSet",
    "RelationSpec",
    "RelationshipSet",
    "TranscriptEntry",
    "PipelineResult",
    "extract_concepts",
    "comprehend_relationships",
    "integrate_model",
    "articulate_code",
    "verify",
    "run_pipeline",
]

CONCEPTS = "concept_extractor"
RELATIONSHIPS = "relationship_comprehender"
INTEGRATION = "model_integrator"
ARTICULATION = "code_articulator"
VALIDATION = "validator"
STAGES = (CONCEPTS, RELATIONSHIPS, INTEGRATION, ARTICULATION, VALIDATION)


class PipelineError(RuntimeError):
    """Unrecoverable stage failure; ``stage`` names the failing stage."""

    def __init__(self, message: str, stage: str = ""):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class FormatError(PipelineError):
    """Response could not be parsed in the requested format, even after a retry."""


class SchemaError(PipelineError):
    """Integrated model violates the intermediate-model schema after a repair attempt."""


class _Unusable(Exception):
    def __init__(self, problem: str, schema: bool = False):
        super().__init__(problem)
        self.schema = schema


# ---------------------------------------------------------------------------
# prompts


class PromptSet:
    """Prompt templates loaded from ``<stage>.system.txt`` / ``<stage>.user.txt``.

    Templates use ``$name`` placeholders (:class:`string.Template`), so JSON
    braces inside them need no escaping.
    """

    def __init__(self, directory: Optional[Union[str, Path]] = None):
        if directory is None:
            root = resources.files("nomad").joinpath("prompts")
            self.source = "builtin"
        else:
            root = Path(directory)
            if not root.is_dir():
                raise FileNotFoundError(f"prompt directory not found: {root}")
            self.source = str(root)
        self._templates: dict[str, Template] = {}
        for stage in STAGES:
            for part in ("system", "user"):
                text = root.joinpath(f"{stage}.{part}.txt").read_text(encoding="utf-8")
                self._templates[f"{stage}.{part}"] = Template(text)
        self._reminder = Template(root.joinpath("format_reminder.txt").read_text(encoding="utf-8"))
        version = root.joinpath("VERSION")
        self.version = version.read_text(encoding="utf-8").strip() if version.is_file() else "unversioned"

    def render(self, stage: str, **fields: str) -> tuple[str, str]:
        return (
            self._templates[f"{stage}.system"].substitute(fields).strip(),
            self._templates[f"{stage}.user"].substitute(fields).strip(),
        )

    def reminder(self, problem: str) -> str:
        return self._reminder.substitute(problem=problem)


_DEFAULT_PROMPTS: Optional[PromptSet] = None


def _default_prompts() -> PromptSet:
    global _DEFAULT_PROMPTS
    if _DEFAULT_PROMPTS is None:
        _DEFAULT_PROMPTS = PromptSet()
    return _DEFAULT_PROMPTS


@dataclass(frozen=True)
class Settings:
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    prompts: Optional[PromptSet] = None

    @property
    def prompt_set(self) -> PromptSet:
        return self.prompts or _default_prompts()


DEFAULT_SETTINGS = Settings()


# ---------------------------------------------------------------------------
# stage artifacts


@dataclass(frozen=True)
class Entity:
    name: str
    attributes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConceptSet:
    entities: tuple[Entity, ...] = ()

    def names(self) -> list[str]:
        return [e.name for e in self.entities]

    def to_json(self) -> list[dict]:
        return [{"name": e.name, "attributes": list(e.attributes)} for e in self.entities]


@dataclass(frozen=True)
class RelationSpec:
    source: str
    target: str
    kind: RelationshipKind
    multiplicities: Optional[tuple[Optional[Multiplicity], Optional[Multiplicity]]] = None

    def to_json(self) -> dict:
        sm, tm = self.multiplicities or (None, None)
        return {
            "source": self.source,
            "target": self.target,
            "type": self.kind.value,
            "sourceMultiplicity": str(sm) if sm else None,
            "targetMultiplicity": str(tm) if tm else None,
        }


@dataclass(frozen=True)
class RelationshipSet:
    relations: tuple[RelationSpec, ...] = ()

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.relations]


@dataclass
class TranscriptEntry:
    stage: str
    request: LlmRequest
    response: str
    # earlier (request, response) pairs rejected by the output contract
    attempts: list[tuple[LlmRequest, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "request": self.request.to_dict(),
            "response": self.response,
            "attempts": [{"request": q.to_dict(), "response": a} for q, a in self.attempts],
            "notes": list(self.notes),
        }


@dataclass
class PipelineResult:
    concepts: ConceptSet
    relationships: RelationshipSet
    model: dict
    plantuml: str
    verified_plantuml: Optional[str]
    transcript: list[TranscriptEntry]

    @property
    def final_plantuml(self) -> str:
        return self.verified_plantuml if self.verified_plantuml is not None else self.plantuml

    def final_diagram(self) -> UmlDiagram:
        return parse_plantuml(self.final_plantuml)[0]

    def to_dict(self) -> dict:
        return {
            "concepts": self.concepts.to_json(),
            "relationships": self.relationships.to_json(),
            "model": self.model,
            "plantuml": self.plantuml,
            "verified_plantuml": self.verified_plantuml,
            "transcript": [e.to_dict() for e in self.transcript],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# response parsing

_FENCE = re.compile(r"```[\w+-]*\s*\n(.*?)```", re.DOTALL)


def _json_payload(text: str) -> Any:
    """First JSON value in ``text``, looking inside code fences first."""
    candidates = [m.group(1) for m in _FENCE.finditer(text)] + [text]
    decoder = json.JSONDecoder()
    for cand in candidates:
        for i, ch in enumerate(cand):
            if ch in "[{":
                try:
                    value, _ = decoder.raw_decode(cand[i:])
                    return value
                except json.JSONDecodeError:
                    continue
    raise _Unusable("the answer contains no valid JSON value")


def _plantuml_payload(text: str) -> str:
    fenced = _FENCE.findall(text)
    for block in fenced:
        if "@startuml" in block:
            text = block
            break
    start = text.find("@startuml")
    end = text.find("@enduml", start if start >= 0 else 0)
    if start >= 0 and end >= 0:
        text = text[start : end + len("@enduml")]
    elif fenced:
        text = fenced[0]
    return text.strip() + "\n"


def _unwrap_list(value: Any, keys: tuple[str, ...]) -> list:
    if isinstance(value, dict):
        for k in keys:
            if isinstance(value.get(k), list):
                return value[k]
    if not isinstance(value, list):
        raise _Unusable("expected a JSON array")
    return value


def _parse_concepts(text: str, notes: list[str]) -> ConceptSet:
    items = _unwrap_list(_json_payload(text), ("entities", "classes", "concepts"))
    merged: dict[str, tuple[str, list[str]]] = {}
    for i, item in enumerate(items):
        if not isinstance(item, dict) or not isinstance(item.get("name"), str) or not item["name"].strip():
            raise _Unusable(f"entity {i} lacks a string \"name\"")
        attrs = item.get("attributes", [])
        if not isinstance(attrs, list):
            raise _Unusable(f"entity {item['name']!r}: \"attributes\" must be an array")
        names = []
        for a in attrs:
            if isinstance(a, dict):
                a = a.get("name")
            if not isinstance(a, str) or not a.strip():
                raise _Unusable(f"entity {item['name']!r}: attributes must be non-empty strings")
            names.append(a.strip())
        key = normalize_name(item["name"])
        if key in merged:
            notes.append(f"entity {item['name']!r} listed twice; attributes merged")
            merged[key][1].extend(names)
        else:
            merged[key] = (item["name"].strip(), names)
    entities = []
    for name, attrs in merged.values():
        unique = list(dict.fromkeys(attrs))
        seen, kept = set(), []
        for a in unique:
            if normalize_name(a) not in seen:
                seen.add(normalize_name(a))
                kept.append(a)
        entities.append(Entity(name, tuple(kept)))
    return ConceptSet(tuple(entities))


def _parse_relations(text: str, concepts: ConceptSet, notes: list[str]) -> RelationshipSet:
    items = _unwrap_list(_json_payload(text), ("relationships", "relations"))
    known = {normalize_name(n): n for n in concepts.names()}
    out = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise _Unusable(f"relationship {i} is not an object")
        src, tgt = item.get("source"), item.get("target")
        kind = item.get("type", item.get("kind"))
        if not all(isinstance(v, str) for v in (src, tgt, kind)):
            raise _Unusable(f"relationship {i} needs string \"source\", \"target\" and \"type\"")
        try:
            kind = RelationshipKind.parse(kind)
        except ValueError:
            raise _Unusable(f"relationship {i}: unknown type {kind!r}") from None
        missing = [n for n in (src, tgt) if normalize_name(n) not in known]
        if missing:
            msg = f"relationship {src} -> {tgt} dropped: unknown entity {', '.join(map(repr, missing))}"
            notes.append(msg)
            log.warning(msg)
            continue
        mults = _relation_mults(item, notes)
        if kind is RelationshipKind.GENERALIZATION:
            mults = None
        out.append(RelationSpec(known[normalize_name(src)], known[normalize_name(tgt)], kind, mults))
    return RelationshipSet(tuple(out))


def _relation_mults(item: dict, notes: list[str]):
    raw = (item.get("sourceMultiplicity"), item.get("targetMultiplicity"))
    if all(v is None for v in raw):
        return None
    parsed = []
    for v in raw:
        if v is None:
            parsed.append(None)
            continue
        try:
            parsed.append(Multiplicity.parse(str(v)))
        except ValueError:
            notes.append(f"multiplicity {v!r} ignored")
            parsed.append(None)
    return tuple(parsed)


# ---------------------------------------------------------------------------
# stage runner


def _ask(
    stage: str,
    fields: dict[str, str],
    backend: LlmBackend,
    settings: Settings,
    parse: Callable[[str, list[str]], Any],
):
    """One stage exchange with a single format-repair retry."""
    system, user = settings.prompt_set.render(stage, **fields)
    request = LlmRequest(system, user, settings.temperature, settings.max_tokens, stage)
    attempts: list[tuple[LlmRequest, str]] = []
    for attempt in range(2):
        try:
            response = backend.complete(request)
        except BackendError as exc:
            raise PipelineError(str(exc), stage) from exc
        notes: list[str] = []
        try:
            value = parse(response, notes)
        except _Unusable as problem:
            if attempt == 1:
                cls = SchemaError if problem.schema else FormatError
                raise cls(f"unusable response after retry: {problem}", stage) from None
            attempts.append((request, response))
            request = LlmRequest(
                system,
                user + settings.prompt_set.reminder(str(problem)),
                settings.temperature,
                settings.max_tokens,
                stage,
            )
            continue
        return value, TranscriptEntry(stage, request, response, attempts, notes)
    raise AssertionError("unreachable")


def _dump(value: Any) -> str:
    return json.dumps(value, indent=2, ensure_ascii=False)


def _require(cond: bool, message: str, stage: str):
    if not cond:
        raise ValueError(f"[{stage}] precondition violated: {message}")


def _extract_concepts(requirements: str, backend: LlmBackend, settings: Settings):
    _require(bool(requirements and requirements.strip()), "requirements text is empty", CONCEPTS)
    return _ask(CONCEPTS, {"requirements": requirements.strip()}, backend, settings, _parse_concepts)


def _comprehend(concepts: ConceptSet, requirements: str, backend: LlmBackend, settings: Settings):
    _require(bool(concepts.entities), "concept set is empty", RELATIONSHIPS)
    fields = {"entities": _dump(concepts.to_json()), "requirements": requirements.strip()}
    return _ask(RELATIONSHIPS, fields, backend, settings, lambda t, n: _parse_relations(t, concepts, n))


def _parse_model(text: str, notes: list[str]) -> dict:
    doc = _json_payload(text)
    if not isinstance(doc, dict):
        raise _Unusable("expected a JSON object with \"classes\" and \"relationships\"")
    problems = model_errors(doc)
    if problems:
        raise _Unusable("the model violates the schema: " + "; ".join(problems[:20]), schema=True)
    return doc


def _integrate(concepts: ConceptSet, relationships: RelationshipSet, backend: LlmBackend, settings: Settings):
    fields = {
        "entities": _dump(concepts.to_json()),
        "relationships": _dump(relationships.to_json()),
        "schema": _dump(load_schema()),
    }
    return _ask(INTEGRATION, fields, backend, settings, _parse_model)


def _articulate(model: dict, backend: LlmBackend, settings: Settings):
    problems = model_errors(model)
    _require(not problems, "; ".join(problems), ARTICULATION)
    system, user = settings.prompt_set.render(ARTICULATION, model=_dump(model))
    request = LlmRequest(system, user, settings.temperature, settings.max_tokens, ARTICULATION)
    entry = TranscriptEntry(ARTICULATION, request, "")
    try:
        entry.response = backend.complete(request)
    except BackendError as exc:
        entry.notes.append(f"backend failed ({exc}); deterministic fallback used")
        return emit_plantuml(to_diagram(model)), entry
    code = _plantuml_payload(entry.response)
    _, diags = parse_plantuml(code)
    if has_errors(diags):
        errs = "; ".join(str(d) for d in diags if d.severity == "error")
        entry.notes.append(f"generated PlantUML does not parse ({errs}); deterministic fallback used")
        return emit_plantuml(to_diagram(model)), entry
    return code, entry


def _verify(plantuml: str, requirements: str, backend: LlmBackend, settings: Settings):
    before, diags = parse_plantuml(plantuml)
    _require(not has_errors(diags), "input PlantUML has errors", VALIDATION)
    system, user = settings.prompt_set.render(
        VALIDATION, plantuml=plantuml.strip(), requirements=requirements.strip()
    )
    request = LlmRequest(system, user, settings.temperature, settings.max_tokens, VALIDATION)
    entry = TranscriptEntry(VALIDATION, request, "")
    try:
        entry.response = backend.complete(request)
    except BackendError as exc:
        entry.notes.append(f"backend failed ({exc}); input kept")
        log.warning("validator: %s", exc)
        return plantuml, entry
    code = _plantuml_payload(entry.response)
    after, diags = parse_plantuml(code)
    reason = None
    if has_errors(diags):
        reason = "revised PlantUML does not parse"
    elif before.classes and not after.classes:
        reason = "revised PlantUML contains no classes"
    if reason:
        entry.notes.append(f"{reason}; input kept")
        log.warning("validator: %s; input kept", reason)
        return plantuml, entry
    if code.strip() == plantuml.strip():
        return plantuml, entry
    entry.notes.append("diagram revised")
    return code, entry


# ---------------------------------------------------------------------------
# public stage functions


def extract_concepts(requirements: str, backend: LlmBackend, settings: Settings = DEFAULT_SETTINGS) -> ConceptSet:
    return _extract_concepts(requirements, backend, settings)[0]


def comprehend_relationships(
    concepts: ConceptSet, requirements: str, backend: LlmBackend, settings: Settings = DEFAULT_SETTINGS
) -> RelationshipSet:
    """Relationships between known entities; relations naming any other
    entity are dropped and logged."""
    return _comprehend(concepts, requirements, backend, settings)[0]


def integrate_model(
    concepts: ConceptSet, relationships: RelationshipSet, backend: LlmBackend, settings: Settings = DEFAULT_SETTINGS
) -> dict:
    return _integrate(concepts, relationships, backend, settings)[0]


def articulate_code(model: dict, backend: LlmBackend, settings: Settings = DEFAULT_SETTINGS) -> str:
    """PlantUML for ``model``.  Falls back to the deterministic emitter when
    the backend's answer does not parse."""
    return _articulate(model, backend, settings)[0]


def verify(plantuml: str, requirements: str, backend: LlmBackend, settings: Settings = DEFAULT_SETTINGS) -> str:
    """Single-shot review.  The backend may return the diagram unchanged;
    an unusable answer leaves the input in place."""
    return _verify(plantuml, requirements, backend, settings)[0]


def run_pipeline(
    requirements: str,
    backend: LlmBackend,
    verify_enabled: bool = True,
    settings: Settings = DEFAULT_SETTINGS,
) -> PipelineResult:
    transcript: list[TranscriptEntry] = []

    def step(stage: str, fn, *args):
        try:
            value, entry = fn(*args)
        except PipelineError as exc:
            exc.stage = exc.stage or stage
            raise
        except ValueError as exc:
            raise PipelineError(str(exc), stage) from exc
        transcript.append(entry)
        return value

    concepts = step(CONCEPTS, _extract_concepts, requirements, backend, settings)
    relationships = step(RELATIONSHIPS, _comprehend, concepts, requirements, backend, settings)
    model = step(INTEGRATION, _integrate, concepts, relationships, backend, settings)
    plantuml = step(ARTICULATION, _articulate, model, backend, settings)
    verified = None
    if verify_enabled:
        verified = step(VALIDATION, _verify, plantuml, requirements, backend, settings)
    return PipelineResult(concepts, relationships, model, plantuml, verified, transcript)
