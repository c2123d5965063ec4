"""PlantUML class-diagram reader and canonical writer.

The reader is line-oriented and lenient: anything it does not understand
becomes a warning diagnostic.  The only hard error is an unbalanced brace.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .core import (
    Multiplicity,
    Relationship,
    RelationshipKind,
    UmlAttribute,
    UmlClass,
    UmlDiagram,
    normalize_name,
    validate,
)

__all__ = ["ParseDiagnostic", "PlantUmlError", "parse_plantuml", "emit_plantuml", "has_errors"]


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    message: str
    severity: str = "warning"  # or "error"

    def __str__(self) -> str:
        return f"line {self.line}: {self.severity}: {self.message}"


class PlantUmlError(ValueError):
    pass


def has_errors(diagnostics: list[ParseDiagnostic]) -> bool:
    return any(d.severity == "error" for d in diagnostics)


_NAME = r'(?:"[^"\n]+"|[A-Za-z_À-￿][\w.$À-￿]*)'
_QUOTED = r'"[^"\n]*"'

_CLASS_DECL = re.compile(
    r"^(?P<kw>abstract\s+class|abstract|class|interface|enum|entity|annotation)\s+"
    rf"(?P<name>{_NAME})"
    r"(?:\s*<[^>{}]*>)?"  # generic parameters, ignored
    r"(?:\s+as\s+(?P<alias>[\w.]+))?"
    r"(?:\s*<<\s*(?P<stereo>[^>]*?)\s*>>)?"
    r"(?:\s+(?:extends|implements)\s+[^{]*)?"
    r"\s*(?P<rest>\{.*)?$",
    re.IGNORECASE,
)

# left-head, shaft, right-head; shaft may embed a direction hint like -up-
_ARROW = re.compile(
    r"(?P<lh><\||\*|o|#|x|\+|<|\^|\})?"
    r"(?P<shaft>(?:-+|\.+)(?:(?:left|right|up|down|le|ri|l|r|u|d)(?:-+|\.+))?)"
    r"(?P<rh>\|>|\*|o|#|x|\+|>|\^|\{)?"
)

_REL_LINE = re.compile(
    rf"^(?P<left>{_NAME})\s*(?P<lm>{_QUOTED})?\s*"
    r"(?P<arrow>[<*o#x+^}|]{0,2}[-.]+(?:(?:left|right|up|down|le|ri|l|r|u|d)[-.]+)?[|>*o#x+^{]{0,2})"
    rf"\s*(?P<rm>{_QUOTED})?\s*(?P<right>{_NAME})"
    r"\s*(?::\s*(?P<label>.*))?$",
)

_MODIFIER = re.compile(r"\{(?:static|abstract|classifier|field|method)\}\s*", re.IGNORECASE)

_IGNORED_PREFIXES = (
    "skinparam", "hide", "show", "left to right", "top to bottom", "scale",
    "header", "footer", "legend", "caption", "!", "allow_mixing", "set ",
    "remove", "restrict", "newpage", "center", "end legend",
)


def _unquote(s: str) -> str:
    s = s.strip()
    if len(s) >= 2 and s[0] == '"' and s[-1] == '"':
        return s[1:-1]
    return s


def _arrow_kind(lh: str, rh: str) -> tuple[RelationshipKind, bool]:
    """Kind of the arrow and whether the left-hand name is the source."""
    if rh == "|>":
        return RelationshipKind.GENERALIZATION, True
    if lh == "<|":
        return RelationshipKind.GENERALIZATION, False
    # composition/aggregation: the decorated end is the whole, which we store as source
    if lh == "*":
        return RelationshipKind.COMPOSITION, True
    if rh == "*":
        return RelationshipKind.COMPOSITION, False
    if lh == "o":
        return RelationshipKind.AGGREGATION, True
    if rh == "o":
        return RelationshipKind.AGGREGATION, False
    if lh == "<" and rh != ">":
        return RelationshipKind.ASSOCIATION, False
    return RelationshipKind.ASSOCIATION, True


class _Builder:
    def __init__(self):
        self.order: list[str] = []
        self.classes: dict[str, dict] = {}
        self.aliases: dict[str, str] = {}
        self.relationships: list[Relationship] = []
        self.title: Optional[str] = None
        self.diags: list[ParseDiagnostic] = []

    def warn(self, line: int, msg: str):
        self.diags.append(ParseDiagnostic(line, msg, "warning"))

    def error(self, line: int, msg: str):
        self.diags.append(ParseDiagnostic(line, msg, "error"))

    def resolve(self, name: str) -> str:
        name = _unquote(name)
        return self.aliases.get(name, name)

    def declare(self, name: str, lineno: int, **flags) -> dict:
        key = normalize_name(name)
        if key in self.classes:
            entry = self.classes[key]
            if flags and any(entry.get(k) != v for k, v in flags.items() if v):
                entry.update({k: v for k, v in flags.items() if v})
            return entry
        entry = {
            "name": name,
            "attributes": [],
            "attr_keys": set(),
            "operations": [],
            "is_enumeration": False,
            "is_abstract": False,
            "stereotype": None,
        }
        entry.update({k: v for k, v in flags.items() if v})
        self.classes[key] = entry
        self.order.append(key)
        return entry

    def add_member(self, entry: dict, text: str, lineno: int):
        text = text.strip().rstrip(";").strip()
        if not text or re.fullmatch(r"[-.=_]{2,}.*?[-.=_]*", text):
            return  # separator line
        if entry["is_enumeration"]:
            for literal in text.split(","):
                literal = literal.strip()
                literal = re.sub(r"\s*\(.*$", "", literal)  # JAVA_STYLE(1)
                if literal:
                    self._add_attribute(entry, UmlAttribute(literal), lineno)
            return
        if "(" in text.split(":", 1)[0]:
            entry["operations"].append(text)
            return
        visibility = None
        if text[0] in "+-#~" and len(text) > 1:
            visibility, text = text[0], text[1:].strip()
        if not text:
            self.warn(lineno, "empty member declaration")
            return
        quoted = re.match(r'^"([^"]+)"\s*(?::\s*(.*))?$', text)
        if quoted:
            name, typ = quoted.group(1), (quoted.group(2) or "").strip() or None
        elif ":" in text:
            name, _, typ = text.partition(":")
            name, typ = name.strip(), typ.strip() or None
        else:
            parts = text.split()
            if len(parts) >= 2:
                # Java-style "Type name"
                name, typ = parts[-1], " ".join(parts[:-1])
            else:
                name, typ = text, None
        name = _unquote(name)
        if not name.strip():
            self.warn(lineno, f"member without a name: {text!r}")
            return
        self._add_attribute(entry, UmlAttribute(name, typ, visibility), lineno)

    def _add_attribute(self, entry: dict, attr: UmlAttribute, lineno: int):
        key = normalize_name(attr.name)
        if key in entry["attr_keys"]:
            self.warn(lineno, f"duplicate attribute {attr.name!r} in {entry['name']!r} ignored")
            return
        entry["attr_keys"].add(key)
        entry["attributes"].append(attr)

    def build(self) -> UmlDiagram:
        classes = [
            UmlClass(
                name=e["name"],
                attributes=tuple(e["attributes"]),
                is_enumeration=e["is_enumeration"],
                is_abstract=e["is_abstract"],
                stereotype=e["stereotype"],
                operations=tuple(e["operations"]),
            )
            for e in (self.classes[k] for k in self.order)
        ]
        return UmlDiagram(tuple(classes), tuple(self.relationships), self.title)


def _parse_multiplicity(b: _Builder, text: Optional[str], lineno: int) -> Optional[Multiplicity]:
    if text is None:
        return None
    raw = _unquote(text)
    if not raw.strip():
        return None
    try:
        return Multiplicity.parse(raw)
    except ValueError:
        b.warn(lineno, f"unrecognised multiplicity {raw!r} ignored")
        return None


def _strip_comments(lines: list[str]) -> list[str]:
    out = []
    in_block = False
    for line in lines:
        if in_block:
            if "'/" in line:
                in_block = False
                line = line.split("'/", 1)[1]
            else:
                out.append("")
                continue
        while "/'" in line:
            before, _, after = line.partition("/'")
            if "'/" in after:
                line = before + after.split("'/", 1)[1]
            else:
                line = before
                in_block = True
                break
        stripped = line.strip()
        if stripped.startswith("'"):
            line = ""
        out.append(line)
    return out


def parse_plantuml(src: str) -> tuple[UmlDiagram, list[ParseDiagnostic]]:
    """Parse PlantUML class-diagram text.

    Returns the diagram and a list of diagnostics.  Never raises; an
    unbalanced brace is reported as an ``error`` diagnostic and whatever was
    recognised so far is still returned.
    """
    b = _Builder()
    text = src.replace("\r\n", "\n").replace("\r", "\n")
    lines = _strip_comments(text.split("\n"))
    last_line = max(1, len(lines))

    started = ended = False
    current: Optional[dict] = None  # class whose body is open
    current_line = 0
    containers: list[int] = []  # open package/namespace/skip blocks
    skipping: Optional[str] = None  # terminator of a note/legend block
    skip_depth = 0

    for lineno, raw in enumerate(lines, start=1):
        line = _MODIFIER.sub("", raw).strip()
        if not line:
            continue
        low = line.lower()

        if skipping is not None:
            if skipping == "}":
                skip_depth += line.count("{") - line.count("}")
                if skip_depth <= 0:
                    skipping = None
            elif low.replace(" ", "").startswith(skipping.replace(" ", "")):
                skipping = None
            continue

        if current is not None:
            body, closed = line, False
            if "}" in line:
                idx = line.index("}")
                body, trailing = line[:idx], line[idx + 1 :].strip()
                closed = True
                if trailing:
                    b.warn(lineno, f"text after closing brace ignored: {trailing!r}")
            if "{" in body and not body.lstrip().startswith("{"):
                b.error(lineno, "opening brace inside a class body")
            b.add_member(current, body, lineno)
            if closed:
                current = None
            continue

        if low.startswith("@startuml"):
            started = True
            continue
        if low.startswith("@enduml"):
            ended = True
            continue
        if low.startswith("title "):
            b.title = line[6:].strip()
            continue

        if line == "}":
            if containers:
                containers.pop()
            else:
                b.error(lineno, "unbalanced closing brace")
            continue

        m = _CLASS_DECL.match(line)
        if m:
            kw = m.group("kw").lower()
            name = _unquote(m.group("name"))
            alias = m.group("alias")
            if alias:
                b.aliases[alias] = name
            flags = {}
            if kw == "enum":
                flags["is_enumeration"] = True
            if kw.startswith("abstract"):
                flags["is_abstract"] = True
            if m.group("stereo"):
                flags["stereotype"] = m.group("stereo")
            if kw in ("interface", "annotation", "entity"):
                b.warn(lineno, f"{kw} {name!r} treated as a class")
            entry = b.declare(name, lineno, **flags)
            rest = m.group("rest")
            if rest:
                inner = rest[1:]
                if "}" in inner:
                    idx = inner.index("}")
                    body, trailing = inner[:idx], inner[idx + 1 :].strip()
                    if "{" in body:
                        b.error(lineno, "opening brace inside a class body")
                    for part in _split_inline_members(body):
                        b.add_member(entry, part, lineno)
                    if trailing:
                        b.warn(lineno, f"text after closing brace ignored: {trailing!r}")
                else:
                    if inner.strip():
                        b.add_member(entry, inner, lineno)
                    current = entry
                    current_line = lineno
            continue

        if re.match(r"^(package|namespace|together|rectangle|frame|folder|node)\b", low):
            b.warn(lineno, f"container ignored: {line!r}")
            if line.rstrip().endswith("{"):
                containers.append(lineno)
            continue
        if low.startswith("note"):
            b.warn(lineno, "note ignored")
            # single-line forms: `note left of A : text`, `note "text" as N`
            if ":" not in line and '"' not in line:
                skipping = "end note"
            continue
        if low.startswith("legend"):
            skipping = "end legend"
            continue
        if low.startswith(_IGNORED_PREFIXES):
            if line.rstrip().endswith("{"):
                skipping, skip_depth = "}", 1
            continue
        if line.startswith("("):
            b.warn(lineno, f"association class ignored: {line!r}")
            continue

        rm = _REL_LINE.match(line)
        if rm:
            _add_relationship(b, rm, lineno)
            continue

        if line.endswith("{"):
            b.warn(lineno, f"unrecognised block ignored: {line!r}")
            containers.append(lineno)
            continue
        b.warn(lineno, f"unrecognised line ignored: {line!r}")

    if current is not None:
        b.error(current_line, f"class {current['name']!r} body is never closed")
    for opened in containers:
        b.error(opened, "block is never closed")
    if skipping == "}":
        b.error(last_line, "block is never closed")
    if not started or not ended:
        missing = [f for f, ok in (("@startuml", started), ("@enduml", ended)) if not ok]
        b.warn(1 if not started else last_line, f"missing fence: {', '.join(missing)}")
    return b.build(), b.diags


def _split_inline_members(body: str) -> list[str]:
    """Members of a one-line body like ``{ +a; +b }`` or ``{ +orderDate }``."""
    body = body.strip()
    if not body:
        return []
    if ";" in body:
        return [p for p in body.split(";") if p.strip()]
    return [body]


def _add_relationship(b: _Builder, m: re.Match, lineno: int):
    arrow = m.group("arrow")
    am = _ARROW.fullmatch(arrow)
    if am is None:
        b.warn(lineno, f"unrecognised arrow {arrow!r} ignored")
        return
    lh, rh = am.group("lh") or "", am.group("rh") or ""
    kind, left_is_source = _arrow_kind(lh, rh)
    if "." in am.group("shaft") and kind is RelationshipKind.ASSOCIATION:
        b.warn(lineno, "dependency arrow treated as an association")
    left, right = b.resolve(m.group("left")), b.resolve(m.group("right"))
    lm = _parse_multiplicity(b, m.group("lm"), lineno)
    rmult = _parse_multiplicity(b, m.group("rm"), lineno)
    for name in (left, right):
        if normalize_name(name) not in b.classes:
            b.warn(lineno, f"class {name!r} used before declaration; declared implicitly")
            b.declare(name, lineno)
    # refer to the declared spelling
    left = b.classes[normalize_name(left)]["name"]
    right = b.classes[normalize_name(right)]["name"]
    if left_is_source:
        src, tgt, sm, tm = left, right, lm, rmult
    else:
        src, tgt, sm, tm = right, left, rmult, lm
    if kind is RelationshipKind.GENERALIZATION and (sm or tm):
        b.warn(lineno, "multiplicities on a generalization ignored")
        sm = tm = None
    label = m.group("label")
    label = label.strip() if label and label.strip() else None
    b.relationships.append(Relationship(src, tgt, kind, sm, tm, label))


# ---------------------------------------------------------------------------
# emission

_ARROWS = {
    RelationshipKind.ASSOCIATION: "--",
    RelationshipKind.AGGREGATION: "o--",
    RelationshipKind.COMPOSITION: "*--",
    RelationshipKind.GENERALIZATION: "--|>",
}

_PLAIN_NAME = re.compile(r"^[A-Za-z_][\w.$]*$")


def _name(name: str) -> str:
    return name if _PLAIN_NAME.match(name) else f'"{name}"'


def _attr_name(name: str) -> str:
    return f'"{name}"' if re.search(r"[\s:]", name) else name


def _kind_order(kind: RelationshipKind) -> int:
    return list(RelationshipKind).index(kind)


def emit_plantuml(diagram: UmlDiagram) -> str:
    """Canonical PlantUML text for a valid diagram.

    Classes are sorted by normalized name, relationships by
    ``(source, target, kind)``; attribute order is kept.
    """
    problems = validate(diagram)
    if problems:
        raise PlantUmlError("; ".join(p.message for p in problems))
    out = ["@startuml"]
    if diagram.title:
        out.append(f"title {diagram.title}")
    for c in sorted(diagram.classes, key=lambda c: (normalize_name(c.name), c.name)):
        if c.is_enumeration:
            kw = "enum"
        elif c.is_abstract:
            kw = "abstract class"
        else:
            kw = "class"
        stereo = f" <<{c.stereotype}>>" if c.stereotype else ""
        out.append(f"{kw} {_name(c.name)}{stereo} {{")
        for a in c.attributes:
            if c.is_enumeration:
                out.append(f"  {a.name}")
                continue
            vis = a.visibility or ""
            typ = f" : {a.declared_type}" if a.declared_type else ""
            out.append(f"  {vis}{_attr_name(a.name)}{typ}")
        for op in c.operations:
            out.append(f"  {op}")
        out.append("}")
    rels = sorted(
        diagram.relationships,
        key=lambda r: (
            normalize_name(r.source),
            normalize_name(r.target),
            _kind_order(r.kind),
            r.source,
            r.target,
            str(r.source_multiplicity or ""),
            str(r.target_multiplicity or ""),
            r.label or "",
        ),
    )
    for r in rels:
        sm = f' "{r.source_multiplicity}"' if r.source_multiplicity else ""
        tm = f' "{r.target_multiplicity}"' if r.target_multiplicity else ""
        label = f" : {r.label}" if r.label else ""
        out.append(f"{_name(r.source)}{sm} {_ARROWS[r.kind]}{tm} {_name(r.target)}{label}")
    out.append("@enduml")
    return "\n".join(out) + "\n"
