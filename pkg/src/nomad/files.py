"""Reading diagrams and use-case directories from disk."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import UmlDiagram
from .model import model_errors, to_diagram
from .plantuml import has_errors, parse_plantuml

__all__ = ["DiagramLoadError", "load_diagram", "UseCase", "load_use_cases"]

PLANTUML_SUFFIXES = (".puml", ".plantuml", ".pu", ".uml", ".txt")


class DiagramLoadError(ValueError):
    pass


def load_diagram(path: str | Path) -> UmlDiagram:
    """Diagram from a PlantUML file or an intermediate-model JSON file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DiagramLoadError(f"{path}: invalid JSON: {exc}") from exc
        problems = model_errors(doc)
        if problems:
            raise DiagramLoadError(f"{path}: " + "; ".join(problems))
        return to_diagram(doc)
    diagram, diags = parse_plantuml(text)
    if has_errors(diags):
        raise DiagramLoadError(
            f"{path}: " + "; ".join(str(d) for d in diags if d.severity == "error")
        )
    return diagram


@dataclass(frozen=True)
class UseCase:
    """One benchmark case: ``requirements.txt``, ``gold.puml`` and
    optionally ``generated.puml`` (``.json`` models are accepted too)."""

    name: str
    directory: Path
    requirements: Optional[str]
    gold_path: Path
    generated_path: Optional[Path]

    def gold(self) -> UmlDiagram:
        return load_diagram(self.gold_path)

    def generated(self) -> UmlDiagram:
        if self.generated_path is None:
            raise FileNotFoundError(f"{self.directory}: no generated diagram")
        return load_diagram(self.generated_path)


def _find(directory: Path, stem: str) -> Optional[Path]:
    for suffix in PLANTUML_SUFFIXES[:-1] + (".json",):
        p = directory / f"{stem}{suffix}"
        if p.is_file():
            return p
    return None


def load_use_cases(root: str | Path) -> list[UseCase]:
    """All use-case subdirectories of ``root`` that contain a gold diagram,
    sorted by name."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"use-case directory not found: {root}")
    cases = []
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        gold = _find(d, "gold")
        if gold is None:
            continue
        req = d / "requirements.txt"
        cases.append(
            UseCase(
                name=d.name,
                directory=d,
                requirements=req.read_text(encoding="utf-8") if req.is_file() else None,
                gold_path=gold,
                generated_path=_find(d, "generated"),
            )
        )
    return cases
