"""Command-line entry point: ``nomad reverse|reqgen|generate|eval``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .backends import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_TEMPERATURE,
    ConfigError,
    HttpBackend,
    MockBackend,
    RecordingBackend,
)
from .evaluator import (
    AnnotationError,
    evaluate,
    load_annotations,
    macro_average,
    render_table,
    report_row,
)
from .files import DiagramLoadError, load_diagram, load_use_cases
from .model import from_diagram
from .pipeline import PipelineError, PromptSet, Settings, run_pipeline
from .plantuml import PlantUmlError, emit_plantuml
from .reqgen import ReqGenConfig, generate_requirements, render_document, trace_sidecar
from .schema import DdlError, parse_ddl, reverse_engineer

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    backend: str = "mock"
    endpoint: Optional[str] = None
    model_name: Optional[str] = None
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    verify: bool = True
    prompt_dir: Optional[str] = None
    fixture_dir: Optional[str] = None

    def check(self):
        if self.backend not in ("http", "mock", "record"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.backend in ("http", "record") and not (self.endpoint and self.model_name):
            raise ConfigError(f"{self.backend} backend requires --endpoint and --model")
        if self.backend in ("mock", "record") and not self.fixture_dir:
            raise ConfigError(f"{self.backend} backend requires --fixtures")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ConfigError("max_tokens must be positive")

    def make_backend(self):
        self.check()
        if self.backend == "mock":
            return MockBackend(self.fixture_dir)
        live = HttpBackend(self.endpoint, self.model_name)
        if self.backend == "record":
            return RecordingBackend(live, self.fixture_dir)
        return live


def load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _err(msg: str):
    print(f"nomad: {msg}", file=sys.stderr)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _base(out: str) -> Path:
    p = Path(out)
    return p.with_suffix("") if p.suffix in (".puml", ".json", ".txt") else p


# ---------------------------------------------------------------------------
# commands


def cmd_reverse(sql_path: str, out_path: str) -> int:
    """SQL DDL -> gold diagram as ``<out>.puml`` and ``<out>.json``."""
    try:
        text = Path(sql_path).read_text(encoding="utf-8")
    except FileNotFoundError:
        _err(f"file not found: {sql_path}")
        return EXIT_FAIL
    try:
        schema = parse_ddl(text)
        diagram = reverse_engineer(schema)
        puml = emit_plantuml(diagram)
    except (DdlError, PlantUmlError) as exc:
        _err(f"{sql_path}: {exc}")
        return EXIT_FAIL
    for w in schema.warnings:
        _err(f"warning: {w}")
    base = _base(out_path)
    _write(base.with_suffix(".puml"), puml)
    _write(base.with_suffix(".json"), json.dumps(from_diagram(diagram), indent=2) + "\n")
    print(f"{len(diagram.classes)} classes, {len(diagram.relationships)} relationships -> {base}.puml, {base}.json")
    return EXIT_OK


def cmd_reqgen(diagram_path: str, config_path: Optional[str], out_path: str) -> int:
    """Diagram -> requirements document plus ``<out>.trace.json``."""
    try:
        diagram = load_diagram(diagram_path)
        cfg = ReqGenConfig.from_mapping(load_config_file(config_path))
    except FileNotFoundError as exc:
        _err(f"file not found: {exc.filename}")
        return EXIT_FAIL
    except (DiagramLoadError, ValueError, tomllib.TOMLDecodeError) as exc:
        _err(str(exc))
        return EXIT_FAIL
    try:
        reqs = generate_requirements(diagram, cfg)
    except ValueError as exc:
        _err(f"{diagram_path}: {exc}")
        return EXIT_FAIL
    out = Path(out_path)
    _write(out, render_document(reqs))
    _write(out.with_name(out.stem + ".trace.json"), trace_sidecar(reqs))
    print(f"{len(reqs)} requirements -> {out}")
    return EXIT_OK


BUNDLE_FILES = {
    "concepts": "01_concepts.json",
    "relationships": "02_relationships.json",
    "model": "03_model.json",
    "plantuml": "04_diagram.puml",
    "verified": "05_verified.puml",
    "transcript": "transcript.json",
    "run": "run.json",
}


def cmd_generate(requirements_path: str, config: RunConfig, out_dir: str) -> int:
    """Run the pipeline and write a bundle of stage-numbered artifacts."""
    try:
        config.check()
        settings = Settings(
            temperature=config.temperature,
            max_tokens=config.max_tokens,
            prompts=PromptSet(config.prompt_dir) if config.prompt_dir else None,
        )
        backend = config.make_backend()
    except (ConfigError, FileNotFoundError) as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    try:
        requirements = Path(requirements_path).read_text(encoding="utf-8")
    except FileNotFoundError:
        _err(f"file not found: {requirements_path}")
        return EXIT_FAIL
    try:
        result = run_pipeline(requirements, backend, config.verify, settings)
    except PipelineError as exc:
        _err(f"stage {exc.stage} failed: {exc}")
        return EXIT_FAIL

    out = Path(out_dir)
    dump = lambda v: json.dumps(v, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    _write(out / BUNDLE_FILES["concepts"], dump(result.concepts.to_json()))
    _write(out / BUNDLE_FILES["relationships"], dump(result.relationships.to_json()))
    _write(out / BUNDLE_FILES["model"], dump(result.model))
    _write(out / BUNDLE_FILES["plantuml"], result.plantuml)
    verified = out / BUNDLE_FILES["verified"]
    if result.verified_plantuml is not None:
        _write(verified, result.verified_plantuml)
    elif verified.exists():
        verified.unlink()
    _write(out / BUNDLE_FILES["transcript"], dump([e.to_dict() for e in result.transcript]))
    run_info = {
        "backend": config.backend,
        "model_name": config.model_name,
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
        "verify": config.verify,
        "prompt_version": settings.prompt_set.version,
        "stages": [e.stage for e in result.transcript],
    }
    _write(out / BUNDLE_FILES["run"], dump(run_info))
    print(f"{len(result.transcript)} stages -> {out}")
    return EXIT_OK


def _taxonomy_summary(report) -> str:
    lines = []
    for dim, counts in report.error_counts().items():
        cells = ", ".join(f"{t}={n}" for t, n in counts.items())
        lines.append(f"{dim:<12} {sum(counts.values()):>3}  ({cells})")
    return "\n".join(lines) + "\n"


def cmd_eval(
    gold_path: str,
    gen_path: str,
    annotations: Optional[str] = None,
    out_path: str = "eval_report.json",
    taxonomy: bool = False,
) -> int:
    """Score one generated diagram against its gold diagram."""
    try:
        gold = load_diagram(gold_path)
        gen = load_diagram(gen_path)
        notes = load_annotations(annotations) if annotations else None
    except FileNotFoundError as exc:
        _err(f"file not found: {exc.filename}")
        return EXIT_FAIL
    except (DiagramLoadError, AnnotationError, ValueError) as exc:
        _err(str(exc))
        return EXIT_FAIL
    report = evaluate(gold, gen, notes)
    sys.stdout.write(render_table([(Path(gen_path).stem, report_row(report))]))
    if taxonomy:
        sys.stdout.write(_taxonomy_summary(report))
    _write(Path(out_path), report.to_json())
    return EXIT_OK


def cmd_eval_batch(root: str, out_path: str = "eval_report.json", taxonomy: bool = False) -> int:
    """Score every use case under ``root`` and add the macro-averaged row."""
    try:
        cases = [c for c in load_use_cases(root) if c.generated_path is not None]
        if not cases:
            raise DiagramLoadError(f"{root}: no use case has both gold and generated diagrams")
        reports = {c.name: evaluate(c.gold(), c.generated()) for c in cases}
    except FileNotFoundError as exc:
        _err(str(exc))
        return EXIT_FAIL
    except DiagramLoadError as exc:
        _err(str(exc))
        return EXIT_FAIL
    macro = macro_average(list(reports.values()))
    rows = [(name, report_row(r)) for name, r in reports.items()]
    keys = ("classes", "attributes", "relationships_strict", "relationships_relaxed", "average")
    rows.append(("macro average", [macro[k] for k in keys]))
    sys.stdout.write(render_table(rows))
    if taxonomy:
        for name, r in reports.items():
            sys.stdout.write(f"{name}\n{_taxonomy_summary(r)}")
    payload = {"cases": {n: r.to_dict() for n, r in reports.items()}, "macro": macro}
    _write(Path(out_path), json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nomad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reverse", help="reverse-engineer SQL DDL into a gold diagram")
    p.add_argument("sql")
    p.add_argument("--out", required=True, help="output path stem; .puml and .json are written")

    p = sub.add_parser("reqgen", help="generate requirements from a diagram")
    p.add_argument("diagram")
    p.add_argument("--config", help="TOML file with ReqGenConfig keys")
    p.add_argument("--out", required=True)

    p = sub.add_parser("generate", help="run the generation pipeline on a requirements file")
    p.add_argument("requirements")
    p.add_argument("--config", help="TOML file mirroring the run options")
    p.add_argument("--backend", choices=("http", "mock", "record"))
    p.add_argument("--endpoint")
    p.add_argument("--model", dest="model_name")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-tokens", type=int, dest="max_tokens")
    p.add_argument("--verify", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--fixtures", dest="fixture_dir")
    p.add_argument("--prompts", dest="prompt_dir")
    p.add_argument("--out", required=True, help="bundle directory")

    p = sub.add_parser("eval", help="score a generated diagram against a gold diagram")
    p.add_argument("gold", nargs="?")
    p.add_argument("generated", nargs="?")
    p.add_argument("--batch", metavar="DIR", help="directory of use cases (gold + generated per case)")
    p.add_argument("--annotations", help="JSON overlay of human-annotated errors")
    p.add_argument("--out", default="eval_report.json")
    p.add_argument("--taxonomy", action="store_true", help="print error counts per dimension")
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    data = load_config_file(args.config)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = RunConfig(**data)
    overrides = {k: getattr(args, k) for k in known if getattr(args, k, None) is not None}
    return replace(cfg, **overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "reverse":
        return cmd_reverse(args.sql, args.out)
    if args.command == "reqgen":
        return cmd_reqgen(args.diagram, args.config, args.out)
    if args.command == "generate":
        try:
            cfg = run_config_from_args(args)
        except (ConfigError, TypeError, OSError, tomllib.TOMLDecodeError) as exc:
            _err(f"config error: {exc}")
            return EXIT_CONFIG
        return cmd_generate(args.requirements, cfg, args.out)
    if args.batch:
        return cmd_eval_batch(args.batch, args.out, args.taxonomy)
    if not (args.gold and args.generated):
        _err("eval needs GOLD and GENERATED paths, or --batch DIR")
        return EXIT_CONFIG
    return cmd_eval(args.gold, args.generated, args.annotations, args.out, args.taxonomy)


if __name__ == "__main__":
    sys.exit(main())
