"""Author mock-backend fixtures for a use-case directory.

The directory must hold ``gold.puml`` and ``requirements.txt``.  A scripted
backend answers every stage with the gold diagram's content (as a careful
model would), and a recording backend stores each answer under its request
key in ``<dir>/mock/``.  Both the verified and the unverified pipeline runs
are recorded so ``nomad generate --backend mock`` works either way.

    python3 scripts/record_fixtures.py fixtures/northwind
"""

import argparse
import json
import shutil
from pathlib import Path

from nomad.backends import RecordingBackend, ScriptedBackend
from nomad.files import load_diagram
from nomad.model import from_diagram, to_diagram
from nomad.pipeline import ARTICULATION, CONCEPTS, INTEGRATION, RELATIONSHIPS, VALIDATION, run_pipeline
from nomad.plantuml import emit_plantuml


def faithful_script(gold):
    model = from_diagram(gold)
    entities = [{"name": c["name"], "attributes": c["attributes"]} for c in model["classes"]]
    relations = [
        {k: r[k] for k in ("source", "target", "type", "sourceMultiplicity", "targetMultiplicity")}
        for r in model["relationships"]
    ]
    code = emit_plantuml(to_diagram(model))
    fenced = f"```plantuml\n{code}```\n"
    return {
        CONCEPTS: json.dumps({"entities": entities}, indent=2),
        RELATIONSHIPS: json.dumps({"relationships": relations}, indent=2),
        INTEGRATION: json.dumps(model, indent=2),
        ARTICULATION: fenced,
        VALIDATION: fenced,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("case_dir")
    ap.add_argument("--clean", action="store_true", help="remove existing fixtures first")
    args = ap.parse_args()

    case = Path(args.case_dir)
    gold = load_diagram(case / "gold.puml")
    requirements = (case / "requirements.txt").read_text(encoding="utf-8")
    out = case / "mock"
    if args.clean and out.exists():
        shutil.rmtree(out)

    backend = RecordingBackend(ScriptedBackend(faithful_script(gold)), out)
    result = run_pipeline(requirements, backend, verify_enabled=True)
    run_pipeline(requirements, backend, verify_enabled=False)
    final = result.final_diagram()
    print(f"{len(list(out.glob('*.txt')))} fixtures in {out}")
    print(f"replayed diagram: {len(final.classes)} classes, {final.element_count()} elements")


if __name__ == "__main__":
    main()
