import json

import pytest

from nomad.core import equivalent
from nomad.files import DiagramLoadError, load_diagram, load_use_cases
from nomad.model import from_diagram

PUML = "@startuml\nclass A {\n  x\n}\nclass B\nA -- B\n@enduml\n"


def test_plantuml_and_json_agree(tmp_path):
    p = tmp_path / "d.puml"
    p.write_text(PUML)
    d = load_diagram(p)
    j = tmp_path / "d.json"
    j.write_text(json.dumps(from_diagram(d)))
    assert equivalent(load_diagram(j), d)


@pytest.mark.parametrize(
    "name, text",
    [
        ("bad.json", "{not json"),
        ("schema.json", '{"classes": [{"name": "A"}]}'),
        ("broken.puml", "@startuml\nclass A {\n@enduml\n"),
    ],
)
def test_load_errors(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    with pytest.raises(DiagramLoadError, match=name):
        load_diagram(p)


def test_use_cases(tmp_path):
    (tmp_path / "b").mkdir()
    (tmp_path / "b" / "gold.puml").write_text(PUML)
    (tmp_path / "a").mkdir()
    (tmp_path / "a" / "gold.puml").write_text(PUML)
    (tmp_path / "a" / "generated.puml").write_text(PUML)
    (tmp_path / "a" / "requirements.txt").write_text("R1")
    (tmp_path / "skip").mkdir()
    cases = load_use_cases(tmp_path)
    assert [c.name for c in cases] == ["a", "b"]
    assert cases[0].requirements == "R1" and cases[1].requirements is None
    assert equivalent(cases[0].generated(), cases[0].gold())
    with pytest.raises(FileNotFoundError):
        cases[1].generated()
    with pytest.raises(FileNotFoundError):
        load_use_cases(tmp_path / "missing")
