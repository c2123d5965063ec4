import jsonschema
from hypothesis import given, settings

import gen
from nomad.core import equivalent, validate
from nomad.model import canonical_model, from_diagram, load_schema, model_errors, to_diagram

GOOD = {
    "classes": [
        {"name": "Customer", "attributes": ["name"]},
        {"name": "Order", "attributes": []},
        {"name": "Status", "attributes": ["OPEN"], "enumeration": True},
    ],
    "relationships": [
        {"source": "Customer", "target": "Order", "type": "association", "sourceMultiplicity": "1", "targetMultiplicity": "0..*"}
    ],
}


def test_schema_is_valid_draft():
    schema = load_schema()
    jsonschema.validators.validator_for(schema).check_schema(schema)


def test_good_model_accepted():
    assert model_errors(GOOD) == []
    assert validate(to_diagram(GOOD)) == []


def test_schema_violations_reported():
    assert model_errors({"classes": []})
    assert model_errors({"classes": [{"attributes": []}], "relationships": []})
    bad_type = {"classes": [{"name": "A"}], "relationships": [{"source": "A", "target": "A", "type": "uses"}]}
    assert any("uses" in e for e in model_errors(bad_type))
    extra = dict(GOOD, comment="no")
    assert model_errors(extra)


def test_referential_problems_reported():
    doc = {"classes": [{"name": "A", "attributes": []}], "relationships": [{"source": "A", "target": "B", "type": "association"}]}
    assert model_errors(doc) == ["relationship endpoint 'B' is not a class of the diagram"]


def test_canonical_model_fills_defaults():
    doc = canonical_model(GOOD)
    assert doc["classes"][1] == {"name": "Order", "attributes": [], "enumeration": False, "abstract": False}
    assert doc["relationships"][0]["label"] is None
    assert canonical_model(doc) == doc


@settings(max_examples=300, deadline=None)
@given(gen.rich_diagrams)
def test_model_round_trip(d):
    doc = from_diagram(d)
    assert model_errors(doc) == []
    back = to_diagram(doc)
    assert from_diagram(back) == doc
    # types, visibility and operations are not part of the model
    stripped = type(d)(
        tuple(type(c)(c.name, tuple(type(a)(a.name) for a in c.attributes), c.is_enumeration, c.is_abstract) for c in d.classes),
        d.relationships,
        d.title,
    )
    assert equivalent(back, stripped)
