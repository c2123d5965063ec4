import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from nomad.core import MANY, ONE, Multiplicity, Relationship, RelationshipKind, UmlAttribute, UmlClass, UmlDiagram, equivalent
from nomad.plantuml import PlantUmlError, emit_plantuml, has_errors, parse_plantuml

G, A, AG, C = (
    RelationshipKind.GENERALIZATION,
    RelationshipKind.ASSOCIATION,
    RelationshipKind.AGGREGATION,
    RelationshipKind.COMPOSITION,
)


def parse_ok(text):
    d, diags = parse_plantuml(text)
    assert not has_errors(diags), diags
    return d, diags


def test_empty_input():
    d, diags = parse_plantuml("")
    assert d.classes == () and d.relationships == ()
    assert not has_errors(diags)


def test_generalization_direction():
    d, _ = parse_ok("@startuml\nclass A\nclass B\nA --|> B\n@enduml\n")
    assert d.relationships == (Relationship("A", "B", G),)
    d, _ = parse_ok("@startuml\nclass A\nclass B\nB <|-- A\n@enduml\n")
    assert d.relationships == (Relationship("A", "B", G),)


@pytest.mark.parametrize(
    "line, rel",
    [
        ("A *-- B", Relationship("A", "B", C)),
        ("B --* A", Relationship("A", "B", C)),
        ("A o-- B", Relationship("A", "B", AG)),
        ("B --o A", Relationship("A", "B", AG)),
        ("A -- B", Relationship("A", "B", A)),
        ("A --> B", Relationship("A", "B", A)),
        ("A <-- B", Relationship("B", "A", A)),
        ("A -up-|> B", Relationship("A", "B", G)),
    ],
)
def test_arrow_semantics(line, rel):
    d, _ = parse_ok(f"@startuml\nclass A\nclass B\n{line}\n@enduml\n")
    assert d.relationships == (rel,)


def test_multiplicities_follow_their_ends():
    d, _ = parse_ok('@startuml\nclass A\nclass B\nA "1" -- "0..*" B : has\n@enduml')
    assert d.relationships == (Relationship("A", "B", A, ONE, MANY, "has"),)
    d, _ = parse_ok('@startuml\nclass A\nclass B\nB "0..*" --* "1" A\n@enduml')
    assert d.relationships == (Relationship("A", "B", C, ONE, MANY),)


def test_class_bodies_and_members():
    text = """@startuml
title Shop
abstract class Item <<entity>> {
  +name : String
  -price : DECIMAL(10, 2)
  {static} count : int
  "unit price" : Money
  Integer quantity
  --
  +total() : Money
}
enum Color { RED, GREEN }
interface Payable
class Empty {}
@enduml
"""
    d, diags = parse_ok(text)
    assert d.title == "Shop"
    item = d.class_named("Item")
    assert item.is_abstract and item.stereotype == "entity"
    assert [a.name for a in item.attributes] == ["name", "price", "count", "unit price", "quantity"]
    assert [a.declared_type for a in item.attributes] == ["String", "DECIMAL(10, 2)", "int", "Money", "Integer"]
    assert item.attributes[0].visibility == "+" and item.attributes[1].visibility == "-"
    assert item.operations == ("+total() : Money",)
    color = d.class_named("Color")
    assert color.is_enumeration and color.attribute_names == ["RED", "GREEN"]
    assert d.class_named("Payable") is not None
    assert d.class_named("Empty").attributes == ()


def test_comments_notes_and_packages_are_skipped():
    text = """@startuml
' a comment
/' block
   comment '/
skinparam classAttributeIconSize 0
package sales {
class A
}
note "free note" as N1
note right of A
  multi-line
end note
class B
A -- B
@enduml"""
    d, diags = parse_ok(text)
    assert [c.name for c in d.classes] == ["A", "B"]
    assert len(d.relationships) == 1
    assert any("container" in x.message for x in diags)


def test_implicit_declaration_warns():
    d, diags = parse_ok("@startuml\nclass A\nA -- B\n@enduml")
    assert d.class_named("B") is not None
    assert any("implicitly" in x.message for x in diags)


def test_missing_fence_warns():
    d, diags = parse_plantuml("class A\nclass B\nA -- B\n")
    assert len(d.classes) == 2
    assert [x.severity for x in diags] == ["warning"]


@pytest.mark.parametrize(
    "text",
    [
        "@startuml\nclass A {\n x\n@enduml",
        "@startuml\nclass A\n}\n@enduml",
        "@startuml\npackage p {\nclass A\n@enduml",
    ],
)
def test_unbalanced_braces_are_errors(text):
    _, diags = parse_plantuml(text)
    assert has_errors(diags)


def test_crlf_accepted():
    d, _ = parse_ok("@startuml\r\nclass A {\r\n  x : int\r\n}\r\n@enduml\r\n")
    assert d.class_named("A").attributes == (UmlAttribute("x", "int"),)


def test_emit_rejects_invalid():
    with pytest.raises(PlantUmlError):
        emit_plantuml(UmlDiagram((UmlClass("A"),), (Relationship("A", "B"),)))


def test_emit_format():
    d = UmlDiagram(
        (
            UmlClass("Order", (UmlAttribute("date", "Date", "+"),)),
            UmlClass("Customer", (UmlAttribute("full name"),)),
        ),
        (Relationship("Customer", "Order", A, ONE, MANY),),
        title="T",
    )
    assert emit_plantuml(d) == (
        "@startuml\n"
        "title T\n"
        "class Customer {\n"
        '  "full name"\n'
        "}\n"
        "class Order {\n"
        "  +date : Date\n"
        "}\n"
        'Customer "1" -- "0..*" Order\n'
        "@enduml\n"
    )


def test_round_trip_three_classes():
    d = UmlDiagram(
        (
            UmlClass("Person", (UmlAttribute("name", "String"),), is_abstract=True),
            UmlClass("Student", (UmlAttribute("number"),)),
            UmlClass("Course"),
        ),
        (
            Relationship("Student", "Person", G),
            Relationship("Student", "Course", A, Multiplicity(0, None), Multiplicity(1, None), "enrolls"),
        ),
    )
    back, diags = parse_plantuml(emit_plantuml(d))
    assert diags == []
    assert equivalent(back, d)


@settings(max_examples=300, deadline=None)
@given(gen.rich_diagrams)
def test_emit_is_deterministic_and_order_insensitive(d):
    text = emit_plantuml(d)
    assert emit_plantuml(d) == text
    rng = random.Random(len(text))
    classes, rels = list(d.classes), list(d.relationships)
    rng.shuffle(classes)
    rng.shuffle(rels)
    shuffled = UmlDiagram(tuple(classes), tuple(rels), d.title)
    assert emit_plantuml(shuffled) == text


@settings(max_examples=500, deadline=None)
@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=400))
def test_parser_total_on_arbitrary_text(text):
    d, diags = parse_plantuml(text)
    assert isinstance(d, UmlDiagram)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(["@startuml", "class A {", "}", "A -- B", "x : int", "note left", "end note", "package p {", "enum E {", "@enduml", "'", "/'", "'/"]), max_size=25))
def test_parser_total_on_line_soup(lines):
    parse_plantuml("\n".join(lines))
