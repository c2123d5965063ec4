import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nomad.core import MANY, ONE, ZERO_OR_ONE, RelationshipKind, validate
from nomad.schema import (
    Column,
    DdlError,
    ForeignKey,
    RelationalSchema,
    Table,
    detect_join_tables,
    infer_cardinality,
    parse_ddl,
    reverse_engineer,
)

TWO_TABLES = """
CREATE TABLE Customer (id INT PRIMARY KEY, name VARCHAR(40) NOT NULL);
CREATE TABLE "Order" (
  id INT PRIMARY KEY,
  customer_id INT NOT NULL,
  total DECIMAL(10,2),
  CONSTRAINT fk_cust FOREIGN KEY (customer_id) REFERENCES Customer (id) ON DELETE CASCADE
);
"""


def test_parse_two_tables():
    s = parse_ddl(TWO_TABLES)
    assert [t.name for t in s.tables] == ["Customer", "Order"]
    order = s.table("order")
    assert order.primary_key == ("id",)
    assert order.column("customer_id").nullable is False
    assert order.column("total").sql_type == "DECIMAL(10,2)"
    assert order.foreign_keys == (ForeignKey(("customer_id",), "Customer", ("id",)),)


def test_reverse_two_tables():
    d = reverse_engineer(parse_ddl(TWO_TABLES))
    assert [c.name for c in d.classes] == ["Customer", "Order"]
    assert [a.name for a in d.class_named("Order").attributes] == ["id", "total"]
    (r,) = d.relationships
    assert (r.source, r.target, r.kind) == ("Customer", "Order", RelationshipKind.ASSOCIATION)
    assert (r.source_multiplicity, r.target_multiplicity) == (ONE, MANY)


def test_skips_other_statements_with_warning():
    s = parse_ddl("CREATE INDEX ix ON t (a);\nCREATE TABLE t (a INT, CHECK (a > 0));\n-- done")
    assert [t.name for t in s.tables] == ["t"]
    assert len(s.warnings) == 2


@pytest.mark.parametrize(
    "sql",
    [
        "CREATE TABLE a (x INT PRIMARY KEY); CREATE TABLE a (y INT);",
        "CREATE TABLE a (x INT, FOREIGN KEY (x) REFERENCES missing(id));",
        "CREATE TABLE a (x INT, PRIMARY KEY (nope));",
        "CREATE TABLE a (x INT",
    ],
)
def test_invalid_ddl_rejected(sql):
    with pytest.raises(DdlError):
        reverse_engineer(parse_ddl(sql))


def _table(name, cols, pk=(), fks=(), uniques=()):
    return Table(name, tuple(cols), tuple(pk), tuple(fks), tuple(uniques))


@pytest.mark.parametrize(
    "nullable, unique, want",
    [
        (False, False, (ONE, MANY)),
        (False, True, (ONE, ONE)),
        (True, False, (ZERO_OR_ONE, MANY)),
        (True, True, (ZERO_OR_ONE, ONE)),
    ],
)
def test_cardinality_rules(nullable, unique, want):
    fk = ForeignKey(("ref",), "Other", ("id",))
    t = _table("T", [Column("id", "INT", False, True), Column("ref", "INT", nullable, unique)], ("id",), [fk])
    assert infer_cardinality(fk, t) == want


def test_composite_unique_constraint_counts():
    fk = ForeignKey(("a", "b"), "Other", ("x", "y"))
    t = _table("T", [Column("a", "INT", False), Column("b", "INT", False), Column("c")], (), [fk], [("b", "a")])
    assert infer_cardinality(fk, t) == (ONE, ONE)


def test_join_table_needs_exact_shape():
    base = [_table("A", [Column("id")], ["id"]), _table("B", [Column("id")], ["id"])]
    fks = [ForeignKey(("a",), "A", ("id",)), ForeignKey(("b",), "B", ("id",))]
    pure = _table("AB", [Column("a", nullable=False), Column("b", nullable=False)], ["a", "b"], fks)
    extra = _table("AB", [Column("a"), Column("b"), Column("since")], ["a", "b"], fks)
    surrogate = _table("AB", [Column("id"), Column("a"), Column("b")], ["id"], fks)
    assert detect_join_tables(RelationalSchema(tuple(base + [pure]))) == {"AB"}
    assert detect_join_tables(RelationalSchema(tuple(base + [extra]))) == set()
    assert detect_join_tables(RelationalSchema(tuple(base + [surrogate]))) == set()


def test_reference_to_join_table_rejected():
    sql = """
    CREATE TABLE A (id INT PRIMARY KEY);
    CREATE TABLE B (id INT PRIMARY KEY);
    CREATE TABLE AB (a INT REFERENCES A(id), b INT REFERENCES B(id), PRIMARY KEY (a, b));
    CREATE TABLE C (id INT PRIMARY KEY, ab_a INT, ab_b INT, FOREIGN KEY (ab_a, ab_b) REFERENCES AB (a, b));
    """
    with pytest.raises(DdlError, match="join table"):
        reverse_engineer(parse_ddl(sql))


# random schemas


def random_schema(rng: random.Random) -> RelationalSchema:
    n = rng.randint(1, 7)
    names = [f"T{i}" for i in range(n)]
    tables = []
    entities = []
    for i, name in enumerate(names):
        cols = [Column("id", "INT", False, True)]
        fks = []
        if rng.random() < 0.25 and len(entities) >= 2:
            a, b = rng.sample(entities, 2)
            cols = [Column("a_id", "INT", False), Column("b_id", "INT", False)]
            fks = [ForeignKey(("a_id",), a, ("id",)), ForeignKey(("b_id",), b, ("id",))]
            tables.append(_table(name, cols, ("a_id", "b_id"), fks))
            continue
        for k in range(rng.randint(0, 3)):
            cols.append(Column(f"c{k}", rng.choice(["INT", "TEXT", None])))
        for k in range(rng.randint(0, 3) if entities else 0):
            col = f"fk{k}"
            cols.append(Column(col, "INT", rng.random() < 0.5, rng.random() < 0.3))
            fks.append(ForeignKey((col,), rng.choice(entities), ("id",)))
        tables.append(_table(name, cols, ("id",), fks))
        entities.append(name)
    return RelationalSchema(tuple(tables))


schemas = st.randoms(use_true_random=False).map(random_schema)


@settings(max_examples=300, deadline=None)
@given(schemas)
def test_reverse_engineering_counts(schema):
    joins = detect_join_tables(schema)
    d = reverse_engineer(schema)
    assert validate(d) == []
    assert len(d.classes) == len(schema.tables) - len(joins)
    fk_rels = sum(len(t.foreign_keys) for t in schema.tables if t.name not in joins)
    assert len(d.relationships) == fk_rels + len(joins)
    fk_cols = {(t.name, c) for t in schema.tables for fk in t.foreign_keys for c in fk.columns}
    for c in d.classes:
        assert not any((c.name, a.name) in fk_cols for a in c.attributes)
    assert reverse_engineer(schema) == d


def test_northwind_fixture(fixtures_dir):
    schema = parse_ddl((fixtures_dir / "northwind" / "schema.sql").read_text())
    joins = detect_join_tables(schema)
    d = reverse_engineer(schema)
    assert len(schema.tables) == 23 and len(joins) == 2
    assert len(d.classes) == 21
    assert d.element_count() == 212
