"""SQL DDL subset reader and relational-to-UML reverse engineering."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    MANY,
    ONE,
    ZERO_OR_ONE,
    Multiplicity,
    Relationship,
    RelationshipKind,
    UmlAttribute,
    UmlClass,
    UmlDiagram,
)

__all__ = [
    "Column",
    "ForeignKey",
    "Table",
    "RelationalSchema",
    "DdlError",
    "parse_ddl",
    "detect_join_tables",
    "infer_cardinality",
    "reverse_engineer",
]


class DdlError(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    sql_type: str = ""
    nullable: bool = True
    unique: bool = False


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    referenced_table: str
    referenced_columns: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "referenced_columns", tuple(self.referenced_columns))
        if self.referenced_columns and len(self.referenced_columns) != len(self.columns):
            raise DdlError(
                f"foreign key {self.columns} -> {self.referenced_table}{self.referenced_columns}: "
                "column counts differ"
            )


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...] = ()
    primary_key: tuple[str, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()
    # multi-column UNIQUE constraints; single-column ones live on Column.unique
    unique_constraints: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "primary_key", tuple(self.primary_key))
        object.__setattr__(self, "foreign_keys", tuple(self.foreign_keys))
        object.__setattr__(self, "unique_constraints", tuple(tuple(u) for u in self.unique_constraints))
        known = {_key(c.name) for c in self.columns}
        for col in self.primary_key:
            if _key(col) not in known:
                raise DdlError(f"table {self.name}: primary key column {col!r} is not declared")
        for fk in self.foreign_keys:
            for col in fk.columns:
                if _key(col) not in known:
                    raise DdlError(f"table {self.name}: foreign key column {col!r} is not declared")

    def column(self, name: str) -> Column:
        for c in self.columns:
            if _key(c.name) == _key(name):
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class RelationalSchema:
    tables: tuple[Table, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def table(self, name: str) -> Table:
        for t in self.tables:
            if _key(t.name) == _key(name):
                return t
        raise KeyError(name)

    def check(self):
        """Raise DdlError on duplicate tables or dangling foreign keys."""
        seen = set()
        for t in self.tables:
            if _key(t.name) in seen:
                raise DdlError(f"table {t.name!r} declared twice")
            seen.add(_key(t.name))
        for t in self.tables:
            for fk in t.foreign_keys:
                if _key(fk.referenced_table) not in seen:
                    raise DdlError(
                        f"table {t.name!r} references undeclared table {fk.referenced_table!r}"
                    )


def _key(name: str) -> str:
    # SQL identifiers compare case-insensitively
    return name.lower()


# ---------------------------------------------------------------------------
# parsing


def _strip_sql_comments(text: str) -> str:
    out, i, n = [], 0, len(text)
    while i < n:
        ch = text[i]
        if ch in "'\"`[":
            close = "]" if ch == "[" else ch
            j = text.find(close, i + 1)
            j = n - 1 if j < 0 else j
            out.append(text[i : j + 1])
            i = j + 1
        elif text.startswith("--", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            i = n if j < 0 else j + 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _split_top_level(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside parentheses and quotes."""
    parts, depth, buf, quote = [], 0, [], None
    for ch in text:
        if quote:
            buf.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in "'\"`":
            quote = ch
        elif ch == "[":
            quote = "]"
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise DdlError("unbalanced parentheses")
        if ch == sep and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if depth != 0:
        raise DdlError("unbalanced parentheses")
    if quote:
        raise DdlError("unterminated quoted identifier or string")
    parts.append("".join(buf))
    return parts


_IDENT = r'(?:"[^"]+"|`[^`]+`|\[[^\]]+\]|[A-Za-z_][\w$]*)'
_QUALIFIED = rf"{_IDENT}(?:\s*\.\s*{_IDENT})*"

_CREATE_TABLE = re.compile(
    r"^\s*create\s+(?:(?:global\s+|local\s+)?(?:temporary|temp)\s+)?table\s+"
    r"(?:if\s+not\s+exists\s+)?"
    rf"(?P<name>{_QUALIFIED})\s*\((?P<body>.*)\)(?P<tail>[^()]*)$",
    re.IGNORECASE | re.DOTALL,
)


def _ident(raw: str) -> str:
    """Last component of a possibly qualified, possibly quoted identifier."""
    parts = re.findall(_IDENT, raw)
    if not parts:
        raise DdlError(f"expected an identifier, got {raw!r}")
    last = parts[-1]
    if last[0] in '"`[':
        return last[1:-1]
    return last


def _ident_list(raw: str) -> tuple[str, ...]:
    raw = raw.strip()
    if raw.startswith("(") and raw.endswith(")"):
        raw = raw[1:-1]
    names = []
    for part in raw.split(","):
        part = re.sub(r"\s+(asc|desc)\s*$", "", part.strip(), flags=re.IGNORECASE)
        if part:
            names.append(_ident(part))
    return tuple(names)


_REFERENCES = re.compile(
    rf"references\s+(?P<table>{_QUALIFIED})\s*(?P<cols>\([^)]*\))?",
    re.IGNORECASE,
)


def parse_ddl(sql_text: str) -> RelationalSchema:
    """Parse ``CREATE TABLE`` statements into a RelationalSchema.

    Other statements and unsupported clauses are skipped and reported in
    ``schema.warnings``.  Malformed statements and references to undeclared
    tables raise :class:`DdlError`.
    """
    text = _strip_sql_comments(sql_text)
    tables: list[Table] = []
    warnings: list[str] = []
    for stmt in _split_top_level(text, ";"):
        stmt = stmt.strip()
        if not stmt:
            continue
        head = " ".join(stmt.split()[:3]).lower()
        if not re.match(r"create\s+(?:(?:global\s+|local\s+)?(?:temporary|temp)\s+)?table\b", stmt, re.I):
            warnings.append(f"skipped statement: {head} ...")
            continue
        m = _CREATE_TABLE.match(stmt)
        if m is None:
            raise DdlError(f"malformed CREATE TABLE statement: {stmt[:60]!r}")
        tables.append(_parse_table(_ident(m.group("name")), m.group("body"), warnings))
    schema = RelationalSchema(tuple(tables), tuple(warnings))
    schema.check()
    return schema


def _parse_table(name: str, body: str, warnings: list[str]) -> Table:
    columns: list[dict] = []
    pk: tuple[str, ...] = ()
    fks: list[ForeignKey] = []
    uniques: list[tuple[str, ...]] = []
    for item in _split_top_level(body, ","):
        item = item.strip()
        if not item:
            raise DdlError(f"table {name}: empty column definition")
        item = re.sub(rf"^constraint\s+{_IDENT}\s+", "", item, flags=re.IGNORECASE)
        low = item.lower()
        if low.startswith("primary key"):
            m = re.match(r"primary\s+key\s*(?:clustered\s*|nonclustered\s*)?(\(.*?\))", item, re.I | re.S)
            if not m:
                raise DdlError(f"table {name}: malformed PRIMARY KEY clause")
            if pk:
                raise DdlError(f"table {name}: more than one primary key")
            pk = _ident_list(m.group(1))
        elif low.startswith("foreign key"):
            m = re.match(r"foreign\s+key\s*(\([^)]*\))\s*(.*)$", item, re.I | re.S)
            ref = _REFERENCES.search(m.group(2)) if m else None
            if not m or not ref:
                raise DdlError(f"table {name}: malformed FOREIGN KEY clause")
            fks.append(
                ForeignKey(
                    _ident_list(m.group(1)),
                    _ident(ref.group("table")),
                    _ident_list(ref.group("cols")) if ref.group("cols") else (),
                )
            )
        elif low.startswith("unique"):
            m = re.match(r"unique\s*(?:key|index)?\s*(?:" + _IDENT + r")?\s*(\(.*?\))", item, re.I | re.S)
            if not m:
                raise DdlError(f"table {name}: malformed UNIQUE clause")
            uniques.append(_ident_list(m.group(1)))
        elif re.match(r"(check|index|key|fulltext|spatial|exclude)\b", low):
            warnings.append(f"table {name}: skipped clause {item.split()[0].upper()}")
        else:
            col, inline_fk, inline_pk = _parse_column(name, item, warnings)
            columns.append(col)
            if inline_fk:
                fks.append(inline_fk)
            if inline_pk:
                if pk:
                    raise DdlError(f"table {name}: more than one primary key")
                pk = (col["name"],)

    known = {_key(c["name"]) for c in columns}
    for u in uniques:
        if len(u) == 1 and _key(u[0]) in known:
            next(c for c in columns if _key(c["name"]) == _key(u[0]))["unique"] = True
    pk_keys = {_key(c) for c in pk}
    for c in columns:
        if _key(c["name"]) in pk_keys:
            c["nullable"] = False
    if len(pk) == 1 and _key(pk[0]) in known:
        next(c for c in columns if _key(c["name"]) == _key(pk[0]))["unique"] = True
    return Table(
        name=name,
        columns=tuple(Column(**c) for c in columns),
        primary_key=pk,
        foreign_keys=tuple(fks),
        unique_constraints=tuple(u for u in uniques if len(u) > 1),
    )


def _parse_column(table: str, item: str, warnings: list[str]):
    m = re.match(rf"({_IDENT})\s*(.*)$", item, re.S)
    if not m:
        raise DdlError(f"table {table}: malformed column definition {item!r}")
    name = _ident(m.group(1))
    rest = m.group(2).strip()
    if not rest:
        raise DdlError(f"table {table}: column {name!r} has no type")
    tm = re.match(
        r"((?:[A-Za-z_][\w]*)(?:\s+(?:varying|precision|unsigned|zone|with|without|time))*\s*(?:\([^)]*\))?(?:\s*\[\])?)",
        rest,
        re.I,
    )
    if not tm:
        raise DdlError(f"table {table}: column {name!r} has no type")
    sql_type = " ".join(tm.group(1).split())
    constraints = rest[tm.end() :]
    low = " ".join(constraints.lower().split())

    nullable = "not null" not in low
    unique = bool(re.search(r"\bunique\b", low))
    inline_pk = bool(re.search(r"\bprimary\s+key\b", low))
    inline_fk = None
    ref = _REFERENCES.search(constraints)
    if ref:
        inline_fk = ForeignKey(
            (name,),
            _ident(ref.group("table")),
            _ident_list(ref.group("cols")) if ref.group("cols") else (),
        )
    if re.search(r"\bcheck\b", low):
        warnings.append(f"table {table}: skipped CHECK on column {name}")
    return {"name": name, "sql_type": sql_type, "nullable": nullable, "unique": unique}, inline_fk, inline_pk


# ---------------------------------------------------------------------------
# reverse engineering


def _fk_column_keys(table: Table) -> set[str]:
    return {_key(c) for fk in table.foreign_keys for c in fk.columns}


def detect_join_tables(schema: RelationalSchema) -> set[str]:
    """Names of tables that only realise a many-to-many link.

    A join table has exactly two foreign keys, a primary key equal to the
    union of the foreign-key columns, and no column outside that key.
    """
    found = set()
    for t in schema.tables:
        if len(t.foreign_keys) != 2:
            continue
        fk_cols = _fk_column_keys(t)
        pk_cols = {_key(c) for c in t.primary_key}
        if pk_cols != fk_cols:
            continue
        if all(_key(c.name) in fk_cols or _key(c.name) in pk_cols for c in t.columns):
            found.add(t.name)
    return found


def _is_unique(fk: ForeignKey, table: Table) -> bool:
    cols = {_key(c) for c in fk.columns}
    if cols == {_key(c) for c in table.primary_key}:
        return True
    if any(cols == {_key(c) for c in u} for u in table.unique_constraints):
        return True
    return len(cols) == 1 and table.column(fk.columns[0]).unique


def infer_cardinality(fk: ForeignKey, owning_table: Table) -> tuple[Multiplicity, Multiplicity]:
    """``(referenced side, owning side)`` multiplicities of a foreign key."""
    nullable = any(owning_table.column(c).nullable for c in fk.columns)
    referenced = ZERO_OR_ONE if nullable else ONE
    owning = ONE if _is_unique(fk, owning_table) else MANY
    return referenced, owning


def reverse_engineer(schema: RelationalSchema) -> UmlDiagram:
    schema.check()
    joins = detect_join_tables(schema)
    join_keys = {_key(j) for j in joins}
    names = {_key(t.name): t.name for t in schema.tables}
    classes = []
    relationships = []
    for t in schema.tables:
        if t.name in joins:
            continue
        fk_cols = _fk_column_keys(t)
        attrs = tuple(
            UmlAttribute(c.name, c.sql_type or None) for c in t.columns if _key(c.name) not in fk_cols
        )
        classes.append(UmlClass(t.name, attrs))
        for fk in t.foreign_keys:
            ref = names[_key(fk.referenced_table)]
            if _key(ref) in join_keys:
                raise DdlError(f"table {t.name!r} references join table {ref!r}")
            ref_mult, own_mult = infer_cardinality(fk, t)
            relationships.append(
                Relationship(ref, t.name, RelationshipKind.ASSOCIATION, ref_mult, own_mult)
            )
    for t in schema.tables:
        if t.name not in joins:
            continue
        a, b = (names[_key(fk.referenced_table)] for fk in t.foreign_keys)
        for end in (a, b):
            if _key(end) in join_keys:
                raise DdlError(f"join table {t.name!r} references join table {end!r}")
        relationships.append(Relationship(a, b, RelationshipKind.ASSOCIATION, MANY, MANY, t.name))
    return UmlDiagram(tuple(classes), tuple(relationships))
