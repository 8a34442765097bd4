"""Schema model, DDL-style serialization, and catalog introspection."""

from __future__ import annotations

import re
import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union


@dataclass(frozen=True)
class ColumnDef:
    name: str
    declared_type: str = ''
    not_null: bool = False
    default: Optional[str] = None  # SQL snippet as written in the catalog


@dataclass(frozen=True)
class ForeignKey:
    columns: Tuple[str, ...]
    ref_table: str
    ref_columns: Tuple[str, ...]


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: Tuple[ColumnDef, ...]
    primary_key: Tuple[str, ...] = ()
    foreign_keys: Tuple[ForeignKey, ...] = ()

    def __post_init__(self):
        lowers = [c.name.lower() for c in self.columns]
        if len(set(lowers)) != len(lowers):
            raise ValueError(f'duplicate column names in table {self.name!r}')
        for pk in self.primary_key:
            if pk.lower() not in lowers:
                raise ValueError(f'primary key column {pk!r} not in table {self.name!r}')

    def find_column(self, name: str) -> Optional[ColumnDef]:
        lower = name.lower()
        for col in self.columns:
            if col.name.lower() == lower:
                return col
        return None


@dataclass(frozen=True)
class SchemaDef:
    name: str
    tables: Tuple[TableDef, ...] = ()

    def __post_init__(self):
        lowers = [t.name.lower() for t in self.tables]
        if len(set(lowers)) != len(lowers):
            raise ValueError(f'duplicate table names in schema {self.name!r}')
        for table in self.tables:
            for fk in table.foreign_keys:
                target = self.find_table(fk.ref_table)
                if target is None:
                    raise ValueError(
                        f'foreign key in {table.name!r} references unknown table {fk.ref_table!r}')
                for col in fk.ref_columns:
                    if target.find_column(col) is None:
                        raise ValueError(
                            f'foreign key in {table.name!r} references unknown column '
                            f'{fk.ref_table}.{col}')

    def find_table(self, name: str) -> Optional[TableDef]:
        lower = name.lower()
        for table in self.tables:
            if table.name.lower() == lower:
                return table
        return None


# --- serialization ----------------------------------------------------------


def _q(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def _sql_literal(value) -> str:
    if value is None:
        return 'NULL'
    if isinstance(value, bytes):
        return "X'" + value.hex() + "'"
    if isinstance(value, (int, float)):
        return repr(value) if isinstance(value, float) else str(value)
    return "'" + str(value).replace("'", "''") + "'"


def serialize_schema(schema: SchemaDef, *, include_value_samples: bool = False,
                     db_path: Union[str, Path, None] = None,
                     max_values: int = 20) -> str:
    """Render the schema as CREATE TABLE text in deterministic order.

    With ``include_value_samples`` on and a database file available, each
    table block is followed by comment lines listing up to ``max_values``
    distinct values per column (a ``...`` marker flags truncation).
    """
    blocks = []
    conn = None
    if include_value_samples and db_path is not None:
        from .relations import open_readonly
        conn = open_readonly(db_path)
    try:
        for table in schema.tables:
            width = max((len(_q(c.name)) for c in table.columns), default=0)
            lines = [f'CREATE TABLE {_q(table.name)} (']
            decls = []
            for col in table.columns:
                decl = f'  {_q(col.name):<{width}} {col.declared_type}'.rstrip()
                if col.not_null:
                    decl += ' NOT NULL'
                if col.default is not None:
                    decl += f' DEFAULT {col.default}'
                decls.append(decl)
            if table.primary_key:
                decls.append('  PRIMARY KEY(' + ','.join(_q(c) for c in table.primary_key) + ')')
            for fk in table.foreign_keys:
                decls.append(
                    '  FOREIGN KEY(' + ','.join(_q(c) for c in fk.columns) + ') REFERENCES '
                    + _q(fk.ref_table) + '(' + ','.join(_q(c) for c in fk.ref_columns) + ')')
            lines.append(',\n'.join(decls) + ' )')
            block = '\n'.join(lines)
            if conn is not None:
                samples = _column_samples(conn, table, max_values)
                if samples:
                    block += '\n' + '\n'.join(samples)
            blocks.append(block)
    finally:
        if conn is not None:
            conn.close()
    return '\n\n'.join(blocks)


def _column_samples(conn: sqlite3.Connection, table: TableDef, max_values: int):
    lines = []
    for col in table.columns:
        try:
            rows = conn.execute(
                f'SELECT DISTINCT {_q(col.name)} FROM {_q(table.name)} '
                f'WHERE {_q(col.name)} IS NOT NULL '
                f'ORDER BY {_q(col.name)} LIMIT ?', (max_values + 1,)).fetchall()
        except sqlite3.Error:
            continue
        if not rows:
            continue
        values = [_sql_literal(r[0]) for r in rows[:max_values]]
        if len(rows) > max_values:
            values.append('...')
        lines.append(f'-- {table.name}.{col.name}: ' + ', '.join(values))
    return lines


# --- catalog introspection ----------------------------------------------------

_SQLITE_INTERNAL = re.compile(r'^sqlite_', re.IGNORECASE)


def load_schema_from_sqlite(db_path: Union[str, Path], name: str) -> SchemaDef:
    """Read a SchemaDef from a database file's catalog.

    Foreign keys whose target table or columns do not exist (benchmarks ship
    such catalogs) are dropped rather than rejected.
    """
    from .relations import open_readonly
    conn = open_readonly(db_path)
    try:
        names = [r[0] for r in conn.execute(
            "SELECT name FROM sqlite_master WHERE type='table' ORDER BY name")]
        names = [n for n in names if not _SQLITE_INTERNAL.match(n)]
        raw_tables = {}
        for tname in names:
            cols = []
            pk_cols = []
            for _, cname, ctype, notnull, dflt, pk in conn.execute(
                    f'PRAGMA table_info({_q(tname)})'):
                cols.append(ColumnDef(cname, ctype or '', bool(notnull),
                                      None if dflt is None else str(dflt)))
                if pk:
                    pk_cols.append((pk, cname))
            pk_cols.sort()
            fks = {}
            for row in conn.execute(f'PRAGMA foreign_key_list({_q(tname)})'):
                fk_id, _, ref_table, from_col, to_col = row[0], row[1], row[2], row[3], row[4]
                fks.setdefault(fk_id, []).append((ref_table, from_col, to_col))
            raw_tables[tname] = (cols, [c for _, c in pk_cols], fks)
    finally:
        conn.close()

    tables = []
    lower_index = {tname.lower(): tname for tname in raw_tables}
    for tname in names:
        cols, pk, fks = raw_tables[tname]
        clean_fks = []
        for parts in fks.values():
            ref_table = lower_index.get(parts[0][0].lower())
            if ref_table is None:
                continue
            ref_cols, ref_pk, _ = raw_tables[ref_table]
            local = tuple(p[1] for p in parts)
            remote = tuple(p[2] if p[2] is not None else ref_pk[i]
                           for i, p in enumerate(parts)
                           if p[2] is not None or i < len(ref_pk))
            if len(remote) != len(local):
                continue
            ref_lowers = {c.name.lower(): c.name for c in ref_cols}
            if not all(r.lower() in ref_lowers for r in remote):
                continue
            remote = tuple(ref_lowers[r.lower()] for r in remote)
            clean_fks.append(ForeignKey(local, ref_table, remote))
        tables.append(TableDef(tname, tuple(cols), tuple(pk), tuple(clean_fks)))
    return SchemaDef(name, tuple(tables))
