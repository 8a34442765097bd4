"""Execution results: typed relations and read-only query execution."""

from __future__ import annotations

import sqlite3
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

CellValue = Union[None, int, float, str, bytes]

NULL_ONLY = 'null-only'
INTEGER = 'integer'
REAL = 'real'
TEXT = 'text'
BLOB = 'blob'
MIXED = 'mixed'

_TYPE_OF = {int: INTEGER, float: REAL, str: TEXT, bytes: BLOB}


def _column_type(cells) -> str:
    seen = {_TYPE_OF[type(c)] for c in cells if c is not None}
    if not seen:
        return NULL_ONLY
    if len(seen) == 1:
        return seen.pop()
    return MIXED


@dataclass(frozen=True)
class Relation:
    column_names: Tuple[str, ...]
    column_types: Tuple[str, ...]
    rows: Tuple[Tuple[CellValue, ...], ...]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.column_names):
                raise ValueError('row arity does not match column count')

    @classmethod
    def from_rows(cls, column_names, rows) -> 'Relation':
        rows = tuple(tuple(r) for r in rows)
        names = tuple(column_names)
        types = tuple(_column_type([r[i] for r in rows]) for i in range(len(names)))
        return cls(names, types, rows)

    @property
    def n_columns(self) -> int:
        return len(self.column_names)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def project(self, indices) -> 'Relation':
        """New relation keeping only the 0-based ``indices``, in that order."""
        names = tuple(self.column_names[i] for i in indices)
        rows = tuple(tuple(row[i] for i in indices) for row in self.rows)
        return Relation.from_rows(names, rows)


@dataclass(frozen=True)
class ExecError:
    kind: str  # 'syntax' | 'timeout' | 'runtime'
    message: str
    timeout_limit: Optional[float] = None


@dataclass(frozen=True)
class ExecResult:
    relation: Optional[Relation] = None
    error: Optional[ExecError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


DEFAULT_TIMEOUT = 30.0


def open_readonly(db_path: Union[str, Path]) -> sqlite3.Connection:
    # as_uri() percent-encodes characters that would break the query string
    uri = Path(db_path).resolve().as_uri() + '?mode=ro'
    return sqlite3.connect(uri, uri=True)


def execute_query(db_instance: Union[str, Path, sqlite3.Connection], sql: str,
                  timeout: float = DEFAULT_TIMEOUT) -> ExecResult:
    """Run ``sql`` read-only against a database file and capture the relation.

    Row order is whatever the engine produced; column names come from the
    cursor.  Engine rejection maps to ExecError('syntax'), interruption after
    the time limit to ExecError('timeout'), anything else to 'runtime'.
    """
    own = not isinstance(db_instance, sqlite3.Connection)
    conn = open_readonly(db_instance) if own else db_instance
    deadline = time.monotonic() + timeout

    def _watchdog():
        return 1 if time.monotonic() > deadline else 0

    conn.set_progress_handler(_watchdog, 2000)
    try:
        cursor = conn.execute(sql)
        rows = cursor.fetchall()
        names = tuple(d[0] for d in cursor.description or ())
        return ExecResult(relation=Relation.from_rows(names, rows))
    except sqlite3.OperationalError as exc:
        message = str(exc)
        if 'interrupt' in message.lower():
            return ExecResult(error=ExecError('timeout', message, timeout))
        return ExecResult(error=ExecError('syntax', message))
    except sqlite3.Error as exc:
        return ExecResult(error=ExecError('runtime', str(exc)))
    finally:
        conn.set_progress_handler(None, 0)
        if own:
            conn.close()


def empty_instance(db_path: Union[str, Path]) -> sqlite3.Connection:
    """In-memory database with the same tables as ``db_path`` but zero rows."""
    source = open_readonly(db_path)
    try:
        ddl = [r[0] for r in source.execute(
            "SELECT sql FROM sqlite_master WHERE type='table' "
            "AND name NOT LIKE 'sqlite_%' AND sql IS NOT NULL ORDER BY name")]
    finally:
        source.close()
    conn = sqlite3.connect(':memory:')
    for stmt in ddl:
        conn.execute(stmt)
    conn.commit()
    return conn
