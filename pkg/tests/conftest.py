"""Shared fixtures: the people schema, bundled instances, and query fixtures."""

from __future__ import annotations

import sqlite3
from pathlib import Path

import pytest

from sqleval.schema import ColumnDef, SchemaDef, TableDef

PERSON_DDL = '''
CREATE TABLE "Person" (
  "id"        INTEGER,
  "firstname" VARCHAR(100) NOT NULL,
  "lastname"  VARCHAR(100) NOT NULL,
  "age"       INT,
  "active"    CHAR(1) NOT NULL DEFAULT "T",
  PRIMARY KEY("id") )
'''

# Three people, two sharing the maximum age; one age is unknown.
TIE_ROWS = [(1, 'Ann', 'Lee', 30, 'T'), (2, 'Bob', 'Roe', 30, 'F'),
            (3, 'Cal', 'Poe', None, 'S')]
# Same people with a unique oldest person.
UNIQUE_MAX_ROWS = [(1, 'Ann', 'Lee', 30, 'T'), (2, 'Bob', 'Roe', 25, 'F'),
                   (3, 'Cal', 'Poe', None, 'S')]

# The bundled query fixtures: several plausible readings per question.
SQL_NAMES_BOTH = 'SELECT firstname, lastname FROM Person;'
SQL_NAMES_FIRST = 'SELECT firstname FROM Person;'
SQL_NAMES_CONCAT = 'SELECT firstname || " " || lastname FROM Person;'
SQL_INACTIVE_NEQ_T = "SELECT firstname FROM Person WHERE active != 'T';"
SQL_INACTIVE_EQ_F = "SELECT firstname FROM Person WHERE active = 'F';"
SQL_INACTIVE_NEQ_Y = "SELECT firstname FROM Person WHERE active != 'Y';"
SQL_INACTIVE_EQ_N = "SELECT firstname FROM Person WHERE active = 'N';"
SQL_OLDEST_SUBQUERY = ('SELECT firstname FROM Person '
                       'WHERE age in (SELECT MAX(age) FROM Person);')
SQL_OLDEST_LIMIT = 'SELECT firstname FROM Person ORDER BY age DESC LIMIT 1;'
SQL_OLDEST_WITH_AGE = ('SELECT firstname, age FROM Person '
                       'WHERE age in (SELECT MAX(age) FROM Person);')
SQL_AGES_DISTINCT = 'SELECT DISTINCT age from Person;'
SQL_AGES_DISTINCT_NOTNULL = 'SELECT DISTINCT age from Person WHERE age IS NOT NULL;'
SQL_AGES_ALL = 'SELECT age FROM Person;'
SQL_AGES_NOTNULL = 'SELECT age FROM Person WHERE age IS NOT NULL;'
SQL_AGES_GROUPED = 'SELECT age, COUNT(*) FROM Person GROUP BY age;'
SQL_AGES_GROUPED_NOTNULL = ('SELECT age, COUNT(*) FROM Person '
                            'WHERE age IS NOT NULL GROUP BY age;')

ALL_FIXTURE_QUERIES = [
    SQL_NAMES_BOTH, SQL_NAMES_FIRST, SQL_NAMES_CONCAT,
    SQL_INACTIVE_NEQ_T, SQL_INACTIVE_EQ_F, SQL_INACTIVE_NEQ_Y, SQL_INACTIVE_EQ_N,
    SQL_OLDEST_SUBQUERY, SQL_OLDEST_LIMIT, SQL_OLDEST_WITH_AGE,
    SQL_AGES_DISTINCT, SQL_AGES_DISTINCT_NOTNULL, SQL_AGES_ALL, SQL_AGES_NOTNULL,
    SQL_AGES_GROUPED, SQL_AGES_GROUPED_NOTNULL,
]


def person_schema() -> SchemaDef:
    return SchemaDef('person_db', (TableDef('Person', (
        ColumnDef('id', 'INTEGER'),
        ColumnDef('firstname', 'VARCHAR(100)', not_null=True),
        ColumnDef('lastname', 'VARCHAR(100)', not_null=True),
        ColumnDef('age', 'INT'),
        ColumnDef('active', 'CHAR(1)', not_null=True, default='"T"'),
    ), primary_key=('id',)),))


def make_person_db(path: Path, rows) -> Path:
    conn = sqlite3.connect(path)
    conn.execute(PERSON_DDL)
    conn.executemany('INSERT INTO Person VALUES (?,?,?,?,?)', rows)
    conn.commit()
    conn.close()
    return path


@pytest.fixture(scope='session')
def people_schema():
    return person_schema()


@pytest.fixture(scope='session')
def tie_db(tmp_path_factory):
    path = tmp_path_factory.mktemp('dbs') / 'person_tie.sqlite'
    return make_person_db(path, TIE_ROWS)


@pytest.fixture(scope='session')
def unique_max_db(tmp_path_factory):
    path = tmp_path_factory.mktemp('dbs') / 'person_unique.sqlite'
    return make_person_db(path, UNIQUE_MAX_ROWS)


def make_spider_layout(root: Path, rows=TIE_ROWS) -> Path:
    """db_dir/{db_id}/{db_id}.sqlite layout for the person database."""
    db_dir = root / 'database'
    (db_dir / 'person_db').mkdir(parents=True, exist_ok=True)
    make_person_db(db_dir / 'person_db' / 'person_db.sqlite', rows)
    return db_dir


@pytest.fixture()
def spider_layout(tmp_path):
    return make_spider_layout(tmp_path)
