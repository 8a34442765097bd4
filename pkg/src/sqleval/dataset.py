"""Benchmark corpus ingestion (Spider-style layout)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from .errors import FormatError, MissingDatabase
from .schema import SchemaDef, load_schema_from_sqlite


@dataclass(frozen=True)
class EvalSample:
    id: str
    db_id: str
    nl: str
    gt_sql: str
    gt_variants: Tuple[str, ...] = ()  # additional accepted labels, if any

    def __post_init__(self):
        if not self.nl:
            raise ValueError('natural language description must be non-empty')

    def all_labels(self) -> Tuple[str, ...]:
        return (self.gt_sql,) + tuple(v for v in self.gt_variants if v != self.gt_sql)


@dataclass
class Corpus:
    samples: list
    schemas: Dict[str, SchemaDef]
    db_paths: Dict[str, Path] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def get(self, sample_id: str) -> Optional[EvalSample]:
        for sample in self.samples:
            if sample.id == sample_id:
                return sample
        return None

    def schema_for(self, sample: EvalSample) -> SchemaDef:
        return self.schemas[sample.db_id]

    def db_path_for(self, sample: EvalSample) -> Optional[Path]:
        return self.db_paths.get(sample.db_id)


def database_file(db_dir: Union[str, Path], db_id: str) -> Path:
    return Path(db_dir) / db_id / f'{db_id}.sqlite'


def load_dataset(samples_path: Union[str, Path],
                 schemas_path: Union[str, Path, None] = None,
                 db_dir: Union[str, Path, None] = None) -> Corpus:
    """Load samples plus one schema per referenced db_id.

    The samples file is a JSON array of objects with ``question``, ``db_id``
    and ``query`` fields (``id`` and ``variants`` are optional; ids default
    to the file-order index).  Schemas are read from the database files'
    catalogs under ``db_dir/{db_id}/{db_id}.sqlite``; a referenced db_id
    without a database file is an error.
    """
    samples_path = Path(samples_path)
    try:
        records = json.loads(samples_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f'{samples_path}: not valid JSON: {exc}') from exc
    if not isinstance(records, list):
        raise FormatError(f'{samples_path}: expected a JSON array of records')

    samples = []
    for index, record in enumerate(records):
        for key in ('question', 'db_id', 'query'):
            if key not in record:
                raise FormatError(
                    f'{samples_path}: record {index} is missing field {key!r}')
        sample_id = str(record.get('id', index))
        variants = tuple(record.get('variants', ()))
        samples.append(EvalSample(sample_id, record['db_id'], record['question'],
                                  record['query'], variants))

    schemas: Dict[str, SchemaDef] = {}
    db_paths: Dict[str, Path] = {}
    if db_dir is not None:
        for sample in samples:
            if sample.db_id in schemas:
                continue
            path = database_file(db_dir, sample.db_id)
            if not path.exists():
                raise MissingDatabase(sample.db_id)
            schemas[sample.db_id] = load_schema_from_sqlite(path, sample.db_id)
            db_paths[sample.db_id] = path
    elif schemas_path is not None:
        schemas = load_schemas_json(schemas_path)
        missing = sorted({s.db_id for s in samples} - set(schemas))
        if missing:
            raise MissingDatabase(missing[0])
    return Corpus(samples, schemas, db_paths)


def load_schemas_json(schemas_path: Union[str, Path]) -> Dict[str, SchemaDef]:
    """Parse a Spider ``tables.json`` into SchemaDefs (no database needed)."""
    from .schema import ColumnDef, ForeignKey, TableDef

    data = json.loads(Path(schemas_path).read_text())
    schemas: Dict[str, SchemaDef] = {}
    for entry in data:
        db_id = entry['db_id']
        table_names = entry.get('table_names_original') or entry['table_names']
        column_names = entry.get('column_names_original') or entry['column_names']
        column_types = entry.get('column_types', [])
        primary = set(entry.get('primary_keys', []))
        columns_by_table: Dict[int, list] = {i: [] for i in range(len(table_names))}
        col_location = {}
        for col_idx, (tbl_idx, col_name) in enumerate(column_names):
            if tbl_idx < 0:
                continue
            ctype = column_types[col_idx] if col_idx < len(column_types) else ''
            columns_by_table[tbl_idx].append((col_idx, ColumnDef(col_name, ctype or '')))
            col_location[col_idx] = (tbl_idx, col_name)
        fks_by_table: Dict[int, list] = {i: [] for i in range(len(table_names))}
        for pair in entry.get('foreign_keys', []):
            local_idx, ref_idx = pair
            if local_idx not in col_location or ref_idx not in col_location:
                continue
            local_tbl, local_col = col_location[local_idx]
            ref_tbl, ref_col = col_location[ref_idx]
            fks_by_table[local_tbl].append(
                ForeignKey((local_col,), table_names[ref_tbl], (ref_col,)))
        tables = []
        for tbl_idx, name in enumerate(table_names):
            cols = [c for _, c in columns_by_table[tbl_idx]]
            pk = tuple(c.name for idx, c in columns_by_table[tbl_idx] if idx in primary)
            tables.append(TableDef(name, tuple(cols), pk,
                                   tuple(fks_by_table[tbl_idx])))
        schemas[db_id] = SchemaDef(db_id, tuple(tables))
    return schemas
