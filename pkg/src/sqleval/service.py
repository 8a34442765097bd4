"""HTTP API for human review of noise flags: list, inspect, adjudicate, export.

State is a flags file plus the corpus and the append-only verdict log; request
handling is otherwise stateless, so concurrent reads are safe and writes are
serialized by the store.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Optional

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .dataset import Corpus
from .errors import ValidationError
from .relations import Relation, execute_query
from .scanners import DETECTORS, NoiseFlag
from .schema import serialize_schema
from .store import Verdict, VerdictStore, export_clean
from .taxonomy import TAXONOMY_ROWS, TaxonomyCategory

RESULT_ROW_LIMIT = 50
ADHOC_TIMEOUT = 10.0


def load_flags(path) -> List[NoiseFlag]:
    flags = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            flags.append(NoiseFlag.from_json(json.loads(line)))
    return flags


def _relation_json(relation: Relation, limit: int = RESULT_ROW_LIMIT) -> dict:
    return {
        'columns': list(relation.column_names),
        'column_types': list(relation.column_types),
        'rows': [[c.hex() if isinstance(c, bytes) else c for c in row]
                 for row in relation.rows[:limit]],
        'total_rows': relation.n_rows,
        'truncated': relation.n_rows > limit,
    }


def _execution_json(db_path, sql: str, timeout: float = ADHOC_TIMEOUT) -> dict:
    if db_path is None:
        return {'error': {'kind': 'runtime', 'message': 'no database instance'}}
    result = execute_query(db_path, sql, timeout)
    if result.ok:
        return {'result': _relation_json(result.relation)}
    return {'error': {'kind': result.error.kind, 'message': result.error.message}}


class TriageState:
    def __init__(self, corpus: Corpus, flags: List[NoiseFlag], store: VerdictStore,
                 export_dir=None):
        self.corpus = corpus
        self.flags = flags
        self.store = store
        self.export_dir = Path(export_dir) if export_dir else Path('export')
        self.flags_by_sample = {}
        for flag in flags:
            self.flags_by_sample.setdefault(flag.sample_id, []).append(flag)


def create_app(state: TriageState, ui_dir=None) -> FastAPI:
    app = FastAPI(title='sqleval triage')

    @app.exception_handler(ValidationError)
    async def validation_handler(request: Request, exc: ValidationError):
        return JSONResponse(status_code=422, content={'detail': str(exc)})

    @app.get('/api/flags')
    def list_flags(detector: Optional[str] = None, taxonomy: Optional[str] = None,
                   reviewed: Optional[bool] = None, page: int = 1,
                   page_size: int = 50):
        if detector is not None and detector not in DETECTORS:
            raise HTTPException(400, f'unknown detector {detector!r}')
        if taxonomy is not None and not any(
                taxonomy in (row[0], row[1], row[2]) for row in TAXONOMY_ROWS):
            raise HTTPException(400, f'unknown taxonomy filter {taxonomy!r}')
        if page < 1 or page_size < 1:
            raise HTTPException(400, 'page and page_size must be positive')
        reviewed_ids = state.store.reviewed_ids()
        rows = []
        for flag in sorted(state.flags, key=lambda f: f.sample_id):
            if detector is not None and flag.detector != detector:
                continue
            if taxonomy is not None and taxonomy not in (
                    flag.taxonomy_hint.level1, flag.taxonomy_hint.level2,
                    flag.taxonomy_hint.level3):
                continue
            is_reviewed = flag.sample_id in reviewed_ids
            if reviewed is not None and is_reviewed != reviewed:
                continue
            sample = state.corpus.get(flag.sample_id)
            verdict = state.store.latest_for_sample(flag.sample_id)
            rows.append({
                'flag': flag.to_json(),
                'reviewed': is_reviewed,
                'verdict': verdict.to_json() if verdict else None,
                'nl_preview': sample.nl.splitlines()[0] if sample else '',
            })
        total = len(rows)
        start = (page - 1) * page_size
        return {'items': rows[start:start + page_size], 'total': total,
                'page': page, 'page_size': page_size}

    @app.get('/api/samples/{sample_id}')
    def get_sample_detail(sample_id: str):
        sample = state.corpus.get(sample_id)
        if sample is None:
            raise HTTPException(404, f'unknown sample {sample_id!r}')
        schema = state.corpus.schemas.get(sample.db_id)
        db_path = state.corpus.db_path_for(sample)
        flags = state.flags_by_sample.get(sample_id, [])
        variants = []
        seen = set()
        for flag in flags:
            for row in flag.evidence.get('match_matrix', []):
                if row['variant'] in seen:
                    continue
                seen.add(row['variant'])
                variants.append({
                    'sql': row['variant'],
                    'outcomes': row['outcomes'],
                    'execution': _execution_json(db_path, row['variant']),
                })
        return {
            'sample_id': sample.id,
            'db_id': sample.db_id,
            'nl': sample.nl,
            'schema_text': serialize_schema(schema) if schema else '',
            'gt_sql': sample.gt_sql,
            'gt_variants': list(sample.gt_variants),
            'gt_execution': _execution_json(db_path, sample.gt_sql),
            'variants': variants,
            'flags': [f.to_json() for f in flags],
            'verdicts': [v.to_json() for _, v in state.store.all()
                         if v.sample_id == sample_id],
        }

    @app.post('/api/samples/{sample_id}/verdicts')
    def post_verdict(sample_id: str, body: dict,
                     x_reviewer: Optional[str] = Header(default=None)):
        if state.corpus.get(sample_id) is None:
            raise HTTPException(404, f'unknown sample {sample_id!r}')
        taxonomy = body.get('taxonomy')
        try:
            verdict = Verdict(
                sample_id=sample_id,
                decision=body.get('decision', ''),
                taxonomy=TaxonomyCategory.from_json(taxonomy) if taxonomy else None,
                replacement_labels=tuple(body.get('replacement_labels', ())),
                notes=body.get('notes', ''),
                reviewer=body.get('reviewer') or x_reviewer or 'anonymous',
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        verdict_id = state.store.append(verdict)
        return {'verdict_id': verdict_id, 'verdict': verdict.to_json()}

    @app.post('/api/samples/{sample_id}/query')
    def run_adhoc_query(sample_id: str, body: dict):
        sample = state.corpus.get(sample_id)
        if sample is None:
            raise HTTPException(404, f'unknown sample {sample_id!r}')
        sql = body.get('sql', '')
        if not sql.strip():
            raise HTTPException(400, 'sql must be non-empty')
        return _execution_json(state.corpus.db_path_for(sample), sql)

    @app.post('/api/export')
    def run_export(body: Optional[dict] = None):
        out_dir = (body or {}).get('out_dir') or state.export_dir
        result = export_clean(state.corpus, state.store, out_dir)
        return result.to_json()

    @app.get('/api/schemas.json')
    def published_schemas():
        return RESPONSE_SCHEMAS

    if ui_dir and Path(ui_dir).is_dir():
        app.mount('/', StaticFiles(directory=str(ui_dir), html=True), name='ui')
    return app


# JSON schemas for the response envelopes downstream tooling relies on.
RESPONSE_SCHEMAS = {
    'flag_list': {
        'type': 'object',
        'required': ['items', 'total', 'page', 'page_size'],
        'properties': {
            'items': {'type': 'array', 'items': {
                'type': 'object',
                'required': ['flag', 'reviewed', 'verdict', 'nl_preview'],
                'properties': {
                    'flag': {'type': 'object',
                             'required': ['sample_id', 'detector',
                                          'taxonomy_hint', 'evidence']},
                    'reviewed': {'type': 'boolean'},
                    'verdict': {'type': ['object', 'null']},
                    'nl_preview': {'type': 'string'},
                },
            }},
            'total': {'type': 'integer'},
            'page': {'type': 'integer'},
            'page_size': {'type': 'integer'},
        },
    },
    'sample_detail': {
        'type': 'object',
        'required': ['sample_id', 'db_id', 'nl', 'schema_text', 'gt_sql',
                     'gt_execution', 'variants', 'flags', 'verdicts'],
        'properties': {
            'sample_id': {'type': 'string'},
            'db_id': {'type': 'string'},
            'nl': {'type': 'string'},
            'schema_text': {'type': 'string'},
            'gt_sql': {'type': 'string'},
            'gt_execution': {'type': 'object'},
            'variants': {'type': 'array'},
            'flags': {'type': 'array'},
            'verdicts': {'type': 'array'},
        },
    },
    'verdict_ack': {
        'type': 'object',
        'required': ['verdict_id', 'verdict'],
        'properties': {'verdict_id': {'type': 'integer'},
                       'verdict': {'type': 'object'}},
    },
    'export_result': {
        'type': 'object',
        'required': ['cleaned', 'multi_variant', 'exclusions', 'conflicts'],
    },
}
