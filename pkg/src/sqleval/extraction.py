"""SQL extraction from raw model output.

Extraction is exactly the fenced-block regex, no fallback heuristics: bare
SQL without a fence counts as missing so the missing-prediction accounting
stays honest.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Tuple

SQL_BLOCK_RE = re.compile(r'`{3}(?:sql|SQL)([\s\S]+?)`{3}')

POLICY_FIRST_BLOCK = 'first_block'
POLICY_REQUIRE_SINGLE = 'require_single'

STATUS_OK = 'ok'
STATUS_MISSING = 'missing'
STATUS_AMBIGUOUS = 'ambiguous'


@dataclass(frozen=True)
class PredictionRecord:
    sample_id: str
    raw_text: str
    extracted: Tuple[str, ...]
    status: str

    def to_json(self) -> dict:
        return {'sample_id': self.sample_id, 'raw_text': self.raw_text,
                'extracted': list(self.extracted), 'status': self.status}


def extract_sql_blocks(raw: str) -> List[str]:
    """Every fenced block's captured group, in order, whitespace-trimmed."""
    return [m.strip() for m in SQL_BLOCK_RE.findall(raw)]


def extract_prediction(sample_id: str, raw: str,
                       policy: str = POLICY_FIRST_BLOCK) -> PredictionRecord:
    blocks = extract_sql_blocks(raw)
    if not blocks:
        return PredictionRecord(sample_id, raw, (), STATUS_MISSING)
    if policy == POLICY_REQUIRE_SINGLE and len(blocks) > 1:
        return PredictionRecord(sample_id, raw, tuple(blocks), STATUS_AMBIGUOUS)
    if policy == POLICY_FIRST_BLOCK:
        return PredictionRecord(sample_id, raw, (blocks[0],), STATUS_OK)
    if policy == POLICY_REQUIRE_SINGLE:
        return PredictionRecord(sample_id, raw, (blocks[0],), STATUS_OK)
    raise ValueError(f'unknown extraction policy {policy!r}')
