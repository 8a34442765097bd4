"""Verdict persistence (append-only JSON Lines) and cleaned-dataset export."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .dataset import Corpus
from .errors import ValidationError
from .taxonomy import TaxonomyCategory

DECISIONS = ('clean', 'inaccurate_label', 'incomplete_label',
             'inaccurate_feature', 'incomplete_feature')


@dataclass(frozen=True)
class Verdict:
    sample_id: str
    decision: str
    taxonomy: Optional[TaxonomyCategory] = None
    replacement_labels: Tuple[str, ...] = ()
    notes: str = ''
    reviewer: str = 'anonymous'
    timestamp: float = 0.0

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise ValidationError(f'unknown decision {self.decision!r}')
        if self.decision == 'incomplete_label' and not self.replacement_labels:
            raise ValidationError(
                'incomplete_label requires the added label variants')
        if self.decision == 'clean' and self.replacement_labels:
            raise ValidationError('clean verdicts carry no replacement labels')

    def to_json(self) -> dict:
        return {
            'sample_id': self.sample_id,
            'decision': self.decision,
            'taxonomy': self.taxonomy.to_json() if self.taxonomy else None,
            'replacement_labels': list(self.replacement_labels),
            'notes': self.notes,
            'reviewer': self.reviewer,
            'timestamp': self.timestamp,
        }

    @classmethod
    def from_json(cls, data: dict) -> 'Verdict':
        taxonomy = data.get('taxonomy')
        return cls(
            sample_id=data['sample_id'],
            decision=data['decision'],
            taxonomy=TaxonomyCategory.from_json(taxonomy) if taxonomy else None,
            replacement_labels=tuple(data.get('replacement_labels', ())),
            notes=data.get('notes', ''),
            reviewer=data.get('reviewer', 'anonymous'),
            timestamp=data.get('timestamp', 0.0),
        )


class VerdictStore:
    """Append-only verdict log with an in-memory index.

    A restart replays the log, so no verdict is ever lost; writes are
    serialized through one lock and fsynced before acknowledging.
    """

    def __init__(self, log_path: Union[str, Path]):
        self.log_path = Path(log_path)
        self._lock = threading.Lock()
        self._entries: List[Tuple[int, Verdict]] = []
        self._next_id = 1
        if self.log_path.exists():
            for line in self.log_path.read_text().splitlines():
                if not line.strip():
                    continue
                data = json.loads(line)
                verdict = Verdict.from_json(data)
                self._entries.append((data.get('verdict_id', self._next_id), verdict))
                self._next_id = max(self._next_id, self._entries[-1][0] + 1)

    def append(self, verdict: Verdict) -> int:
        if verdict.timestamp == 0.0:
            import dataclasses
            verdict = dataclasses.replace(verdict, timestamp=time.time())
        with self._lock:
            verdict_id = self._next_id
            self._next_id += 1
            record = verdict.to_json()
            record['verdict_id'] = verdict_id
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, 'a') as handle:
                handle.write(json.dumps(record, sort_keys=True) + '\n')
                handle.flush()
                os.fsync(handle.fileno())
            self._entries.append((verdict_id, verdict))
        return verdict_id

    def all(self) -> List[Tuple[int, Verdict]]:
        return list(self._entries)

    def latest_for_sample(self, sample_id: str) -> Optional[Verdict]:
        """Globally latest verdict for the sample (any reviewer)."""
        latest = None
        for _, verdict in self._entries:
            if verdict.sample_id == sample_id:
                latest = verdict
        return latest

    def latest_per_reviewer(self, sample_id: str) -> Dict[str, Verdict]:
        out: Dict[str, Verdict] = {}
        for _, verdict in self._entries:
            if verdict.sample_id == sample_id:
                out[verdict.reviewer] = verdict
        return out

    def reviewed_ids(self) -> set:
        return {v.sample_id for _, v in self._entries}


@dataclass
class ExportResult:
    cleaned_path: Path
    multi_variant_path: Path
    exclusions_path: Path
    conflicts: List[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {'cleaned': str(self.cleaned_path),
                'multi_variant': str(self.multi_variant_path),
                'exclusions': str(self.exclusions_path),
                'conflicts': self.conflicts}


def export_clean(corpus: Corpus, store: VerdictStore,
                 out_dir: Union[str, Path]) -> ExportResult:
    """Write the cleaned single-label dataset, the multi-variant dataset, and
    the exclusion list.  Deterministic: same store state, same bytes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cleaned = []
    multi = []
    exclusions = []
    conflicts = []
    for sample in corpus.samples:
        verdict = store.latest_for_sample(sample.id)
        per_reviewer = store.latest_per_reviewer(sample.id)
        if len({v.decision for v in per_reviewer.values()}) > 1:
            conflicts.append({
                'sample_id': sample.id,
                'decisions': {r: v.decision for r, v in sorted(per_reviewer.items())},
            })
        base = {'id': sample.id, 'question': sample.nl, 'db_id': sample.db_id}
        if verdict and verdict.decision in ('inaccurate_feature', 'incomplete_feature'):
            exclusions.append({'sample_id': sample.id, 'decision': verdict.decision})
            continue
        gt = sample.gt_sql
        variants = list(sample.all_labels())
        if verdict and verdict.decision == 'inaccurate_label':
            if verdict.replacement_labels:
                gt = verdict.replacement_labels[0]
                variants = list(verdict.replacement_labels)
        elif verdict and verdict.decision == 'incomplete_label':
            for label in verdict.replacement_labels:
                if label not in variants:
                    variants.append(label)
        cleaned.append({**base, 'query': gt})
        multi.append({**base, 'query': gt,
                      'variants': [v for v in variants if v != gt]})
    cleaned_path = out_dir / 'cleaned.json'
    multi_path = out_dir / 'multi_variant.json'
    exclusions_path = out_dir / 'exclusions.json'
    cleaned_path.write_text(json.dumps(cleaned, indent=2, sort_keys=True) + '\n')
    multi_path.write_text(json.dumps(multi, indent=2, sort_keys=True) + '\n')
    exclusions_path.write_text(json.dumps(exclusions, indent=2, sort_keys=True) + '\n')
    return ExportResult(cleaned_path, multi_path, exclusions_path, conflicts)
