"""Voter clients and variant collection for the noise-detection pipeline.

Several models act as independent voters: each is prompted for up to three
plausible SQL readings of a sample, and the variants are aggregated
downstream.  A file-backed replay voter keeps the pipeline deterministic in
tests and offline runs.
"""

from __future__ import annotations

import hashlib
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .dataset import EvalSample
from .errors import AllVotersFailed, PreconditionError
from .extraction import extract_sql_blocks

MAX_VARIANTS_PER_VOTER = 3
MAX_CONCURRENT_CALLS = 4

PROMPT_TEMPLATE = '''You are an expert in writing SQL statements and assessing how complex or ambiguous they are. By ambiguity I mean one of three things:

  1) The natural language statements may contain words that do not make it clear to which table or column the statement refers to
  2) The natural language statement may contain words that do not make it clear to which value the statement refers to
  3) The natural language statement does clarify if the operation should return a set of unique items or a collection where duplicates are allowed

For the the statement "{NL_DESCRIPTION}" for schema: "{SERIALIZED_SCHEMA}"
Can you propose up at most three possible SQL statements that capture the ambiguity in the statement if present? You can generate less than three if there is little or no ambiguity.
'''

_PLACEHOLDER_RE = re.compile(r'\{NL_DESCRIPTION\}|\{SERIALIZED_SCHEMA\}')


def build_voter_prompt(sample: EvalSample, schema_text: str) -> str:
    """Template with both placeholders substituted in a single pass, so brace
    sequences inside the inputs are never re-expanded."""
    if not sample.nl:
        raise PreconditionError('sample NL description must be non-empty')
    if not schema_text:
        raise PreconditionError('schema text must be non-empty')
    values = {'{NL_DESCRIPTION}': sample.nl, '{SERIALIZED_SCHEMA}': schema_text}
    return _PLACEHOLDER_RE.sub(lambda m: values[m.group()], PROMPT_TEMPLATE)


@dataclass(frozen=True)
class VariantSet:
    voter_id: str
    variants: Tuple[str, ...]

    def __post_init__(self):
        deduped = []
        for v in self.variants:
            if v not in deduped:
                deduped.append(v)
        if tuple(deduped[:MAX_VARIANTS_PER_VOTER]) != self.variants:
            object.__setattr__(self, 'variants',
                               tuple(deduped[:MAX_VARIANTS_PER_VOTER]))

    def to_json(self) -> dict:
        return {'voter_id': self.voter_id, 'variants': list(self.variants)}


class HttpVoter:
    """Chat-completions voter over HTTP.

    ``auth_env`` names the environment variable holding the bearer token;
    the endpoint is expected to accept an OpenAI-style request body.
    """

    def __init__(self, name: str, endpoint: str, model: str,
                 auth_env: Optional[str] = None):
        self.name = name
        self.endpoint = endpoint
        self.model = model
        self.auth_env = auth_env

    def generate(self, prompt: str, timeout: float) -> str:
        import httpx
        headers = {}
        if self.auth_env:
            token = os.environ.get(self.auth_env, '')
            if token:
                headers['Authorization'] = f'Bearer {token}'
        response = httpx.post(self.endpoint, json={
            'model': self.model,
            'messages': [{'role': 'user', 'content': prompt}],
        }, headers=headers, timeout=timeout)
        response.raise_for_status()
        data = response.json()
        return data['choices'][0]['message']['content']


def _prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode()).hexdigest()[:16]


class ReplayVoter:
    """Replays canned responses from a transcript directory.

    Each transcript file is named ``<sha256(prompt)[:16]>.txt`` and holds the
    raw response text; a missing transcript is a voter failure.
    """

    def __init__(self, name: str, transcript_dir):
        self.name = name
        self.transcript_dir = Path(transcript_dir)

    def generate(self, prompt: str, timeout: float) -> str:
        path = self.transcript_dir / f'{_prompt_key(prompt)}.txt'
        if not path.exists():
            raise FileNotFoundError(f'no transcript for prompt (expected {path.name})')
        return path.read_text()

    def record(self, prompt: str, response: str) -> Path:
        """Store a transcript for ``prompt`` (fixture-building helper)."""
        self.transcript_dir.mkdir(parents=True, exist_ok=True)
        path = self.transcript_dir / f'{_prompt_key(prompt)}.txt'
        path.write_text(response)
        return path


def voter_from_config(spec: dict):
    if 'transcript_dir' in spec:
        return ReplayVoter(spec['name'], spec['transcript_dir'])
    return HttpVoter(spec['name'], spec['endpoint'], spec['model'],
                     spec.get('auth_env'))


def collect_variants(sample: EvalSample, schema_text: str, voters: Sequence,
                     per_call_timeout: float = 60.0
                     ) -> Tuple[List[VariantSet], List[dict]]:
    """One VariantSet per responsive voter, failures recorded alongside.

    Raises AllVotersFailed when no voter produced a response.
    """
    if not voters:
        raise PreconditionError('at least one voter must be configured')
    prompt = build_voter_prompt(sample, schema_text)
    results: List[Optional[str]] = [None] * len(voters)
    failures: List[dict] = []

    def call(index: int):
        return voters[index].generate(prompt, per_call_timeout)

    with ThreadPoolExecutor(max_workers=MAX_CONCURRENT_CALLS) as pool:
        futures = {i: pool.submit(call, i) for i in range(len(voters))}
        for i, future in futures.items():
            try:
                results[i] = future.result()
            except Exception as exc:
                failures.append({'voter': voters[i].name, 'error': str(exc)})

    variant_sets = []
    for voter, raw in zip(voters, results):
        if raw is None:
            continue
        blocks = extract_sql_blocks(raw)
        variant_sets.append(VariantSet(voter.name, tuple(blocks)))
    if not variant_sets:
        raise AllVotersFailed(
            f'all {len(voters)} voters failed for sample {sample.id}')
    return variant_sets, failures
