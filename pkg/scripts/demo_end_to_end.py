"""Offline end-to-end demo: builds a tiny corpus, runs every stage, exports.

Creates a working directory with the bundled example database, replay-voter
transcripts, and constructed predictions, then runs extraction, evaluation
under several relaxation profiles, the noise scanners, the voting pipeline,
and a verdict + export round trip.  No network, fully deterministic.

Usage:
    python scripts/demo_end_to_end.py [workdir]
"""

from __future__ import annotations

import json
import sqlite3
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / 'src'))

from sqleval.dataset import load_dataset
from sqleval.harness import run_evaluation
from sqleval.pipeline import run_noise_detection
from sqleval.scanners import corpus_stats, scan_empty_results, scan_topk_template
from sqleval.schema import serialize_schema
from sqleval.store import Verdict, VerdictStore, export_clean
from sqleval.voters import ReplayVoter, build_voter_prompt

PERSON_DDL = '''CREATE TABLE "Person" (
  "id"        INTEGER,
  "firstname" VARCHAR(100) NOT NULL,
  "lastname"  VARCHAR(100) NOT NULL,
  "age"       INT,
  "active"    CHAR(1) NOT NULL DEFAULT "T",
  PRIMARY KEY("id") )'''

ROWS = [(1, 'Ann', 'Lee', 30, 'T'), (2, 'Bob', 'Roe', 30, 'F'),
        (3, 'Cal', 'Poe', None, 'S')]

SAMPLES = [
    {'question': 'List the names of all the people', 'db_id': 'person_db',
     'query': 'SELECT firstname, lastname FROM Person;',
     'variants': ['SELECT firstname FROM Person;']},
    {'question': 'Get me the first names of inactive people', 'db_id': 'person_db',
     'query': "SELECT firstname FROM Person WHERE active != 'T';"},
    {'question': 'What is the first name of the oldest person?', 'db_id': 'person_db',
     'query': 'SELECT firstname FROM Person ORDER BY age DESC LIMIT 1;'},
    {'question': 'Names of people on suspension hold', 'db_id': 'person_db',
     'query': "SELECT firstname FROM Person WHERE active = 'H';"},
]

PREDICTIONS = {
    '0': '```sql\nSELECT firstname FROM Person;\n```',
    '1': "```sql\nSELECT firstname FROM Person WHERE active = 'F'\n```",
    '2': '```sql\nSELECT firstname FROM Person WHERE id = 2\n```',
    '3': 'I could not find a matching column.',
}

VOTER_BLOCKS = {
    '0': ['SELECT firstname, lastname FROM Person',
          'SELECT firstname FROM Person'],
    '1': ["SELECT firstname FROM Person WHERE active != 'T'",
          "SELECT firstname FROM Person WHERE active = 'F'"],
    '2': ['SELECT firstname FROM Person ORDER BY age DESC LIMIT 1'],
    '3': ["SELECT firstname FROM Person WHERE active = 'S'"],
}


def main() -> int:
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path('demo_workdir')
    db_dir = workdir / 'database' / 'person_db'
    db_dir.mkdir(parents=True, exist_ok=True)
    db_path = db_dir / 'person_db.sqlite'
    if db_path.exists():
        db_path.unlink()
    conn = sqlite3.connect(db_path)
    conn.execute(PERSON_DDL)
    conn.executemany('INSERT INTO Person VALUES (?,?,?,?,?)', ROWS)
    conn.commit()
    conn.close()

    samples_path = workdir / 'samples.json'
    samples_path.write_text(json.dumps(SAMPLES, indent=2))
    corpus = load_dataset(samples_path, db_dir=workdir / 'database')

    print('== corpus stats ==')
    print(json.dumps(corpus_stats(corpus).to_json(), indent=2))

    print('== scanners ==')
    for flag in scan_topk_template(corpus) + scan_empty_results(corpus):
        print(f'{flag.detector}: sample {flag.sample_id} ({flag.taxonomy_hint})')

    print('== evaluation ==')
    config = {'matchers': [{'kind': 'semantic'},
                           {'kind': 'execution', 'preset': 'spider'},
                           {'kind': 'execution', 'preset': 'bird'},
                           {'kind': 'execution', 'preset': 'strict'}],
              'multi_variant': True}
    report = run_evaluation(corpus, PREDICTIONS, config)
    print(report.summary_text())

    print('== voting pipeline (replay voters) ==')
    voters = [ReplayVoter(f'voter-{i}', workdir / f'transcripts-{i}')
              for i in range(3)]
    for sample in corpus:
        prompt = build_voter_prompt(
            sample, serialize_schema(corpus.schemas[sample.db_id]))
        response = '\n'.join(f'```sql\n{b}\n```'
                             for b in VOTER_BLOCKS[sample.id])
        for voter in voters:
            voter.record(prompt, response)
    flags, failures = run_noise_detection(corpus, voters)
    for flag in flags:
        print(f'voting_disagreement: sample {flag.sample_id}')
    print(f'failures: {len(failures)}')

    print('== triage verdict + export ==')
    store = VerdictStore(workdir / 'verdicts.jsonl')
    store.append(Verdict('3', 'inaccurate_label',
                         replacement_labels=("SELECT firstname FROM Person "
                                             "WHERE active = 'S';",),
                         notes='status code H does not exist; S is the hold flag',
                         reviewer='demo'))
    result = export_clean(corpus, store, workdir / 'export')
    print(f'cleaned dataset: {result.cleaned_path}')
    print(f'multi-variant dataset: {result.multi_variant_path}')
    print(f'exclusions: {result.exclusions_path}')
    return 0


if __name__ == '__main__':
    sys.exit(main())
