// Full round trip against the real service: filter the queue, open the
// all-false detail, submit an incomplete_label verdict with two variants,
// export, and confirm the verdict survives a service restart.  Skipped when
// the Python package is not importable.

import { ChildProcess, execFileSync, spawn } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { TriageApi } from '../src/api.js';
import { App, View } from '../src/app.js';

const PYTHON = process.env.PYTHON ?? 'python3';
const PORT = 8200 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

const VARIANT_A = 'SELECT DISTINCT LOCATION FROM paintings WHERE YEAR < 1885 '
  + 'UNION SELECT DISTINCT LOCATION FROM paintings WHERE YEAR > 1930';
const VARIANT_B = 'SELECT LOCATION FROM paintings WHERE YEAR < 1885 OR YEAR > 1930';

function pythonAvailable(): boolean {
  try {
    execFileSync(PYTHON, ['-c', 'import sqleval'], { stdio: 'ignore' });
    return true;
  } catch {
    return false;
  }
}

const SEED_SCRIPT = `
import json, sqlite3, sys
from pathlib import Path
root = Path(sys.argv[1])
db_dir = root / 'database' / 'art_db'
db_dir.mkdir(parents=True)
conn = sqlite3.connect(db_dir / 'art_db.sqlite')
conn.execute('CREATE TABLE paintings (title TEXT, LOCATION TEXT, YEAR INT)')
conn.executemany('INSERT INTO paintings VALUES (?,?,?)',
                 [('Old', 'Gallery 1', 1880), ('New', 'Gallery 2', 1950)])
conn.commit(); conn.close()
gt = ('SELECT DISTINCT LOCATION FROM paintings WHERE YEAR < 1885 '
      'INTERSECT SELECT DISTINCT LOCATION FROM paintings WHERE YEAR > 1930')
(root / 'samples.json').write_text(json.dumps([
    {'id': 'art_1', 'question': 'What are the locations that have works '
     'painted before 1885 and after 1930?', 'db_id': 'art_db', 'query': gt},
]))
flag = {'sample_id': 'art_1', 'detector': 'voting_disagreement',
        'taxonomy_hint': {'level1': 'EvaluationData', 'level2': 'LabelAccuracy',
                          'level3': None},
        'evidence': {'match_matrix': [
            {'variant': ${JSON.stringify(VARIANT_A)},
             'outcomes': {'semantic': False, 'execution:spider': False}},
        ]}}
(root / 'flags.jsonl').write_text(json.dumps(flag) + '\\n')
print('seeded')
`;

class Recorder implements View {
  queueHtml = '';
  detailHtml = '';
  queryHtml = '';
  errors: string[] = [];
  problems: string[] = [];
  showQueue(html: string) { this.queueHtml = html; }
  showDetail(html: string) { this.detailHtml = html; }
  showQueryResult(html: string) { this.queryHtml = html; }
  showError(message: string) { this.errors.push(message); }
  showFormProblems(problems: string[]) { this.problems = problems; }
  clearError() {}
}

let workdir: string;
let server: ChildProcess | null = null;
const available = pythonAvailable();

function startServer(port: number): ChildProcess {
  return spawn(PYTHON, [
    '-m', 'sqleval.cli', 'serve',
    '--dataset', join(workdir, 'samples.json'),
    '--db-dir', join(workdir, 'database'),
    '--flags', join(workdir, 'flags.jsonl'),
    '--store', join(workdir, 'verdicts.jsonl'),
    '--export-dir', join(workdir, 'export'),
    '--port', String(port),
  ], { stdio: 'ignore' });
}

async function waitReady(base: string): Promise<void> {
  for (let attempt = 0; attempt < 60; attempt++) {
    try {
      const response = await fetch(`${base}/api/flags`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error('service did not come up');
}

function stop(child: ChildProcess | null): Promise<void> {
  return new Promise((resolve) => {
    if (!child || child.exitCode !== null) return resolve();
    child.once('exit', () => resolve());
    child.kill('SIGTERM');
    setTimeout(() => { child.kill('SIGKILL'); resolve(); }, 2000);
  });
}

beforeAll(async () => {
  if (!available) return;
  workdir = mkdtempSync(join(tmpdir(), 'triage-roundtrip-'));
  execFileSync(PYTHON, ['-c', SEED_SCRIPT, workdir]);
  server = startServer(PORT);
  await waitReady(BASE);
}, 30_000);

afterAll(async () => {
  await stop(server);
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe.skipIf(!available)('triage round trip against the live service', () => {
  it('filter, inspect, adjudicate, export, restart', async () => {
    const view = new Recorder();
    const app = new App(new TriageApi(BASE), view);

    // filter the queue down to the voting flag
    await app.loadQueue({ detector: 'voting_disagreement', reviewed: false });
    expect(view.queueHtml).toContain('art_1');
    expect(app.state.items.length).toBe(1);

    // open the detail: ground truth executes to zero rows, the variant to
    // two, and the rendered match matrix is all-false
    await app.onKey('Enter');
    expect(app.state.openId).toBe('art_1');
    expect(view.detailHtml).toContain('INTERSECT');
    expect(view.detailHtml).toContain('match-fail');
    expect(view.detailHtml).not.toContain('match-pass');
    expect(view.detailHtml).toContain('0 rows');
    expect(view.detailHtml).toContain('Gallery 1');

    // the read-only workbench goes through the service
    await app.runQuery('SELECT count(*) FROM paintings');
    expect(view.queryHtml).toContain('<td>2</td>');

    // submit a verdict adding two label variants
    const ok = await app.submitVerdict({
      decision: 'incomplete_label',
      replacement_labels: [VARIANT_A, VARIANT_B],
      notes: 'no painting predates 1885 and postdates 1930; union reading',
      reviewer: 'alice',
    });
    expect(ok).toBe(true);
    expect(app.state.items[0]!.reviewed).toBe(true);

    // export now carries both added variants
    const api = new TriageApi(BASE);
    await api.exportDatasets();
    const multi = JSON.parse(
      readFileSync(join(workdir, 'export', 'multi_variant.json'), 'utf-8'));
    const art = multi.find((r: { id: string }) => r.id === 'art_1');
    expect(art.variants).toContain(VARIANT_A);
    expect(art.variants).toContain(VARIANT_B);

    // restart the service on the same store: the verdict survives
    await stop(server);
    server = startServer(PORT + 1);
    await waitReady(`http://127.0.0.1:${PORT + 1}`);
    const reopened = new TriageApi(`http://127.0.0.1:${PORT + 1}`);
    const detail = await reopened.sampleDetail('art_1');
    expect(detail.verdicts.length).toBe(1);
    expect(detail.verdicts[0]!.decision).toBe('incomplete_label');
    expect(detail.verdicts[0]!.replacement_labels).toEqual([VARIANT_A, VARIANT_B]);
    const reviewed = await reopened.listFlags({ reviewed: true });
    expect(reviewed.total).toBe(1);
  }, 60_000);
});
