"""Command-line entry points: evaluate, scan, detect-noise, extract, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dataset import load_dataset
from .errors import SqlEvalError
from .extraction import POLICY_FIRST_BLOCK, extract_prediction
from .harness import load_predictions, run_evaluation, DEFAULT_MATCHERS
from .pipeline import run_noise_detection
from .scanners import corpus_stats, scan_empty_results, scan_topk_template
from .voters import voter_from_config


def _load_config(args) -> dict:
    config = {}
    if getattr(args, 'config', None):
        config = json.loads(Path(args.config).read_text())
    matcher_names = getattr(args, 'matcher', None) or []
    if matcher_names:
        specs = []
        for name in matcher_names:
            if name == 'semantic':
                specs.append({'kind': 'semantic'})
            elif name.startswith('execution:'):
                specs.append({'kind': 'execution', 'preset': name.split(':', 1)[1]})
            elif name == 'execution':
                specs.append({'kind': 'execution',
                              'preset': getattr(args, 'preset', None) or 'spider'})
            else:
                specs.append({'kind': 'execution', 'preset': name})
        config['matchers'] = specs
    elif getattr(args, 'preset', None):
        config['matchers'] = [{'kind': 'semantic'},
                              {'kind': 'execution', 'preset': args.preset}]
    config.setdefault('matchers', list(DEFAULT_MATCHERS))
    return config


def _write_out(args, payload: str) -> None:
    if getattr(args, 'out', None):
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)


def cmd_evaluate(args) -> int:
    corpus = load_dataset(args.dataset, args.schemas, args.db_dir)
    predictions = load_predictions(args.predictions)
    config = _load_config(args)
    report = run_evaluation(corpus, predictions, config)
    _write_out(args, json.dumps(report.to_json(), indent=2) + '\n')
    sys.stderr.write(report.summary_text() + '\n')
    return 0


def cmd_scan(args) -> int:
    corpus = load_dataset(args.dataset, args.schemas, args.db_dir)
    flags = []
    if args.scanner in ('all', 'topk'):
        flags.extend(scan_topk_template(corpus))
    if args.scanner in ('all', 'empty-result') and corpus.db_paths:
        flags.extend(scan_empty_results(corpus))
    lines = [json.dumps(f.to_json(), sort_keys=True) for f in flags]
    _write_out(args, '\n'.join(lines) + ('\n' if lines else ''))
    stats = corpus_stats(corpus, with_empty_scan=bool(corpus.db_paths)
                         if args.scanner == 'all' else False)
    sys.stderr.write(json.dumps(stats.to_json(), indent=2) + '\n')
    return 0


def cmd_detect_noise(args) -> int:
    corpus = load_dataset(args.dataset, args.schemas, args.db_dir)
    config = _load_config(args)
    voter_specs = config.get('voters', [])
    if args.voters:
        voter_specs = json.loads(Path(args.voters).read_text())
    if not voter_specs:
        sys.stderr.write('no voters configured\n')
        return 2
    voters = [voter_from_config(spec) for spec in voter_specs]
    flags, failures = run_noise_detection(corpus, voters, config.get('matchers'))
    lines = [json.dumps(f.to_json(), sort_keys=True) for f in flags]
    _write_out(args, '\n'.join(lines) + ('\n' if lines else ''))
    for failure in failures:
        sys.stderr.write(json.dumps(failure, sort_keys=True) + '\n')
    return 0


def cmd_extract(args) -> int:
    lines_out = []
    for line in Path(args.predictions).read_text().splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        result = extract_prediction(str(record['sample_id']), record['raw_text'],
                                    args.policy)
        lines_out.append(json.dumps(result.to_json(), sort_keys=True))
    _write_out(args, '\n'.join(lines_out) + ('\n' if lines_out else ''))
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    from .service import TriageState, create_app, load_flags
    from .store import VerdictStore
    corpus = load_dataset(args.dataset, args.schemas, args.db_dir)
    flags = load_flags(args.flags) if args.flags else []
    store = VerdictStore(args.store)
    state = TriageState(corpus, flags, store, export_dir=args.export_dir)
    app = create_app(state, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level='warning')
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='sqleval',
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest='command', required=True)

    def add_dataset_args(p):
        p.add_argument('--dataset', required=True, help='samples JSON file')
        p.add_argument('--schemas', default=None, help='tables.json (optional)')
        p.add_argument('--db-dir', default=None, help='database directory')

    p = sub.add_parser('evaluate', help='run matchers over predictions')
    add_dataset_args(p)
    p.add_argument('--predictions', required=True, help='JSONL of {sample_id, raw_text}')
    p.add_argument('--config', default=None, help='JSON config file')
    p.add_argument('--matcher', action='append',
                   help='matcher name (semantic, execution:<preset>); repeatable')
    p.add_argument('--preset', default=None, help='relaxation preset shortcut')
    p.add_argument('--out', default=None, help='report output path')
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser('scan', help='run benchmark-noise scanners')
    add_dataset_args(p)
    p.add_argument('--scanner', default='all', choices=['all', 'topk', 'empty-result'])
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser('detect-noise', help='multi-voter disagreement pipeline')
    add_dataset_args(p)
    p.add_argument('--config', default=None)
    p.add_argument('--voters', default=None, help='JSON list of voter configs')
    p.add_argument('--matcher', action='append')
    p.add_argument('--preset', default=None)
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_detect_noise)

    p = sub.add_parser('extract', help='extract SQL from raw predictions')
    p.add_argument('--predictions', required=True)
    p.add_argument('--policy', default=POLICY_FIRST_BLOCK,
                   choices=['first_block', 'require_single'])
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser('serve', help='triage review service')
    add_dataset_args(p)
    p.add_argument('--flags', default=None, help='NoiseFlag JSONL from a scan')
    p.add_argument('--store', default=os.environ.get('SQLEVAL_STORE', 'verdicts.jsonl'),
                   help='verdict log path (env SQLEVAL_STORE)')
    p.add_argument('--export-dir', default='export')
    p.add_argument('--ui-dir', default=None, help='built UI bundle directory')
    p.add_argument('--host', default='127.0.0.1')
    p.add_argument('--port', type=int,
                   default=int(os.environ.get('SQLEVAL_PORT', '8033')),
                   help='listen port (env SQLEVAL_PORT)')
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SqlEvalError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f'error: {exc}\n')
        return 1


if __name__ == '__main__':
    sys.exit(main())
