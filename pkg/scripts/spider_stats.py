"""Corpus statistics and the empty-result scan over a Spider-layout dataset.

Usage:
    python scripts/spider_stats.py --samples test.json --db-dir test_database

Prints the per-corpus counters (ORDER BY without LIMIT, distinct vs
non-distinct query texts, top-k template matches) and, when databases are
available, the number of samples whose ground truth result equals the result
on an empty instance.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / 'src'))

from sqleval.dataset import load_dataset
from sqleval.scanners import corpus_stats, scan_empty_results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument('--samples', required=True)
    parser.add_argument('--db-dir', default=None)
    parser.add_argument('--schemas', default=None)
    parser.add_argument('--flags-out', default=None,
                        help='write empty-result flags as JSONL')
    args = parser.parse_args()

    corpus = load_dataset(args.samples, args.schemas, args.db_dir)
    stats = corpus_stats(corpus)
    print(json.dumps(stats.to_json(), indent=2))

    if corpus.db_paths:
        flags = scan_empty_results(corpus)
        empty = [f for f in flags if not f.evidence.get('gt_unexecutable')]
        broken = [f for f in flags if f.evidence.get('gt_unexecutable')]
        print(f'empty-result flags: {len(empty)}')
        print(f'unexecutable ground truths: {len(broken)}')
        if args.flags_out:
            with open(args.flags_out, 'w') as handle:
                for flag in flags:
                    handle.write(json.dumps(flag.to_json(), sort_keys=True) + '\n')
            print(f'flags written to {args.flags_out}')
    return 0


if __name__ == '__main__':
    sys.exit(main())
