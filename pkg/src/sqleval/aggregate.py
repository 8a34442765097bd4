"""Aggregation of voter variants and the label-noise decision."""

from __future__ import annotations

from typing import Callable, List, Optional, Sequence, Tuple

from .errors import PreconditionError
from .scanners import DETECTOR_VOTING, NoiseFlag
from .taxonomy import LABEL_ACCURACY
from .voters import VariantSet

# A match function is a named callable over two SQL strings.
MatchFn = Tuple[str, Callable[[str, str], 'MatchOutcome']]


def aggregate_union(variant_sets: Sequence[VariantSet]) -> List[str]:
    """Textual-dedup union in voter order, then variant order."""
    if not variant_sets:
        raise PreconditionError('at least one variant set required')
    seen = set()
    union: List[str] = []
    for vs in variant_sets:
        for variant in vs.variants:
            if variant in seen:
                continue
            seen.add(variant)
            union.append(variant)
    return union


def aggregate_majority(variant_sets: Sequence[VariantSet],
                       equiv: Callable[[str, str], bool],
                       n_voters: int) -> List[str]:
    """Variants grouped into equivalence classes by ``equiv``; a class
    survives when at least half of the voters support it.  Needs three or
    more voters to be meaningful."""
    if n_voters < 3:
        raise PreconditionError('majority voting needs at least 3 voters')
    # classes: (representative, member list, supporting voter ids)
    classes: List[Tuple[str, List[str], set]] = []
    for vs in variant_sets:
        for variant in vs.variants:
            for i, (rep, members, voters) in enumerate(classes):
                if variant == rep or equiv(rep, variant):
                    members.append(variant)
                    voters.add(vs.voter_id)
                    break
            else:
                classes.append((variant, [variant], {vs.voter_id}))
    threshold = n_voters / 2
    return [rep for rep, _, voters in classes if len(voters) >= threshold]


def detect_label_noise(sample, union_variants: Sequence[str],
                       match_fns: Sequence[MatchFn]) -> Optional[NoiseFlag]:
    """Flag the sample iff the ground truth matches none of the variants
    under every configured match function.  The reviewer may reassign the
    hint; the proxy does not tell data-quality issues apart."""
    if not union_variants:
        return NoiseFlag(sample.id, DETECTOR_VOTING, LABEL_ACCURACY,
                         {'no_variants': True})
    matrix = []
    any_match = False
    for variant in union_variants:
        row = {'variant': variant, 'outcomes': {}}
        for name, fn in match_fns:
            outcome = fn(sample.gt_sql, variant)
            row['outcomes'][name] = outcome.matched
            any_match = any_match or outcome.matched
        matrix.append(row)
    if any_match:
        return None
    return NoiseFlag(sample.id, DETECTOR_VOTING, LABEL_ACCURACY, {
        'match_matrix': matrix,
        'match_functions': [name for name, _ in match_fns],
    })
