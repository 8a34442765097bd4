"""Golden tests for fenced-block extraction (byte-for-byte expectations)."""

from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from sqleval.extraction import (POLICY_FIRST_BLOCK, POLICY_REQUIRE_SINGLE,
                                STATUS_AMBIGUOUS, STATUS_MISSING, STATUS_OK,
                                extract_prediction, extract_sql_blocks)

# (raw text, expected block list) — expectations follow the extraction regex
# exactly, including its quirks (lowercase/uppercase fence only, non-greedy
# close, no unfenced fallback).
GOLDEN = [
    ('```sql\nSELECT 1;\n```', ['SELECT 1;']),
    ('no code here', []),
    ('```SQL\nSELECT a FROM t;\n``` text ```sql\nSELECT b FROM t;\n```',
     ['SELECT a FROM t;', 'SELECT b FROM t;']),
    ('```sql SELECT 2 ```', ['SELECT 2']),
    ('```SQL SELECT 3 ```', ['SELECT 3']),
    ('```Sql\nSELECT 4\n```', []),                      # mixed-case fence
    ('```\nSELECT 5\n```', []),                         # untagged fence
    ('```sql\nSELECT 6', []),                           # unterminated
    ('SELECT 7;', []),                                  # bare SQL, no fence
    ('```sql\nSELECT `a` FROM t;\n```', ['SELECT `a` FROM t;']),
    ('```sql\nSELECT 8; ``` trailing ```', ['SELECT 8;']),
    ('```sql\n```', ['']),                              # whitespace-only body
    ('```sql```', []),                                  # zero-length body
    ('````sql\nSELECT 9\n```', ['SELECT 9']),
    ('```sqlite\nSELECT 10\n```', ['ite\nSELECT 10']),  # greedy tag quirk
    ('prose ```sql\r\nSELECT 11\r\n``` more prose', ['SELECT 11']),
    ('```sql\n  SELECT 12;  \n```', ['SELECT 12;']),
    ("```sql\nSELECT 'it''s'\n```", ["SELECT 'it''s'"]),
    ('```sql\nSELECT "läge"\n```', ['SELECT "läge"']),
    ('```sql\nA\n``````sql\nB\n```', ['A', 'B']),
    ('explanation\n```sql\nSELECT x\nFROM t\nWHERE y = 1\n```\nnotes',
     ['SELECT x\nFROM t\nWHERE y = 1']),
    ('```sql\nSELECT 13\n``` ```SQL\nSELECT 14\n``` ```sql\nSELECT 15\n```',
     ['SELECT 13', 'SELECT 14', 'SELECT 15']),
]


def test_golden_extractions():
    for raw, expected in GOLDEN:
        assert extract_sql_blocks(raw) == expected, raw


def test_first_block_policy():
    record = extract_prediction('s1', GOLDEN[2][0], POLICY_FIRST_BLOCK)
    assert record.status == STATUS_OK
    assert record.extracted == ('SELECT a FROM t;',)


def test_missing_status_when_no_fence():
    record = extract_prediction('s1', 'no code here')
    assert record.status == STATUS_MISSING
    assert record.extracted == ()


def test_require_single_ambiguous_on_two_blocks():
    two = GOLDEN[2][0]
    record = extract_prediction('s1', two, POLICY_REQUIRE_SINGLE)
    assert record.status == STATUS_AMBIGUOUS
    assert len(record.extracted) == 2
    single = extract_prediction('s1', GOLDEN[0][0], POLICY_REQUIRE_SINGLE)
    assert single.status == STATUS_OK


def test_first_block_extracted_is_subset_of_all_blocks():
    for raw, _ in GOLDEN:
        record = extract_prediction('s', raw, POLICY_FIRST_BLOCK)
        assert set(record.extracted) <= set(extract_sql_blocks(raw))


_body = st.text(alphabet=st.characters(blacklist_characters='`'), min_size=1,
                max_size=30)
_prose = st.text(alphabet=st.characters(blacklist_characters='`'), max_size=20)
_fence = st.sampled_from(['sql', 'SQL'])
_chunk = st.one_of(
    _prose,
    st.tuples(_fence, _body).map(lambda t: f'```{t[0]}{t[1]}```'),
)
_wellformed = st.lists(_chunk, max_size=4).map(' '.join)


@given(_wellformed, _wellformed)
def test_concatenation_property_on_wellformed_texts(left, right):
    # Holds for texts whose fences are balanced and whose prose carries no
    # stray backticks (an unterminated fence could otherwise fuse across the
    # boundary).
    assert extract_sql_blocks(left + ' ' + right) == \
        extract_sql_blocks(left) + extract_sql_blocks(right)
