"""Per-segment Direct Evidence scores for (source, hypothesis) pairs.

The forward score is the percentage of eligible source tokens that have a
strong co-occurrence link to at least one hypothesis token; the reverse
score mirrors it from the hypothesis side and flags unsupported extra
words in the translation.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .corpus import TokenizerConfig, load_parallel_corpus, tokenize
from .wcm import CooccurrenceMatrix

log = logging.getLogger(__name__)

PROGRESS_EVERY = 100_000


@dataclass(frozen=True)
class DeScore:
    """One segment's Direct Evidence score.

    ``value`` is 100 * evidenced / eligible, or 0 with ``degenerate`` set
    when no token was eligible (so downstream counts stay consistent with
    input size).
    """

    value: float
    eligible: int
    evidenced: int
    degenerate: bool

    @classmethod
    def from_counts(cls, eligible: int, evidenced: int) -> "DeScore":
        if eligible <= 0:
            return cls(0.0, 0, 0, True)
        return cls(100.0 * evidenced / eligible, eligible, evidenced, False)


@dataclass(frozen=True)
class ScoredSegment:
    index: int
    de: DeScore
    reverse_de: DeScore | None = None


def de_score(
    matrix: CooccurrenceMatrix,
    source_tokens: list[str],
    hypothesis_tokens: list[str],
    *,
    by_type: bool = False,
) -> DeScore:
    """Forward DE score of a hypothesis translation for a source segment.

    Eligible tokens are all source tokens except high-frequency excluded
    types; tokens are counted with multiplicity unless ``by_type``. Source
    tokens absent from the matrix (pruned or out-of-vocabulary) stay in the
    denominator and are simply never evidenced.
    """
    target_ids = matrix.target_vocab.token_ids
    hyp_ids = {tid for tok in set(hypothesis_tokens) if (tid := target_ids.get(tok)) is not None}
    source_ids = matrix.source_vocab.token_ids
    excluded = matrix.excluded_source
    eligible = 0
    evidenced = 0
    for tok, mult in Counter(source_tokens).items():
        if by_type:
            mult = 1
        sid = source_ids.get(tok)
        if sid is not None and sid in excluded:
            continue
        eligible += mult
        if sid is None:
            continue
        row = matrix.row(sid)
        if row and any(tid in row for tid in hyp_ids):
            evidenced += mult
    return DeScore.from_counts(eligible, evidenced)


def reverse_de_score(
    matrix: CooccurrenceMatrix,
    source_tokens: list[str],
    hypothesis_tokens: list[str],
    *,
    by_type: bool = False,
) -> DeScore:
    """Reverse (target-to-source) DE score: the fraction of non-excluded
    hypothesis tokens that co-occur with any source type. Low values signal
    hypothesis words unsupported by the source."""
    source_ids = matrix.source_vocab.token_ids
    src_rows = [
        row
        for tok in set(source_tokens)
        if (sid := source_ids.get(tok)) is not None and (row := matrix.row(sid))
    ]
    target_ids = matrix.target_vocab.token_ids
    excluded = matrix.excluded_target
    eligible = 0
    evidenced = 0
    for tok, mult in Counter(hypothesis_tokens).items():
        if by_type:
            mult = 1
        tid = target_ids.get(tok)
        if tid is not None and tid in excluded:
            continue
        eligible += mult
        if tid is None:
            continue
        if any(tid in row for row in src_rows):
            evidenced += mult
    return DeScore.from_counts(eligible, evidenced)


def score_file(
    matrix: CooccurrenceMatrix,
    source_path,
    hypothesis_path,
    *,
    tokenizer: TokenizerConfig = TokenizerConfig(),
    reverse: bool = False,
    by_type: bool = False,
) -> Iterator[ScoredSegment]:
    """Score an aligned (source, hypothesis) file pair segment by segment.

    Yields one ScoredSegment per line pair in input order; the tokenizer
    config must match the one used when the matrix was built. A line-count
    mismatch raises AlignmentError.
    """
    n = 0
    for pair in load_parallel_corpus(source_path, hypothesis_path):
        src = tokenize(pair.source, tokenizer)
        hyp = tokenize(pair.target, tokenizer)
        forward = de_score(matrix, src, hyp, by_type=by_type)
        rev = reverse_de_score(matrix, src, hyp, by_type=by_type) if reverse else None
        yield ScoredSegment(pair.index, forward, rev)
        n += 1
        if PROGRESS_EVERY and n % PROGRESS_EVERY == 0:
            log.info("score: %d segments scored", n)
