"""Build, prune, serialize, and query the sparse bilingual word
co-occurrence matrix.

A cell (i, j) counts how often source word i and target word j appear in
the same aligned segment pair. Cells below the minimum co-occurrence
threshold are pruned when the build finalizes, so the mere presence of an
entry is the strong-evidence predicate used by scoring.
"""

from __future__ import annotations

import itertools
import logging
import multiprocessing
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .corpus import Vocabulary
from .errors import VocabularyMismatchError, WcmFormatError

log = logging.getLogger(__name__)

FORMAT_VERSION = "v1"
COUNT_MODE_BINARY = "binary"
COUNT_MODE_PRODUCT = "product"
COUNT_MODES = (COUNT_MODE_BINARY, COUNT_MODE_PRODUCT)

PROGRESS_EVERY = 100_000
LONG_SEGMENT_TOKENS = 1_000
CHUNK_SEGMENTS = 65_536


@dataclass(frozen=True)
class WcmConfig:
    """Thresholds and counting semantics a matrix is built under.

    ``binary`` counting adds 1 per segment in which both types co-occur,
    regardless of repetition; ``product`` adds occurrences(i) *
    occurrences(j) instead.
    """

    min_cooccurrence: int = 20
    hifreq_cutoff: int = 10_000
    count_mode: str = COUNT_MODE_BINARY

    def __post_init__(self) -> None:
        if self.min_cooccurrence < 1:
            raise ValueError("min_cooccurrence must be >= 1")
        if self.hifreq_cutoff < 1:
            raise ValueError("hifreq_cutoff must be >= 1")
        if self.count_mode not in COUNT_MODES:
            raise ValueError(
                f"count_mode must be one of {COUNT_MODES}, got {self.count_mode!r}"
            )


class CooccurrenceMatrix:
    """Pruned co-occurrence counts, row-indexed by source id.

    Immutable once built; safe to share across workers for concurrent
    lookups. Types whose raw frequency exceeded the high-frequency cutoff
    were skipped at build time and are recorded in the exclusion sets.
    """

    def __init__(
        self,
        source_vocab: Vocabulary,
        target_vocab: Vocabulary,
        config: WcmConfig,
        rows: dict[int, dict[int, int]],
        excluded_source: Iterable[int] = (),
        excluded_target: Iterable[int] = (),
    ):
        self.source_vocab = source_vocab
        self.target_vocab = target_vocab
        self.config = config
        self._rows = rows
        self.excluded_source = frozenset(excluded_source)
        self.excluded_target = frozenset(excluded_target)
        self._transposed: "CooccurrenceMatrix | None" = None

    @property
    def n_entries(self) -> int:
        return sum(len(row) for row in self._rows.values())

    def row(self, source_id: int) -> Mapping[int, int] | None:
        """Target-id -> count map for one source id, or None."""
        return self._rows.get(source_id)

    def count(self, source_token: str, target_token: str) -> int:
        sid = self.source_vocab.id_of(source_token)
        tid = self.target_vocab.id_of(target_token)
        if sid is None or tid is None:
            return 0
        row = self._rows.get(sid)
        return 0 if row is None else row.get(tid, 0)

    def evidence(self, source_token: str, target_tokens: Iterable[str]) -> bool:
        """True iff the source token has a surviving entry with at least
        one of the target tokens. Unknown tokens never match."""
        sid = self.source_vocab.id_of(source_token)
        if sid is None:
            return False
        row = self._rows.get(sid)
        if not row:
            return False
        id_of = self.target_vocab.id_of
        for tok in target_tokens:
            tid = id_of(tok)
            if tid is not None and tid in row:
                return True
        return False

    def entries(self) -> Iterator[tuple[str, str, int]]:
        """Yield (source token, target token, count) in unspecified order."""
        s_tok = self.source_vocab.token_of
        t_tok = self.target_vocab.token_of
        for sid, row in self._rows.items():
            s = s_tok(sid)
            for tid, c in row.items():
                yield s, t_tok(tid), c

    def entries_sorted(self) -> list[tuple[str, str, int]]:
        """Entries sorted by (source token, target token) code-point order."""
        return sorted(self.entries(), key=lambda e: (e[0], e[1]))

    def entries_by_token(self) -> dict[tuple[str, str], int]:
        return {(s, t): c for s, t, c in self.entries()}

    def excluded_source_tokens(self) -> frozenset[str]:
        return frozenset(self.source_vocab.token_of(i) for i in self.excluded_source)

    def excluded_target_tokens(self) -> frozenset[str]:
        return frozenset(self.target_vocab.token_of(i) for i in self.excluded_target)

    def transposed(self) -> "CooccurrenceMatrix":
        """The target -> source view; built once and cached both ways."""
        if self._transposed is None:
            rows_t: dict[int, dict[int, int]] = {}
            for sid, row in self._rows.items():
                for tid, c in row.items():
                    col = rows_t.get(tid)
                    if col is None:
                        rows_t[tid] = col = {}
                    col[sid] = c
            flipped = CooccurrenceMatrix(
                self.target_vocab,
                self.source_vocab,
                self.config,
                rows_t,
                self.excluded_target,
                self.excluded_source,
            )
            flipped._transposed = self
            self._transposed = flipped
        return self._transposed

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CooccurrenceMatrix):
            return NotImplemented
        return (
            self.config == other.config
            and self.excluded_source_tokens() == other.excluded_source_tokens()
            and self.excluded_target_tokens() == other.excluded_target_tokens()
            and self.entries_by_token() == other.entries_by_token()
        )

    def __repr__(self) -> str:
        return (
            f"CooccurrenceMatrix({self.n_entries} entries, "
            f"min_cooccurrence={self.config.min_cooccurrence}, "
            f"count_mode={self.config.count_mode})"
        )


def evidence_lookup(
    matrix: CooccurrenceMatrix, source_token: str, target_tokens: Iterable[str]
) -> bool:
    """Strong-evidence check: does the source token co-occur (at or above
    the build threshold) with any of the given target tokens?"""
    return matrix.evidence(source_token, target_tokens)


@dataclass(frozen=True)
class _BuildState:
    """Everything a counting worker needs; must stay picklable."""

    source_ids: dict[str, int]
    target_ids: dict[str, int]
    excluded_source: frozenset[int]
    excluded_target: frozenset[int]
    width: int
    count_mode: str


def _excluded_ids(vocab: Vocabulary, cutoff: int) -> frozenset[int]:
    return frozenset(i for _, i, f in vocab.items() if f > cutoff)


def _map_side(tokens: list[str], ids: dict[str, int], index: int, side: str) -> set[int]:
    try:
        return {ids[t] for t in tokens}
    except KeyError as exc:
        raise VocabularyMismatchError(
            f"{side} token {exc.args[0]!r} in segment {index} is not in the "
            f"{side} vocabulary; rebuild vocabularies from this corpus"
        ) from None


def _count_segment(
    counts: Counter, src_tokens: list[str], tgt_tokens: list[str], index: int, state: _BuildState
) -> None:
    if len(src_tokens) > LONG_SEGMENT_TOKENS or len(tgt_tokens) > LONG_SEGMENT_TOKENS:
        log.warning(
            "segment %d is very long (%d/%d tokens); pair counting is quadratic",
            index,
            len(src_tokens),
            len(tgt_tokens),
        )
    width = state.width
    if state.count_mode == COUNT_MODE_BINARY:
        # Map both sides before filtering so a vocabulary mismatch is always
        # detected, even when one side is entirely excluded.
        s_ids = _map_side(src_tokens, state.source_ids, index, "source")
        t_ids = _map_side(tgt_tokens, state.target_ids, index, "target")
        s_ids -= state.excluded_source
        t_ids -= state.excluded_target
        if s_ids and t_ids:
            counts.update([sid * width + tid for sid in s_ids for tid in t_ids])
    else:
        s_items = [
            (sid, c)
            for tok, c in Counter(src_tokens).items()
            if (sid := _map_one(tok, state.source_ids, index, "source"))
            not in state.excluded_source
        ]
        t_items = [
            (tid, c)
            for tok, c in Counter(tgt_tokens).items()
            if (tid := _map_one(tok, state.target_ids, index, "target"))
            not in state.excluded_target
        ]
        for sid, ci in s_items:
            base = sid * width
            for tid, cj in t_items:
                counts[base + tid] += ci * cj


def _map_one(token: str, ids: dict[str, int], index: int, side: str) -> int:
    tid = ids.get(token)
    if tid is None:
        raise VocabularyMismatchError(
            f"{side} token {token!r} in segment {index} is not in the "
            f"{side} vocabulary; rebuild vocabularies from this corpus"
        )
    return tid


def _count_sequential(
    pairs: Iterable[tuple[list[str], list[str]]],
    state: _BuildState,
    progress_every: int,
) -> Counter:
    counts: Counter = Counter()
    n = 0
    for src_tokens, tgt_tokens in pairs:
        _count_segment(counts, src_tokens, tgt_tokens, n, state)
        n += 1
        if progress_every and n % progress_every == 0:
            log.info("build-wcm: %d segments counted", n)
    return counts


_worker_state: _BuildState | None = None


def _pool_init(state: _BuildState) -> None:
    global _worker_state
    _worker_state = state


def _count_chunk(task: tuple[int, list[tuple[list[str], list[str]]]]) -> tuple[int, Counter]:
    base_index, chunk = task
    counts: Counter = Counter()
    state = _worker_state
    assert state is not None
    for offset, (src_tokens, tgt_tokens) in enumerate(chunk):
        _count_segment(counts, src_tokens, tgt_tokens, base_index + offset, state)
    return len(chunk), counts


def _chunk_tasks(
    pairs: Iterable[tuple[list[str], list[str]]], size: int
) -> Iterator[tuple[int, list[tuple[list[str], list[str]]]]]:
    it = iter(pairs)
    base = 0
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield base, chunk
        base += len(chunk)


def _count_parallel(
    pairs: Iterable[tuple[list[str], list[str]]],
    state: _BuildState,
    threads: int,
    progress_every: int,
) -> Counter:
    # Per-shard partial maps merged by summation: associative and
    # commutative, so the result is independent of scheduling.
    merged: Counter = Counter()
    processed = 0
    next_tick = progress_every if progress_every else 0
    ctx = multiprocessing.get_context()
    with ctx.Pool(threads, initializer=_pool_init, initargs=(state,)) as pool:
        for n_items, partial in pool.imap_unordered(
            _count_chunk, _chunk_tasks(pairs, CHUNK_SEGMENTS)
        ):
            merged.update(partial)
            processed += n_items
            if next_tick and processed >= next_tick:
                log.info("build-wcm: %d segments counted", processed)
                next_tick += progress_every
    return merged


def build_wcm(
    pairs: Iterable[tuple[list[str], list[str]]],
    source_vocab: Vocabulary,
    target_vocab: Vocabulary,
    config: WcmConfig | None = None,
    *,
    threads: int = 1,
    progress_every: int = PROGRESS_EVERY,
) -> CooccurrenceMatrix:
    """Count co-occurrences over a stream of tokenized segment pairs.

    Types whose raw frequency exceeds ``config.hifreq_cutoff`` on their own
    side are skipped entirely; after accumulation, cells below
    ``config.min_cooccurrence`` are pruned. A token missing from its
    vocabulary raises VocabularyMismatchError (the vocabularies must come
    from this corpus or a superset).

    With ``threads > 1`` the stream is sharded into chunks counted by a
    process pool; partial counts merge by summation, so the resulting
    matrix is identical regardless of thread count.
    """
    if config is None:
        config = WcmConfig()
    state = _BuildState(
        source_ids=source_vocab.token_ids,
        target_ids=target_vocab.token_ids,
        excluded_source=_excluded_ids(source_vocab, config.hifreq_cutoff),
        excluded_target=_excluded_ids(target_vocab, config.hifreq_cutoff),
        width=max(1, len(target_vocab)),
        count_mode=config.count_mode,
    )
    if threads > 1:
        counts = _count_parallel(pairs, state, threads, progress_every)
    else:
        counts = _count_sequential(pairs, state, progress_every)
    rows: dict[int, dict[int, int]] = {}
    min_cooc = config.min_cooccurrence
    width = state.width
    for key, c in counts.items():
        if c >= min_cooc:
            sid, tid = divmod(key, width)
            row = rows.get(sid)
            if row is None:
                rows[sid] = row = {}
            row[tid] = c
    return CooccurrenceMatrix(
        source_vocab,
        target_vocab,
        config,
        rows,
        state.excluded_source,
        state.excluded_target,
    )


def save_wcm(matrix: CooccurrenceMatrix, path) -> None:
    """Write the matrix in the v1 text format.

    Entries are sorted by (source token, target token) so identical
    matrices serialize to identical bytes.
    """
    for vocab in (matrix.source_vocab, matrix.target_vocab):
        for tok, _, _ in vocab.items():
            if any(ch.isspace() for ch in tok):
                raise ValueError(
                    f"token {tok!r} contains whitespace and cannot be serialized"
                )
    entries = matrix.entries_sorted()
    cfg = matrix.config
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#wcm {FORMAT_VERSION}\n")
        fh.write(f"#min_cooccurrence {cfg.min_cooccurrence}\n")
        fh.write(f"#hifreq_cutoff {cfg.hifreq_cutoff}\n")
        fh.write(f"#count_mode {cfg.count_mode}\n")
        fh.write(f"#entries {len(entries)}\n")
        fh.write("#excluded_source" + _join_tokens(matrix.excluded_source_tokens()) + "\n")
        fh.write("#excluded_target" + _join_tokens(matrix.excluded_target_tokens()) + "\n")
        for s, t, c in entries:
            fh.write(f"{s}\t{t}\t{c}\n")


def _join_tokens(tokens: frozenset[str]) -> str:
    return "".join(" " + t for t in sorted(tokens))


def _header_rest(lines: list[str], idx: int, tag: str, path) -> str:
    if idx >= len(lines):
        raise WcmFormatError(f"{path}: truncated header, missing {tag!r} line")
    line = lines[idx]
    if line == tag:
        return ""
    if not line.startswith(tag + " "):
        raise WcmFormatError(f"{path}: expected {tag!r} header on line {idx + 1}")
    return line[len(tag) + 1 :]


def _header_int(lines: list[str], idx: int, tag: str, path) -> int:
    rest = _header_rest(lines, idx, tag, path)
    try:
        return int(rest)
    except ValueError:
        raise WcmFormatError(
            f"{path}: invalid integer {rest!r} in {tag!r} header"
        ) from None


def load_wcm(path) -> CooccurrenceMatrix:
    """Read a matrix from the v1 text format.

    The artifact does not persist corpus frequencies, so the vocabularies
    of a loaded matrix carry ids only (frequencies read back as 0); the
    exclusion sets are stored explicitly and survive the round trip.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not (lines[0] == "#wcm" or lines[0].startswith("#wcm ")):
        raise WcmFormatError(f"{path}: not a WCM file (missing '#wcm' header)")
    version = lines[0][len("#wcm") :].strip()
    if version != FORMAT_VERSION:
        raise WcmFormatError(
            f"{path}: unsupported WCM format version: expected "
            f"{FORMAT_VERSION!r}, found {version!r}"
        )
    min_cooc = _header_int(lines, 1, "#min_cooccurrence", path)
    cutoff = _header_int(lines, 2, "#hifreq_cutoff", path)
    mode = _header_rest(lines, 3, "#count_mode", path)
    declared = _header_int(lines, 4, "#entries", path)
    excluded_source_tokens = _header_rest(lines, 5, "#excluded_source", path).split()
    excluded_target_tokens = _header_rest(lines, 6, "#excluded_target", path).split()
    try:
        config = WcmConfig(min_cooccurrence=min_cooc, hifreq_cutoff=cutoff, count_mode=mode)
    except ValueError as exc:
        raise WcmFormatError(f"{path}: {exc}") from None

    data = lines[7:]
    if len(data) < declared:
        raise WcmFormatError(
            f"{path}: truncated WCM file: header declares {declared} entries, "
            f"found {len(data)}"
        )
    if len(data) > declared:
        raise WcmFormatError(
            f"{path}: trailing data: header declares {declared} entries, "
            f"found {len(data)} lines"
        )

    triples: list[tuple[str, str, int]] = []
    for offset, line in enumerate(data):
        fields = line.split("\t")
        if len(fields) != 3:
            raise WcmFormatError(
                f"{path}: line {offset + 8}: expected 3 tab-separated fields, "
                f"found {len(fields)}"
            )
        s, t, raw_count = fields
        try:
            c = int(raw_count)
        except ValueError:
            raise WcmFormatError(
                f"{path}: line {offset + 8}: invalid count {raw_count!r}"
            ) from None
        if c < config.min_cooccurrence:
            raise WcmFormatError(
                f"{path}: line {offset + 8}: count {c} is below the declared "
                f"min_cooccurrence {config.min_cooccurrence}"
            )
        triples.append((s, t, c))

    excl_s = set(excluded_source_tokens)
    excl_t = set(excluded_target_tokens)
    source_vocab = _vocab_from_tokens(
        "source", excluded_source_tokens, (s for s, _, _ in triples)
    )
    target_vocab = _vocab_from_tokens(
        "target", excluded_target_tokens, (t for _, t, _ in triples)
    )
    source_ids = source_vocab.token_ids
    target_ids = target_vocab.token_ids
    rows: dict[int, dict[int, int]] = {}
    for s, t, c in triples:
        if s in excl_s or t in excl_t:
            raise WcmFormatError(
                f"{path}: entry ({s!r}, {t!r}) uses an excluded token"
            )
        row = rows.setdefault(source_ids[s], {})
        tid = target_ids[t]
        if tid in row:
            raise WcmFormatError(f"{path}: duplicate entry ({s!r}, {t!r})")
        row[tid] = c
    return CooccurrenceMatrix(
        source_vocab,
        target_vocab,
        config,
        rows,
        frozenset(source_ids[t] for t in excl_s),
        frozenset(target_ids[t] for t in excl_t),
    )


def _vocab_from_tokens(side: str, first: list[str], rest: Iterable[str]) -> Vocabulary:
    ordered = list(dict.fromkeys(itertools.chain(first, rest)))
    return Vocabulary(side, ordered, [0] * len(ordered))
