"""Parallel corpus ingestion, tokenization, and vocabulary statistics."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import AlignmentError, DataError, EncodingError


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenization settings.

    Every file that feeds one matrix (training corpus, test source, MT
    output) must be tokenized with the same config, or tokens will not
    line up with the vocabulary.
    """

    lowercase: bool = False
    strip_punct: bool = False


_DEFAULT_TOKENIZER = TokenizerConfig()


def tokenize(text: str, config: TokenizerConfig = _DEFAULT_TOKENIZER) -> list[str]:
    """Split raw text into tokens.

    NFC-normalizes, then splits on Unicode whitespace. With
    ``config.lowercase`` tokens are case-folded; with ``config.strip_punct``
    leading/trailing punctuation is removed and tokens that were pure
    punctuation are dropped. Total function: empty or whitespace-only text
    yields an empty list.
    """
    text = unicodedata.normalize("NFC", text)
    if config.lowercase:
        text = text.casefold()
    tokens = text.split()
    if config.strip_punct:
        tokens = [t for t in (_strip_edge_punct(t) for t in tokens) if t]
    return tokens


def _strip_edge_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


@dataclass(frozen=True)
class SegmentPair:
    """One aligned sentence pair; ``index`` is the 0-based line ordinal."""

    index: int
    source: str
    target: str


def _iter_lines(path) -> Iterator[str]:
    """Yield decoded lines without their line terminator.

    Reads in binary so an invalid byte can be reported with its line
    number. Accepts LF or CRLF endings (a single trailing CR is stripped)
    and drops a UTF-8 BOM on the first line.
    """
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.endswith(b"\n"):
                raw = raw[:-1]
            if raw.endswith(b"\r"):
                raw = raw[:-1]
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise EncodingError(
                    f"{path}: invalid UTF-8 on line {lineno}: {exc.reason}"
                ) from None
            if lineno == 1 and line.startswith("\ufeff"):
                line = line[1:]
            yield line


def _drain(lines: Iterator[str]) -> int:
    return sum(1 for _ in lines)


def load_parallel_corpus(source_path, target_path) -> Iterator[SegmentPair]:
    """Stream aligned segment pairs from two one-segment-per-line files.

    Raises AlignmentError naming both line counts if the files disagree
    in length (the remainder of the longer file is consumed to count it).
    """
    source_lines = _iter_lines(source_path)
    target_lines = _iter_lines(target_path)
    index = 0
    while True:
        src = next(source_lines, None)
        tgt = next(target_lines, None)
        if src is None or tgt is None:
            if src is None and tgt is None:
                return
            n_source = index + (0 if src is None else 1 + _drain(source_lines))
            n_target = index + (0 if tgt is None else 1 + _drain(target_lines))
            raise AlignmentError(
                f"line count mismatch: {source_path} has {n_source} lines, "
                f"{target_path} has {n_target} lines"
            )
        yield SegmentPair(index, src, tgt)
        index += 1


def load_tsv_corpus(path) -> Iterator[SegmentPair]:
    """Stream segment pairs from a single TSV file (source TAB target)."""
    for index, line in enumerate(_iter_lines(path)):
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataError(
                f"{path}: line {index + 1}: expected exactly one tab, "
                f"found {len(fields) - 1}"
            )
        yield SegmentPair(index, fields[0], fields[1])


class Vocabulary:
    """Dense token<->id mapping with raw corpus frequencies for one side.

    Ids are 0-based and assigned in first-occurrence order over the corpus,
    which makes downstream artifacts reproducible byte for byte.
    """

    __slots__ = ("side", "_tokens", "_freqs", "_ids")

    def __init__(self, side: str, tokens: list[str], frequencies: list[int]):
        if len(tokens) != len(frequencies):
            raise ValueError("tokens and frequencies must have equal length")
        self.side = side
        self._tokens = tokens
        self._freqs = frequencies
        self._ids = {tok: i for i, tok in enumerate(tokens)}

    @classmethod
    def from_segments(cls, segments: Iterable[list[str]], side: str = "source") -> "Vocabulary":
        counts: Counter[str] = Counter()
        for tokens in segments:
            counts.update(tokens)
        # Counter preserves first-insertion order, i.e. first occurrence.
        return cls(side, list(counts.keys()), list(counts.values()))

    @classmethod
    def merge(cls, parts: Sequence["Vocabulary"], side: str | None = None) -> "Vocabulary":
        """Merge shard vocabularies built over consecutive corpus chunks.

        Equivalent to building over the concatenated shards: ids follow
        first occurrence across shards in order, frequencies sum. The
        result is independent of how the corpus was split.
        """
        tokens: list[str] = []
        freqs: list[int] = []
        ids: dict[str, int] = {}
        for part in parts:
            for tok, f in zip(part._tokens, part._freqs):
                i = ids.get(tok)
                if i is None:
                    ids[tok] = len(tokens)
                    tokens.append(tok)
                    freqs.append(f)
                else:
                    freqs[i] += f
        if side is None:
            side = parts[0].side if parts else "source"
        return cls(side, tokens, freqs)

    def id_of(self, token: str) -> int | None:
        return self._ids.get(token)

    def token_of(self, token_id: int) -> str:
        return self._tokens[token_id]

    def frequency(self, token: str) -> int:
        i = self._ids.get(token)
        return 0 if i is None else self._freqs[i]

    def frequency_of_id(self, token_id: int) -> int:
        return self._freqs[token_id]

    @property
    def token_ids(self) -> dict[str, int]:
        """The token -> id mapping itself; treat as read-only."""
        return self._ids

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __len__(self) -> int:
        return len(self._tokens)

    def total_tokens(self) -> int:
        return sum(self._freqs)

    def items(self) -> Iterator[tuple[str, int, int]]:
        """Yield (token, id, frequency) in id order."""
        for i, (tok, f) in enumerate(zip(self._tokens, self._freqs)):
            yield tok, i, f


def build_vocabulary(segments: Iterable[list[str]], side: str = "source") -> Vocabulary:
    """Build a vocabulary from a stream of tokenized segments."""
    return Vocabulary.from_segments(segments, side)


def build_parallel_vocabularies(
    pairs: Iterable[SegmentPair], config: TokenizerConfig = _DEFAULT_TOKENIZER
) -> tuple[Vocabulary, Vocabulary, int]:
    """Tokenize both sides of an aligned stream in one pass.

    Returns (source vocabulary, target vocabulary, segment count).
    """
    source_counts: Counter[str] = Counter()
    target_counts: Counter[str] = Counter()
    n = 0
    for pair in pairs:
        source_counts.update(tokenize(pair.source, config))
        target_counts.update(tokenize(pair.target, config))
        n += 1
    source = Vocabulary("source", list(source_counts.keys()), list(source_counts.values()))
    target = Vocabulary("target", list(target_counts.keys()), list(target_counts.values()))
    return source, target, n


@dataclass(frozen=True)
class ThresholdCount:
    """How many vocabulary types sit at or above / below one frequency bar."""

    threshold: int
    at_or_above: int
    below: int


@dataclass(frozen=True)
class VocabStats:
    side: str
    vocab_size: int
    token_count: int
    singleton_types: int
    thresholds: tuple[ThresholdCount, ...]
    hifreq_cutoff: int | None = None
    hifreq_types: tuple[str, ...] = ()

    def pct_of_vocab(self, count: int) -> float:
        return 100.0 * count / self.vocab_size if self.vocab_size else 0.0


def vocab_stats(
    vocab: Vocabulary,
    thresholds: Sequence[int],
    hifreq_cutoff: int | None = None,
) -> VocabStats:
    """Frequency-distribution summary of a vocabulary.

    For each threshold t, counts types with frequency >= t and < t. When
    ``hifreq_cutoff`` is given, also lists the types whose frequency
    exceeds it, most frequent first.
    """
    if not thresholds:
        raise ValueError("thresholds must be non-empty")
    freqs = vocab._freqs
    rows = []
    for t in thresholds:
        ge = sum(1 for f in freqs if f >= t)
        rows.append(ThresholdCount(t, ge, len(freqs) - ge))
    singletons = sum(1 for f in freqs if f == 1)
    hifreq: tuple[str, ...] = ()
    if hifreq_cutoff is not None:
        over = [(tok, f) for tok, _, f in vocab.items() if f > hifreq_cutoff]
        over.sort(key=lambda pair: (-pair[1], pair[0]))
        hifreq = tuple(tok for tok, _ in over)
    return VocabStats(
        side=vocab.side,
        vocab_size=len(vocab),
        token_count=vocab.total_tokens(),
        singleton_types=singletons,
        thresholds=tuple(rows),
        hifreq_cutoff=hifreq_cutoff,
        hifreq_types=hifreq,
    )
