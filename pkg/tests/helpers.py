"""Construction utilities shared by the test modules."""

from __future__ import annotations

import random

from deqe.corpus import Vocabulary, build_vocabulary, tokenize
from deqe.wcm import CooccurrenceMatrix, WcmConfig, build_wcm


def build_from_raw(
    raw_pairs: list[tuple[str, str]],
    min_cooccurrence: int = 1,
    hifreq_cutoff: int = 10**9,
    count_mode: str = "binary",
    threads: int = 1,
) -> CooccurrenceMatrix:
    """Tokenize raw sentence pairs, build vocabularies, and build a matrix."""
    token_pairs = [(tokenize(s), tokenize(t)) for s, t in raw_pairs]
    source_vocab = build_vocabulary([p[0] for p in token_pairs], "source")
    target_vocab = build_vocabulary([p[1] for p in token_pairs], "target")
    config = WcmConfig(
        min_cooccurrence=min_cooccurrence,
        hifreq_cutoff=hifreq_cutoff,
        count_mode=count_mode,
    )
    return build_wcm(
        token_pairs, source_vocab, target_vocab, config, threads=threads, progress_every=0
    )


def make_matrix(
    entries: dict[tuple[str, str], int],
    excluded_source: tuple[str, ...] = (),
    excluded_target: tuple[str, ...] = (),
    min_cooccurrence: int = 20,
    hifreq_cutoff: int = 10_000,
    count_mode: str = "binary",
) -> CooccurrenceMatrix:
    """Assemble a matrix directly from token-level entries (all counts must
    already sit at or above the threshold)."""
    source_tokens = list(dict.fromkeys(
        list(excluded_source) + [s for s, _ in sorted(entries)]
    ))
    target_tokens = list(dict.fromkeys(
        list(excluded_target) + [t for _, t in sorted(entries)]
    ))
    source_vocab = Vocabulary("source", source_tokens, [0] * len(source_tokens))
    target_vocab = Vocabulary("target", target_tokens, [0] * len(target_tokens))
    rows: dict[int, dict[int, int]] = {}
    for (s, t), c in entries.items():
        sid = source_vocab.id_of(s)
        tid = target_vocab.id_of(t)
        rows.setdefault(sid, {})[tid] = c
    return CooccurrenceMatrix(
        source_vocab,
        target_vocab,
        WcmConfig(min_cooccurrence, hifreq_cutoff, count_mode),
        rows,
        frozenset(source_vocab.id_of(t) for t in excluded_source),
        frozenset(target_vocab.id_of(t) for t in excluded_target),
    )


def random_corpus(
    rng: random.Random,
    max_segments: int = 50,
    max_vocab: int = 30,
    max_len: int = 12,
) -> list[tuple[list[str], list[str]]]:
    """Random tokenized segment pairs over small disjoint alphabets."""
    n_src = rng.randint(1, max_vocab)
    n_tgt = rng.randint(1, max_vocab)
    src_alpha = [f"s{i}" for i in range(n_src)]
    tgt_alpha = [f"t{i}" for i in range(n_tgt)]
    pairs = []
    for _ in range(rng.randint(1, max_segments)):
        src = [rng.choice(src_alpha) for _ in range(rng.randint(0, max_len))]
        tgt = [rng.choice(tgt_alpha) for _ in range(rng.randint(0, max_len))]
        pairs.append((src, tgt))
    return pairs


def random_matrix(rng: random.Random, max_vocab: int = 12) -> CooccurrenceMatrix:
    """A structurally valid random matrix built directly (not via counting)."""
    min_cooc = rng.randint(1, 30)
    n_src = rng.randint(0, max_vocab)
    n_tgt = rng.randint(0, max_vocab)
    src_tokens = [f"s{i}" for i in range(n_src)]
    tgt_tokens = [f"t{i}" for i in range(n_tgt)]
    excl_s = frozenset(i for i in range(n_src) if rng.random() < 0.15)
    excl_t = frozenset(i for i in range(n_tgt) if rng.random() < 0.15)
    rows: dict[int, dict[int, int]] = {}
    n_entries = rng.randint(0, max(0, n_src * n_tgt // 2))
    for _ in range(n_entries):
        sid = rng.randrange(n_src) if n_src else None
        tid = rng.randrange(n_tgt) if n_tgt else None
        if sid is None or tid is None or sid in excl_s or tid in excl_t:
            continue
        rows.setdefault(sid, {})[tid] = min_cooc + rng.randint(0, 50)
    source_vocab = Vocabulary("source", src_tokens, [0] * n_src)
    target_vocab = Vocabulary("target", tgt_tokens, [0] * n_tgt)
    mode = rng.choice(["binary", "product"])
    return CooccurrenceMatrix(
        source_vocab,
        target_vocab,
        WcmConfig(min_cooc, rng.randint(1, 10**6), mode),
        rows,
        excl_s,
        excl_t,
    )


def write_lines(path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
