"""Independent brute-force reimplementations used as oracles.

Nothing here shares code with the package: counting uses plain dicts and
list.count so a bug in the real implementations cannot hide in a shared
helper.
"""

from __future__ import annotations

import math


def brute_force_wcm(
    token_pairs: list[tuple[list[str], list[str]]],
    min_cooccurrence: int,
    hifreq_cutoff: int,
    count_mode: str,
) -> dict[tuple[str, str], int]:
    """Double loop over (segment, source type, target type)."""
    src_freq: dict[str, int] = {}
    tgt_freq: dict[str, int] = {}
    for src, tgt in token_pairs:
        for w in src:
            src_freq[w] = src_freq.get(w, 0) + 1
        for w in tgt:
            tgt_freq[w] = tgt_freq.get(w, 0) + 1
    counts: dict[tuple[str, str], int] = {}
    for src, tgt in token_pairs:
        s_keep = [w for w in src if src_freq[w] <= hifreq_cutoff]
        t_keep = [w for w in tgt if tgt_freq[w] <= hifreq_cutoff]
        for i in set(s_keep):
            for j in set(t_keep):
                if count_mode == "binary":
                    increment = 1
                else:
                    increment = s_keep.count(i) * t_keep.count(j)
                counts[(i, j)] = counts.get((i, j), 0) + increment
    return {k: v for k, v in counts.items() if v >= min_cooccurrence}


def brute_force_excluded(
    token_pairs: list[tuple[list[str], list[str]]], hifreq_cutoff: int
) -> tuple[set[str], set[str]]:
    src_freq: dict[str, int] = {}
    tgt_freq: dict[str, int] = {}
    for src, tgt in token_pairs:
        for w in src:
            src_freq[w] = src_freq.get(w, 0) + 1
        for w in tgt:
            tgt_freq[w] = tgt_freq.get(w, 0) + 1
    return (
        {w for w, f in src_freq.items() if f > hifreq_cutoff},
        {w for w, f in tgt_freq.items() if f > hifreq_cutoff},
    )


def naive_corpus_bleu(
    hypotheses: list[list[str]], references: list[list[str]]
) -> tuple[float, list[float], float]:
    """Naive pooled clipped n-gram counting; returns (score, precisions, bp)."""
    precisions = []
    for n in range(1, 5):
        match = 0
        total = 0
        for hyp, ref in zip(hypotheses, references):
            hyp_ngrams = [tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1)]
            ref_ngrams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
            total += len(hyp_ngrams)
            for g in set(hyp_ngrams):
                match += min(hyp_ngrams.count(g), ref_ngrams.count(g))
        precisions.append(match / total if total else 0.0)
    hyp_len = sum(len(h) for h in hypotheses)
    ref_len = sum(len(r) for r in references)
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    if bp == 0.0 or any(p == 0.0 for p in precisions):
        return 0.0, precisions, bp
    score = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / 4.0)
    return score, precisions, bp
