"""Reference-based BLEU (corpus and sentence level) and Pearson
correlation with two-tailed significance."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import UndefinedCorrelationError

MAX_ORDER = 4


@dataclass(frozen=True)
class BleuResult:
    """BLEU-4 with its components.

    score = 100 * brevity_penalty * geometric mean of the four modified
    n-gram precisions; 0 when any (unsmoothed) precision is 0.
    """

    score: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hypothesis_length: int
    reference_length: int


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len == 0:
        return 0.0
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / hyp_len)


def _geometric_score(precisions: Sequence[float], bp: float) -> float:
    if bp == 0.0 or any(p == 0.0 for p in precisions):
        return 0.0
    return 100.0 * bp * math.exp(math.fsum(math.log(p) for p in precisions) / len(precisions))


def corpus_bleu(
    hypotheses: Sequence[list[str]], references: Sequence[list[str]]
) -> BleuResult:
    """Corpus-level BLEU-4, single reference, no smoothing.

    Clipped n-gram counts are pooled over all segments before the
    precisions are taken, so the result is invariant under permutation of
    the segment pairs. Empty individual hypotheses are allowed (they
    contribute nothing); an empty corpus is an error.
    """
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    if not hypotheses:
        raise ValueError("corpus_bleu requires at least one segment")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            if len(hyp) < n:
                break
            hyp_counts = _ngram_counts(hyp, n)
            ref_counts = _ngram_counts(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            matches[n - 1] += sum((hyp_counts & ref_counts).values())
    precisions = tuple(m / t if t else 0.0 for m, t in zip(matches, totals))
    bp = _brevity_penalty(hyp_len, ref_len)
    return BleuResult(_geometric_score(precisions, bp), precisions, bp, hyp_len, ref_len)


def sentence_bleu(hypothesis: list[str], reference: list[str]) -> BleuResult:
    """Sentence-level BLEU-4 with add-one smoothing for n >= 2.

    The unigram precision is unsmoothed, so a hypothesis sharing no word
    with the reference scores 0. For n >= 2 both numerator and denominator
    get +1; orders longer than the hypothesis therefore contribute a
    precision of (0+1)/(0+1) = 1. An empty hypothesis scores 0 with a
    brevity penalty of 0 by convention.
    """
    hyp_len = len(hypothesis)
    ref_len = len(reference)
    if hyp_len == 0:
        return BleuResult(0.0, (0.0, 0.0, 0.0, 0.0), 0.0, 0, ref_len)
    precisions = []
    for n in range(1, MAX_ORDER + 1):
        hyp_counts = _ngram_counts(hypothesis, n)
        ref_counts = _ngram_counts(reference, n)
        total = sum(hyp_counts.values())
        match = sum((hyp_counts & ref_counts).values())
        if n == 1:
            precisions.append(match / total)
        else:
            precisions.append((match + 1) / (total + 1))
    bp = _brevity_penalty(hyp_len, ref_len)
    return BleuResult(
        _geometric_score(precisions, bp), tuple(precisions), bp, hyp_len, ref_len
    )


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    t_statistic: float
    p_value: float


# Exact Student-t tails are used up to this sample size; beyond it a
# corrected normal approximation is accurate to well under 1e-4.
EXACT_T_MAX_N = 200


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Pearson correlation with a two-tailed p-value (n - 2 df).

    Requires n >= 3 and both vectors non-constant; the p-value uses the
    exact t distribution for n <= 200 and a normal approximation beyond.
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 3:
        raise ValueError(f"need at least 3 paired values, got {n}")
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        which = "both inputs are" if sxx == syy == 0.0 else (
            "xs is" if sxx == 0.0 else "ys is"
        )
        raise UndefinedCorrelationError(
            f"correlation undefined: {which} constant (zero variance)"
        )
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) >= 1.0:
        return CorrelationResult(r, n, math.inf if r > 0 else -math.inf, 0.0)
    t = r * math.sqrt(df / (1.0 - r * r))
    method = "exact" if n <= EXACT_T_MAX_N else "normal"
    return CorrelationResult(r, n, t, student_t_two_tailed(t, df, method=method))


def student_t_two_tailed(t: float, df: int, method: str = "exact") -> float:
    """Two-tailed P(|T| >= |t|) for Student's t with ``df`` degrees of
    freedom. ``method`` is "exact" (regularized incomplete beta via
    continued fraction) or "normal" (moment-corrected normal tail)."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if math.isinf(t):
        return 0.0
    if method == "exact":
        x = df / (df + t * t)
        return _betai(df / 2.0, 0.5, x)
    if method == "normal":
        ta = abs(t)
        z = ta * (1.0 - 1.0 / (4.0 * df)) / math.sqrt(1.0 + ta * ta / (2.0 * df))
        return math.erfc(z / math.sqrt(2.0))
    raise ValueError(f"unknown method {method!r}")


def _betai(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast only for x below the split
    # point; otherwise evaluate the complement.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _betacf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 3e-12) -> float:
    """Lentz continued-fraction evaluation for the incomplete beta."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")
