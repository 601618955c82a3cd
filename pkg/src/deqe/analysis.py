"""DE-range bucketing with per-bucket BLEU, DE histograms, DE-vs-BLEU
correlation, and DE-based corpus filtering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .corpus import SegmentPair, TokenizerConfig, load_parallel_corpus, tokenize
from .errors import UndefinedCorrelationError
from .metrics import BleuResult, CorrelationResult, corpus_bleu, pearson, sentence_bleu
from .scoring import DeScore, de_score
from .wcm import CooccurrenceMatrix

KIND_BELOW = "below"
KIND_AT_OR_ABOVE = "at_or_above"


@dataclass(frozen=True)
class BucketSpec:
    """One DE-score range: strictly below or at-or-above a threshold."""

    kind: str
    threshold: float

    def __post_init__(self) -> None:
        if self.kind not in (KIND_BELOW, KIND_AT_OR_ABOVE):
            raise ValueError(f"unknown bucket kind {self.kind!r}")
        if not 0.0 <= self.threshold <= 100.0:
            raise ValueError(f"bucket threshold {self.threshold} outside [0, 100]")

    @classmethod
    def parse(cls, text: str) -> "BucketSpec":
        text = text.strip()
        if text.startswith(">="):
            return cls(KIND_AT_OR_ABOVE, float(text[2:]))
        if text.startswith("<"):
            return cls(KIND_BELOW, float(text[1:]))
        raise ValueError(f"cannot parse bucket {text!r}; expected '<N' or '>=N'")

    def contains(self, value: float) -> bool:
        if self.kind == KIND_BELOW:
            return value < self.threshold
        return value >= self.threshold

    @property
    def label(self) -> str:
        op = "<" if self.kind == KIND_BELOW else ">="
        return f"{op}{self.threshold:g}"


DEFAULT_BUCKETS: tuple[BucketSpec, ...] = tuple(
    [BucketSpec(KIND_BELOW, t) for t in (20, 30, 40, 50)]
    + [BucketSpec(KIND_AT_OR_ABOVE, t) for t in (50, 60, 70, 80, 90)]
)


@dataclass(frozen=True)
class BucketRow:
    spec: BucketSpec
    segment_count: int
    bleu: BleuResult | None


@dataclass(frozen=True)
class BucketReport:
    rows: tuple[BucketRow, ...]
    total_segments: int
    degenerate_segments: int


def bucket_eval(
    scores: Sequence[DeScore],
    hypotheses: Sequence[list[str]],
    references: Sequence[list[str]],
    buckets: Sequence[BucketSpec] = DEFAULT_BUCKETS,
) -> BucketReport:
    """Corpus BLEU over the segments falling in each DE bucket.

    Degenerate (no eligible token) segments participate at value 0 and are
    counted separately in the report. An empty bucket reports no BLEU.
    """
    if not (len(scores) == len(hypotheses) == len(references)):
        raise ValueError(
            f"misaligned inputs: {len(scores)} scores, {len(hypotheses)} hypotheses, "
            f"{len(references)} references"
        )
    rows = []
    for spec in buckets:
        members = [i for i, s in enumerate(scores) if spec.contains(s.value)]
        bleu = None
        if members:
            bleu = corpus_bleu(
                [hypotheses[i] for i in members], [references[i] for i in members]
            )
        rows.append(BucketRow(spec, len(members), bleu))
    degenerate = sum(1 for s in scores if s.degenerate)
    return BucketReport(tuple(rows), len(scores), degenerate)


@dataclass(frozen=True)
class HistogramReport:
    """Counts of scores per half-open bin [k*w, (k+1)*w); the final bin is
    closed at 100 so a perfect score lands in it."""

    bin_width: float
    bins: tuple[tuple[float, int], ...]

    @property
    def total(self) -> int:
        return sum(c for _, c in self.bins)


def _bin_count(bin_width: float) -> int:
    if bin_width <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    n_bins = round(100.0 / bin_width)
    if n_bins < 1 or abs(n_bins * bin_width - 100.0) > 1e-9:
        raise ValueError(f"bin width {bin_width} does not divide 100 evenly")
    return n_bins


def histogram(
    scores: Iterable[DeScore | float], bin_width: float = 5.0
) -> HistogramReport:
    """Distribution of DE scores over [0, 100] in equal bins."""
    n_bins = _bin_count(bin_width)
    counts = [0] * n_bins
    for s in scores:
        v = s.value if isinstance(s, DeScore) else float(s)
        if not 0.0 <= v <= 100.0:
            raise ValueError(f"score {v} outside [0, 100]")
        counts[min(int(v // bin_width), n_bins - 1)] += 1
    return HistogramReport(bin_width, tuple((i * bin_width, c) for i, c in enumerate(counts)))


def render_histogram_svg(report: HistogramReport, width: int = 640, height: int = 400) -> str:
    """A minimal deterministic SVG bar chart; the TSV report remains the
    data contract, this is a convenience rendering."""
    margin = 40
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    peak = max((c for _, c in report.bins), default=0) or 1
    n = len(report.bins)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
    ]
    for i, (lower, count) in enumerate(report.bins):
        bar_h = plot_h * count / peak
        x = margin + plot_w * i / n
        y = height - margin - bar_h
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{plot_w / n:.2f}" '
            f'height="{bar_h:.2f}" fill="steelblue" stroke="black" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{height - margin + 14}" font-size="9">{lower:g}</text>'
        )
    parts.append(
        f'<text x="{margin}" y="{margin - 8}" font-size="10">count (max {peak})</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def correlate_de_bleu(
    scores: Sequence[DeScore],
    hypotheses: Sequence[list[str]],
    references: Sequence[list[str]],
) -> CorrelationResult:
    """Pearson correlation between DE scores and per-segment sentence BLEU."""
    if not (len(scores) == len(hypotheses) == len(references)):
        raise ValueError(
            f"misaligned inputs: {len(scores)} scores, {len(hypotheses)} hypotheses, "
            f"{len(references)} references"
        )
    de_values = [s.value for s in scores]
    bleu_values = [sentence_bleu(h, r).score for h, r in zip(hypotheses, references)]
    try:
        return pearson(de_values, bleu_values)
    except UndefinedCorrelationError as exc:
        raise UndefinedCorrelationError(
            f"DE-vs-BLEU correlation undefined: {exc}"
        ) from None


@dataclass(frozen=True)
class FilterDecision:
    pair: SegmentPair
    de: DeScore
    kept: bool


@dataclass(frozen=True)
class FilterSummary:
    total: int
    kept: int
    dropped: int
    degenerate: int
    min_de: float
    histogram: HistogramReport


def iter_filter(
    matrix: CooccurrenceMatrix,
    pairs: Iterable[SegmentPair],
    min_de: float,
    *,
    tokenizer: TokenizerConfig = TokenizerConfig(),
    by_type: bool = False,
) -> Iterator[FilterDecision]:
    """Score each pair (target side as hypothesis) and decide keep/drop.

    Streams in input order; pairs with DE >= min_de are kept.
    """
    if not 0.0 <= min_de <= 100.0:
        raise ValueError(f"min_de {min_de} outside [0, 100]")
    for pair in pairs:
        de = de_score(
            matrix,
            tokenize(pair.source, tokenizer),
            tokenize(pair.target, tokenizer),
            by_type=by_type,
        )
        yield FilterDecision(pair, de, de.value >= min_de)


def filter_corpus(
    matrix: CooccurrenceMatrix,
    source_path,
    target_path,
    min_de: float,
    *,
    tokenizer: TokenizerConfig = TokenizerConfig(),
    by_type: bool = False,
    bin_width: float = 5.0,
) -> tuple[list[SegmentPair], list[SegmentPair], FilterSummary]:
    """Split an aligned corpus into kept/dropped by DE score.

    Returns (kept pairs, dropped pairs, summary); the two lists partition
    the input and each preserves input order. The summary carries the DE
    histogram of the whole input.
    """
    kept: list[SegmentPair] = []
    dropped: list[SegmentPair] = []
    values: list[float] = []
    degenerate = 0
    for decision in iter_filter(
        matrix,
        load_parallel_corpus(source_path, target_path),
        min_de,
        tokenizer=tokenizer,
        by_type=by_type,
    ):
        values.append(decision.de.value)
        if decision.de.degenerate:
            degenerate += 1
        (kept if decision.kept else dropped).append(decision.pair)
    summary = FilterSummary(
        total=len(values),
        kept=len(kept),
        dropped=len(dropped),
        degenerate=degenerate,
        min_de=min_de,
        histogram=histogram(values, bin_width),
    )
    return kept, dropped, summary
