"""Command-line interface: one binary, eight subcommands.

Exit codes: 0 success, 1 usage error (usage text on stderr), 2 data error
(mismatched files, format violations). Diagnostics go to stderr; report
data goes to stdout or --out. Every report starts with '#' comment lines
echoing the resolved run configuration, so a run can be reproduced from
its output; execution-only knobs (--threads, --quiet, --out) are left out
so thread count and destination never change report bytes.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from typing import Iterable, Iterator, Sequence, TextIO

from . import __version__
from .analysis import (
    DEFAULT_BUCKETS,
    BucketSpec,
    HistogramReport,
    _bin_count,
    bucket_eval,
    histogram,
    iter_filter,
    render_histogram_svg,
)
from .corpus import (
    SegmentPair,
    TokenizerConfig,
    build_parallel_vocabularies,
    load_parallel_corpus,
    load_tsv_corpus,
    tokenize,
    vocab_stats,
)
from .errors import AlignmentError, DataError, UsageError
from .metrics import corpus_bleu, pearson, sentence_bleu
from .scoring import de_score, score_file
from .wcm import COUNT_MODES, WcmConfig, build_wcm, load_wcm, save_wcm

log = logging.getLogger(__name__)

PROG = "de-qe"
THREADS_ENV_VAR = "DE_QE_THREADS"
PROGRESS_EVERY = 100_000

# Namespace entries that configure execution rather than the computation;
# they are excluded from report headers so identical analyses emit
# identical bytes regardless of thread count or destination.
_EXECUTION_KEYS = {"handler", "parser", "subcommand", "threads", "quiet", "out"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, usage=self.format_usage())


class _StderrLogHandler(logging.Handler):
    """Resolves sys.stderr at emit time so captured streams still work."""

    def emit(self, record):
        sys.stderr.write(self.format(record) + "\n")


def _setup_logging(quiet: bool) -> None:
    logger = logging.getLogger("deqe")
    logger.setLevel(logging.WARNING if quiet else logging.INFO)
    if not logger.handlers:
        handler = _StderrLogHandler()
        handler.setFormatter(logging.Formatter(f"{PROG}: %(message)s"))
        logger.addHandler(handler)
    logger.propagate = False


def _format_param(value: object) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:g}"
    if isinstance(value, (list, tuple)):
        return ",".join(_format_param(v) for v in value)
    if isinstance(value, BucketSpec):
        return value.label
    return str(value)


def config_header(args: argparse.Namespace) -> list[str]:
    lines = [f"# {PROG} {args.subcommand}"]
    for key, value in sorted(vars(args).items()):
        if key in _EXECUTION_KEYS:
            continue
        lines.append(f"# {key}={_format_param(value)}")
    return lines


@contextlib.contextmanager
def _open_out(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _write_report(fh: TextIO, args: argparse.Namespace, rows: Iterable[str]) -> None:
    for line in config_header(args):
        fh.write(line + "\n")
    for row in rows:
        fh.write(row + "\n")


def _resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get(THREADS_ENV_VAR)
        if env:
            try:
                value = int(env)
            except ValueError:
                raise UsageError(f"invalid {THREADS_ENV_VAR} value: {env!r}") from None
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise UsageError("--threads must be >= 1")
    return value


def _tokenizer(args: argparse.Namespace) -> TokenizerConfig:
    return TokenizerConfig(lowercase=args.lowercase, strip_punct=args.strip_punct)


def _open_corpus(args: argparse.Namespace) -> Iterator[SegmentPair]:
    if args.tsv is not None:
        if args.source or args.target:
            raise UsageError("--tsv cannot be combined with --source/--target")
        return load_tsv_corpus(args.tsv)
    if not args.source or not args.target:
        raise UsageError("either --tsv or both --source and --target are required")
    return load_parallel_corpus(args.source, args.target)


def _read_lines(path) -> list[str]:
    from .corpus import _iter_lines

    return list(_iter_lines(path))


def _read_reals(path) -> list[float]:
    values = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise DataError(f"{path}: line {lineno}: not a number: {text!r}") from None
    return values


def _read_scores_column(path) -> list[float]:
    """Read DE values from a score report (column 2) or a bare
    one-real-per-line file; '#' comment lines are skipped."""
    values = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        text = fields[1] if len(fields) >= 2 else fields[0]
        try:
            v = float(text)
        except ValueError:
            raise DataError(f"{path}: line {lineno}: not a score: {text!r}") from None
        if not 0.0 <= v <= 100.0:
            raise DataError(f"{path}: line {lineno}: score {v:g} outside [0, 100]")
        values.append(v)
    return values


# ---------------------------------------------------------------------------
# argparse value types


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _score_value(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 100.0:
        raise argparse.ArgumentTypeError("must be in [0, 100]")
    return value


def _bin_width(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    try:
        _bin_count(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return value


def _threshold_list(text: str) -> list[int]:
    try:
        values = [int(piece) for piece in text.split(",") if piece.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("thresholds must be positive integers")
    return values


def _bucket_list(text: str) -> list[BucketSpec]:
    try:
        buckets = [BucketSpec.parse(piece) for piece in text.split(",") if piece.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not buckets:
        raise argparse.ArgumentTypeError("no buckets given")
    return buckets


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_vocab_stats(args: argparse.Namespace) -> int:
    tokenizer = _tokenizer(args)
    source_vocab, target_vocab, n = build_parallel_vocabularies(_open_corpus(args), tokenizer)
    log.info("vocab-stats: %d segments read", n)
    rows = []
    for vocab in (source_vocab, target_vocab):
        stats = vocab_stats(vocab, args.thresholds, args.hifreq_cutoff)
        side = stats.side
        rows.append(f"{side}\tvocab_size\t{stats.vocab_size}\t-")
        rows.append(f"{side}\ttoken_count\t{stats.token_count}\t-")
        for line in stats.thresholds:
            rows.append(
                f"{side}\ttypes_freq_ge_{line.threshold}\t{line.at_or_above}\t"
                f"{stats.pct_of_vocab(line.at_or_above):.2f}"
            )
            rows.append(
                f"{side}\ttypes_freq_lt_{line.threshold}\t{line.below}\t"
                f"{stats.pct_of_vocab(line.below):.2f}"
            )
        rows.append(
            f"{side}\ttypes_freq_eq_1\t{stats.singleton_types}\t"
            f"{stats.pct_of_vocab(stats.singleton_types):.2f}"
        )
        rows.append(
            f"{side}\thifreq_type_count\t{len(stats.hifreq_types)}\t"
            f"{stats.pct_of_vocab(len(stats.hifreq_types)):.2f}"
        )
        rows.append(f"{side}\thifreq_types\t{' '.join(stats.hifreq_types)}\t-")
    with _open_out(args.out) as fh:
        _write_report(fh, args, rows)
    return 0


def cmd_build_wcm(args: argparse.Namespace) -> int:
    tokenizer = _tokenizer(args)
    threads = _resolve_threads(args.threads)
    config = WcmConfig(
        min_cooccurrence=args.min_cooc,
        hifreq_cutoff=args.hifreq_cutoff,
        count_mode=args.count_mode,
    )
    log.info("build-wcm: pass 1, building vocabularies")
    source_vocab, target_vocab, n = build_parallel_vocabularies(_open_corpus(args), tokenizer)
    log.info(
        "build-wcm: %d segments, %d source types, %d target types",
        n,
        len(source_vocab),
        len(target_vocab),
    )
    log.info("build-wcm: pass 2, counting co-occurrences (threads=%d)", threads)
    pairs = (
        (tokenize(p.source, tokenizer), tokenize(p.target, tokenizer))
        for p in _open_corpus(args)
    )
    matrix = build_wcm(pairs, source_vocab, target_vocab, config, threads=threads)
    save_wcm(matrix, args.out)
    log.info(
        "build-wcm: wrote %d entries to %s (excluded %d source / %d target types)",
        matrix.n_entries,
        args.out,
        len(matrix.excluded_source),
        len(matrix.excluded_target),
    )
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    matrix = load_wcm(args.wcm)
    tokenizer = _tokenizer(args)
    stream = score_file(
        matrix,
        args.source,
        args.hypothesis,
        tokenizer=tokenizer,
        reverse=args.reverse,
        by_type=args.by_type,
    )
    with _open_out(args.out) as fh:
        for line in config_header(args):
            fh.write(line + "\n")
        columns = "index\tde\teligible\tevidenced"
        if args.reverse:
            columns += "\treverse_de"
        fh.write("# columns: " + columns.replace("\t", " ") + "\n")
        for seg in stream:
            row = f"{seg.index}\t{seg.de.value:.6f}\t{seg.de.eligible}\t{seg.de.evidenced}"
            if seg.reverse_de is not None:
                row += f"\t{seg.reverse_de.value:.6f}"
            fh.write(row + "\n")
    return 0


def cmd_bleu(args: argparse.Namespace) -> int:
    tokenizer = _tokenizer(args)
    pairs = [
        (tokenize(p.source, tokenizer), tokenize(p.target, tokenizer))
        for p in load_parallel_corpus(args.hypothesis, args.reference)
    ]
    if not pairs:
        raise DataError("empty corpus: no segments to score")
    hyps = [h for h, _ in pairs]
    refs = [r for _, r in pairs]
    rows = []
    if args.sentence_level:
        rows.append("# columns: index bleu")
        for i, (h, r) in enumerate(zip(hyps, refs)):
            rows.append(f"{i}\t{sentence_bleu(h, r).score:.6f}")
    else:
        result = corpus_bleu(hyps, refs)
        rows.append("# columns: bleu p1 p2 p3 p4 brevity_penalty hyp_len ref_len")
        p1, p2, p3, p4 = result.precisions
        rows.append(
            f"{result.score:.4f}\t{p1:.6f}\t{p2:.6f}\t{p3:.6f}\t{p4:.6f}\t"
            f"{result.brevity_penalty:.6f}\t{result.hypothesis_length}\t"
            f"{result.reference_length}"
        )
    with _open_out(args.out) as fh:
        _write_report(fh, args, rows)
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    xs = _read_reals(args.x)
    ys = _read_reals(args.y)
    if len(xs) != len(ys):
        raise AlignmentError(
            f"value count mismatch: {args.x} has {len(xs)} values, "
            f"{args.y} has {len(ys)} values"
        )
    if len(xs) < 3:
        raise DataError(f"need at least 3 paired values, found {len(xs)}")
    result = pearson(xs, ys)
    rows = [
        "# columns: r t_statistic p_value n",
        f"{result.r:.6f}\t{result.t_statistic:.4f}\t{result.p_value:.6g}\t{result.n}",
    ]
    with _open_out(args.out) as fh:
        _write_report(fh, args, rows)
    return 0


def cmd_bucket_eval(args: argparse.Namespace) -> int:
    matrix = load_wcm(args.wcm)
    tokenizer = _tokenizer(args)
    sources = _read_lines(args.source)
    hypotheses = _read_lines(args.hypothesis)
    references = _read_lines(args.reference)
    if not (len(sources) == len(hypotheses) == len(references)):
        raise AlignmentError(
            f"line count mismatch: {args.source} has {len(sources)} lines, "
            f"{args.hypothesis} has {len(hypotheses)} lines, "
            f"{args.reference} has {len(references)} lines"
        )
    hyp_tokens = [tokenize(h, tokenizer) for h in hypotheses]
    ref_tokens = [tokenize(r, tokenizer) for r in references]
    scores = [
        de_score(matrix, tokenize(s, tokenizer), h, by_type=args.by_type)
        for s, h in zip(sources, hyp_tokens)
    ]
    report = bucket_eval(scores, hyp_tokens, ref_tokens, args.buckets)
    rows = [
        f"# total_segments={report.total_segments}",
        f"# degenerate_segments={report.degenerate_segments}",
        "# columns: bucket segments bleu",
    ]
    for row in report.rows:
        bleu = f"{row.bleu.score:.2f}" if row.bleu is not None else "NA"
        rows.append(f"{row.spec.label}\t{row.segment_count}\t{bleu}")
    with _open_out(args.out) as fh:
        _write_report(fh, args, rows)
    return 0


def _histogram_rows(report: HistogramReport) -> list[str]:
    rows = ["# columns: bin_lower count"]
    rows += [f"{lower:g}\t{count}" for lower, count in report.bins]
    return rows


def cmd_histogram(args: argparse.Namespace) -> int:
    values = _read_scores_column(args.scores)
    report = histogram(values, args.bin_width)
    with _open_out(args.out) as fh:
        _write_report(fh, args, _histogram_rows(report))
    if args.chart:
        with open(args.chart, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_histogram_svg(report))
    return 0


def cmd_filter(args: argparse.Namespace) -> int:
    matrix = load_wcm(args.wcm)
    tokenizer = _tokenizer(args)
    kept = dropped = degenerate = total = 0
    n_bins = _bin_count(args.bin_width)
    counts = [0] * n_bins
    with contextlib.ExitStack() as stack:
        kept_src = stack.enter_context(
            open(f"{args.kept_prefix}.source", "w", encoding="utf-8", newline="\n")
        )
        kept_tgt = stack.enter_context(
            open(f"{args.kept_prefix}.target", "w", encoding="utf-8", newline="\n")
        )
        drop_src = stack.enter_context(
            open(f"{args.dropped_prefix}.source", "w", encoding="utf-8", newline="\n")
        )
        drop_tgt = stack.enter_context(
            open(f"{args.dropped_prefix}.target", "w", encoding="utf-8", newline="\n")
        )
        for decision in iter_filter(
            matrix,
            _open_corpus(args),
            args.min_de,
            tokenizer=tokenizer,
            by_type=args.by_type,
        ):
            total += 1
            counts[min(int(decision.de.value // args.bin_width), n_bins - 1)] += 1
            if decision.de.degenerate:
                degenerate += 1
            if decision.kept:
                kept += 1
                kept_src.write(decision.pair.source + "\n")
                kept_tgt.write(decision.pair.target + "\n")
            else:
                dropped += 1
                drop_src.write(decision.pair.source + "\n")
                drop_tgt.write(decision.pair.target + "\n")
            if total % PROGRESS_EVERY == 0:
                log.info("filter: %d segments scored", total)
    bins = tuple((i * args.bin_width, c) for i, c in enumerate(counts))
    report = HistogramReport(args.bin_width, bins)
    rows = [
        "# columns: stat value",
        f"total\t{total}",
        f"kept\t{kept}",
        f"dropped\t{dropped}",
        f"degenerate\t{degenerate}",
        "# columns: bin bin_lower count",
    ]
    rows += [f"bin\t{lower:g}\t{count}" for lower, count in report.bins]
    with _open_out(args.out) as fh:
        _write_report(fh, args, rows)
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_tokenizer_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lowercase", action="store_true", help="case-fold tokens")
    p.add_argument(
        "--strip-punct",
        action="store_true",
        help="strip leading/trailing punctuation from tokens",
    )


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", help="source-side file, one segment per line")
    p.add_argument("--target", help="target-side file, one segment per line")
    p.add_argument("--tsv", help="single corpus file, source TAB target per line")


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")

    parser = _Parser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser(
        "vocab-stats",
        parents=[common],
        help="per-side vocabulary frequency statistics",
    )
    _add_corpus_args(p)
    _add_tokenizer_args(p)
    p.add_argument("--thresholds", type=_threshold_list, default=[1, 5, 10, 20])
    p.add_argument("--hifreq-cutoff", type=_positive_int, default=10_000)
    p.add_argument("--out", help="write report here instead of stdout")
    p.set_defaults(handler=cmd_vocab_stats)

    p = sub.add_parser(
        "build-wcm",
        parents=[common],
        help="build and serialize the co-occurrence matrix",
    )
    _add_corpus_args(p)
    _add_tokenizer_args(p)
    p.add_argument("--out", required=True, help="output WCM file")
    p.add_argument("--min-cooc", type=_positive_int, default=20)
    p.add_argument("--hifreq-cutoff", type=_positive_int, default=10_000)
    p.add_argument("--count-mode", choices=COUNT_MODES, default="binary")
    p.add_argument("--threads", type=_positive_int, default=None)
    p.set_defaults(handler=cmd_build_wcm)

    p = sub.add_parser(
        "score", parents=[common], help="per-segment Direct Evidence scores"
    )
    p.add_argument("--wcm", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--hypothesis", required=True)
    _add_tokenizer_args(p)
    p.add_argument("--reverse", action="store_true", help="add reverse (TL-to-SL) scores")
    p.add_argument("--by-type", action="store_true", help="count types, not tokens")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("bleu", parents=[common], help="corpus or sentence-level BLEU")
    p.add_argument("--hypothesis", required=True)
    p.add_argument("--reference", required=True)
    _add_tokenizer_args(p)
    p.add_argument("--sentence-level", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_bleu)

    p = sub.add_parser(
        "correlate", parents=[common], help="Pearson correlation of two value files"
    )
    p.add_argument("--x", required=True, help="file with one real per line")
    p.add_argument("--y", required=True, help="file with one real per line")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_correlate)

    p = sub.add_parser(
        "bucket-eval",
        parents=[common],
        help="per-DE-bucket segment counts and BLEU",
    )
    p.add_argument("--wcm", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--hypothesis", required=True)
    p.add_argument("--reference", required=True)
    _add_tokenizer_args(p)
    p.add_argument(
        "--buckets",
        type=_bucket_list,
        default=list(DEFAULT_BUCKETS),
        help='comma-separated specs like "<20,<50,>=50,>=80"',
    )
    p.add_argument("--by-type", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_bucket_eval)

    p = sub.add_parser("histogram", parents=[common], help="DE score histogram")
    p.add_argument(
        "--scores",
        required=True,
        help="score report (column 2) or one real per line",
    )
    p.add_argument("--bin-width", type=_bin_width, default=5.0)
    p.add_argument("--chart", help="also render an SVG bar chart here")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_histogram)

    p = sub.add_parser(
        "filter", parents=[common], help="split a corpus into kept/dropped by DE"
    )
    p.add_argument("--wcm", required=True)
    _add_corpus_args(p)
    _add_tokenizer_args(p)
    p.add_argument("--min-de", type=_score_value, required=True)
    p.add_argument("--kept-prefix", required=True)
    p.add_argument("--dropped-prefix", required=True)
    p.add_argument("--by-type", action="store_true")
    p.add_argument("--bin-width", type=_bin_width, default=5.0)
    p.add_argument("--out", help="write the summary report here instead of stdout")
    p.set_defaults(handler=cmd_filter)

    for sp in sub.choices.values():
        sp.set_defaults(parser=sp)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        sys.stderr.write(err.usage)
        sys.stderr.write(f"{PROG}: error: {err}\n")
        return 1
    except SystemExit as exc:  # argparse --help / --version
        return int(exc.code or 0)
    _setup_logging(quiet=args.quiet)
    try:
        return args.handler(args)
    except UsageError as err:
        usage = err.usage or getattr(args, "parser", parser).format_usage()
        sys.stderr.write(usage)
        sys.stderr.write(f"{PROG}: error: {err}\n")
        return 1
    except DataError as err:
        sys.stderr.write(f"{PROG}: error: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
