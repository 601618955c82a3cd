import os

import pytest

from deqe import cli
from deqe.cli import main

from helpers import write_lines


@pytest.fixture
def toy_corpus(tmp_path):
    src = tmp_path / "train.src"
    tgt = tmp_path / "train.tgt"
    raw = [("a b", "x y")] * 5 + [("a c", "x z")] * 5
    write_lines(src, [s for s, _ in raw])
    write_lines(tgt, [t for _, t in raw])
    return src, tgt


@pytest.fixture
def toy_wcm(tmp_path, toy_corpus):
    src, tgt = toy_corpus
    out = tmp_path / "toy.wcm"
    rc = main(
        [
            "build-wcm",
            "--source", str(src),
            "--target", str(tgt),
            "--out", str(out),
            "--min-cooc", "5",
            "--threads", "1",
            "--quiet",
        ]
    )
    assert rc == 0
    return out


def _data_lines(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


# ---------------------------------------------------------------------------
# exit-code discipline


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "SUBCOMMAND" in capsys.readouterr().out


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_required_flag_is_usage_error(capsys):
    assert main(["build-wcm"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err and "--out" in err


def test_missing_source_is_usage_error(tmp_path, capsys):
    assert main(["build-wcm", "--out", str(tmp_path / "o.wcm")]) == 1
    assert "--source" in capsys.readouterr().err


def test_tsv_conflicts_with_source(tmp_path, capsys):
    write_lines(tmp_path / "c.tsv", ["a\tx"])
    rc = main(
        [
            "vocab-stats",
            "--tsv", str(tmp_path / "c.tsv"),
            "--source", str(tmp_path / "c.tsv"),
            "--target", str(tmp_path / "c.tsv"),
        ]
    )
    assert rc == 1
    assert "--tsv" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 1


def test_mismatched_line_counts_exit_2(tmp_path, capsys):
    write_lines(tmp_path / "s", ["1", "2", "3"])
    write_lines(tmp_path / "t", ["1", "2", "3", "4"])
    rc = main(
        ["vocab-stats", "--source", str(tmp_path / "s"), "--target", str(tmp_path / "t")]
    )
    assert rc == 2
    err = capsys.readouterr().err
    assert "3" in err and "4" in err


def test_bad_wcm_file_exit_2(tmp_path, toy_corpus, capsys):
    src, tgt = toy_corpus
    bad = tmp_path / "bad.wcm"
    bad.write_text("#wcm v9\n")
    rc = main(
        ["score", "--wcm", str(bad), "--source", str(src), "--hypothesis", str(tgt)]
    )
    assert rc == 2
    assert "v9" in capsys.readouterr().err


def test_invalid_flag_values_exit_1(tmp_path, capsys):
    rc = main(
        [
            "filter",
            "--wcm", "w",
            "--source", "s",
            "--target", "t",
            "--min-de", "150",
            "--kept-prefix", "k",
            "--dropped-prefix", "d",
        ]
    )
    assert rc == 1
    assert "[0, 100]" in capsys.readouterr().err
    assert main(["histogram", "--scores", "s", "--bin-width", "7"]) == 1
    assert main(["bucket-eval", "--wcm", "w", "--source", "s", "--hypothesis", "h",
                 "--reference", "r", "--buckets", "oops"]) == 1


# ---------------------------------------------------------------------------
# vocab-stats


def test_vocab_stats_report(toy_corpus, capsys):
    src, tgt = toy_corpus
    rc = main(
        [
            "vocab-stats",
            "--source", str(src),
            "--target", str(tgt),
            "--thresholds", "1,5",
            "--quiet",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("# de-qe vocab-stats\n")
    rows = {tuple(line.split("\t")[:2]): line.split("\t")[2:] for line in _data_lines(out)}
    assert rows[("source", "vocab_size")][0] == "3"
    assert rows[("source", "token_count")][0] == "20"
    assert rows[("target", "types_freq_ge_5")][0] == "3"


def test_vocab_stats_tsv_variant(tmp_path, capsys):
    write_lines(tmp_path / "c.tsv", ["a b\tx y", "a\tx"])
    rc = main(["vocab-stats", "--tsv", str(tmp_path / "c.tsv"), "--quiet"])
    assert rc == 0
    out = capsys.readouterr().out
    rows = {tuple(line.split("\t")[:2]): line.split("\t")[2] for line in _data_lines(out)}
    assert rows[("source", "vocab_size")] == "2"
    assert rows[("target", "vocab_size")] == "2"


# ---------------------------------------------------------------------------
# build-wcm and score


def test_build_wcm_writes_valid_artifact(toy_wcm):
    text = toy_wcm.read_text()
    assert text.startswith("#wcm v1\n")
    assert "#min_cooccurrence 5\n" in text
    assert "a\tx\t10" in text


def test_build_wcm_byte_identical_across_threads(tmp_path, toy_corpus):
    src, tgt = toy_corpus
    outs = []
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}.wcm"
        rc = main(
            [
                "build-wcm",
                "--source", str(src),
                "--target", str(tgt),
                "--out", str(out),
                "--min-cooc", "2",
                "--threads", threads,
                "--quiet",
            ]
        )
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_score_report(tmp_path, toy_corpus, toy_wcm, capsys):
    src, tgt = toy_corpus
    rc = main(
        [
            "score",
            "--wcm", str(toy_wcm),
            "--source", str(src),
            "--hypothesis", str(tgt),
            "--quiet",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    lines = _data_lines(out)
    assert len(lines) == 10
    first = lines[0].split("\t")
    assert first[0] == "0"
    assert first[1] == "100.000000"
    assert first[2] == "2" and first[3] == "2"


def test_score_reverse_adds_column(tmp_path, toy_corpus, toy_wcm, capsys):
    src, tgt = toy_corpus
    rc = main(
        [
            "score",
            "--wcm", str(toy_wcm),
            "--source", str(src),
            "--hypothesis", str(tgt),
            "--reverse",
            "--quiet",
        ]
    )
    assert rc == 0
    lines = _data_lines(capsys.readouterr().out)
    assert all(len(line.split("\t")) == 5 for line in lines)


def test_score_out_file_and_rerun_identical(tmp_path, toy_corpus, toy_wcm):
    src, tgt = toy_corpus
    out1 = tmp_path / "scores1.tsv"
    out2 = tmp_path / "scores2.tsv"
    for out in (out1, out2):
        rc = main(
            [
                "score",
                "--wcm", str(toy_wcm),
                "--source", str(src),
                "--hypothesis", str(tgt),
                "--out", str(out),
                "--quiet",
            ]
        )
        assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_text().startswith("# de-qe score\n")


# ---------------------------------------------------------------------------
# bleu / correlate


def test_bleu_corpus_identity(tmp_path, capsys):
    write_lines(tmp_path / "h", ["the cat sat down", "a b c d"])
    write_lines(tmp_path / "r", ["the cat sat down", "a b c d"])
    rc = main(
        ["bleu", "--hypothesis", str(tmp_path / "h"), "--reference", str(tmp_path / "r")]
    )
    assert rc == 0
    row = _data_lines(capsys.readouterr().out)[0].split("\t")
    assert row[0] == "100.0000"


def test_bleu_sentence_level(tmp_path, capsys):
    write_lines(tmp_path / "h", ["a b c d", "x y"])
    write_lines(tmp_path / "r", ["a b c d", "a b"])
    rc = main(
        [
            "bleu",
            "--hypothesis", str(tmp_path / "h"),
            "--reference", str(tmp_path / "r"),
            "--sentence-level",
        ]
    )
    assert rc == 0
    lines = _data_lines(capsys.readouterr().out)
    assert lines[0] == "0\t100.000000"
    assert lines[1] == "1\t0.000000"


def test_bleu_empty_corpus_exit_2(tmp_path, capsys):
    write_lines(tmp_path / "h", [])
    write_lines(tmp_path / "r", [])
    rc = main(
        ["bleu", "--hypothesis", str(tmp_path / "h"), "--reference", str(tmp_path / "r")]
    )
    assert rc == 2


def test_correlate(tmp_path, capsys):
    write_lines(tmp_path / "x", ["1", "2", "3", "4", "5"])
    write_lines(tmp_path / "y", ["2", "1", "4", "3", "5"])
    rc = main(["correlate", "--x", str(tmp_path / "x"), "--y", str(tmp_path / "y")])
    assert rc == 0
    row = _data_lines(capsys.readouterr().out)[0].split("\t")
    assert row[0] == "0.800000"
    assert row[3] == "5"


def test_correlate_constant_exit_2(tmp_path, capsys):
    write_lines(tmp_path / "x", ["1", "1", "1"])
    write_lines(tmp_path / "y", ["2", "1", "4"])
    rc = main(["correlate", "--x", str(tmp_path / "x"), "--y", str(tmp_path / "y")])
    assert rc == 2
    assert "constant" in capsys.readouterr().err


def test_correlate_count_mismatch_exit_2(tmp_path):
    write_lines(tmp_path / "x", ["1", "2", "3"])
    write_lines(tmp_path / "y", ["2", "1"])
    assert main(["correlate", "--x", str(tmp_path / "x"), "--y", str(tmp_path / "y")]) == 2


# ---------------------------------------------------------------------------
# bucket-eval / histogram / filter


def test_bucket_eval_report(tmp_path, toy_wcm, capsys):
    # hypotheses identical to references and long enough for 4-gram BLEU
    write_lines(tmp_path / "bsrc", ["a b", "a c"])
    write_lines(tmp_path / "bhyp", ["x y x y", "x z x z"])
    rc = main(
        [
            "bucket-eval",
            "--wcm", str(toy_wcm),
            "--source", str(tmp_path / "bsrc"),
            "--hypothesis", str(tmp_path / "bhyp"),
            "--reference", str(tmp_path / "bhyp"),
            "--buckets", "<50,>=50",
            "--quiet",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    lines = _data_lines(out)
    assert lines[0].split("\t") == ["<50", "0", "NA"]
    assert lines[1].split("\t") == [">=50", "2", "100.00"]
    assert "# total_segments=2" in out


def test_bucket_eval_line_mismatch_exit_2(tmp_path, toy_corpus, toy_wcm):
    src, tgt = toy_corpus
    write_lines(tmp_path / "short", ["only one"])
    rc = main(
        [
            "bucket-eval",
            "--wcm", str(toy_wcm),
            "--source", str(src),
            "--hypothesis", str(tgt),
            "--reference", str(tmp_path / "short"),
        ]
    )
    assert rc == 2


def test_histogram_from_score_report(tmp_path, toy_corpus, toy_wcm, capsys):
    src, tgt = toy_corpus
    scores = tmp_path / "scores.tsv"
    main(
        [
            "score",
            "--wcm", str(toy_wcm),
            "--source", str(src),
            "--hypothesis", str(tgt),
            "--out", str(scores),
            "--quiet",
        ]
    )
    chart = tmp_path / "chart.svg"
    rc = main(
        ["histogram", "--scores", str(scores), "--bin-width", "10", "--chart", str(chart)]
    )
    assert rc == 0
    lines = _data_lines(capsys.readouterr().out)
    assert len(lines) == 10
    counts = [int(line.split("\t")[1]) for line in lines]
    assert sum(counts) == 10
    assert counts[-1] == 10  # all toy segments score 100
    assert "<svg" in chart.read_text()


def test_histogram_from_bare_reals(tmp_path, capsys):
    write_lines(tmp_path / "vals", ["0", "50", "100"])
    rc = main(["histogram", "--scores", str(tmp_path / "vals"), "--bin-width", "50"])
    assert rc == 0
    lines = _data_lines(capsys.readouterr().out)
    assert lines == ["0\t1", "50\t2"]


def test_histogram_bad_value_exit_2(tmp_path, capsys):
    write_lines(tmp_path / "vals", ["0", "oops"])
    assert main(["histogram", "--scores", str(tmp_path / "vals")]) == 2
    write_lines(tmp_path / "vals2", ["0", "120"])
    assert main(["histogram", "--scores", str(tmp_path / "vals2")]) == 2


def test_filter_outputs(tmp_path, toy_wcm, capsys):
    src = tmp_path / "mixed.src"
    tgt = tmp_path / "mixed.tgt"
    write_lines(src, ["a b", "a c", "nope at all"])
    write_lines(tgt, ["x y", "x z", "q r s"])
    rc = main(
        [
            "filter",
            "--wcm", str(toy_wcm),
            "--source", str(src),
            "--target", str(tgt),
            "--min-de", "50",
            "--kept-prefix", str(tmp_path / "kept"),
            "--dropped-prefix", str(tmp_path / "dropped"),
            "--quiet",
        ]
    )
    assert rc == 0
    assert (tmp_path / "kept.source").read_text().splitlines() == ["a b", "a c"]
    assert (tmp_path / "kept.target").read_text().splitlines() == ["x y", "x z"]
    assert (tmp_path / "dropped.source").read_text().splitlines() == ["nope at all"]
    assert (tmp_path / "dropped.target").read_text().splitlines() == ["q r s"]
    out = capsys.readouterr().out
    stats = dict(
        line.split("\t")[:2] for line in _data_lines(out) if not line.startswith("bin")
    )
    assert stats == {"total": "3", "kept": "2", "dropped": "1", "degenerate": "0"}
    bin_rows = [line for line in _data_lines(out) if line.startswith("bin")]
    assert sum(int(r.split("\t")[2]) for r in bin_rows) == 3


# ---------------------------------------------------------------------------
# threads resolution


def test_threads_env_fallback(monkeypatch):
    monkeypatch.delenv(cli.THREADS_ENV_VAR, raising=False)
    assert cli._resolve_threads(3) == 3
    assert cli._resolve_threads(None) == (os.cpu_count() or 1)
    monkeypatch.setenv(cli.THREADS_ENV_VAR, "7")
    assert cli._resolve_threads(None) == 7
    monkeypatch.setenv(cli.THREADS_ENV_VAR, "junk")
    with pytest.raises(Exception):
        cli._resolve_threads(None)


def test_threads_env_invalid_exit_1(tmp_path, toy_corpus, monkeypatch, capsys):
    src, tgt = toy_corpus
    monkeypatch.setenv(cli.THREADS_ENV_VAR, "banana")
    rc = main(
        [
            "build-wcm",
            "--source", str(src),
            "--target", str(tgt),
            "--out", str(tmp_path / "o.wcm"),
        ]
    )
    assert rc == 1
    assert "banana" in capsys.readouterr().err


def test_report_header_excludes_execution_knobs(tmp_path, toy_corpus, toy_wcm):
    src, tgt = toy_corpus
    out = tmp_path / "s.tsv"
    main(
        [
            "score",
            "--wcm", str(toy_wcm),
            "--source", str(src),
            "--hypothesis", str(tgt),
            "--out", str(out),
            "--quiet",
        ]
    )
    header = [l for l in out.read_text().splitlines() if l.startswith("#")]
    assert not any("threads" in line or "quiet" in line for line in header)
    assert any("lowercase=false" in line for line in header)
