"""Command-line entry points.

Subcommands: gen (synthetic corpora), preprocess (text to keyword sets),
run (spec file to results CSV), summarize (results CSV to summary CSV) and
lap-selftest (assignment solver verification).
"""

from __future__ import annotations

import argparse
import sys

from . import harness, pipeline
from .lap import lap_selftest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ihoplab",
        description="query-recovery experiments on encrypted-search leakage",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic document collection")
    gen.add_argument("--n", type=int, required=True, help="keyword count")
    gen.add_argument("--docs", type=int, required=True, help="document count")
    gen.add_argument("--zipf-exponent", type=float, default=1.0)
    gen.add_argument("--mixing", type=float, default=0.5)
    gen.add_argument("--avg-doc-len", type=float, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="collection output path")

    prep = sub.add_parser("preprocess", help="extract keyword sets from text")
    src = prep.add_mutually_exclusive_group(required=True)
    src.add_argument("--dir", help="directory of plain-text documents")
    src.add_argument("--lines", help="one-document-per-line file")
    prep.add_argument("--pattern", default="*.txt", help="glob for --dir")
    prep.add_argument("--stopwords", default=None, help="stopword file override")
    prep.add_argument("--min-len", type=int, default=3)
    prep.add_argument("--max-len", type=int, default=20)
    prep.add_argument("--top-k", type=int, default=3000)
    prep.add_argument(
        "--signature-marker", default=None,
        help="drop text from this marker to the end of each document",
    )
    prep.add_argument("--out", required=True, help="collection output path")
    prep.add_argument(
        "--keywords-out", default=None,
        help="also write the ranked stem list, one per line",
    )

    run = sub.add_parser("run", help="run a sweep spec into a results CSV")
    run.add_argument("specfile")
    run.add_argument("--out", required=True, help="results CSV (appended)")
    run.add_argument(
        "--fresh", action="store_true",
        help="overwrite the results CSV instead of appending",
    )

    summ = sub.add_parser("summarize", help="aggregate a results CSV")
    summ.add_argument("csvfile")
    summ.add_argument("--out", default=None, help="summary CSV (default stdout)")

    self_test = sub.add_parser(
        "lap-selftest", help="verify the assignment solver against brute force"
    )
    self_test.add_argument("--instances", type=int, default=1000)
    self_test.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_gen(args) -> int:
    docs = pipeline.generate_synthetic(
        args.n,
        args.docs,
        zipf_exponent=args.zipf_exponent,
        co_occurrence_mixing=args.mixing,
        avg_doc_len=args.avg_doc_len,
        seed=args.seed,
    )
    docs.save(args.out)
    print(f"wrote {docs.num_docs} documents over {docs.num_keywords} keywords "
          f"to {args.out}")
    return 0


def _cmd_preprocess(args) -> int:
    stopwords = pipeline.load_stopwords(args.stopwords)
    config = pipeline.CorpusConfig(
        stopwords=stopwords,
        min_len=args.min_len,
        max_len=args.max_len,
        top_k=args.top_k,
        signature_marker=args.signature_marker,
    )
    if args.dir:
        raw = pipeline.read_corpus_dir(args.dir, args.pattern)
    else:
        raw = pipeline.read_corpus_lines(args.lines)
    keywords, docs = pipeline.preprocess_corpus(raw, config)
    docs.save(args.out)
    if args.keywords_out:
        with open(args.keywords_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(keywords) + "\n")
    print(f"kept {len(keywords)} stems over {docs.num_docs} documents")
    return 0


def _cmd_run(args) -> int:
    specs = harness.parse_spec_file(args.specfile)
    total = 0
    append = not args.fresh
    for i, spec in enumerate(specs):
        rows = harness.run_experiment(spec)
        harness.write_rows(args.out, rows, append=append or i > 0)
        total += len(rows)
        print(
            f"[{i + 1}/{len(specs)}] {spec.scenario} {spec.attack} "
            f"vs {spec.defense}: {len(rows)} repetitions"
        )
    print(f"wrote {total} rows to {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    rows = harness.read_rows(args.csvfile)
    entries = harness.summarize(rows)
    if args.out:
        harness.write_summary(args.out, entries)
    else:
        harness.write_summary(sys.stdout, entries)
    return 0


def _cmd_lap_selftest(args) -> int:
    report = lap_selftest(num_instances=args.instances, seed=args.seed)
    print(
        f"{report['instances']} instances, {report['failures']} failures"
    )
    return 0 if report["failures"] == 0 else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "preprocess": _cmd_preprocess,
        "run": _cmd_run,
        "summarize": _cmd_summarize,
        "lap-selftest": _cmd_lap_selftest,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
