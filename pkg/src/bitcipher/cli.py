"""Command-line pipeline: count, embed, postproc, probe, export."""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .cipher import build_cipher, build_noise_model, save_cipher
from .cooc import ContextConfig, EmbeddingMatrix, EmbeddingMeta, embed_corpus
from .corpus import (TokenizerConfig, build_vocabulary, count_corpus,
                     read_frequency_table, stream_tokens,
                     write_frequency_table)
from .embedio import (read_embeddings, row_tokens, vocabulary_from_tokens,
                      write_embeddings_binary, write_embeddings_text)
from .manifest import Manifest, manifest_path, write_manifest, sha256_file
from .postprocess import DEFAULT_EPSILON, pipeline
from .probe import ProbeHyperparams, evaluate_probe, load_conll, train_probe

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def _add_tokenizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-lowercase", action="store_true",
                        help="keep original casing")
    parser.add_argument("--no-split-punct", action="store_true",
                        help="split on whitespace only")
    parser.add_argument("--doc-boundary", choices=("line", "blank"),
                        default="line",
                        help="document boundary rule (default: %(default)s)")


def _tokenizer_config(args) -> TokenizerConfig:
    return TokenizerConfig(lowercase=not args.no_lowercase,
                           split_punctuation=not args.no_split_punct,
                           doc_boundary=args.doc_boundary)


def _tokenizer_dict(config: TokenizerConfig) -> dict:
    return {
        "lowercase": config.lowercase,
        "split_punctuation": config.split_punctuation,
        "doc_boundary": config.doc_boundary,
    }


def _new_manifest(command: str, config: dict) -> Manifest:
    return Manifest(command=command, version=__version__, config=config)


def cmd_count(args) -> int:
    config = _tokenizer_config(args)
    table = count_corpus(args.corpus, config, workers=args.threads)
    write_frequency_table(table, args.out)
    manifest = _new_manifest("count", {
        "tokenizer": _tokenizer_dict(config),
        "threads": args.threads,
    })
    manifest.record_input("corpus", args.corpus)
    manifest.record_output("frequencies", args.out)
    write_manifest(manifest, manifest_path(args.out))
    print(f"counted {table.total_tokens} tokens in {table.total_documents} "
          f"documents ({len(table.counts)} distinct) -> {args.out}")
    return EXIT_OK


def cmd_embed(args) -> int:
    config = _tokenizer_config(args)
    table = read_frequency_table(args.freq)
    vocab = build_vocabulary(table, args.bits, max_vocab=args.max_vocab)
    if vocab.size < len(table.counts):
        print(f"warning: vocabulary truncated to {vocab.size} of "
              f"{len(table.counts)} distinct tokens "
              f"(capacity 2^{args.bits} - 1)", file=sys.stderr)
    pair = build_cipher(vocab.size, args.bits)
    noise = build_noise_model(table, vocab, pair, mode=args.dtype)
    context = ContextConfig(radius=args.radius, mode=args.mode,
                            log_weighting=args.log,
                            include_center=args.include_center)
    digest = sha256_file(args.corpus)
    matrix = embed_corpus(stream_tokens(args.corpus, config), vocab, pair,
                          noise, context, corpus_digest=digest)
    report = None
    if args.postproc:
        matrix, report = pipeline(matrix, epsilon=args.epsilon)

    manifest = _new_manifest("embed", {
        "bits": args.bits,
        "radius": args.radius,
        "mode": args.mode,
        "log": args.log,
        "dtype": args.dtype,
        "include_center": args.include_center,
        "max_vocab": args.max_vocab,
        "postproc": args.postproc,
        "epsilon": args.epsilon if args.postproc else None,
        "format": args.format,
        "tokenizer": _tokenizer_dict(config),
        "meta": matrix.meta.to_dict(),
    })
    manifest.record_input("corpus", args.corpus)
    manifest.record_input("frequencies", args.freq)

    tokens = row_tokens(vocab)
    if args.format == "text":
        write_embeddings_text(matrix.rows, tokens, args.out)
    else:
        write_embeddings_binary(matrix.rows, tokens, args.out)
    manifest.record_output("embeddings", args.out)
    if args.save_cipher:
        save_cipher(pair, args.save_cipher, mode=args.dtype)
        manifest.record_output("cipher", args.save_cipher)
    if report is not None:
        report_file = Path(str(args.out) + ".report.json")
        with open(report_file, "w", encoding="utf-8") as out:
            json.dump(report.to_dict(), out, indent=2, sort_keys=True)
            out.write("\n")
        manifest.record_output("postproc_report", report_file)
    write_manifest(manifest, manifest_path(args.out))
    print(f"embedded {vocab.size}+oov rows at dimension {matrix.dim} "
          f"-> {args.out}")
    return EXIT_OK


def cmd_postproc(args) -> int:
    rows, tokens = read_embeddings(args.embeddings)
    matrix = EmbeddingMatrix(np.asarray(rows, dtype=np.float64),
                             EmbeddingMeta(bits=rows.shape[1]))
    refined, report = pipeline(matrix, epsilon=args.epsilon,
                               row_mean=args.row_mean)
    if args.format == "text":
        write_embeddings_text(refined.rows, tokens, args.out)
    else:
        write_embeddings_binary(refined.rows, tokens, args.out)
    report_file = Path(str(args.out) + ".report.json")
    with open(report_file, "w", encoding="utf-8") as out:
        json.dump(report.to_dict(), out, indent=2, sort_keys=True)
        out.write("\n")
    manifest = _new_manifest("postproc", {
        "epsilon": args.epsilon,
        "row_mean": args.row_mean,
        "format": args.format,
    })
    manifest.record_input("embeddings", args.embeddings)
    manifest.record_output("embeddings", args.out)
    manifest.record_output("report", report_file)
    write_manifest(manifest, manifest_path(args.out))
    print(f"postprocessed {rows.shape[0]} rows ({', '.join(report.steps)}) "
          f"-> {args.out}")
    return EXIT_OK


def cmd_probe(args) -> int:
    rows, tokens = read_embeddings(args.embeddings)
    vocab = vocabulary_from_tokens(tokens)
    matrix = EmbeddingMatrix(np.asarray(rows, dtype=np.float64),
                             EmbeddingMeta(bits=rows.shape[1]))
    train = load_conll(args.train, args.token_column, args.label_column, "train")
    dev = load_conll(args.dev, args.token_column, args.label_column, "dev")
    test = load_conll(args.test, args.token_column, args.label_column, "test")
    hp = ProbeHyperparams(hidden=args.hidden, dropout=args.dropout,
                          learning_rate=args.lr, momentum=args.momentum,
                          batch_size=args.batch_size, epochs=args.epochs,
                          patience=args.patience, seed=args.seed)
    model = train_probe(matrix, vocab, train, dev, hp)
    metrics = evaluate_probe(model, matrix, vocab, test)
    print(metrics.summary_line())
    payload = metrics.to_dict()
    payload["hyperparams"] = hp.to_dict()
    with open(args.metrics_out, "w", encoding="utf-8") as out:
        json.dump(payload, out, indent=2, sort_keys=True)
        out.write("\n")
    manifest = _new_manifest("probe", {"hyperparams": hp.to_dict(),
                                       "token_column": args.token_column,
                                       "label_column": args.label_column})
    manifest.record_input("embeddings", args.embeddings)
    manifest.record_input("train", args.train)
    manifest.record_input("dev", args.dev)
    manifest.record_input("test", args.test)
    manifest.record_output("metrics", args.metrics_out)
    write_manifest(manifest, manifest_path(args.metrics_out))
    return EXIT_OK


def cmd_export(args) -> int:
    rows, tokens = read_embeddings(args.embeddings)
    if args.format == "text":
        write_embeddings_text(rows, tokens, args.out)
    else:
        write_embeddings_binary(rows, tokens, args.out)
    manifest = _new_manifest("export", {"format": args.format})
    manifest.record_input("embeddings", args.embeddings)
    manifest.record_output("embeddings", args.out)
    write_manifest(manifest, manifest_path(args.out))
    print(f"exported {rows.shape[0]} x {rows.shape[1]} as {args.format} "
          f"-> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bitcipher",
        description="Deterministic bit-cipher embeddings: count corpora, "
                    "build embeddings, post-process, probe, and export.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    count = sub.add_parser("count", help="count unigram/document frequencies")
    count.add_argument("corpus", help="plain-text or gzip corpus file")
    count.add_argument("--out", required=True, help="frequency table path")
    count.add_argument("--threads", type=int, default=1,
                       help="worker processes for counting (default: 1)")
    _add_tokenizer_flags(count)
    count.set_defaults(func=cmd_count)

    embed = sub.add_parser("embed", help="build cipher embeddings from a corpus")
    embed.add_argument("corpus", help="plain-text or gzip corpus file")
    embed.add_argument("--freq", required=True, help="frequency table path")
    embed.add_argument("--out", required=True, help="embedding output path")
    embed.add_argument("--bits", type=int, required=True,
                       help="cipher width b (vocab capacity 2^b - 1)")
    embed.add_argument("--radius", type=int, default=4,
                       help="context window half-width (default: %(default)s)")
    embed.add_argument("--mode", choices=("sum", "cat"), default="sum",
                       help="context aggregation (default: %(default)s)")
    embed.add_argument("--log", action="store_true",
                       help="weight contexts by log(1+count)")
    embed.add_argument("--dtype", choices=("unigram", "df"), default="unigram",
                       help="noise fidelity mode (default: %(default)s)")
    embed.add_argument("--include-center", action="store_true",
                       help="add each token's own vector to its sum row")
    embed.add_argument("--max-vocab", type=int, default=None,
                       help="optional vocabulary cap")
    embed.add_argument("--postproc", action="store_true",
                       help="whiten + center + L2-normalize the output")
    embed.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                       help="whitening regularizer (default: %(default)s)")
    embed.add_argument("--format", choices=("text", "binary"), default="text",
                       help="output format (default: %(default)s)")
    embed.add_argument("--save-cipher", default=None,
                       help="also save the raw cipher to this path")
    _add_tokenizer_flags(embed)
    embed.set_defaults(func=cmd_embed)

    post = sub.add_parser("postproc", help="whiten/center/normalize embeddings")
    post.add_argument("embeddings", help="embedding file (text or binary)")
    post.add_argument("--out", required=True)
    post.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    post.add_argument("--row-mean", action="store_true",
                      help="center each row by its own mean instead of the "
                           "column mean")
    post.add_argument("--format", choices=("text", "binary"), default="text")
    post.set_defaults(func=cmd_postproc)

    probe = sub.add_parser("probe", help="train/evaluate the tagging probe")
    probe.add_argument("embeddings", help="embedding file (text or binary)")
    probe.add_argument("--train", required=True, help="training CoNLL file")
    probe.add_argument("--dev", required=True, help="development CoNLL file")
    probe.add_argument("--test", required=True, help="test CoNLL file")
    probe.add_argument("--metrics-out", required=True,
                       help="JSON metrics output path")
    probe.add_argument("--token-column", type=int, default=0)
    probe.add_argument("--label-column", type=int, default=-1)
    probe.add_argument("--hidden", type=int, default=256)
    probe.add_argument("--dropout", type=float, default=0.5)
    probe.add_argument("--lr", type=float, default=0.01)
    probe.add_argument("--momentum", type=float, default=0.9)
    probe.add_argument("--batch-size", type=int, default=128)
    probe.add_argument("--epochs", type=int, default=50)
    probe.add_argument("--patience", type=int, default=5)
    probe.add_argument("--seed", type=int, default=0)
    probe.set_defaults(func=cmd_probe)

    export = sub.add_parser("export", help="convert between embedding formats")
    export.add_argument("embeddings", help="embedding file (text or binary)")
    export.add_argument("--out", required=True)
    export.add_argument("--format", choices=("text", "binary"), required=True)
    export.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
