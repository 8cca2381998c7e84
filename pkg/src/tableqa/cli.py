"""Command-line entry points: generate / train / eval / answer / index / serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .aggregate import AggTrainConfig, train_question_classifier
from .classifiers import TrainConfig, load_bundle, save_bundle, train_rci
from .encoder import EncoderConfig
from .harness import BundleScorer, evaluate_corpus
from .optim import AdamConfig
from .service import ServiceState, answer_question, serve
from .store import load_index, materialize, save_index
from .synthetic import GeneratorConfig, generate_synthetic_corpus
from .tables import parse_questions_file, parse_table_file


def _load_tables(path: str) -> dict:
    fmt = "csv" if path.endswith(".csv") else "jsonl"
    return {t.id: t for t in parse_table_file(path, fmt)}


def _add_common_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tables", required=True, help="tables file (jsonl, or a single-table csv)")


def cmd_generate(args) -> int:
    config = GeneratorConfig(
        n_train=args.train,
        n_dev=args.dev,
        n_test=args.test,
        agg_fraction=args.agg_fraction,
    )
    corpus = generate_synthetic_corpus(config, seed=args.seed)
    corpus.save(args.out)
    print(f"wrote {len(corpus.tables)} tables and "
          f"{len(corpus.train)}/{len(corpus.dev)}/{len(corpus.test)} questions to {args.out}")
    return 0


def cmd_train(args) -> int:
    tables = _load_tables(args.tables)
    train_insts = parse_questions_file(args.questions, tables)
    dev_insts = parse_questions_file(args.dev_questions, tables) if args.dev_questions else None
    config = TrainConfig(
        encoder=EncoderConfig(
            d_model=args.d_model,
            n_layers=args.n_layers,
            n_heads=args.n_heads,
            max_len=args.max_tokens,
            seed=args.seed,
        ),
        adam=AdamConfig(lr=args.lr),
        col_kind=args.mode,
        mode=args.format,
        epochs=args.epochs,
        batch_size=args.batch_size,
        max_tokens_row=args.max_tokens,
        max_tokens_col=args.max_tokens,
        seed=args.seed,
    )
    result = train_rci(train_insts, tables, config, dev_instances=dev_insts)
    bundle = result.best
    if args.agg:
        agg_config = AggTrainConfig(
            encoder=EncoderConfig(
                d_model=args.d_model,
                n_layers=1,
                n_heads=args.n_heads,
                max_len=args.max_tokens,
                seed=args.seed + 7,
            ),
            epochs=args.epochs,
            max_tokens=args.max_tokens,
            seed=args.seed,
        )
        bundle.agg = train_question_classifier(train_insts, tables, agg_config)
    save_bundle(bundle, args.model)
    summary = {
        "skipped": result.skipped,
        "row_best_dev": result.history["row"].get("best_dev_accuracy"),
        "col_best_dev": result.history["col"].get("best_dev_accuracy"),
        "train_seconds": result.history["train_seconds"],
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_eval(args) -> int:
    tables = _load_tables(args.tables)
    instances = parse_questions_file(args.questions, tables)
    bundle = load_bundle(args.model)
    index = load_index(args.index) if args.index else None
    report = evaluate_corpus(BundleScorer(bundle, index), instances, tables, k=args.k)
    print(json.dumps(report.to_dict()["summary"], indent=2))
    if args.out:
        report.save(args.out)
        print(f"wrote per-question records to {args.out}")
    return 0


def cmd_answer(args) -> int:
    tables = _load_tables(args.tables)
    bundle = load_bundle(args.model)
    state = ServiceState(
        tables=tables,
        scorer=BundleScorer(bundle, load_index(args.index) if args.index else None),
        bundle=bundle,
        agg_model=bundle.agg,
        default_k=args.k,
        default_tau=args.tau,
    )
    payload = {"table_id": args.table_id, "question": args.question, "k": args.k, "tau": args.tau}
    response = answer_question(payload, state)
    print(json.dumps(response, indent=2))
    return 0


def cmd_index(args) -> int:
    tables = _load_tables(args.tables)
    bundle = load_bundle(args.model)
    index = materialize(list(tables.values()), bundle.col, bundle.mode)
    save_index(index, args.out)
    total = sum(v.shape[0] for v in index.entries.values())
    print(f"wrote {total} column vectors for {len(index.entries)} tables to {args.out}")
    return 0


def cmd_serve(args) -> int:
    tables = _load_tables(args.tables) if args.tables else {}
    state = ServiceState(tables=tables, default_k=args.k, default_tau=args.tau)
    if args.model:
        bundle = load_bundle(args.model)
        index = load_index(args.index) if args.index else None
        state.scorer = BundleScorer(bundle, index)
        state.bundle = bundle
        state.agg_model = bundle.agg
        state.index = index
    serve(state, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tableqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--train", type=int, default=2000)
    p.add_argument("--dev", type=int, default=500)
    p.add_argument("--test", type=int, default=500)
    p.add_argument("--agg-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a row/column model bundle")
    _add_common_data_flags(p)
    p.add_argument("--questions", required=True)
    p.add_argument("--dev-questions")
    p.add_argument("--model", required=True, help="output bundle path")
    p.add_argument("--mode", choices=["interaction", "representation"], default="interaction")
    p.add_argument("--format", choices=["delimited", "plain"], default="delimited")
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--n-layers", type=int, default=2)
    p.add_argument("--n-heads", type=int, default=4)
    p.add_argument("--max-tokens", type=int, default=48)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--agg", action="store_true", help="also train the question-type classifier")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a bundle on a question file")
    _add_common_data_flags(p)
    p.add_argument("--questions", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--index")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", help="write the full report with per-question records")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("answer", help="answer one question over one table")
    _add_common_data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--index")
    p.add_argument("--table-id", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--tau", type=float, default=0.5)
    p.set_defaults(func=cmd_answer)

    p = sub.add_parser("index", help="materialize column vectors for a table file")
    _add_common_data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--tables")
    p.add_argument("--model")
    p.add_argument("--index")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--tau", type=float, default=0.5)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
