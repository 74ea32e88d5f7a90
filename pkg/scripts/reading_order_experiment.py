#!/usr/bin/env python3
"""Desk-scale reading order experiment.

Generates a mixed synthetic corpus, trains the pointer model in each input
mode (full, layout_only, text_only), and reports average page-level BLEU and
ARD on a held-out set next to the left-to-right/top-to-bottom baseline.
"""

import argparse
import json
import sys
import time
from collections import defaultdict

from readorder.heuristic import heuristic_order
from readorder.metrics import evaluate_predictions, page_bleu
from readorder.model import ModelConfig, decode_pages, save_checkpoint, train_model
from readorder.synthgen import GenSpec, generate


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train-pages", type=int, default=2000)
    parser.add_argument("--eval-pages", type=int, default=200)
    parser.add_argument("--tokens-min", type=int, default=24)
    parser.add_argument("--tokens-max", type=int, default=36)
    parser.add_argument("--epochs", type=int, default=12)
    parser.add_argument("--lr", type=float, default=5e-4)
    parser.add_argument("--warmup", type=int, default=100)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--modes", nargs="+", default=["full", "layout_only", "text_only"])
    parser.add_argument("--save-prefix", default=None, help="write <prefix>-<mode>.bin checkpoints")
    parser.add_argument("--report", default=None, help="write the summary JSON here")
    return parser.parse_args()


def main():
    args = parse_args()
    train_spec = GenSpec(
        layout_kind="mixed", tokens_min=args.tokens_min, tokens_max=args.tokens_max, seed=101
    )
    eval_spec = GenSpec(
        layout_kind="mixed", tokens_min=args.tokens_min, tokens_max=args.tokens_max, seed=202
    )
    train_pages = [p for p, _ in generate(train_spec, args.train_pages, jobs=2)]
    eval_pages = [p for p, _ in generate(eval_spec, args.eval_pages, jobs=2)]
    print(f"corpus: {len(train_pages)} train / {len(eval_pages)} eval pages", file=sys.stderr)

    summary = {"modes": {}, "heuristic": {}}
    heuristic_preds = []
    for page in eval_pages:
        from readorder.core import OrderPrediction

        heuristic_preds.append(
            OrderPrediction(page_id=page.id, indices=tuple(heuristic_order(page.tokens)))
        )
    heuristic_report = evaluate_predictions(heuristic_preds, eval_pages)
    summary["heuristic"]["avg_bleu"] = heuristic_report.avg_bleu
    summary["heuristic"]["avg_ard"] = heuristic_report.avg_ard
    two_column = [p for p in eval_pages if p.id.startswith("two_column")]
    if two_column:
        summary["heuristic"]["two_column_bleu"] = sum(
            page_bleu(heuristic_order(p.tokens), list(range(len(p)))) for p in two_column
        ) / len(two_column)

    for mode in args.modes:
        config = ModelConfig(mode=mode, max_tokens_per_page=64, dropout=0.0, seed=args.seed)
        start = time.time()
        result = train_model(
            train_pages,
            config,
            epochs=args.epochs,
            lr=args.lr,
            warmup_steps=args.warmup,
            batch_size=args.batch_size,
            log=lambda msg: print(f"[{mode}] {msg}", file=sys.stderr),
        )
        train_seconds = time.time() - start
        predictions = decode_pages(result.model, eval_pages)
        report = evaluate_predictions(predictions, eval_pages)
        per_kind = defaultdict(list)
        for score in report.per_page:
            per_kind[score.page_id.split("-")[0]].append(score.bleu)
        summary["modes"][mode] = {
            "avg_bleu": report.avg_bleu,
            "avg_ard": report.avg_ard,
            "final_loss": result.final_loss,
            "train_seconds": round(train_seconds, 1),
            "bleu_by_kind": {k: sum(v) / len(v) for k, v in sorted(per_kind.items())},
        }
        print(
            f"[{mode}] BLEU {report.avg_bleu:.4f}  ARD {report.avg_ard:.3f}  "
            f"({train_seconds:.0f}s train)",
            file=sys.stderr,
        )
        if args.save_prefix:
            save_checkpoint(result.model, f"{args.save_prefix}-{mode}.bin")

    text = json.dumps(summary, indent=2)
    print(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")


if __name__ == "__main__":
    main()
