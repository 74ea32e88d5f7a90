"""Command line interface.

Subcommands: gen, stats, align, train, predict, eval, adapt-lines, render.
Option precedence is flags > --config JSON file > built-in defaults. Every
randomized subcommand takes an explicit --seed, and identical inputs plus
flags produce byte-identical outputs.

Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure. Failures print a
one-line JSON error to stderr.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import adaptation, colorkey, core, metrics, render, synthgen
from .core import DataError
from .heuristic import heuristic_order

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage failures are exit 1
        raise UsageError(message)


def _emit_error(kind: str, code: int, message: str) -> int:
    line = json.dumps({"error": {"kind": kind, "code": code, "message": message}})
    print(line, file=sys.stderr)
    return code


def _merge_options(args: argparse.Namespace, defaults: dict) -> dict:
    """Apply precedence: explicit flags > config file entries > defaults."""
    provided = dict(vars(args))
    provided.pop("func", None)
    config_path = provided.pop("config", None)
    merged = dict(defaults)
    if config_path is not None:
        try:
            with open(config_path, "r", encoding="utf-8") as handle:
                file_conf = json.load(handle)
        except json.JSONDecodeError as exc:
            raise DataError(f"{config_path}: invalid JSON: {exc}") from exc
        if not isinstance(file_conf, dict):
            raise UsageError(f"{config_path}: config file must hold a JSON object")
        unknown = sorted(set(file_conf) - set(defaults))
        if unknown:
            raise UsageError(f"{config_path}: unknown config keys {unknown}")
        merged.update(file_conf)
    merged.update(provided)
    return merged


def _require(options: dict, *names: str) -> None:
    for name in names:
        if options.get(name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


# --- gen --------------------------------------------------------------------

GEN_DEFAULTS = {
    "kind": "mixed",
    "count": 100,
    "seed": 0,
    "tokens_min": 50,
    "tokens_max": 60,
    "page_width": 1000,
    "page_height": 1414,
    "font_height": 20,
    "column_gap": 40,
    "out": None,
    "lines_out": None,
    "seq_out": None,
    "layout_out": None,
    "layout_order": "heuristic",
    "jobs": 1,
}


def _stream_arrangement(page: core.Page, layout_order: str, seed: int, ordinal: int) -> list[int]:
    if layout_order == "gold":
        return list(range(len(page)))
    if layout_order == "heuristic":
        return heuristic_order(page.tokens)
    if layout_order == "shuffled":
        rng = random.Random(seed * 1_000_003 + ordinal + 0x5EED)
        perm = list(range(len(page)))
        rng.shuffle(perm)
        return perm
    raise UsageError(f"layout order must be gold, heuristic or shuffled, got {layout_order!r}")


def cmd_gen(args: argparse.Namespace) -> int:
    opt = _merge_options(args, GEN_DEFAULTS)
    _require(opt, "out")
    spec = synthgen.GenSpec(
        layout_kind=opt["kind"],
        tokens_min=opt["tokens_min"],
        tokens_max=opt["tokens_max"],
        page_width=opt["page_width"],
        page_height=opt["page_height"],
        font_height=opt["font_height"],
        column_gap=opt["column_gap"],
        seed=opt["seed"],
    )
    generated = synthgen.generate(spec, opt["count"], jobs=opt["jobs"])
    core.write_pages(opt["out"], (page for page, _ in generated))
    if opt["lines_out"]:
        adaptation.write_lines_file(opt["lines_out"], ((p.id, lines) for p, lines in generated))
    if opt["seq_out"]:
        colorkey.write_sequence_stream(
            opt["seq_out"],
            ((p.id, colorkey.page_to_sequence_records(p)) for p, _ in generated),
        )
    if opt["layout_out"]:
        colorkey.write_layout_stream(
            opt["layout_out"],
            (
                (
                    p.id,
                    colorkey.page_to_layout_records(
                        p, _stream_arrangement(p, opt["layout_order"], opt["seed"], i)
                    ),
                )
                for i, (p, _) in enumerate(generated)
            ),
        )
    return EXIT_OK


# --- stats ------------------------------------------------------------------

STATS_DEFAULTS = {"data": None, "out": None, "jobs": 1}


def cmd_stats(args: argparse.Namespace) -> int:
    opt = _merge_options(args, STATS_DEFAULTS)
    _require(opt, "data")
    pages = core.read_pages(opt["data"])
    stats = metrics.dataset_stats(pages, jobs=opt["jobs"])
    _write_json(stats.to_dict(), opt["out"])
    return EXIT_OK


# --- align ------------------------------------------------------------------

ALIGN_DEFAULTS = {"seq": None, "layout": None, "out": None}


def cmd_align(args: argparse.Namespace) -> int:
    opt = _merge_options(args, ALIGN_DEFAULTS)
    _require(opt, "seq", "layout", "out")
    seq_pages = colorkey.read_sequence_stream(opt["seq"])
    layout_pages = colorkey.read_layout_stream(opt["layout"])
    pages = colorkey.align_streams(seq_pages, layout_pages)
    core.write_pages(opt["out"], pages)
    return EXIT_OK


# --- train --------------------------------------------------------------

TRAIN_DEFAULTS = {
    "data": None,
    "out": None,
    "mode": "full",
    "shuffle_rate": 0.0,
    "epochs": 3,
    "lr": 7e-5,
    "warmup": 500,
    "batch_size": 8,
    "seed": 0,
    "layers": 2,
    "hidden_dim": 128,
    "heads": 4,
    "ffn_dim": 512,
    "max_tokens_per_page": 128,
    "coord_grid": 1000,
    "vocab_size": 4096,
    "dropout": 0.1,
    "quiet": False,
}


def cmd_train(args: argparse.Namespace) -> int:
    from . import model as model_pkg

    opt = _merge_options(args, TRAIN_DEFAULTS)
    _require(opt, "data", "out")
    pages = core.read_pages(opt["data"])
    config = model_pkg.ModelConfig(
        layers=opt["layers"],
        hidden_dim=opt["hidden_dim"],
        heads=opt["heads"],
        ffn_dim=opt["ffn_dim"],
        max_tokens_per_page=opt["max_tokens_per_page"],
        coord_grid=opt["coord_grid"],
        mode=opt["mode"],
        vocab_size=opt["vocab_size"],
        dropout=opt["dropout"],
        seed=opt["seed"],
    )
    log = None if opt["quiet"] else (lambda msg: print(msg, file=sys.stderr))
    result = model_pkg.train_model(
        pages,
        config,
        epochs=opt["epochs"],
        lr=opt["lr"],
        warmup_steps=opt["warmup"],
        batch_size=opt["batch_size"],
        shuffle_rate=opt["shuffle_rate"],
        log=log,
    )
    model_pkg.save_checkpoint(result.model, opt["out"])
    _write_json(
        {"checkpoint": opt["out"], "final_loss": result.final_loss, "steps": result.steps},
        None,
    )
    return EXIT_OK


# --- predict ------------------------------------------------------------

PREDICT_DEFAULTS = {
    "data": None,
    "out": None,
    "method": "heuristic",
    "checkpoint": None,
    "beam": 1,
    "unconstrained": False,
    "input_order": "heuristic",
    "seed": 0,
    "batch_size": 32,
}


def cmd_predict(args: argparse.Namespace) -> int:
    opt = _merge_options(args, PREDICT_DEFAULTS)
    _require(opt, "data", "out")
    pages = core.read_pages(opt["data"])
    if opt["method"] == "heuristic":
        predictions = [
            core.OrderPrediction(page_id=p.id, indices=tuple(heuristic_order(p.tokens)))
            for p in pages
        ]
    elif opt["method"] == "model":
        from . import model as model_pkg

        _require(opt, "checkpoint")
        net = model_pkg.load_checkpoint(opt["checkpoint"])
        predictions = model_pkg.decode_pages(
            net,
            pages,
            constrained=not opt["unconstrained"],
            beam_width=opt["beam"],
            input_order=opt["input_order"],
            seed=opt["seed"],
            batch_size=opt["batch_size"],
        )
    else:
        raise UsageError(f"--method must be heuristic or model, got {opt['method']!r}")
    core.write_predictions(opt["out"], predictions)
    return EXIT_OK


# --- eval ---------------------------------------------------------------

EVAL_DEFAULTS = {"pred": None, "gold": None, "out": None, "jobs": 1}


def cmd_eval(args: argparse.Namespace) -> int:
    opt = _merge_options(args, EVAL_DEFAULTS)
    _require(opt, "pred", "gold")
    predictions = core.read_predictions(opt["pred"])
    pages = core.read_pages(opt["gold"])
    report = metrics.evaluate_predictions(predictions, pages, jobs=opt["jobs"])
    _write_json(report.to_dict(), opt["out"])
    return EXIT_OK


# --- adapt-lines ----------------------------------------------------------

ADAPT_DEFAULTS = {"tokens": None, "lines": None, "order": None, "out": None}


def cmd_adapt_lines(args: argparse.Namespace) -> int:
    opt = _merge_options(args, ADAPT_DEFAULTS)
    _require(opt, "tokens", "lines", "order", "out")
    pages = core.read_pages(opt["tokens"])
    lines_by_page = adaptation.read_lines_file(opt["lines"])
    predictions = {p.page_id: p for p in core.read_predictions(opt["order"])}
    orders = []
    for page in pages:
        lines = lines_by_page.get(page.id)
        if not lines:
            raise DataError(f"no line boxes for page {page.id!r}")
        pred = predictions.get(page.id)
        if pred is None:
            raise DataError(f"no token order for page {page.id!r}")
        pred.validate_against(page)
        assignment = adaptation.assign_tokens(page.tokens, lines)
        orders.append((page.id, adaptation.order_lines(assignment, pred.indices)))
    adaptation.write_line_orders(opt["out"], orders)
    return EXIT_OK


# --- render ---------------------------------------------------------------

RENDER_DEFAULTS = {"data": None, "pred": None, "page_id": None, "out": None}


def cmd_render(args: argparse.Namespace) -> int:
    opt = _merge_options(args, RENDER_DEFAULTS)
    _require(opt, "data", "out")
    pages = core.read_pages(opt["data"])
    if opt["page_id"] is None:
        page = pages[0]
    else:
        matches = [p for p in pages if p.id == opt["page_id"]]
        if not matches:
            raise DataError(f"page {opt['page_id']!r} not found in {opt['data']}")
        page = matches[0]
    prediction = None
    if opt["pred"] is not None:
        by_id = {p.page_id: p for p in core.read_predictions(opt["pred"])}
        prediction = by_id.get(page.id)
        if prediction is None:
            raise DataError(f"no prediction for page {page.id!r} in {opt['pred']}")
    render.write_svg(opt["out"], page, prediction)
    return EXIT_OK


# --- parser ---------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file of option defaults (flags win)")


def build_parser() -> _Parser:
    parser = _Parser(prog="readorder", description=__doc__)
    subs = parser.add_subparsers(dest="command", metavar="subcommand")
    S = argparse.SUPPRESS

    gen = subs.add_parser("gen", help="generate a synthetic dataset")
    gen.add_argument("--kind", default=S, choices=list(synthgen.LAYOUT_KINDS) + ["mixed"])
    gen.add_argument("--count", type=int, default=S)
    gen.add_argument("--seed", type=int, default=S)
    gen.add_argument("--tokens-min", dest="tokens_min", type=int, default=S)
    gen.add_argument("--tokens-max", dest="tokens_max", type=int, default=S)
    gen.add_argument("--page-width", dest="page_width", type=int, default=S)
    gen.add_argument("--page-height", dest="page_height", type=int, default=S)
    gen.add_argument("--font-height", dest="font_height", type=int, default=S)
    gen.add_argument("--column-gap", dest="column_gap", type=int, default=S)
    gen.add_argument("-o", "--out", default=S, help="pages JSONL output")
    gen.add_argument("--lines-out", dest="lines_out", default=S, help="line boxes JSONL output")
    gen.add_argument("--seq-out", dest="seq_out", default=S, help="sequence record stream output")
    gen.add_argument("--layout-out", dest="layout_out", default=S, help="layout record stream output")
    gen.add_argument(
        "--layout-order",
        dest="layout_order",
        default=S,
        choices=["gold", "heuristic", "shuffled"],
    )
    gen.add_argument("--jobs", type=int, default=S)
    _add_common(gen)
    gen.set_defaults(func=cmd_gen)

    stats = subs.add_parser("stats", help="dataset difficulty statistics")
    stats.add_argument("--data", default=S, help="pages JSONL")
    stats.add_argument("-o", "--out", default=S)
    stats.add_argument("--jobs", type=int, default=S)
    _add_common(stats)
    stats.set_defaults(func=cmd_stats)

    align = subs.add_parser("align", help="align sequence and layout record streams")
    align.add_argument("--seq", default=S, help="sequence record JSONL")
    align.add_argument("--layout", default=S, help="layout record JSONL")
    align.add_argument("-o", "--out", default=S, help="pages JSONL output")
    _add_common(align)
    align.set_defaults(func=cmd_align)

    train = subs.add_parser("train", help="train the pointer model")
    train.add_argument("--data", default=S, help="pages JSONL")
    train.add_argument("-o", "--out", default=S, help="checkpoint output path")
    train.add_argument("--mode", default=S, choices=["full", "text_only", "layout_only"])
    train.add_argument("--shuffle-rate", dest="shuffle_rate", type=float, default=S)
    train.add_argument("--epochs", type=int, default=S)
    train.add_argument("--lr", type=float, default=S)
    train.add_argument("--warmup", type=int, default=S)
    train.add_argument("--batch-size", dest="batch_size", type=int, default=S)
    train.add_argument("--seed", type=int, default=S)
    train.add_argument("--layers", type=int, default=S)
    train.add_argument("--hidden-dim", dest="hidden_dim", type=int, default=S)
    train.add_argument("--heads", type=int, default=S)
    train.add_argument("--ffn-dim", dest="ffn_dim", type=int, default=S)
    train.add_argument("--max-tokens-per-page", dest="max_tokens_per_page", type=int, default=S)
    train.add_argument("--coord-grid", dest="coord_grid", type=int, default=S)
    train.add_argument("--vocab-size", dest="vocab_size", type=int, default=S)
    train.add_argument("--dropout", type=float, default=S)
    train.add_argument("--quiet", action="store_true", default=S)
    _add_common(train)
    train.set_defaults(func=cmd_train)

    predict = subs.add_parser("predict", help="predict reading orders")
    predict.add_argument("--data", default=S, help="pages JSONL")
    predict.add_argument("-o", "--out", default=S, help="predictions JSONL output")
    predict.add_argument("--method", default=S, choices=["heuristic", "model"])
    predict.add_argument("--checkpoint", default=S)
    predict.add_argument("--beam", type=int, default=S)
    predict.add_argument("--unconstrained", action="store_true", default=S)
    predict.add_argument(
        "--input-order", dest="input_order", default=S, choices=["heuristic", "shuffled", "gold"]
    )
    predict.add_argument("--seed", type=int, default=S)
    predict.add_argument("--batch-size", dest="batch_size", type=int, default=S)
    _add_common(predict)
    predict.set_defaults(func=cmd_predict)

    evalp = subs.add_parser("eval", help="score predictions against gold pages")
    evalp.add_argument("--pred", default=S, help="predictions JSONL")
    evalp.add_argument("--gold", default=S, help="gold pages JSONL")
    evalp.add_argument("-o", "--out", default=S, help="report JSON output")
    evalp.add_argument("--jobs", type=int, default=S)
    _add_common(evalp)
    evalp.set_defaults(func=cmd_eval)

    adapt = subs.add_parser("adapt-lines", help="extend a token order to text lines")
    adapt.add_argument("--tokens", default=S, help="pages JSONL")
    adapt.add_argument("--lines", default=S, help="line boxes JSONL")
    adapt.add_argument("--order", default=S, help="token order predictions JSONL")
    adapt.add_argument("-o", "--out", default=S, help="line order JSONL output")
    _add_common(adapt)
    adapt.set_defaults(func=cmd_adapt_lines)

    rend = subs.add_parser("render", help="render a page as SVG")
    rend.add_argument("--data", default=S, help="pages JSONL")
    rend.add_argument("--pred", default=S, help="predictions JSONL (optional)")
    rend.add_argument("--page-id", dest="page_id", default=S)
    rend.add_argument("-o", "--out", default=S, help="SVG output path")
    _add_common(rend)
    rend.set_defaults(func=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError("a subcommand is required (see --help)")
        return args.func(args)
    except UsageError as exc:
        return _emit_error("usage", EXIT_USAGE, str(exc))
    except DataError as exc:
        return _emit_error("data", EXIT_DATA, str(exc))
    except OSError as exc:
        return _emit_error("data", EXIT_DATA, str(exc))
    except Exception as exc:  # numeric failures; anything else propagates
        train_module = sys.modules.get("readorder.model.train")
        if train_module is not None and isinstance(exc, train_module.TrainingDiverged):
            return _emit_error("numeric", EXIT_NUMERIC, str(exc))
        raise


if __name__ == "__main__":
    sys.exit(main())
