import json

import pytest

from readorder.cli import main
from readorder.core import read_pages, read_predictions


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def corpus(tmp_path):
    pages = str(tmp_path / "pages.jsonl")
    lines = str(tmp_path / "lines.jsonl")
    code = main(
        [
            "gen", "--kind", "mixed", "--count", "12", "--seed", "3",
            "--tokens-min", "10", "--tokens-max", "16",
            "-o", pages, "--lines-out", lines,
        ]
    )
    assert code == 0
    return {"pages": pages, "lines": lines, "dir": tmp_path}


class TestGen:
    def test_idempotent_bytes(self, tmp_path, capsys):
        a, b = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
        base = ["gen", "--count", "6", "--seed", "9", "--tokens-min", "8", "--tokens-max", "10"]
        assert main(base + ["-o", a]) == 0
        assert main(base + ["-o", b, "--jobs", "2"]) == 0
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_missing_out_is_usage_error(self, capsys):
        code, _, err = run(capsys, "gen", "--count", "2")
        assert code == 1
        assert json.loads(err)["error"]["kind"] == "usage"

    def test_infeasible_geometry_is_data_error(self, tmp_path, capsys):
        code, _, err = run(
            capsys,
            "gen", "--count", "1", "--tokens-min", "5000", "--tokens-max", "5000",
            "-o", str(tmp_path / "x.jsonl"),
        )
        assert code == 2
        assert json.loads(err)["error"]["kind"] == "data"


class TestStats:
    def test_stats_buckets_sum_to_page_count(self, corpus, capsys):
        code, out, _ = run(capsys, "stats", "--data", corpus["pages"])
        assert code == 0
        stats = json.loads(out)
        assert sum(stats["bleu_buckets"].values()) == stats["page_count"] == 12

    def test_unreadable_file_is_data_error(self, capsys):
        code, _, err = run(capsys, "stats", "--data", "/nonexistent/file.jsonl")
        assert code == 2
        assert json.loads(err)["error"]["code"] == 2


class TestAlignCommand:
    def test_round_trip_through_streams(self, tmp_path, capsys):
        pages = str(tmp_path / "pages.jsonl")
        seq = str(tmp_path / "seq.jsonl")
        layout = str(tmp_path / "layout.jsonl")
        rebuilt = str(tmp_path / "rebuilt.jsonl")
        assert main(
            [
                "gen", "--count", "8", "--seed", "4", "--tokens-min", "10",
                "--tokens-max", "14", "-o", pages,
                "--seq-out", seq, "--layout-out", layout, "--layout-order", "shuffled",
            ]
        ) == 0
        assert main(["align", "--seq", seq, "--layout", layout, "-o", rebuilt]) == 0
        assert open(pages, "rb").read() == open(rebuilt, "rb").read()

    def test_mismatched_streams_fail(self, tmp_path, capsys):
        seq = tmp_path / "seq.jsonl"
        layout = tmp_path / "layout.jsonl"
        seq.write_text('{"page_id": "p", "word": "a", "appearance_index": 0}\n')
        layout.write_text(
            '{"page_id": "p", "word": "b", "color": [0, 0, 0], "bbox": [0, 0, 5, 5],'
            ' "page_width": 100, "page_height": 100}\n'
        )
        code, _, err = run(
            capsys, "align", "--seq", str(seq), "--layout", str(layout),
            "-o", str(tmp_path / "out.jsonl"),
        )
        assert code == 2
        assert "no layout record" in json.loads(err)["error"]["message"]


class TestPredictEval:
    def test_heuristic_predict_then_eval(self, corpus, capsys):
        pred = str(corpus["dir"] / "pred.jsonl")
        report_path = str(corpus["dir"] / "report.json")
        assert main(["predict", "--data", corpus["pages"], "--method", "heuristic", "-o", pred]) == 0
        assert main(["eval", "--pred", pred, "--gold", corpus["pages"], "-o", report_path]) == 0
        report = json.loads(open(report_path).read())
        assert 0.0 < report["avg_bleu"] <= 1.0
        assert len(report["pages"]) == 12

    def test_eval_of_gold_predictions_is_perfect(self, corpus, capsys):
        pages = read_pages(corpus["pages"])
        pred = corpus["dir"] / "gold_pred.jsonl"
        with open(pred, "w") as handle:
            for page in pages:
                handle.write(
                    json.dumps({"page_id": page.id, "indices": list(range(len(page)))}) + "\n"
                )
        code, out, _ = run(capsys, "eval", "--pred", str(pred), "--gold", corpus["pages"])
        assert code == 0
        report = json.loads(out)
        assert report["avg_bleu"] == 1.0
        assert report["avg_ard"] == 0.0

    def test_eval_jobs_identical_output(self, corpus, capsys):
        pred = str(corpus["dir"] / "pred.jsonl")
        main(["predict", "--data", corpus["pages"], "--method", "heuristic", "-o", pred])
        r1 = str(corpus["dir"] / "r1.json")
        r2 = str(corpus["dir"] / "r2.json")
        assert main(["eval", "--pred", pred, "--gold", corpus["pages"], "-o", r1]) == 0
        assert main(["eval", "--pred", pred, "--gold", corpus["pages"], "-o", r2, "--jobs", "2"]) == 0
        assert open(r1, "rb").read() == open(r2, "rb").read()


class TestAdaptLines:
    def test_gold_order_recovers_line_order(self, corpus, capsys):
        pages = read_pages(corpus["pages"])
        pred = corpus["dir"] / "gold_pred.jsonl"
        with open(pred, "w") as handle:
            for page in pages:
                handle.write(
                    json.dumps({"page_id": page.id, "indices": list(range(len(page)))}) + "\n"
                )
        out = str(corpus["dir"] / "line_order.jsonl")
        assert main(
            [
                "adapt-lines", "--tokens", corpus["pages"], "--lines", corpus["lines"],
                "--order", str(pred), "-o", out,
            ]
        ) == 0
        for line in open(out):
            record = json.loads(line)
            ordinals = [int(x.rsplit("l", 1)[1]) for x in record["line_ids"]]
            assert ordinals == sorted(ordinals)


class TestRenderCommand:
    def test_render_with_and_without_prediction(self, corpus, capsys):
        pred = str(corpus["dir"] / "pred.jsonl")
        main(["predict", "--data", corpus["pages"], "--method", "heuristic", "-o", pred])
        svg_pred = corpus["dir"] / "page_pred.svg"
        svg_gold = corpus["dir"] / "page_gold.svg"
        page_id = read_pages(corpus["pages"])[0].id
        assert main(
            ["render", "--data", corpus["pages"], "--pred", pred,
             "--page-id", page_id, "-o", str(svg_pred)]
        ) == 0
        assert main(["render", "--data", corpus["pages"], "-o", str(svg_gold)]) == 0
        assert svg_pred.read_text().startswith("<?xml")
        assert "marker" in svg_gold.read_text()

    def test_unknown_page_id(self, corpus, capsys):
        code, _, err = run(
            capsys, "render", "--data", corpus["pages"], "--page-id", "nope",
            "-o", str(corpus["dir"] / "x.svg"),
        )
        assert code == 2


class TestModelPipeline:
    def test_train_predict_eval_smoke(self, tmp_path, capsys):
        pages = str(tmp_path / "train.jsonl")
        assert main(
            ["gen", "--kind", "two_column", "--count", "16", "--seed", "6",
             "--tokens-min", "8", "--tokens-max", "12", "-o", pages]
        ) == 0
        ckpt = str(tmp_path / "model.bin")
        code, out, err = run(
            capsys,
            "train", "--data", pages, "-o", ckpt, "--epochs", "2", "--lr", "1e-3",
            "--warmup", "5", "--batch-size", "4", "--layers", "1", "--hidden-dim", "32",
            "--heads", "2", "--ffn-dim", "64", "--vocab-size", "128", "--coord-grid", "50",
            "--max-tokens-per-page", "16", "--dropout", "0", "--seed", "1", "--quiet",
        )
        assert code == 0, err
        summary = json.loads(out)
        assert summary["steps"] == 8
        pred = str(tmp_path / "pred.jsonl")
        assert main(
            ["predict", "--data", pages, "--method", "model", "--checkpoint", ckpt,
             "-o", pred]
        ) == 0
        predictions = read_predictions(pred)
        gold = read_pages(pages)
        assert len(predictions) == len(gold)
        for page, prediction in zip(gold, predictions):
            assert sorted(prediction.indices) == list(range(len(page)))
        code, out, _ = run(capsys, "eval", "--pred", pred, "--gold", pages)
        assert code == 0
        assert "avg_bleu" in json.loads(out)

    def test_model_method_requires_checkpoint(self, corpus, capsys):
        code, _, err = run(
            capsys, "predict", "--data", corpus["pages"], "--method", "model",
            "-o", str(corpus["dir"] / "p.jsonl"),
        )
        assert code == 1

    def test_divergence_reports_numeric_error(self, tmp_path, capsys):
        pages = str(tmp_path / "train.jsonl")
        main(["gen", "--count", "4", "--seed", "2", "--tokens-min", "8",
              "--tokens-max", "10", "-o", pages])
        code, _, err = run(
            capsys,
            "train", "--data", pages, "-o", str(tmp_path / "m.bin"),
            "--epochs", "40", "--lr", "1e18", "--warmup", "1", "--batch-size", "4",
            "--layers", "1", "--hidden-dim", "32", "--heads", "2", "--ffn-dim", "64",
            "--vocab-size", "128", "--coord-grid", "50", "--max-tokens-per-page", "16",
            "--dropout", "0", "--quiet",
        )
        assert code == 3
        assert json.loads(err)["error"]["kind"] == "numeric"


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, tmp_path, capsys):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"count": 5, "seed": 8, "tokens_min": 8, "tokens_max": 9}))
        out_a = str(tmp_path / "a.jsonl")
        assert main(["gen", "--config", str(conf), "-o", out_a]) == 0
        assert len(read_pages(out_a)) == 5
        out_b = str(tmp_path / "b.jsonl")
        assert main(["gen", "--config", str(conf), "--count", "3", "-o", out_b]) == 0
        assert len(read_pages(out_b)) == 3

    def test_unknown_config_key_is_usage_error(self, tmp_path, capsys):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"bogus": 1}))
        code, _, err = run(capsys, "gen", "--config", str(conf), "-o", str(tmp_path / "x"))
        assert code == 1


class TestIdempotence:
    def test_predict_and_stats_are_byte_identical(self, corpus, capsys):
        a = str(corpus["dir"] / "pa.jsonl")
        b = str(corpus["dir"] / "pb.jsonl")
        assert main(["predict", "--data", corpus["pages"], "--method", "heuristic", "-o", a]) == 0
        assert main(["predict", "--data", corpus["pages"], "--method", "heuristic", "-o", b]) == 0
        assert open(a, "rb").read() == open(b, "rb").read()
        sa = str(corpus["dir"] / "sa.json")
        sb = str(corpus["dir"] / "sb.json")
        assert main(["stats", "--data", corpus["pages"], "-o", sa]) == 0
        assert main(["stats", "--data", corpus["pages"], "-o", sb, "--jobs", "2"]) == 0
        assert open(sa, "rb").read() == open(sb, "rb").read()


class TestUsage:
    def test_no_subcommand(self, capsys):
        code, _, err = run(capsys)
        assert code == 1

    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "stats", "--bogus")
        assert code == 1
        assert json.loads(err)["error"]["kind"] == "usage"

    def test_bad_choice(self, capsys):
        code, _, err = run(capsys, "gen", "--kind", "spiral", "-o", "/tmp/x.jsonl")
        assert code == 1
