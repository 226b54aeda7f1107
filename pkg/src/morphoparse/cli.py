"""Command-line interface.

Subcommands: train, evaluate, predict, ablate, stats, convert, dump-table.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .checkpoint import load_checkpoint
from .conllu import (
    Sentence,
    read_treebank_file,
    serialize_treebank,
    write_treebank_file,
)
from .harness import (
    AblationReport,
    AblationRow,
    ExperimentConfig,
    ablate,
    ablation_csv,
    build_task,
    evaluate_checkpoint,
    format_ablation_table,
    save_result,
    train,
)
from .stats import PairedSample, two_proportion_ztest, wilcoxon_signed_rank


def _load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_file(path)


def _cmd_convert(args) -> int:
    sents = read_treebank_file(args.input, strict=args.strict)
    text = serialize_treebank(sents)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(f"converted {len(sents)} sentences "
          f"({'strict' if args.strict else 'lenient'} mode)", file=sys.stderr)
    return 0


def _cmd_train(args) -> int:
    cfg = _load_config(args.config)
    result = train(cfg)
    save_result(args.output, result)
    print(f"config {cfg.config_hash()} seed {cfg.seed}: "
          f"best dev metric {result.best_metric:.4f} at epoch {result.best_epoch} "
          f"(stopped after epoch {result.stopped_epoch})")
    print(f"checkpoint written to {args.output}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _load_config(args.config)
    ckpt = load_checkpoint(args.checkpoint)
    metric, detail = evaluate_checkpoint(cfg, ckpt, split=args.split)
    print(f"split={args.split} metric={metric:.4f}")
    for key in sorted(detail):
        print(f"  {key} = {detail[key]}")
    return 0


def _cmd_predict(args) -> int:
    cfg = _load_config(args.config)
    ckpt = load_checkpoint(args.checkpoint)
    bundle = build_task(cfg)
    ckpt.load_into(bundle.model.named_parameters())
    examples = getattr(bundle, args.split)
    task = cfg["task"]
    if task == "dp":
        out_sents = []
        for sent, _, ctx in examples:
            tree = bundle.model.predict(sent, ctx=ctx)
            out_sents.append(serialize_prediction_dp(sent, tree,
                                                     bundle.model.head.labels))
        write_treebank_file(args.output, out_sents)
    elif task == "ner":
        with open(args.output, "w", encoding="utf-8") as fh:
            for sent, ctx in examples:
                for tok, tag in zip(sent.tokens, bundle.model.predict(sent, ctx=ctx)):
                    fh.write(f"{tok.form}\t{tag}\n")
                fh.write("\n")
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            for sent, _label in examples:
                fh.write(f"{bundle.model.predict(sent)}\n")
    print(f"wrote predictions for {len(examples)} items to {args.output}")
    return 0


def serialize_prediction_dp(sent, tree, labels) -> Sentence:
    new_tokens = [replace(tok, head=head, deprel=labels[lab])
                  for tok, head, lab in zip(sent.tokens, tree.heads, tree.labels)]
    return Sentence(tokens=new_tokens, id=sent.id, comments=list(sent.comments))


def _cmd_ablate(args) -> int:
    cfg = _load_config(args.config)
    report = ablate(cfg, alpha=args.alpha, extra_epochs=args.extra_epochs,
                    repeats=args.repeats, folds=args.folds)
    print(format_ablation_table(report))
    if args.output:
        payload = {
            "alpha": report.alpha,
            "columns": report.columns,
            "rows": [vars(r) for r in report.rows],
        }
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
        with open(args.output + ".csv", "w", encoding="utf-8") as fh:
            fh.write(ablation_csv(report))
        print(f"report written to {args.output} (+ .csv)")
    return 0


def _read_scores(path) -> list[float]:
    with open(path, encoding="utf-8") as fh:
        return [float(line) for line in fh.read().split()]


def _print_test_row(name: str, result) -> None:
    p_text = f"{result.p_value:.6g}"
    if result.reject:
        p_text = f"_{p_text}_"
    print(f"{name:10s}  statistic={result.statistic:+.4f}  p={p_text}  "
          f"alpha={result.reject_at}  "
          f"{'REJECT equal-scores null' if result.reject else 'no rejection'}")


def _cmd_stats(args) -> int:
    if args.test == "wilcoxon":
        a, b = _read_scores(args.inputs[0]), _read_scores(args.inputs[1])
        res = wilcoxon_signed_rank(PairedSample(a, b), alpha=args.alpha)
        _print_test_row("wilcoxon", res)
    else:
        x1, n1, x2, n2 = (int(v) for v in args.inputs)
        res = two_proportion_ztest(x1, n1, x2, n2, alpha=args.alpha)
        _print_test_row("ztest", res)
    return 0


def _cmd_dump_table(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        payload = json.load(fh)
    report = AblationReport(
        rows=[AblationRow(**r) for r in payload["rows"]],
        columns=payload["columns"],
        alpha=payload["alpha"],
    )
    if args.csv:
        sys.stdout.write(ablation_csv(report))
    else:
        print(format_ablation_table(report))
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="morphoparse",
                                 description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="normalize a treebank file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", action="store_true")
    mode.add_argument("--lenient", dest="strict", action="store_false")
    p.set_defaults(strict=False)
    p.add_argument("input")
    p.add_argument("output", nargs="?", default="-")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("train", help="train one experiment cell")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--output", required=True, help="checkpoint path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", default="dev", choices=["train", "dev", "test"])
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="write predictions for a split")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", default="dev", choices=["train", "dev", "test"])
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("ablate", help="run the morphological ablation grid")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--folds", type=int, default=0,
                   help="ner: cross-validation folds for per-fold significance")
    p.add_argument("--extra-epochs", type=int, default=None)
    p.add_argument("-o", "--output", default=None, help="report JSON path")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("stats", help="significance tests on score files")
    p.add_argument("test", choices=["wilcoxon", "ztest"])
    p.add_argument("inputs", nargs="+",
                   help="wilcoxon: two score files; ztest: x1 n1 x2 n2")
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("dump-table", help="render a saved ablation report")
    p.add_argument("report")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=_cmd_dump_table)
    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
