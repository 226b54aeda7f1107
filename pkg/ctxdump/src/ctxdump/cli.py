"""ctxdump command line: dump hidden states, verify alignment."""

from __future__ import annotations

import argparse
import logging
import sys

from .corpus import read_corpus
from .extract import Extractor
from .verify import verify
from .writer import write_ctxd


def _cmd_dump(args) -> int:
    sentences = read_corpus(args.corpus)
    extractor = Extractor(args.model, layers=args.layers, pool=args.pool,
                          batch_size=args.batch_size)
    blocks, stats = extractor.run(sentences)
    write_ctxd(args.out, blocks, layers=extractor.n_layers, d_ctx=extractor.d_ctx)
    print(f"dumped {stats.sentences} sentences / {stats.tokens} tokens "
          f"({extractor.n_layers} layers x {extractor.d_ctx} dims) to {args.out}")
    if stats.stitched:
        print(f"stitched overlong sentences: {stats.stitched}")
    return 0


def _cmd_verify(args) -> int:
    report = verify(args.dump, args.corpus)
    print(report.render())
    return 0 if report.ok else 1


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(name)s: %(message)s")
    ap = argparse.ArgumentParser(prog="ctxdump", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dump", help="extract hidden states into a .ctxd file")
    p.add_argument("corpus", help=".conllu or whitespace-token file")
    p.add_argument("--model", required=True, help="model path or registry id")
    p.add_argument("--layers", default="all",
                   help="'all' or comma-separated hidden-state indices")
    p.add_argument("--pool", default="mean", choices=["mean", "first"],
                   help="subword-to-word pooling")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_dump)

    p = sub.add_parser("verify", help="check a dump against its corpus")
    p.add_argument("dump")
    p.add_argument("corpus")
    p.set_defaults(func=_cmd_verify)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
