"""Alignment verification between a dump file and its source corpus."""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import read_corpus
from .writer import read_ctxd


@dataclass
class VerifyReport:
    layers: int
    d_ctx: int
    sentences: int
    mismatches: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def render(self) -> str:
        lines = [f"layers={self.layers} d_ctx={self.d_ctx} "
                 f"sentences={self.sentences}"]
        if self.ok:
            lines.append("alignment OK: all token counts match")
        else:
            for idx, dumped, expected in self.mismatches:
                lines.append(f"sentence {idx}: dump has {dumped} tokens, "
                             f"corpus has {expected}")
        return "\n".join(lines)


def verify(dump_path, corpus_path) -> VerifyReport:
    layers, d_ctx, blocks = read_ctxd(dump_path)
    sentences = read_corpus(corpus_path)
    report = VerifyReport(layers=layers, d_ctx=d_ctx, sentences=len(blocks))
    if len(blocks) != len(sentences):
        report.mismatches.append((-1, len(blocks), len(sentences)))
        return report
    for idx, (block, words) in enumerate(zip(blocks, sentences)):
        if block.shape[0] != len(words):
            report.mismatches.append((idx, block.shape[0], len(words)))
    return report
