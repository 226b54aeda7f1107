"""Hidden-state extraction from a pretrained transformer encoder."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .align import AlignmentMap, plan_windows

log = logging.getLogger("ctxdump")


class ExtractionError(ValueError):
    pass


@dataclass
class DumpStats:
    sentences: int = 0
    tokens: int = 0
    stitched: list[int] = field(default_factory=list)


class Extractor:
    """Runs a frozen encoder over pre-tokenized sentences and pools each
    word's subword-piece vectors (mean by default, or the first piece)."""

    def __init__(self, model_id: str, layers: str = "all", pool: str = "mean",
                 batch_size: int = 16, window_overlap: int = 8):
        if pool not in ("mean", "first"):
            raise ExtractionError(f"unknown pooling {pool!r}")
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModel.from_pretrained(model_id)
        self.model.eval()
        self.pool = pool
        self.batch_size = batch_size
        self.window_overlap = window_overlap
        n_states = self.model.config.num_hidden_layers + 1   # embeddings included
        if layers == "all":
            self.layer_ids = list(range(n_states))
        else:
            self.layer_ids = [int(x) for x in layers.split(",")]
            bad = [i for i in self.layer_ids if not 0 <= i < n_states]
            if bad:
                raise ExtractionError(
                    f"layer ids {bad} out of range 0..{n_states - 1}")
        self.d_ctx = self.model.config.hidden_size
        max_pos = getattr(self.model.config, "max_position_embeddings", 512)
        self.piece_budget = max_pos - 2                      # [CLS] and [SEP]

    @property
    def n_layers(self) -> int:
        return len(self.layer_ids)

    def run(self, sentences: list[list[str]]) -> tuple[list[np.ndarray], DumpStats]:
        stats = DumpStats()
        blocks: list[np.ndarray | None] = [None] * len(sentences)
        simple: list[int] = []
        for idx, words in enumerate(sentences):
            if not words:
                raise ExtractionError(f"sentence {idx} is empty")
            align = self._align(words)
            if align.piece_count() <= self.piece_budget:
                simple.append(idx)
            else:
                blocks[idx] = self._extract_stitched(idx, words, align)
                stats.stitched.append(idx)
        for chunk_start in range(0, len(simple), self.batch_size):
            chunk = simple[chunk_start:chunk_start + self.batch_size]
            batch_blocks = self._extract_batch([sentences[i] for i in chunk])
            for i, block in zip(chunk, batch_blocks):
                blocks[i] = block
        stats.sentences = len(sentences)
        stats.tokens = sum(len(s) for s in sentences)
        if stats.stitched:
            log.info("stitched %d overlong sentences: %s",
                     len(stats.stitched), stats.stitched)
        return list(blocks), stats

    def _align(self, words: list[str]) -> AlignmentMap:
        enc = self.tokenizer(words, is_split_into_words=True)
        return AlignmentMap.from_word_ids(enc.word_ids(), len(words))

    def _extract_batch(self, batch: list[list[str]]) -> list[np.ndarray]:
        enc = self.tokenizer(batch, is_split_into_words=True, padding=True,
                             return_tensors="pt")
        with torch.no_grad():
            out = self.model(**enc, output_hidden_states=True)
        hidden = [out.hidden_states[i] for i in self.layer_ids]
        results = []
        for b, words in enumerate(batch):
            align = AlignmentMap.from_word_ids(enc.word_ids(b), len(words))
            results.append(self._pool_sentence(hidden, b, align))
        return results

    def _pool_sentence(self, hidden, batch_idx, align: AlignmentMap) -> np.ndarray:
        block = np.empty((len(align.ranges), self.n_layers, self.d_ctx),
                         dtype=np.float32)
        for tok, (start, end) in enumerate(align.ranges):
            for li, layer in enumerate(hidden):
                pieces = layer[batch_idx, start:end]
                if self.pool == "mean":
                    block[tok, li] = pieces.mean(dim=0).numpy()
                else:
                    block[tok, li] = pieces[0].numpy()
        return block

    def _extract_stitched(self, idx, words, align: AlignmentMap) -> np.ndarray:
        piece_counts = [end - start for start, end in align.ranges]
        windows = plan_windows(piece_counts, self.piece_budget,
                               overlap=self.window_overlap)
        block = np.empty((len(words), self.n_layers, self.d_ctx), dtype=np.float32)
        for window in windows:
            piece = self._extract_batch([words[window.start:window.end]])[0]
            for tok in window.owned:
                block[tok] = piece[tok - window.start]
        log.debug("sentence %d split into %d windows", idx, len(windows))
        return block
