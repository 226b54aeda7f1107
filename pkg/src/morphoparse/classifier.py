"""Sequence classification with pooled morphological embeddings.

The sequence representation is the last hidden state of an LSTM over the
word inputs; pooled UPOS and pooled feats vectors (each with its own
pooling parameters) are concatenated before the output layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .encoder import init_lstm_direction, lstm_layer
from .rng import shuffled_indices

POOLING_KINDS = ("mean", "weighted", "lstm")


class ClassifierError(ValueError):
    pass


@dataclass
class PoolingSpec:
    kind: str
    lstm_hidden: int = 0             # only used by the lstm kind

    def __post_init__(self):
        if self.kind not in POOLING_KINDS:
            raise ClassifierError(f"unknown pooling kind {self.kind!r}")


class Pooler:
    """Pooling parameters for one input stream."""

    def __init__(self, spec: PoolingSpec, dim: int, rng: np.random.Generator,
                 dtype=np.float32, prefix: str = "pool"):
        self.spec = spec
        self.dim = dim
        self.prefix = prefix
        self.params: dict[str, ad.Value] = {}
        if spec.kind == "weighted":
            self.params[f"{prefix}.a"] = ad.param(
                np.zeros(dim, dtype=dtype), name=f"{prefix}.a")
        elif spec.kind == "lstm":
            if spec.lstm_hidden < 1:
                raise ClassifierError("lstm pooling needs a positive hidden size")
            self.params.update(init_lstm_direction(
                dim, spec.lstm_hidden, rng, dtype, prefix=prefix))

    @property
    def out_dim(self) -> int:
        return self.spec.lstm_hidden if self.spec.kind == "lstm" else self.dim

    def pool(self, vectors: ad.Value) -> ad.Value:
        return pool(vectors, self.spec, self.params, prefix=self.prefix)

    def named_parameters(self) -> dict[str, ad.Value]:
        return dict(self.params)


def pool(vectors: ad.Value, spec: PoolingSpec, params: dict[str, ad.Value],
         prefix: str = "pool") -> ad.Value:
    """Reduce a (T, d) sequence to one vector.

    mean: arithmetic mean over positions; weighted: softmax(a . v_t)
    weighted sum; lstm: last hidden state of a pooling LSTM.
    """
    t = vectors.shape[0]
    if t == 0:
        raise ClassifierError("cannot pool an empty sequence")
    if spec.kind == "mean":
        ones = np.full(t, 1.0 / t, dtype=vectors.dtype)
        return ad.matmul(ad.const(ones), vectors)
    if spec.kind == "weighted":
        a = params[f"{prefix}.a"]
        weights = ad.softmax(ad.matmul(vectors, a))
        return ad.matmul(weights, vectors)
    h = lstm_layer(vectors, params[f"{prefix}.w_ih"], params[f"{prefix}.w_hh"],
                   params[f"{prefix}.b"])
    return ad.reshape(ad.rows(h, [t - 1]), (h.shape[1],))


def pooling_weights(vectors: ad.Value, params: dict[str, ad.Value],
                    prefix: str = "pool") -> np.ndarray:
    """The normalized attention weights of the weighted pooling."""
    a = params[f"{prefix}.a"]
    return ad.softmax(ad.matmul(vectors, a)).data


def accuracy_eval(gold: list[int], pred: list[int]) -> float:
    if len(gold) != len(pred):
        raise ClassifierError("gold and predictions disagree in length")
    if not gold:
        raise ClassifierError("empty evaluation set")
    return sum(g == p for g, p in zip(gold, pred)) / len(gold)


def split_dataset(n: int, seed: int,
                  ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
                  ) -> tuple[list[int], list[int], list[int]]:
    """Deterministic 60:20:20 train/validation/test partition of n items."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ClassifierError(f"split ratios must sum to 1, got {ratios}")
    order = shuffled_indices(n, seed)
    n_train = int(round(n * ratios[0]))
    n_val = int(round(n * ratios[1]))
    return order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:]


def read_labeled_corpus(path) -> tuple[list[int], list[list[str]]]:
    """One example per line: 0/1 label TAB whitespace-tokenized text."""
    labels: list[int] = []
    texts: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ClassifierError(f"line {lineno}: expected LABEL<TAB>TEXT")
            lab, text = line.split("\t", 1)
            if lab not in ("0", "1"):
                raise ClassifierError(f"line {lineno}: label must be 0 or 1, got {lab!r}")
            labels.append(int(lab))
            texts.append(text.split())
    return labels, texts
