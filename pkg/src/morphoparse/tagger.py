"""Token classification head for NER and the weighted-F1 evaluation.

F1 is computed per entity class over exact span matches (IOB2 decoding
with lenient repair of dangling I- tags); the summary number is the
gold-frequency-weighted average over PER/ORG/LOC, ignoring OTHR.  A
token-level mode is available for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .conllu import NER_CLASSES, OUTSIDE_TAG

TAGSET = ("B-PER", "I-PER", "B-ORG", "I-ORG", "B-LOC", "I-LOC", OUTSIDE_TAG)
TAG_INDEX = {t: i for i, t in enumerate(TAGSET)}


class TaggerError(ValueError):
    pass


class TagHead:
    """Optional interaction layer plus the output projection."""

    def __init__(self, hidden: int, rng: np.random.Generator,
                 interaction: bool = False, dtype=np.float32):
        self.hidden = hidden
        self.interaction = interaction
        scale = 1.0 / np.sqrt(hidden)
        if interaction:
            self.w_inter = ad.param(
                rng.uniform(-scale, scale, (hidden, hidden)).astype(dtype),
                name="tag.w_inter")
            self.b_inter = ad.param(np.zeros(hidden, dtype=dtype), name="tag.b_inter")
        self.w_out = ad.param(
            rng.uniform(-scale, scale, (hidden, len(TAGSET))).astype(dtype),
            name="tag.w_out")
        self.b_out = ad.param(np.zeros(len(TAGSET), dtype=dtype), name="tag.b_out")

    def logits(self, hiddens: ad.Value) -> ad.Value:
        x = hiddens
        if self.interaction:
            x = ad.tanh(ad.add(ad.matmul(x, self.w_inter), self.b_inter))
        return ad.add(ad.matmul(x, self.w_out), self.b_out)

    def named_parameters(self) -> dict[str, ad.Value]:
        out = {}
        if self.interaction:
            out["tag.w_inter"] = self.w_inter
            out["tag.b_inter"] = self.b_inter
        out["tag.w_out"] = self.w_out
        out["tag.b_out"] = self.b_out
        return out


def tag_sentence(hiddens: ad.Value, head: TagHead) -> ad.Value:
    """Per-token distribution over the tagset."""
    return ad.softmax(head.logits(hiddens), axis=-1)


def tag_loss(hiddens: ad.Value, head: TagHead, gold_tags: list[str]) -> ad.Value:
    targets = [TAG_INDEX[t] for t in gold_tags]
    return ad.cross_entropy(head.logits(hiddens), targets)


def extract_spans(labels: list[str]) -> set[tuple[str, int, int]]:
    """Maximal entity runs as (class, start, end) with inclusive ends.

    A B- tag always opens a span; an I- tag continues a same-class span or,
    lacking one, opens a new span (lenient repair).
    """
    spans: set[tuple[str, int, int]] = set()
    cur_class, cur_start = None, 0
    for i, lab in enumerate(labels):
        if lab == OUTSIDE_TAG or lab == "O":
            if cur_class is not None:
                spans.add((cur_class, cur_start, i - 1))
                cur_class = None
            continue
        prefix, cls = lab[0], lab[2:]
        if prefix == "B" or cur_class != cls:
            if cur_class is not None:
                spans.add((cur_class, cur_start, i - 1))
            cur_class, cur_start = cls, i
    if cur_class is not None:
        spans.add((cur_class, cur_start, len(labels) - 1))
    return spans


@dataclass
class ClassScore:
    precision: float
    recall: float
    f1: float
    support: int                    # gold span (or token) count


@dataclass
class F1Report:
    per_class: dict[str, ClassScore]
    weighted_f1: float
    mode: str = "span"


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def weighted_f1(gold: list[list[str]], pred: list[list[str]],
                mode: str = "span") -> F1Report:
    """Span- or token-level weighted F1 over aligned label sequences."""
    if len(gold) != len(pred):
        raise TaggerError(f"{len(gold)} gold vs {len(pred)} predicted sentences")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise TaggerError(f"sentence {i}: length mismatch {len(g)} vs {len(p)}")
    gold_count = {c: 0 for c in NER_CLASSES}
    pred_count = {c: 0 for c in NER_CLASSES}
    correct = {c: 0 for c in NER_CLASSES}
    if mode == "span":
        for g, p in zip(gold, pred):
            gs, ps = extract_spans(g), extract_spans(p)
            for cls, *_ in gs:
                gold_count[cls] += 1
            for cls, *_ in ps:
                pred_count[cls] += 1
            for span in gs & ps:
                correct[span[0]] += 1
    elif mode == "token":
        for g, p in zip(gold, pred):
            for gt, pt in zip(g, p):
                gc = gt[2:] if gt != OUTSIDE_TAG and gt != "O" else None
                pc = pt[2:] if pt != OUTSIDE_TAG and pt != "O" else None
                if gc:
                    gold_count[gc] += 1
                if pc:
                    pred_count[pc] += 1
                if gc and gc == pc:
                    correct[gc] += 1
    else:
        raise TaggerError(f"unknown mode {mode!r}")
    per_class = {}
    for c in NER_CLASSES:
        p = correct[c] / pred_count[c] if pred_count[c] else 0.0
        r = correct[c] / gold_count[c] if gold_count[c] else 0.0
        per_class[c] = ClassScore(precision=p, recall=r, f1=_f1(p, r),
                                  support=gold_count[c])
    total = sum(gold_count.values())
    weighted = 0.0
    if total:
        weighted = sum(per_class[c].f1 * gold_count[c] / total for c in NER_CLASSES)
    return F1Report(per_class=per_class, weighted_f1=weighted, mode=mode)
