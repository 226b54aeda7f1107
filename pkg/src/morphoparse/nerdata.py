"""NER corpus ingestion, label trimming and cross-validation folds.

Source corpora use a zoo of tagging schemes and label inventories; in
memory everything is IOB2 over the four canonical classes: B-/I- PER, ORG
and LOC, everything else OTHR.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .conllu import NER_CLASSES, OUTSIDE_TAG, Sentence, Token
from .rng import shuffled_indices

CANONICAL_TAGS = tuple(
    f"{p}-{c}" for c in NER_CLASSES for p in ("B", "I")
) + (OUTSIDE_TAG,)

_SUBTYPE_SPLIT = re.compile(r"[-_.:]")


class NerDataError(ValueError):
    pass


def trim_label(raw: str) -> str:
    """Trim an arbitrary source tag to the canonical four-class scheme.

    The B-/I- prefix is preserved; the entity category is what remains
    after stripping the prefix and any subtype suffix ("B-LOC-GPE" ->
    "B-LOC").  Anything that is not a prefixed PER/ORG/LOC tag maps to
    OTHR.  Total and idempotent.
    """
    if raw in CANONICAL_TAGS:
        return raw
    if len(raw) > 2 and raw[1] == "-" and raw[0] in ("B", "I"):
        category = _SUBTYPE_SPLIT.split(raw[2:], 1)[0].upper()
        if category in NER_CLASSES:
            return f"{raw[0]}-{category}"
    return OUTSIDE_TAG


def _to_iob2(tags: list[str]) -> list[str]:
    """Normalize IOB1/IOBES-style prefixes to IOB2 before trimming.

    S- becomes B-, E- becomes I-, and an I- run that is not continuing a
    same-category entity is promoted to B-.
    """
    out: list[str] = []
    prev_cat = None
    for tag in tags:
        cat = None
        prefix = None
        if len(tag) > 2 and tag[1] == "-" and tag[0] in "BIES":
            prefix, cat = tag[0], tag[2:]
        if prefix == "S":
            prefix = "B"
        elif prefix == "E":
            prefix = "I"
        if prefix == "I" and cat != prev_cat:
            prefix = "B"
        out.append(f"{prefix}-{cat}" if prefix else tag)
        prev_cat = cat
    return out


@dataclass
class NerCorpus:
    sentences: list[Sentence]
    label_scheme: str = "IOB2"

    def __len__(self) -> int:
        return len(self.sentences)

    def labels(self) -> list[list[str]]:
        return [[t.ner for t in s.tokens] for s in self.sentences]


def _build_corpus(token_tag_sentences: list[list[tuple[str, str]]]) -> NerCorpus:
    sentences = []
    for rows in token_tag_sentences:
        tags = _to_iob2([tag for _, tag in rows])
        toks = [
            Token(index=i + 1, form=form, ner=trim_label(tag))
            for i, ((form, _), tag) in enumerate(zip(rows, tags))
        ]
        sentences.append(Sentence(tokens=toks))
    return NerCorpus(sentences=sentences)


def parse_two_column(text: str) -> NerCorpus:
    """token TAB tag lines, blank line between sentences."""
    return _parse_columns(text, token_col=0, tag_col=1, expected=2)


def parse_conll2003(text: str) -> NerCorpus:
    """Four-column CoNLL-2003 layout: token from column 0, tag from the
    last column.  -DOCSTART- markers are dropped."""
    return _parse_columns(text, token_col=0, tag_col=-1, expected=None)


def _parse_columns(text, token_col, tag_col, expected) -> NerCorpus:
    sents: list[list[tuple[str, str]]] = []
    cur: list[tuple[str, str]] = []
    for raw in text.split("\n"):
        line = raw.rstrip("\r")
        if line.strip() == "":
            if cur:
                sents.append(cur)
                cur = []
            continue
        cols = line.split("\t") if "\t" in line else line.split()
        if expected is not None and len(cols) != expected:
            raise NerDataError(f"expected {expected} columns: {line!r}")
        if cols[token_col] == "-DOCSTART-":
            continue
        cur.append((cols[token_col], cols[tag_col]))
    if cur:
        sents.append(cur)
    return _build_corpus(sents)


def read_ner_file(path, fmt: str = "two-column") -> NerCorpus:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "two-column":
        return parse_two_column(text)
    if fmt == "conll2003":
        return parse_conll2003(text)
    raise NerDataError(f"unknown NER format {fmt!r}")


def write_ner_file(path, sentences: list[Sentence], tags: list[list[str]] | None = None) -> None:
    """Two-column output; `tags` overrides the stored ner labels."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, sent in enumerate(sentences):
            labels = tags[i] if tags is not None else [t.ner for t in sent.tokens]
            for tok, tag in zip(sent.tokens, labels):
                fh.write(f"{tok.form}\t{tag}\n")
            fh.write("\n")


@dataclass
class FoldPlan:
    k: int
    assignment: list[int]           # sentence index -> fold id
    seed: int

    def fold_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignment) if f == fold]

    def split(self, fold: int) -> tuple[list[int], list[int]]:
        """(train indices, test indices) for one cross-validation round."""
        test = self.fold_indices(fold)
        train = [i for i, f in enumerate(self.assignment) if f != fold]
        return train, test


def make_folds(corpus: NerCorpus, k: int, seed: int) -> FoldPlan:
    """Deterministic k-fold partition; fold sizes differ by at most one,
    with the remainder going to the lowest-numbered folds."""
    n = len(corpus)
    if k < 2:
        raise NerDataError("k must be at least 2")
    if n == 0:
        raise NerDataError("corpus is empty")
    if k > n:
        raise NerDataError(f"cannot make {k} folds from {n} sentences")
    order = shuffled_indices(n, seed)
    base, rem = divmod(n, k)
    assignment = [0] * n
    pos = 0
    for fold in range(k):
        size = base + (1 if fold < rem else 0)
        for idx in order[pos:pos + size]:
            assignment[idx] = fold
        pos += size
    return FoldPlan(k=k, assignment=assignment, seed=seed)
