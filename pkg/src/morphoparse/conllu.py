"""CoNLL-U treebank reading, validation and writing.

The in-memory unit is the syntactic word: multiword-token range lines
("1-2") and empty nodes ("1.1") are dropped on parse, so serialization
reproduces the input byte-for-byte only for documents made of comments and
plain word lines.  Universal features are restricted to the fixed
23-feature inventory below (Typo excluded); unknown feature names are
dropped with a warning in lenient mode and rejected in strict mode.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

UPOS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)
UNK_UPOS = "UNK"

# Universal feature inventory, alphabetical; Typo deliberately absent.
FEATURE_INVENTORY = (
    "Abbr", "Animacy", "Aspect", "Case", "Clusivity", "Definite", "Degree",
    "Evident", "Foreign", "Gender", "Mood", "NounClass", "NumType", "Number",
    "Person", "Polarity", "Polite", "Poss", "PronType", "Reflex", "Tense",
    "VerbForm", "Voice",
)
_FEATURE_SET = frozenset(FEATURE_INVENTORY)

NER_CLASSES = ("PER", "ORG", "LOC")
OUTSIDE_TAG = "OTHR"


class ConlluError(ValueError):
    """Malformed CoNLL-U input."""


@dataclass
class Token:
    index: int                      # 1-based position within the sentence
    form: str
    lemma: str | None = None
    upos: str = UNK_UPOS
    feats: dict[str, str] = field(default_factory=dict)
    head: int = 0                   # 0 = ROOT
    deprel: str = "_"
    ner: str | None = None
    xpos: str = "_"                 # passthrough columns, kept verbatim
    deps: str = "_"
    misc: str = "_"


@dataclass
class Sentence:
    tokens: list[Token]
    id: str | None = None
    comments: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    def root_indices(self) -> list[int]:
        return [t.index for t in self.tokens if t.head == 0]


@dataclass
class Treebank:
    train: list[Sentence] = field(default_factory=list)
    dev: list[Sentence] = field(default_factory=list)
    test: list[Sentence] = field(default_factory=list)
    language: str = ""

    def splits(self) -> dict[str, list[Sentence]]:
        return {"train": self.train, "dev": self.dev, "test": self.test}

    def check_declared(self, **counts: int) -> None:
        """Verify split sizes against published counts and, where sentence
        ids are present, that the splits do not share sentences."""
        for split, expected in counts.items():
            actual = len(self.splits()[split])
            if actual != expected:
                raise ConlluError(
                    f"{split} split has {actual} sentences, expected {expected}")
        seen: dict[str, str] = {}
        for split, sents in self.splits().items():
            for sent in sents:
                if sent.id is None:
                    continue
                if sent.id in seen and seen[sent.id] != split:
                    raise ConlluError(
                        f"sentence {sent.id!r} appears in both "
                        f"{seen[sent.id]} and {split}")
                seen[sent.id] = split


def parse_feats(text: str, strict: bool = False) -> dict[str, str]:
    """Parse a FEATS column value into a name -> value map.

    Pairs are returned in canonical (alphabetical-by-name) order regardless
    of input order; "_" means no features.  Duplicate names and pairs
    without "=" are always errors; names outside the inventory are dropped
    with a warning, or rejected when strict.
    """
    if text == "_" or text == "":
        return {}
    pairs: dict[str, str] = {}
    for chunk in text.split("|"):
        if "=" not in chunk:
            raise ConlluError(f"feature pair without '=': {chunk!r}")
        name, value = chunk.split("=", 1)
        if name in pairs:
            raise ConlluError(f"duplicate feature name: {name!r}")
        if name not in _FEATURE_SET:
            if strict:
                raise ConlluError(f"feature {name!r} outside the inventory")
            warnings.warn(f"dropping unknown feature {name!r}", stacklevel=2)
            continue
        pairs[name] = value
    return {name: pairs[name] for name in sorted(pairs)}


def serialize_feats(feats: dict[str, str]) -> str:
    if not feats:
        return "_"
    return "|".join(f"{k}={feats[k]}" for k in sorted(feats))


def _validate_tree(sent: Sentence, strict: bool) -> None:
    n = len(sent.tokens)
    roots = []
    for tok in sent.tokens:
        if tok.head < 0 or tok.head > n:
            raise ConlluError(
                f"token {tok.index} has head {tok.head} outside 0..{n}"
            )
        if tok.head == tok.index:
            raise ConlluError(f"token {tok.index} is its own head")
        if tok.head == 0:
            roots.append(tok.index)
    if not roots:
        raise ConlluError("sentence has no root")
    if len(roots) > 1:
        if strict:
            raise ConlluError(f"multiple roots: {roots}")
        # lenient repair: keep the first root, hang the others off it
        for tok in sent.tokens:
            if tok.head == 0 and tok.index != roots[0]:
                tok.head = roots[0]
    # cycle check: follow heads upward, every token must reach ROOT
    for tok in sent.tokens:
        seen = set()
        cur = tok.index
        while cur != 0:
            if cur in seen:
                raise ConlluError(f"cycle through token {tok.index}")
            seen.add(cur)
            cur = sent.tokens[cur - 1].head


def _parse_token_line(line: str, strict: bool) -> Token | None:
    cols = line.split("\t")
    if len(cols) != 10:
        raise ConlluError(f"expected 10 columns, got {len(cols)}: {line!r}")
    tid = cols[0]
    if "-" in tid or "." in tid:
        return None                 # range line or empty node: skipped
    try:
        index = int(tid)
    except ValueError:
        raise ConlluError(f"bad token id {tid!r}") from None
    if index < 1:
        raise ConlluError(f"token id must be >= 1, got {index}")
    upos = cols[3]
    if upos == "_":
        upos = UNK_UPOS
    elif upos not in UPOS_TAGS and upos != UNK_UPOS:
        if strict:
            raise ConlluError(f"unknown UPOS {upos!r}")
        upos = UNK_UPOS
    try:
        head = int(cols[6]) if cols[6] != "_" else 0
    except ValueError:
        raise ConlluError(f"bad head {cols[6]!r}") from None
    return Token(
        index=index,
        form=cols[1],
        lemma=None if cols[2] == "_" else cols[2],
        upos=upos,
        feats=parse_feats(cols[5], strict=strict),
        head=head,
        deprel=cols[7],
        xpos=cols[4],
        deps=cols[8],
        misc=cols[9],
    )


def parse_treebank(text: str, strict: bool = False) -> list[Sentence]:
    """Parse a CoNLL-U document into sentences.

    Comment lines, multiword-token ranges and empty nodes are skipped;
    retained token indices must be contiguous from 1.  In strict mode a
    sentence whose heads do not form a single-rooted tree is an error; in
    lenient mode extra roots are reattached to the first root.
    """
    sentences: list[Sentence] = []
    comments: list[str] = []
    tokens: list[Token] = []

    def flush() -> None:
        nonlocal comments, tokens
        if not tokens and not comments:
            return
        if not tokens:
            comments = []
            return
        sent = Sentence(tokens=tokens, comments=comments)
        for c in comments:
            if c.startswith("# sent_id"):
                parts = c.split("=", 1)
                if len(parts) == 2:
                    sent.id = parts[1].strip()
        for pos, tok in enumerate(sent.tokens, start=1):
            if tok.index != pos:
                raise ConlluError(
                    f"non-contiguous token index {tok.index} at position {pos}"
                )
        _validate_tree(sent, strict)
        sentences.append(sent)
        comments, tokens = [], []

    for raw in text.split("\n"):
        line = raw.rstrip("\r")
        if line.strip() == "":
            flush()
        elif line.startswith("#"):
            comments.append(line)
        else:
            tok = _parse_token_line(line, strict)
            if tok is not None:
                tokens.append(tok)
    flush()
    return sentences


def serialize_sentence(sent: Sentence) -> str:
    lines = list(sent.comments)
    for t in sent.tokens:
        lines.append("\t".join([
            str(t.index),
            t.form,
            t.lemma if t.lemma is not None else "_",
            t.upos if t.upos != UNK_UPOS else "_",
            t.xpos,
            serialize_feats(t.feats),
            str(t.head),
            t.deprel,
            t.deps,
            t.misc,
        ]))
    return "\n".join(lines) + "\n\n"


def serialize_treebank(sentences: list[Sentence]) -> str:
    return "".join(serialize_sentence(s) for s in sentences)


def read_treebank_file(path, strict: bool = False) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_treebank(fh.read(), strict=strict)


def write_treebank_file(path, sentences: list[Sentence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_treebank(sentences))


@dataclass
class AnnotationAgreement:
    """Per-token agreement bookkeeping between two annotation sources."""
    upos_flags: list[list[bool]]
    feats_flags: list[list[bool]]

    @property
    def upos_accuracy(self) -> float:
        total = sum(len(f) for f in self.upos_flags)
        return sum(map(sum, self.upos_flags)) / total if total else 1.0

    @property
    def feats_accuracy(self) -> float:
        total = sum(len(f) for f in self.feats_flags)
        return sum(map(sum, self.feats_flags)) / total if total else 1.0


def _check_aligned(gold: list[Sentence], predicted: list[Sentence]) -> None:
    if len(gold) != len(predicted):
        raise ConlluError(
            f"sentence count mismatch: {len(gold)} gold vs {len(predicted)} predicted"
        )
    for i, (g, p) in enumerate(zip(gold, predicted)):
        if len(g.tokens) != len(p.tokens):
            raise ConlluError(
                f"token count mismatch at sentence {i}: "
                f"{len(g.tokens)} gold vs {len(p.tokens)} predicted"
            )


def attach_predicted_annotations(
    gold: list[Sentence], predicted: list[Sentence]
) -> tuple[list[Sentence], AnnotationAgreement]:
    """Overlay predicted UPOS/feats onto gold heads and labels.

    Returns new sentences carrying the gold tree but predicted morphology,
    plus per-token agreement flags for quality accounting.
    """
    _check_aligned(gold, predicted)
    out: list[Sentence] = []
    agreement = AnnotationAgreement([], [])
    for g, p in zip(gold, predicted):
        toks = [
            replace(gt, upos=pt.upos, feats=dict(pt.feats))
            for gt, pt in zip(g.tokens, p.tokens)
        ]
        out.append(Sentence(tokens=toks, id=g.id, comments=list(g.comments)))
        agreement.upos_flags.append(
            [gt.upos == pt.upos for gt, pt in zip(g.tokens, p.tokens)]
        )
        agreement.feats_flags.append(
            [gt.feats == pt.feats for gt, pt in zip(g.tokens, p.tokens)]
        )
    return out, agreement


def feats_quality(
    gold: list[Sentence], predicted: list[Sentence]
) -> tuple[float, float]:
    """Fraction of tokens with matching UPOS, and with an exactly matching
    feature map."""
    _, agreement = attach_predicted_annotations(gold, predicted)
    return agreement.upos_accuracy, agreement.feats_accuracy


def format_quality_report(upos_acc: float, feats_acc: float) -> str:
    return (
        f"UPOS accuracy (%): {100.0 * upos_acc:.2f}\n"
        f"feats accuracy (%): {100.0 * feats_acc:.2f}\n"
    )
