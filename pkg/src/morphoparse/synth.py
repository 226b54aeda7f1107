"""Deterministic synthetic corpora for demos, capacity checks and trend
experiments.

The dependency corpus imitates a free-word-order language with rich
nominal morphology: six cases distinguish grammatical roles, the case
suffixes are deliberately ambiguous across declension classes, and the
stem vocabulary is large enough that held-out word forms are mostly
unseen.  Word identity alone therefore underdetermines labels and some
attachments, while gold Case/Number/Gender features resolve them, which
is exactly the contrast the morphology experiments measure.
"""

from __future__ import annotations

import zlib

import numpy as np

from .conllu import Sentence, Token
from .embeddings import WordVectors
from .rng import Xorshift64Star

CASES = ("Nom", "Acc", "Dat", "Gen", "Loc", "Ins")
NUMBERS = ("Sing", "Plur")
GENDERS = ("Masc", "Fem", "Neut")

# suffix paradigms by declension class; many surface suffixes are shared
# between different (case, number) cells across classes
_NOUN_PARADIGMS = (
    {("Nom", "Sing"): "a", ("Acc", "Sing"): "u", ("Dat", "Sing"): "e",
     ("Gen", "Sing"): "i", ("Loc", "Sing"): "o", ("Ins", "Sing"): "om",
     ("Nom", "Plur"): "e", ("Acc", "Plur"): "i", ("Dat", "Plur"): "am",
     ("Gen", "Plur"): "", ("Loc", "Plur"): "ah", ("Ins", "Plur"): "ami"},
    {("Nom", "Sing"): "", ("Acc", "Sing"): "a", ("Dat", "Sing"): "u",
     ("Gen", "Sing"): "a", ("Loc", "Sing"): "u", ("Ins", "Sing"): "em",
     ("Nom", "Plur"): "i", ("Acc", "Plur"): "e", ("Dat", "Plur"): "om",
     ("Gen", "Plur"): "ov", ("Loc", "Plur"): "ih", ("Ins", "Plur"): "i"},
    {("Nom", "Sing"): "o", ("Acc", "Sing"): "o", ("Dat", "Sing"): "u",
     ("Gen", "Sing"): "a", ("Loc", "Sing"): "u", ("Ins", "Sing"): "om",
     ("Nom", "Plur"): "a", ("Acc", "Plur"): "a", ("Dat", "Plur"): "im",
     ("Gen", "Plur"): "", ("Loc", "Plur"): "ima", ("Ins", "Plur"): "imi"},
)

_ADJ_PARADIGM = {
    ("Nom", "Sing"): "ka", ("Acc", "Sing"): "ku", ("Dat", "Sing"): "koj",
    ("Gen", "Sing"): "ke", ("Loc", "Sing"): "koj", ("Ins", "Sing"): "kom",
    ("Nom", "Plur"): "ke", ("Acc", "Plur"): "ke", ("Dat", "Plur"): "kim",
    ("Gen", "Plur"): "kih", ("Loc", "Plur"): "kih", ("Ins", "Plur"): "kimi",
}

_ADPOSITIONS = {"Dat": "nav", "Gen": "iz", "Loc": "pri", "Ins": "sab"}

_ONSETS = ("b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
           "br", "dr", "gr", "kl", "pl", "st", "tr", "vl", "zn", "sm", "kr")
_VOWELS = ("a", "e", "i", "o", "u")
_CODAS = ("b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z")


def _make_stems(count: int, rng: Xorshift64Star, syllables: int = 2) -> list[str]:
    stems: list[str] = []
    seen = set()
    while len(stems) < count:
        parts = []
        for _ in range(syllables):
            parts.append(_ONSETS[rng.randint(len(_ONSETS))])
            parts.append(_VOWELS[rng.randint(len(_VOWELS))])
        parts.append(_CODAS[rng.randint(len(_CODAS))])
        stem = "".join(parts)
        if stem not in seen:
            seen.add(stem)
            stems.append(stem)
    return stems


class SynthLexicon:
    def __init__(self, seed: int, nouns: int = 300, verbs: int = 120,
                 adjectives: int = 80, adverbs: int = 30):
        rng = Xorshift64Star(seed)
        self.noun_stems = _make_stems(nouns, rng)
        self.noun_class = [rng.randint(3) for _ in range(nouns)]
        self.noun_gender = [GENDERS[c] for c in self.noun_class]
        self.verb_stems = _make_stems(verbs, rng)
        self.adj_stems = _make_stems(adjectives, rng)
        self.adverbs = [s + "no" for s in _make_stems(adverbs, rng, syllables=1)]

    def noun(self, idx: int, case: str, number: str) -> tuple[str, dict[str, str]]:
        stem = self.noun_stems[idx]
        suffix = _NOUN_PARADIGMS[self.noun_class[idx]][(case, number)]
        feats = {"Case": case, "Number": number, "Gender": self.noun_gender[idx]}
        return stem + suffix, feats

    def adjective(self, idx: int, case: str, number: str, gender: str
                  ) -> tuple[str, dict[str, str]]:
        form = self.adj_stems[idx] + _ADJ_PARADIGM[(case, number)]
        return form, {"Case": case, "Number": number, "Gender": gender,
                      "Degree": "Pos"}

    def verb(self, idx: int, tense: str, number: str) -> tuple[str, dict[str, str]]:
        suffix = {"Pres": {"Sing": "et", "Plur": "ut"},
                  "Past": {"Sing": "il", "Plur": "ili"}}[tense][number]
        form = self.verb_stems[idx] + suffix
        return form, {"Tense": tense, "Number": number, "Person": "3",
                      "VerbForm": "Fin", "Mood": "Ind"}


def _np_tokens(lex: SynthLexicon, rng: Xorshift64Star, case: str,
               number: str, deprel: str, allow_genitive: bool = True):
    """A noun phrase as (form, upos, feats, rel_head, deprel) rows, where
    rel_head is the offset of the head inside the chunk (or -1 for the
    chunk's external head)."""
    rows = []
    n_adj = rng.randint(3)           # 0..2 premodifiers
    noun_idx = rng.randint(len(lex.noun_stems))
    gender = lex.noun_gender[noun_idx]
    head_pos = n_adj
    for _ in range(n_adj):
        form, feats = lex.adjective(rng.randint(len(lex.adj_stems)), case,
                                    number, gender)
        rows.append([form, "ADJ", feats, head_pos, "amod"])
    form, feats = lex.noun(noun_idx, case, number)
    rows.append([form, "NOUN", feats, -1, deprel])
    if allow_genitive and rng.randint(4) == 0:
        # a genitive modifier; its surface position is adjacent but its
        # head is the noun, which word order alone does not disambiguate
        gen_number = NUMBERS[rng.randint(2)]
        gform, gfeats = lex.noun(rng.randint(len(lex.noun_stems)), "Gen", gen_number)
        rows.append([gform, "NOUN", gfeats, head_pos, "nmod"])
    return rows


def make_dependency_sentence(lex: SynthLexicon, rng: Xorshift64Star) -> Sentence:
    tense = "Pres" if rng.randint(2) else "Past"
    subj_number = NUMBERS[rng.randint(2)]
    chunks = [("nsubj", _np_tokens(lex, rng, "Nom", subj_number, "nsubj"))]
    if rng.randint(10) < 8:
        chunks.append(("obj", _np_tokens(lex, rng, "Acc", NUMBERS[rng.randint(2)], "obj")))
    if rng.randint(10) < 5:
        case = ("Dat", "Gen", "Loc", "Ins")[rng.randint(4)]
        rows = _np_tokens(lex, rng, case, NUMBERS[rng.randint(2)], "obl",
                          allow_genitive=False)
        head_offset = next(i for i, r in enumerate(rows) if r[3] == -1)
        rows.insert(0, [_ADPOSITIONS[case], "ADP", {"Case": case},
                        head_offset + 1, "case"])
        for r in rows[1:]:
            if r[3] >= 0:
                r[3] += 1
        chunks.append(("obl", rows))
    if rng.randint(10) < 3:
        chunks.append(("iobj", _np_tokens(lex, rng, "Dat", NUMBERS[rng.randint(2)],
                                          "iobj", allow_genitive=False)))
    if rng.randint(10) < 5:
        chunks.append(("advmod", [[lex.adverbs[rng.randint(len(lex.adverbs))],
                                   "ADV", {}, -1, "advmod"]]))
    vform, vfeats = lex.verb(rng.randint(len(lex.verb_stems)), tense, subj_number)
    chunks.append(("root", [[vform, "VERB", vfeats, -1, "root"]]))
    rng.shuffle(chunks)              # free constituent order

    tokens: list[Token] = []
    verb_index = 0
    chunk_heads: list[tuple[int, str]] = []
    for _, rows in chunks:
        base = len(tokens)
        head_abs = base + next(i for i, r in enumerate(rows) if r[3] == -1) + 1
        for i, (form, upos, feats, rel, deprel) in enumerate(rows):
            head = head_abs if rel == -1 else base + rel + 1
            tokens.append(Token(index=base + i + 1, form=form, lemma=form,
                                upos=upos, feats=dict(feats), head=head,
                                deprel=deprel))
        chunk_heads.append((head_abs, rows[next(i for i, r in enumerate(rows) if r[3] == -1)][4]))
        if rows[-1][4] == "root" or any(r[4] == "root" for r in rows):
            verb_index = head_abs
    for head_abs, deprel in chunk_heads:
        if deprel == "root":
            tokens[head_abs - 1].head = 0
        else:
            tokens[head_abs - 1].head = verb_index
    return Sentence(tokens=tokens)


def make_dependency_corpus(n_sentences: int, seed: int,
                           lexicon: SynthLexicon | None = None) -> list[Sentence]:
    lex = lexicon or SynthLexicon(seed=seed * 31 + 7)
    rng = Xorshift64Star(seed)
    out = []
    for i in range(n_sentences):
        sent = make_dependency_sentence(lex, rng)
        sent.id = f"synth-{seed}-{i}"
        out.append(sent)
    return out


def form_vectors(forms, dim: int, seed: int) -> WordVectors:
    """One fixed random vector per surface form: the vector identifies the
    form but carries no morphology, like a hash embedding."""
    vocab: dict[str, int] = {}
    rows = []
    for form in sorted(set(forms)):
        gen = np.random.default_rng(np.random.SeedSequence(
            entropy=[seed, zlib.crc32(form.encode("utf-8"))]))
        vocab[form] = len(rows)
        rows.append(gen.normal(0.0, 1.0, dim) / np.sqrt(dim))
    return WordVectors(dim=dim, vocab=vocab,
                       matrix=np.vstack(rows) if rows else np.zeros((0, dim)))


def corpus_forms(sentences: list[Sentence]) -> list[str]:
    return sorted({t.form for s in sentences for t in s.tokens})


def corrupt_annotations(sentences: list[Sentence], rate: float, seed: int
                        ) -> list[Sentence]:
    """Flip UPOS and perturb the feature map on roughly `rate` of tokens,
    emulating tagger noise; heads and labels stay gold."""
    from .conllu import UPOS_TAGS

    rng = Xorshift64Star(seed)
    value_pool: dict[str, list[str]] = {}
    for sent in sentences:
        for tok in sent.tokens:
            for name, value in tok.feats.items():
                pool = value_pool.setdefault(name, [])
                if value not in pool:
                    pool.append(value)
    out = []
    denom = 1_000_000
    threshold = int(rate * denom)
    for sent in sentences:
        toks = []
        for tok in sent.tokens:
            upos, feats = tok.upos, dict(tok.feats)
            if rng.randint(denom) < threshold:
                choices = [t for t in UPOS_TAGS if t != upos]
                upos = choices[rng.randint(len(choices))]
                if feats:
                    names = sorted(feats)
                    name = names[rng.randint(len(names))]
                    pool = [v for v in value_pool[name] if v != feats[name]]
                    if pool:
                        feats[name] = pool[rng.randint(len(pool))]
                    else:
                        del feats[name]
                else:
                    name = sorted(value_pool)[rng.randint(len(value_pool))] \
                        if value_pool else None
                    if name:
                        feats[name] = value_pool[name][rng.randint(len(value_pool[name]))]
            toks.append(Token(index=tok.index, form=tok.form, lemma=tok.lemma,
                              upos=upos, feats=feats, head=tok.head,
                              deprel=tok.deprel, ner=tok.ner))
        out.append(Sentence(tokens=toks, id=sent.id, comments=list(sent.comments)))
    return out


# ---------------------------------------------------------------------------
# NER corpus: entities are recognizable from a closed name lexicon

def make_ner_corpus(n_sentences: int, seed: int) -> list[Sentence]:
    rng = Xorshift64Star(seed * 13 + 1)
    first = [s.capitalize() for s in _make_stems(14, rng)]
    last = [s.capitalize() + "ov" for s in _make_stems(14, rng)]
    cities = [s.capitalize() + "grad" for s in _make_stems(12, rng)]
    orgs = [s.capitalize() + "corp" for s in _make_stems(12, rng)]
    fillers = _make_stems(80, rng)
    sentences = []
    for i in range(n_sentences):
        tokens: list[Token] = []

        def push(form, upos, ner):
            tokens.append(Token(index=len(tokens) + 1, form=form, upos=upos,
                                ner=ner, head=0 if not tokens else 1,
                                deprel="root" if not tokens else "dep"))

        n_chunks = 3 + rng.randint(5)
        for _ in range(n_chunks):
            kind = rng.randint(6)
            if kind == 0:
                push(first[rng.randint(len(first))], "PROPN", "B-PER")
                if rng.randint(2):
                    push(last[rng.randint(len(last))], "PROPN", "I-PER")
            elif kind == 1:
                push(cities[rng.randint(len(cities))], "PROPN", "B-LOC")
            elif kind == 2:
                push(orgs[rng.randint(len(orgs))], "PROPN", "B-ORG")
                if rng.randint(3) == 0:
                    push(orgs[rng.randint(len(orgs))], "PROPN", "I-ORG")
            else:
                push(fillers[rng.randint(len(fillers))],
                     ("NOUN", "VERB", "ADJ")[rng.randint(3)], "OTHR")
        sent = Sentence(tokens=tokens, id=f"ner-{seed}-{i}")
        sentences.append(sent)
    return sentences


# ---------------------------------------------------------------------------
# classification task: does the sentence contain at least three adjectives?

def make_adjective_task(n_examples: int, seed: int, length: int = 12,
                        threshold: int = 3
                        ) -> tuple[list[int], list[list[str]], list[Sentence]]:
    """Fixed-length sentences whose label depends only on the UPOS counts:
    word forms are unique nonce strings, so any model signal must travel
    through the part-of-speech channel."""
    rng = Xorshift64Star(seed * 17 + 3)
    labels: list[int] = []
    texts: list[list[str]] = []
    companions: list[Sentence] = []
    other_tags = ("NOUN", "VERB", "ADV")
    for i in range(n_examples):
        n_adj = rng.randint(2 * threshold + 1)            # 0..6 adjectives
        upos = ["ADJ"] * n_adj + [other_tags[rng.randint(3)]
                                  for _ in range(length - n_adj)]
        rng.shuffle(upos)
        forms = [f"x{i}t{j}" for j in range(length)]      # all out-of-vocabulary
        tokens = [Token(index=j + 1, form=forms[j], upos=upos[j],
                        head=0 if j == 0 else 1,
                        deprel="root" if j == 0 else "dep")
                  for j in range(length)]
        labels.append(1 if n_adj >= threshold else 0)
        texts.append(forms)
        companions.append(Sentence(tokens=tokens, id=f"adj-{seed}-{i}"))
    return labels, texts, companions
