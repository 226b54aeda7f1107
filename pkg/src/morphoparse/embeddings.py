"""Input representations: pretrained word vectors, learned UPOS and
universal-feature tables, and precomputed contextual layer dumps with a
learned scalar mix.

Per-token inputs are the concatenation, in this fixed order, of whichever
parts an experiment enables:

    word (+) ctx (+) upos (+) feats

The feats segment always spans the full 23-feature inventory at d_feat
dims per feature; a feature a token lacks contributes that feature's
learned NONE row.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .conllu import FEATURE_INVENTORY, UNK_UPOS, UPOS_TAGS, Sentence, Token

PARTS_ORDER = ("word", "ctx", "upos", "feats")

CTXD_MAGIC = b"CTXD"
CTXD_VERSION = 1


class EmbeddingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# pretrained word vectors (text format: header "count dim", one token per line)

class WordVectors:
    def __init__(self, dim: int, vocab: dict[str, int], matrix: np.ndarray):
        self.dim = dim
        self.vocab = vocab
        self.matrix = matrix

    def __contains__(self, form: str) -> bool:
        return form in self.vocab

    def row(self, form: str) -> np.ndarray | None:
        idx = self.vocab.get(form)
        return None if idx is None else self.matrix[idx]


def load_vectors(source) -> WordVectors:
    """Read text-format vectors; `source` is a path or an open text file.

    Duplicate tokens keep the first occurrence; a count that disagrees with
    the actual number of rows is a warning, the actual count wins.
    """
    close = False
    if not hasattr(source, "read"):
        source = open(source, encoding="utf-8")
        close = True
    try:
        header = source.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"bad vector header: {header!r}")
        declared, dim = int(header[0]), int(header[1])
        vocab: dict[str, int] = {}
        rows: list[np.ndarray] = []
        for lineno, line in enumerate(source, start=2):
            parts = line.rstrip("\n").split(" ")
            if parts and parts[-1] == "":
                parts = parts[:-1]
            if len(parts) != dim + 1:
                raise EmbeddingError(
                    f"line {lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            token = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingError(f"line {lineno}: non-numeric field") from None
            if token in vocab:
                warnings.warn(f"duplicate vector for {token!r}, keeping first")
                continue
            vocab[token] = len(rows)
            rows.append(vec)
        if len(rows) != declared:
            warnings.warn(
                f"vector count mismatch: header says {declared}, file has {len(rows)}"
            )
        matrix = np.vstack(rows) if rows else np.zeros((0, dim))
        return WordVectors(dim=dim, vocab=vocab, matrix=matrix)
    finally:
        if close:
            source.close()


def write_vectors(path, wv: WordVectors) -> None:
    forms = sorted(wv.vocab, key=wv.vocab.get)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(forms)} {wv.dim}\n")
        for form in forms:
            row = " ".join(repr(float(x)) for x in wv.matrix[wv.vocab[form]])
            fh.write(f"{form} {row}\n")


# ---------------------------------------------------------------------------
# learned morphology tables

class MorphVocab:
    """Feature-value indices observed in the training split.

    Index 0 of every feature is the reserved NONE row; unseen values at
    test time also map to it.
    """

    def __init__(self):
        self.feat_values: dict[str, dict[str, int]] = {f: {} for f in FEATURE_INVENTORY}

    @classmethod
    def build(cls, sentences: list[Sentence]) -> "MorphVocab":
        vocab = cls()
        for sent in sentences:
            for tok in sent.tokens:
                for name, value in tok.feats.items():
                    table = vocab.feat_values.get(name)
                    if table is not None and value not in table:
                        table[value] = len(table) + 1
        return vocab

    def upos_index(self, tag: str) -> int:
        try:
            return UPOS_TAGS.index(tag)
        except ValueError:
            return len(UPOS_TAGS)        # UNK row

    def feat_index(self, name: str, value: str | None) -> int:
        if value is None:
            return 0
        return self.feat_values[name].get(value, 0)

    def sizes(self) -> dict[str, int]:
        return {f: len(v) + 1 for f, v in self.feat_values.items()}


class MorphEmbeddings:
    """UPOS table (17 tags + UNK) and one table per universal feature."""

    def __init__(self, vocab: MorphVocab, d_pos: int = 15, d_feat: int = 15,
                 rng: np.random.Generator | None = None, dtype=np.float32):
        if rng is None:
            rng = np.random.default_rng(0)
        self.vocab = vocab
        self.d_pos = d_pos
        self.d_feat = d_feat
        scale_pos = np.sqrt(3.0 / d_pos)
        scale_feat = np.sqrt(3.0 / d_feat)
        self.upos_table = ad.param(
            rng.uniform(-scale_pos, scale_pos, (len(UPOS_TAGS) + 1, d_pos)).astype(dtype),
            name="morph.upos",
        )
        self.feat_tables: dict[str, ad.Value] = {}
        for name, size in vocab.sizes().items():
            self.feat_tables[name] = ad.param(
                rng.uniform(-scale_feat, scale_feat, (size, d_feat)).astype(dtype),
                name=f"morph.feat.{name}",
            )

    @property
    def feats_width(self) -> int:
        return len(FEATURE_INVENTORY) * self.d_feat

    def upos_vectors(self, tags: list[str]) -> ad.Value:
        idx = [self.vocab.upos_index(t) for t in tags]
        return ad.embedding_lookup(self.upos_table, idx)

    def feats_vectors(self, feats: list[dict[str, str]]) -> ad.Value:
        segments = []
        for name in FEATURE_INVENTORY:
            idx = [self.vocab.feat_index(name, fm.get(name)) for fm in feats]
            segments.append(ad.embedding_lookup(self.feat_tables[name], idx))
        return ad.concat(segments, axis=-1)

    def named_parameters(self) -> dict[str, ad.Value]:
        out = {"morph.upos": self.upos_table}
        for name in FEATURE_INVENTORY:
            out[f"morph.feat.{name}"] = self.feat_tables[name]
        return out


# ---------------------------------------------------------------------------
# contextual layer dumps and the scalar mix

@dataclass
class ContextDump:
    """Per-sentence (tokens, layers, d_ctx) float32 stacks."""
    layers: int
    d_ctx: int
    sentences: list[np.ndarray] = field(default_factory=list)

    def check_alignment(self, corpus: list[Sentence]) -> None:
        if len(self.sentences) != len(corpus):
            raise EmbeddingError(
                f"dump has {len(self.sentences)} sentences, corpus has {len(corpus)}"
            )
        for i, (arr, sent) in enumerate(zip(self.sentences, corpus)):
            if arr.shape[0] != len(sent.tokens):
                raise EmbeddingError(
                    f"sentence {i}: dump has {arr.shape[0]} tokens, "
                    f"corpus has {len(sent.tokens)}"
                )


def read_ctxdump(path) -> ContextDump:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CTXD_MAGIC:
            raise EmbeddingError(f"not a context dump (magic {magic!r})")
        version, layers, d_ctx, n_sents = struct.unpack("<IIII", fh.read(16))
        if version != CTXD_VERSION:
            raise EmbeddingError(f"unsupported dump version {version}")
        dump = ContextDump(layers=layers, d_ctx=d_ctx)
        for _ in range(n_sents):
            (n_tok,) = struct.unpack("<I", fh.read(4))
            payload = fh.read(n_tok * layers * d_ctx * 4)
            if len(payload) != n_tok * layers * d_ctx * 4:
                raise EmbeddingError("truncated context dump")
            arr = np.frombuffer(payload, dtype="<f4").reshape(n_tok, layers, d_ctx)
            dump.sentences.append(arr.copy())
        return dump


def write_ctxdump(path, dump: ContextDump) -> None:
    with open(path, "wb") as fh:
        fh.write(CTXD_MAGIC)
        fh.write(struct.pack("<IIII", CTXD_VERSION, dump.layers, dump.d_ctx,
                             len(dump.sentences)))
        for arr in dump.sentences:
            if arr.shape[1:] != (dump.layers, dump.d_ctx):
                raise EmbeddingError(f"sentence block shape {arr.shape} disagrees with header")
            fh.write(struct.pack("<I", arr.shape[0]))
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


class ScalarMix:
    """Softmax-weighted combination of layer vectors, times a learned gain."""

    def __init__(self, layers: int, dtype=np.float32):
        self.layers = layers
        self.logits = ad.param(np.zeros(layers, dtype=dtype), name="mix.logits")
        self.gamma = ad.param(np.ones((), dtype=dtype), name="mix.gamma")

    def weights(self) -> np.ndarray:
        w = ad.softmax(self.logits).data
        return w

    def apply(self, layer_stack: np.ndarray) -> ad.Value:
        """Mix a (T, L, d) stack into (T, d); gradients reach logits/gamma."""
        if layer_stack.ndim != 3 or layer_stack.shape[1] != self.layers:
            raise EmbeddingError(
                f"expected (T, {self.layers}, d) stack, got {layer_stack.shape}"
            )
        t, L, d = layer_stack.shape
        flat = np.ascontiguousarray(layer_stack.transpose(1, 0, 2)).reshape(L, t * d)
        w = ad.softmax(self.logits)
        mixed = ad.reshape(ad.matmul(w, ad.const(flat.astype(self.logits.dtype))), (t, d))
        return ad.mul(mixed, self.gamma)

    def named_parameters(self) -> dict[str, ad.Value]:
        return {"mix.logits": self.logits, "mix.gamma": self.gamma}


def scalar_mix(layer_vectors: np.ndarray, mix: ScalarMix) -> ad.Value:
    """Single-token form: (L, d) layer vectors to one mixed d-vector."""
    arr = np.asarray(layer_vectors)
    if arr.ndim != 2:
        raise EmbeddingError(f"expected (L, d) layer vectors, got {arr.shape}")
    return ad.reshape(mix.apply(arr[None, :, :]), (arr.shape[1],))


# ---------------------------------------------------------------------------
# the per-token concatenation

class TokenEmbedder:
    """Assembles configured parts into per-token input vectors.

    Word vectors are frozen; out-of-vocabulary forms fall back to one
    learned UNK vector.  The ctx part needs an aligned ContextDump for the
    sentence being embedded.
    """

    def __init__(self, parts, word_vectors: WordVectors | None = None,
                 morph: MorphEmbeddings | None = None,
                 mix: ScalarMix | None = None, d_ctx: int | None = None,
                 rng: np.random.Generator | None = None, dtype=np.float32):
        parts = tuple(parts)
        for p in parts:
            if p not in PARTS_ORDER:
                raise EmbeddingError(f"unknown part {p!r}")
        self.parts = tuple(p for p in PARTS_ORDER if p in parts)
        self.dtype = dtype
        self.word_vectors = word_vectors
        self.morph = morph
        self.mix = mix
        self.d_ctx = d_ctx
        if "word" in self.parts:
            if word_vectors is None:
                raise EmbeddingError("word part enabled but no vectors given")
            if rng is None:
                rng = np.random.default_rng(0)
            scale = np.sqrt(3.0 / word_vectors.dim)
            self.unk = ad.param(
                rng.uniform(-scale, scale, word_vectors.dim).astype(dtype),
                name="word.unk",
            )
        else:
            self.unk = None
        if ("upos" in self.parts or "feats" in self.parts) and morph is None:
            raise EmbeddingError("morph parts enabled but no tables given")
        if "ctx" in self.parts and (mix is None or d_ctx is None):
            raise EmbeddingError("ctx part enabled but no scalar mix / width given")

    @property
    def width(self) -> int:
        total = 0
        if "word" in self.parts:
            total += self.word_vectors.dim
        if "ctx" in self.parts:
            total += self.d_ctx
        if "upos" in self.parts:
            total += self.morph.d_pos
        if "feats" in self.parts:
            total += self.morph.feats_width
        return total

    def embed_sentence(self, sent: Sentence, ctx: np.ndarray | None = None) -> ad.Value:
        segments: list[ad.Value] = []
        if "word" in self.parts:
            segments.append(self._word_segment([t.form for t in sent.tokens]))
        if "ctx" in self.parts:
            if ctx is None:
                raise EmbeddingError("ctx part enabled but sentence has no dump block")
            segments.append(self.mix.apply(ctx))
        if "upos" in self.parts:
            segments.append(self.morph.upos_vectors([t.upos for t in sent.tokens]))
        if "feats" in self.parts:
            segments.append(self.morph.feats_vectors([t.feats for t in sent.tokens]))
        if not segments:
            raise EmbeddingError("no parts enabled")
        return segments[0] if len(segments) == 1 else ad.concat(segments, axis=-1)

    def embed_token(self, tok: Token, ctx_layers: np.ndarray | None = None) -> ad.Value:
        ctx = None
        if "ctx" in self.parts:
            if ctx_layers is None:
                raise EmbeddingError("ctx part enabled but no layer vectors given")
            ctx = np.asarray(ctx_layers)[None, :, :]
        out = self.embed_sentence(Sentence(tokens=[tok]), ctx=ctx)
        return ad.reshape(out, (out.shape[1],))

    def _word_segment(self, forms: list[str]) -> ad.Value:
        dim = self.word_vectors.dim
        known = np.zeros((len(forms), dim), dtype=self.dtype)
        oov = np.zeros((len(forms), 1), dtype=self.dtype)
        for i, form in enumerate(forms):
            row = self.word_vectors.row(form)
            if row is None:
                oov[i, 0] = 1.0
            else:
                known[i] = row
        out = ad.const(known)
        if oov.any():
            out = ad.add(out, ad.mul(ad.const(oov), self.unk))
        return out

    def named_parameters(self) -> dict[str, ad.Value]:
        out: dict[str, ad.Value] = {}
        if self.unk is not None:
            out["word.unk"] = self.unk
        if self.mix is not None and "ctx" in self.parts:
            out.update(self.mix.named_parameters())
        if self.morph is not None and ("upos" in self.parts or "feats" in self.parts):
            out.update(self.morph.named_parameters())
        return out
