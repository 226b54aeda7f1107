"""Complete task models: embedded inputs, encoders and task heads wired
together with a uniform train/predict surface for the harness."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .classifier import Pooler, PoolingSpec
from .conllu import Sentence
from .embeddings import (
    MorphEmbeddings,
    MorphVocab,
    ScalarMix,
    TokenEmbedder,
    WordVectors,
)
from .encoder import InputLstm, LstmEncoder, LstmSpec, lstm_layer
from .parser import BiaffineHead, ParseTree, decode_mst, parse_loss
from .tagger import TAGSET, TagHead, tag_loss


def encode_for_task(sent: Sentence, embedder: TokenEmbedder,
                    input_lstm: InputLstm | None = None,
                    ctx: np.ndarray | None = None) -> ad.Value:
    """Per-token input assembly: embedded parts, optionally concatenated
    with the hidden states of an extra input-level unidirectional LSTM."""
    x = embedder.embed_sentence(sent, ctx=ctx)
    if input_lstm is not None:
        x = input_lstm.forward(x)
    return x


def _build_embedder(parts, word_vectors, morph_vocab, d_pos, d_feat, mix_layers,
                    d_ctx, rng, dtype):
    morph = None
    if "upos" in parts or "feats" in parts:
        morph = MorphEmbeddings(morph_vocab, d_pos=d_pos, d_feat=d_feat,
                                rng=rng, dtype=dtype)
    mix = ScalarMix(mix_layers, dtype=dtype) if "ctx" in parts else None
    return TokenEmbedder(parts, word_vectors=word_vectors, morph=morph,
                         mix=mix, d_ctx=d_ctx, rng=rng, dtype=dtype)


class ParserModel:
    """Biaffine parser over a bidirectional LSTM encoder."""

    def __init__(self, parts, word_vectors: WordVectors | None,
                 morph_vocab: MorphVocab, labels: list[str], seed: int,
                 enc_layers=3, enc_hidden=400, input_lstm_hidden=0,
                 d_pos=15, d_feat=15, d_arc=128, d_lab=64,
                 mix_layers=1, d_ctx=0, dropout=0.33, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.dtype = dtype
        self.dropout = dropout
        self.embedder = _build_embedder(parts, word_vectors, morph_vocab,
                                        d_pos, d_feat, mix_layers, d_ctx, rng, dtype)
        in_dim = self.embedder.width
        self.input_lstm = None
        if input_lstm_hidden:
            self.input_lstm = InputLstm(in_dim, input_lstm_hidden, rng, dtype)
            in_dim += input_lstm_hidden
        self.spec = LstmSpec(layers=enc_layers, hidden=enc_hidden,
                             bidirectional=True, input_dim=in_dim)
        self.encoder = LstmEncoder(self.spec, rng, dtype)
        self.head = BiaffineHead(self.spec.output_dim, d_arc, d_lab, labels,
                                 rng, dtype)

    def _encode(self, sent, ctx, train, rng):
        x = encode_for_task(sent, self.embedder, self.input_lstm, ctx)
        h = self.encoder.forward(x)
        return ad.dropout(h, self.dropout, train=train, rng=rng)

    def loss(self, sent: Sentence, gold: ParseTree, ctx=None, train=False,
             rng=None) -> ad.Value:
        h = self._encode(sent, ctx, train, rng)
        arc = self.head.score_arcs(h)
        lab = self.head.score_labels(h, gold.heads)
        return parse_loss(arc, lab, gold)

    def predict(self, sent: Sentence, ctx=None) -> ParseTree:
        h = self._encode(sent, ctx, train=False, rng=None)
        arc = self.head.score_arcs(h).data
        heads = decode_mst(arc)
        lab = self.head.score_labels(h, heads).data
        labels = [int(np.argmax(row)) for row in lab]
        return ParseTree(heads=heads, labels=labels)

    def named_parameters(self) -> dict[str, ad.Value]:
        out = dict(self.embedder.named_parameters())
        if self.input_lstm is not None:
            out.update(self.input_lstm.named_parameters())
        out.update(self.encoder.named_parameters())
        out.update(self.head.named_parameters())
        return out


class TaggerModel:
    """Unidirectional LSTM token tagger with an optional interaction layer
    between the recurrent states and the output projection."""

    def __init__(self, parts, word_vectors: WordVectors | None,
                 morph_vocab: MorphVocab, seed: int,
                 enc_hidden=100, d_pos=15, d_feat=15,
                 mix_layers=1, d_ctx=0, interaction: bool | None = None,
                 dropout=0.0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.dropout = dropout
        self.embedder = _build_embedder(parts, word_vectors, morph_vocab,
                                        d_pos, d_feat, mix_layers, d_ctx, rng, dtype)
        self.spec = LstmSpec(layers=1, hidden=enc_hidden, bidirectional=False,
                             input_dim=self.embedder.width)
        self.encoder = LstmEncoder(self.spec, rng, dtype)
        if interaction is None:
            interaction = "upos" in parts or "feats" in parts
        self.head = TagHead(enc_hidden, rng, interaction=interaction, dtype=dtype)

    def _encode(self, sent, ctx, train, rng):
        x = encode_for_task(sent, self.embedder, None, ctx)
        h = self.encoder.forward(x)
        return ad.dropout(h, self.dropout, train=train, rng=rng)

    def loss(self, sent: Sentence, ctx=None, train=False, rng=None) -> ad.Value:
        h = self._encode(sent, ctx, train, rng)
        return tag_loss(h, self.head, [t.ner for t in sent.tokens])

    def predict(self, sent: Sentence, ctx=None) -> list[str]:
        h = self._encode(sent, ctx, train=False, rng=None)
        logits = self.head.logits(h).data
        return [TAGSET[int(np.argmax(row))] for row in logits]

    def named_parameters(self) -> dict[str, ad.Value]:
        out = dict(self.embedder.named_parameters())
        out.update(self.encoder.named_parameters())
        out.update(self.head.named_parameters())
        return out


class ClassifierModel:
    """Sequence classifier: the word stream runs through an LSTM whose last
    state is the sequence representation; enabled morph streams are pooled
    with their own parameters and concatenated before the output layer."""

    def __init__(self, parts, word_vectors: WordVectors | None,
                 morph_vocab: MorphVocab, seed: int,
                 enc_hidden=64, d_pos=15, d_feat=15,
                 pooling: PoolingSpec | None = None,
                 mix_layers=1, d_ctx=0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.parts = tuple(parts)
        self.pooling = pooling or PoolingSpec(kind="mean")
        rep_parts = [p for p in ("word", "ctx") if p in parts]
        self.embedder = _build_embedder(rep_parts or ["word"], word_vectors,
                                        morph_vocab, d_pos, d_feat, mix_layers,
                                        d_ctx, rng, dtype)
        self.morph = None
        if "upos" in parts or "feats" in parts:
            self.morph = MorphEmbeddings(morph_vocab, d_pos=d_pos, d_feat=d_feat,
                                         rng=rng, dtype=dtype)
        self.spec = LstmSpec(layers=1, hidden=enc_hidden, bidirectional=False,
                             input_dim=self.embedder.width)
        self.encoder = LstmEncoder(self.spec, rng, dtype)
        rep_dim = enc_hidden
        self.poolers: dict[str, Pooler] = {}
        if "upos" in parts:
            self.poolers["upos"] = Pooler(self.pooling, d_pos, rng, dtype,
                                          prefix="pool.upos")
            rep_dim += self.poolers["upos"].out_dim
        if "feats" in parts:
            self.poolers["feats"] = Pooler(self.pooling, self.morph.feats_width,
                                           rng, dtype, prefix="pool.feats")
            rep_dim += self.poolers["feats"].out_dim
        scale = 1.0 / np.sqrt(rep_dim)
        self.w_out = ad.param(rng.uniform(-scale, scale, (rep_dim, 2)).astype(dtype),
                              name="cls.w_out")
        self.b_out = ad.param(np.zeros(2, dtype=dtype), name="cls.b_out")

    def _representation(self, sent: Sentence, ctx=None) -> ad.Value:
        x = self.embedder.embed_sentence(sent, ctx=ctx)
        h = self.encoder.forward(x)
        pieces = [ad.reshape(ad.rows(h, [h.shape[0] - 1]), (h.shape[1],))]
        if "upos" in self.poolers:
            vecs = self.morph.upos_vectors([t.upos for t in sent.tokens])
            pieces.append(self.poolers["upos"].pool(vecs))
        if "feats" in self.poolers:
            vecs = self.morph.feats_vectors([t.feats for t in sent.tokens])
            pieces.append(self.poolers["feats"].pool(vecs))
        return pieces[0] if len(pieces) == 1 else ad.concat(pieces)

    def logits(self, sent: Sentence, ctx=None) -> ad.Value:
        rep = ad.reshape(self._representation(sent, ctx), (1, -1))
        return ad.reshape(ad.add(ad.matmul(rep, self.w_out), self.b_out), (2,))

    def distribution(self, sent: Sentence, ctx=None) -> np.ndarray:
        return ad.softmax(self.logits(sent, ctx)).data

    def loss(self, sent: Sentence, label: int, ctx=None, train=False,
             rng=None) -> ad.Value:
        return ad.cross_entropy(self.logits(sent, ctx), label)

    def predict(self, sent: Sentence, ctx=None) -> int:
        return int(np.argmax(self.logits(sent, ctx).data))

    def named_parameters(self) -> dict[str, ad.Value]:
        out = dict(self.embedder.named_parameters())
        if self.morph is not None:
            out.update({k: v for k, v in self.morph.named_parameters().items()})
        out.update(self.encoder.named_parameters())
        for pooler in self.poolers.values():
            out.update(pooler.named_parameters())
        out["cls.w_out"] = self.w_out
        out["cls.b_out"] = self.b_out
        return out
