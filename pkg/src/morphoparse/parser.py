"""Graph-based dependency parsing: biaffine scoring, tree decoding and
attachment-score evaluation.

Arc scores live in an (n+1) x n matrix: row h is a candidate head (0 is
the artificial ROOT, carried by a learned vector), column d-1 is the
dependent.  Decoding returns a single-rooted arborescence; ties in any
argmax break toward the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad

NEG_INF = float("-inf")


class ParserError(ValueError):
    pass


@dataclass
class ParseTree:
    heads: list[int]                 # per token, 0 = ROOT
    labels: list[int]                # per token, label-vocabulary ids

    def __post_init__(self):
        n = len(self.heads)
        if len(self.labels) != n:
            raise ParserError("heads and labels disagree in length")
        roots = [i for i, h in enumerate(self.heads) if h == 0]
        if n and len(roots) != 1:
            raise ParserError(f"tree must have exactly one root, got {len(roots)}")
        for d, h in enumerate(self.heads, start=1):
            if not 0 <= h <= n or h == d:
                raise ParserError(f"bad head {h} for token {d}")
        # every token must reach ROOT
        for d in range(1, n + 1):
            seen = set()
            cur = d
            while cur != 0:
                if cur in seen:
                    raise ParserError(f"cycle through token {d}")
                seen.add(cur)
                cur = self.heads[cur - 1]


@dataclass
class AttachmentReport:
    uas: float
    las: float
    token_count: int


class BiaffineHead:
    """Arc and label scoring on top of encoder states."""

    def __init__(self, enc_dim: int, d_arc: int, d_lab: int, labels: list[str],
                 rng: np.random.Generator, dtype=np.float32):
        if d_arc < 1 or d_lab < 1:
            raise ParserError("d_arc and d_lab must be positive")
        self.enc_dim = enc_dim
        self.d_arc = d_arc
        self.d_lab = d_lab
        self.labels = list(labels)
        self.label_index = {lab: i for i, lab in enumerate(self.labels)}
        L = len(self.labels)

        def lin(n_in, n_out, name):
            scale = 1.0 / np.sqrt(n_in)
            return (
                ad.param(rng.uniform(-scale, scale, (n_in, n_out)).astype(dtype),
                         name=f"{name}.W"),
                ad.param(np.zeros(n_out, dtype=dtype), name=f"{name}.b"),
            )

        self.root_vec = ad.param(
            rng.uniform(-0.5, 0.5, enc_dim).astype(dtype), name="biaff.root")
        self.arc_dep = lin(enc_dim, d_arc, "biaff.arc_dep")
        self.arc_head = lin(enc_dim, d_arc, "biaff.arc_head")
        self.lab_dep = lin(enc_dim, d_lab, "biaff.lab_dep")
        self.lab_head = lin(enc_dim, d_lab, "biaff.lab_head")
        scale = 1.0 / np.sqrt(d_arc)
        self.u_arc = ad.param(rng.uniform(-scale, scale, (d_arc, d_arc)).astype(dtype),
                              name="biaff.u_arc")
        self.b_arc = ad.param(np.zeros(d_arc, dtype=dtype), name="biaff.b_arc")
        scale = 1.0 / np.sqrt(d_lab)
        self.u_lab = ad.param(rng.uniform(-scale, scale, (L, d_lab, d_lab)).astype(dtype),
                              name="biaff.u_lab")
        self.w_lab_dep = ad.param(np.zeros((d_lab, L), dtype=dtype), name="biaff.w_lab_dep")
        self.w_lab_head = ad.param(np.zeros((d_lab, L), dtype=dtype), name="biaff.w_lab_head")
        self.b_lab = ad.param(np.zeros(L, dtype=dtype), name="biaff.b_lab")

    def _mlp(self, x: ad.Value, weights) -> ad.Value:
        W, b = weights
        return ad.relu(ad.add(ad.matmul(x, W), b))

    def with_root(self, hiddens: ad.Value) -> ad.Value:
        root = ad.reshape(self.root_vec, (1, self.enc_dim))
        return ad.concat([root, hiddens], axis=0)

    def score_arcs(self, hiddens: ad.Value) -> ad.Value:
        """(n+1) x n arc score matrix from n encoder states."""
        n = hiddens.shape[0]
        if n < 1:
            raise ParserError("cannot score an empty sentence")
        hs = self.with_root(hiddens)                       # (n+1, enc)
        head_rep = self._mlp(hs, self.arc_head)            # (n+1, d_arc)
        dep_rep = self._mlp(hiddens, self.arc_dep)         # (n, d_arc)
        bilinear = ad.matmul(ad.matmul(head_rep, self.u_arc), ad.transpose(dep_rep))
        head_bias = ad.reshape(ad.matmul(head_rep, self.b_arc), (n + 1, 1))
        return ad.add(bilinear, head_bias)

    def score_labels(self, hiddens: ad.Value, heads: list[int]) -> ad.Value:
        """(n, L) label scores for each dependent against given heads."""
        hs = self.with_root(hiddens)
        dep_rep = self._mlp(hiddens, self.lab_dep)         # (n, d_lab)
        head_rep = ad.rows(self._mlp(hs, self.lab_head), list(heads))
        out = ad.label_bilinear(dep_rep, head_rep, self.u_lab)
        out = ad.add(out, ad.matmul(dep_rep, self.w_lab_dep))
        out = ad.add(out, ad.matmul(head_rep, self.w_lab_head))
        return ad.add(out, self.b_lab)

    def named_parameters(self) -> dict[str, ad.Value]:
        out = {"biaff.root": self.root_vec}
        for name, pair in (("arc_dep", self.arc_dep), ("arc_head", self.arc_head),
                           ("lab_dep", self.lab_dep), ("lab_head", self.lab_head)):
            out[f"biaff.{name}.W"], out[f"biaff.{name}.b"] = pair
        out["biaff.u_arc"] = self.u_arc
        out["biaff.b_arc"] = self.b_arc
        out["biaff.u_lab"] = self.u_lab
        out["biaff.w_lab_dep"] = self.w_lab_dep
        out["biaff.w_lab_head"] = self.w_lab_head
        out["biaff.b_lab"] = self.b_lab
        return out


def parse_loss(arc_scores: ad.Value, label_scores: ad.Value, gold: ParseTree) -> ad.Value:
    """Head cross-entropy plus label cross-entropy (labels conditioned on
    gold heads), each averaged per token."""
    n = arc_scores.shape[1]
    if len(gold.heads) != n:
        raise ParserError(f"gold tree has {len(gold.heads)} tokens, scores have {n}")
    for h in gold.heads:
        if not 0 <= h <= n:
            raise ParserError(f"gold head {h} out of range 0..{n}")
    arc_ce = ad.cross_entropy(ad.transpose(arc_scores), gold.heads)
    lab_ce = ad.cross_entropy(label_scores, gold.labels)
    return ad.add(arc_ce, lab_ce)


def decode_greedy(scores: np.ndarray) -> list[int]:
    """Per-dependent argmax head; may violate tree constraints."""
    s = np.asarray(scores, dtype=np.float64)
    n = s.shape[1]
    heads = []
    for d in range(1, n + 1):
        col = s[:, d - 1].copy()
        col[d] = NEG_INF                  # token cannot head itself
        heads.append(int(np.argmax(col)))
    return heads


def _find_cycle(par: np.ndarray) -> list[int] | None:
    m = len(par)
    color = np.zeros(m, dtype=np.int8)    # 0 unseen, 1 in progress, 2 done
    color[0] = 2
    for start in range(1, m):
        if color[start]:
            continue
        path = []
        v = start
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = par[v]
        if color[v] == 1:                 # found a new cycle; cut it out of path
            cyc = path[path.index(v):]
            for u in path:
                color[u] = 2
            return cyc
        for u in path:
            color[u] = 2
    return None


def _cle(s: np.ndarray) -> np.ndarray:
    """Maximum arborescence rooted at node 0 of a dense (m, m) score
    matrix s[h][d]; returns the parent array (par[0] unused)."""
    m = s.shape[0]
    par = np.zeros(m, dtype=np.int64)
    for d in range(1, m):
        par[d] = int(np.argmax(s[:, d]))
    cyc = _find_cycle(par)
    if cyc is None:
        return par
    cyc_set = set(cyc)
    cycle_score = sum(s[par[v], v] for v in cyc)
    keep = [v for v in range(m) if v not in cyc_set]
    c = len(keep)                          # contracted node id
    new_m = c + 1
    ns = np.full((new_m, new_m), NEG_INF)
    for ih, h in enumerate(keep):
        for idx, d in enumerate(keep):
            ns[ih, idx] = s[h, d]
    enter_choice = {}
    leave_choice = {}
    for idx, d in enumerate(keep):
        if d == 0:
            continue
        vals = [s[v, d] for v in cyc]
        best = int(np.argmax(vals))
        ns[c, idx] = vals[best]
        leave_choice[d] = cyc[best]
    for ih, h in enumerate(keep):
        vals = [s[h, u] - s[par[u], u] for u in cyc]
        best = int(np.argmax(vals))
        ns[ih, c] = cycle_score + vals[best]
        enter_choice[h] = cyc[best]
    sub = _cle(ns)
    out = np.zeros(m, dtype=np.int64)
    for idx, d in enumerate(keep):
        if d == 0:
            continue
        ph = sub[idx]
        out[d] = keep[ph] if ph != c else leave_choice[d]
    entry_head = keep[sub[c]]
    entry_node = enter_choice[entry_head]
    for u in cyc:
        out[u] = par[u]
    out[entry_node] = entry_head
    return out


def _tree_score(s: np.ndarray, par: np.ndarray) -> float:
    return float(sum(s[par[d], d] for d in range(1, len(par))))


def decode_mst(scores: np.ndarray) -> list[int]:
    """Maximum-score spanning arborescence with exactly one child of ROOT.

    When the unconstrained optimum hangs several tokens off ROOT, each
    candidate root is tried with the others priced out at -inf and the
    best-scoring tree wins.
    """
    s_in = np.asarray(scores, dtype=np.float64)
    n = s_in.shape[1]
    if n == 0:
        raise ParserError("cannot decode an empty sentence")
    if not np.isfinite(s_in).all():
        raise ParserError("arc scores must be finite")
    m = n + 1
    s = np.full((m, m), NEG_INF)
    s[:, 1:] = s_in
    np.fill_diagonal(s, NEG_INF)
    s[:, 0] = NEG_INF
    par = _cle(s)
    root_children = [d for d in range(1, m) if par[d] == 0]
    if len(root_children) != 1:
        best_par, best_score = None, NEG_INF
        for r in range(1, m):
            sr = s.copy()
            sr[0, :] = NEG_INF
            sr[0, r] = s[0, r]
            par_r = _cle(sr)
            sc = _tree_score(s, par_r)
            if sc > best_score:
                best_par, best_score = par_r, sc
        par = best_par
    return [int(h) for h in par[1:]]


def _attachment_counts(gold: ParseTree, pred: ParseTree,
                       mask: list[bool] | None = None) -> tuple[int, int, int]:
    if len(gold.heads) != len(pred.heads):
        raise ParserError("gold and predicted trees disagree in length")
    if mask is None:
        mask = [True] * len(gold.heads)
    elif len(mask) != len(gold.heads):
        raise ParserError("token mask disagrees with tree length")
    total = head_ok = both_ok = 0
    for gh, ph, gl, pl, keep in zip(gold.heads, pred.heads, gold.labels,
                                    pred.labels, mask):
        if not keep:
            continue
        total += 1
        head_ok += gh == ph
        both_ok += gh == ph and gl == pl
    return total, head_ok, both_ok


def attachment_scores(gold: ParseTree, pred: ParseTree,
                      mask: list[bool] | None = None) -> AttachmentReport:
    """Per-sentence scores; `mask` marks the tokens that count (all by
    default; pass upos != PUNCT flags to exclude punctuation)."""
    n, head_ok, both_ok = _attachment_counts(gold, pred, mask)
    if n == 0:
        raise ParserError("no countable tokens")
    return AttachmentReport(uas=head_ok / n, las=both_ok / n, token_count=n)


def corpus_attachment(golds: list[ParseTree], preds: list[ParseTree],
                      masks: list[list[bool]] | None = None) -> AttachmentReport:
    """Token-count-weighted aggregation over sentences."""
    if len(golds) != len(preds):
        raise ParserError("corpus size mismatch")
    total = head_ok = both_ok = 0
    for i, (g, p) in enumerate(zip(golds, preds)):
        n, h, b = _attachment_counts(g, p, masks[i] if masks else None)
        total += n
        head_ok += h
        both_ok += b
    if total == 0:
        raise ParserError("empty corpus")
    return AttachmentReport(uas=head_ok / total, las=both_ok / total, token_count=total)
