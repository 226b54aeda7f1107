"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line (visible with `pytest -s tests/test_acceptance.py`).

The trend criteria run on the bundled synthetic rich-morphology treebank;
point MORPHOPARSE_UD_DIR at a directory with real UD .conllu splits to
run them on a real treebank instead (see tests/test_conllu.py for the
expected layout).
"""

import functools
import math
import os
import time
from itertools import product

import mpmath
import numpy as np
import pytest

from helpers import (
    all_single_rooted_trees,
    brute_force_best_tree,
    gradcheck,
    regex_spans,
)
from morphoparse import autodiff as ad
from morphoparse import kernels
from morphoparse.classifier import Pooler, PoolingSpec, accuracy_eval
from morphoparse.conllu import write_treebank_file
from morphoparse.embeddings import ScalarMix, WordVectors, write_vectors
from morphoparse.encoder import LstmEncoder, LstmSpec, lstm_layer
from morphoparse.harness import ExperimentConfig, build_task, train
from morphoparse.parser import (
    BiaffineHead,
    ParseTree,
    corpus_attachment,
    decode_mst,
    parse_loss,
)
from morphoparse.rng import Xorshift64Star
from morphoparse.stats import (
    PairedSample,
    normal_cdf,
    two_proportion_ztest,
    wilcoxon_signed_rank,
)
from morphoparse.synth import (
    corpus_forms,
    corrupt_annotations,
    form_vectors,
    make_adjective_task,
    make_dependency_corpus,
)
from morphoparse.tagger import TAGSET, weighted_f1


def criterion(name, limit_seconds=None):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.time()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\nACCEPTANCE {name}: FAIL")
                raise
            elapsed = time.time() - start
            if limit_seconds is not None and elapsed > limit_seconds:
                print(f"\nACCEPTANCE {name}: FAIL (took {elapsed:.0f}s, "
                      f"limit {limit_seconds}s)")
                raise AssertionError(
                    f"{name} exceeded its runtime limit: {elapsed:.0f}s")
            print(f"\nACCEPTANCE {name}: PASS ({elapsed:.1f}s)")
        return wrapper
    return decorate


# ---------------------------------------------------------------- 1. gradients

@criterion("gradient-suite", limit_seconds=120)
def test_gradient_suite():
    rng = np.random.default_rng(7)

    def check(make_loss, params, seed):
        gradcheck(make_loss, params, points=10, tol=1e-4, seed=seed)

    # primitives
    x = ad.param(rng.standard_normal((4, 5)))
    y = ad.param(rng.standard_normal((4, 5)))
    w = ad.param(rng.standard_normal((5, 3)))
    mask = ad.const(rng.standard_normal((4, 5)))
    mask2 = ad.const(rng.standard_normal((4, 3)))
    check(lambda: ad.vsum(ad.mul(ad.add(x, y), mask)), [x, y], 1)
    check(lambda: ad.vsum(ad.mul(ad.mul(x, y), mask)), [x, y], 2)
    check(lambda: ad.vsum(ad.mul(ad.matmul(x, w), mask2)), [x, w], 3)
    mask_cat = ad.const(rng.standard_normal((4, 10)))
    check(lambda: ad.vsum(ad.mul(ad.concat([x, y], axis=1), mask_cat)), [x, y], 4)
    for op, seed in ((ad.tanh, 5), (ad.sigmoid, 6), (ad.relu, 7),
                     (ad.softmax, 8), (ad.log_softmax, 9)):
        check(lambda op=op: ad.vsum(ad.mul(op(x), mask)), [x], seed)
    check(lambda: ad.vsum(ad.mul(
        ad.dropout(x, 0.4, train=True, rng=np.random.default_rng(0)), mask)), [x], 10)
    table = ad.param(rng.standard_normal((6, 4)))
    mask_emb = ad.const(rng.standard_normal((4, 4)))
    check(lambda: ad.vsum(ad.mul(ad.embedding_lookup(table, [0, 2, 2, 5]),
                                 mask_emb)), [table], 11)
    logits = ad.param(rng.standard_normal((5, 7)))
    targets = rng.integers(0, 7, 5)
    check(lambda: ad.cross_entropy(logits, targets), [logits], 12)
    check(lambda: ad.vmean(ad.mul(x, x)), [x], 13)

    # LSTM layer (both scan directions, both kernel backends)
    from morphoparse import _lstm_numpy

    for backend_mod in {kernels._impl, _lstm_numpy}:
        saved = kernels._impl
        try:
            kernels.recurrent_forward = backend_mod.recurrent_forward
            kernels.recurrent_backward = backend_mod.recurrent_backward
            for reverse, seed in ((False, 14), (True, 15)):
                xs = ad.param(rng.standard_normal((4, 3)))
                w_ih = ad.param(rng.standard_normal((3, 20)) * 0.4)
                w_hh = ad.param(rng.standard_normal((5, 20)) * 0.4)
                b = ad.param(rng.standard_normal(20) * 0.1)
                proj = ad.const(rng.standard_normal(5))
                check(lambda: ad.vsum(ad.tanh(ad.matmul(
                    lstm_layer(xs, w_ih, w_hh, b, reverse=reverse), proj))),
                    [xs, w_ih, w_hh, b], seed)
        finally:
            kernels.recurrent_forward = saved.recurrent_forward
            kernels.recurrent_backward = saved.recurrent_backward

    # biaffine scorer through the parse loss
    head = BiaffineHead(6, 4, 3, ["a", "b", "c"], np.random.default_rng(3),
                        dtype=np.float64)
    hiddens = ad.param(rng.standard_normal((3, 6)))
    gold = ParseTree(heads=[2, 0, 2], labels=[1, 0, 2])
    check(lambda: parse_loss(head.score_arcs(hiddens),
                             head.score_labels(hiddens, gold.heads), gold),
          [hiddens] + list(head.named_parameters().values()), 16)

    # scalar mix
    mix = ScalarMix(3, dtype=np.float64)
    mix.logits.data[:] = [0.3, -0.2, 0.5]
    layer_stack = rng.standard_normal((4, 3, 5))
    proj = ad.const(rng.standard_normal(5))
    check(lambda: ad.vsum(ad.matmul(mix.apply(layer_stack), proj)),
          [mix.logits, mix.gamma], 17)

    # all three poolings
    for kind, seed in (("mean", 18), ("weighted", 19), ("lstm", 20)):
        pooler = Pooler(PoolingSpec(kind=kind, lstm_hidden=3), 4,
                        np.random.default_rng(seed), dtype=np.float64)
        seq = ad.param(rng.standard_normal((5, 4)))
        out_dim = pooler.out_dim
        proj = ad.const(rng.standard_normal(out_dim))
        params = [seq] + list(pooler.named_parameters().values())
        if kind == "weighted":
            pooler.params["pool.a"].data[:] = rng.standard_normal(4) * 0.5
        check(lambda: ad.vsum(ad.mul(pooler.pool(seq), proj)), params, seed)


# ---------------------------------------------------------------- 2. decoder

@criterion("decoder-oracle", limit_seconds=60)
def test_decoder_oracle():
    mismatches = 0
    for n in (2, 3, 4, 5):
        rng = np.random.default_rng(1000 + n)
        trees = all_single_rooted_trees(n)
        cols = np.arange(n)[None, :]
        for _ in range(1000):
            scores = rng.standard_normal((n + 1, n))
            mst = decode_mst(scores)
            mst_score = scores[mst, np.arange(n)].sum()
            best_score = scores[trees, cols].sum(axis=1).max()
            if not math.isclose(mst_score, best_score, rel_tol=0, abs_tol=1e-9):
                mismatches += 1
            ParseTree(heads=mst, labels=[0] * n)
    assert mismatches == 0


# ---------------------------------------------------------------- 3. metrics

@criterion("metric-oracles")
def test_metric_oracles():
    rng = np.random.default_rng(77)
    xrng = Xorshift64Star(77)

    for _ in range(500):
        # attachment scores vs flat recount
        n_sents = 1 + xrng.randint(5)
        golds, preds = [], []
        for _ in range(n_sents):
            n = 1 + xrng.randint(6)
            golds.append(ParseTree(heads=decode_mst(rng.standard_normal((n + 1, n))),
                                   labels=list(rng.integers(0, 3, n))))
            preds.append(ParseTree(heads=decode_mst(rng.standard_normal((n + 1, n))),
                                   labels=list(rng.integers(0, 3, n))))
        rep = corpus_attachment(golds, preds)
        total = heads_ok = both_ok = 0
        for g, p in zip(golds, preds):
            for gh, ph, gl, pl in zip(g.heads, p.heads, g.labels, p.labels):
                total += 1
                heads_ok += gh == ph
                both_ok += gh == ph and gl == pl
        assert rep.uas == heads_ok / total and rep.las == both_ok / total

        # span weighted F1 vs regex segmentation + direct formula
        gold_labels, pred_labels = [], []
        for _ in range(n_sents):
            m = 1 + xrng.randint(8)
            gold_labels.append([TAGSET[xrng.randint(len(TAGSET))] for _ in range(m)])
            pred_labels.append([TAGSET[xrng.randint(len(TAGSET))] for _ in range(m)])
        rep = weighted_f1(gold_labels, pred_labels)
        counts = {c: [0, 0, 0] for c in ("PER", "ORG", "LOC")}  # gold, pred, hit
        for g, p in zip(gold_labels, pred_labels):
            gs, ps = regex_spans(g), regex_spans(p)
            for cls, *_ in gs:
                counts[cls][0] += 1
            for cls, *_ in ps:
                counts[cls][1] += 1
            for cls, *_ in gs & ps:
                counts[cls][2] += 1
        total_gold = sum(v[0] for v in counts.values())
        expect = 0.0
        for cls, (ng, np_, hit) in counts.items():
            p = hit / np_ if np_ else 0.0
            r = hit / ng if ng else 0.0
            f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
            if total_gold:
                expect += f1 * ng / total_gold
        assert rep.weighted_f1 == expect

        # accuracy vs direct count
        m = 1 + xrng.randint(40)
        gold = [xrng.randint(2) for _ in range(m)]
        pred = [xrng.randint(2) for _ in range(m)]
        assert accuracy_eval(gold, pred) == \
            sum(g == p for g, p in zip(gold, pred)) / m


# ---------------------------------------------------------------- 4. statistics

@criterion("statistics")
def test_statistics():
    rng = np.random.default_rng(5)
    for n in range(1, 11):
        for _ in range(3):
            a = list(rng.standard_normal(n))
            b = list(rng.standard_normal(n))
            res = wilcoxon_signed_rank(PairedSample(a, b), mode="exact")
            diffs = [x - y for x, y in zip(a, b) if x != y]
            ranks = _rank(diffs)
            observed = abs(sum(math.copysign(r, d) for r, d in zip(ranks, diffs)))
            hits = sum(
                1 for signs in product((1, -1), repeat=len(diffs))
                if abs(sum(s * r for s, r in zip(signs, ranks))) >= observed)
            assert res.p_value == hits / 2 ** len(diffs)

    res = two_proportion_ztest(880, 1000, 850, 1000)
    assert abs(res.statistic - 1.963) < 1e-3

    mpmath.mp.dps = 30
    for x in np.linspace(-8, 8, 1000):
        assert abs(normal_cdf(float(x)) - float(mpmath.ncdf(float(x)))) < 1e-7


def _rank(diffs):
    pairs = sorted((abs(d), i) for i, d in enumerate(diffs))
    ranks = [0.0] * len(diffs)
    i = 0
    while i < len(pairs):
        j = i
        while j + 1 < len(pairs) and pairs[j + 1][0] == pairs[i][0]:
            j += 1
        for k in range(i, j + 1):
            ranks[pairs[k][1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


# ---------------------------------------------------------------- trend fixtures

TREND_SEEDS = (1, 2, 3)


def _trend_config(tmp, parts, seed, predicted=False):
    raw = {
        "task": "dp", "seed": seed, "parts": parts,
        "data": {"train": str(tmp / "train.conllu"),
                 "dev": str(tmp / "dev.conllu"),
                 "vectors": str(tmp / "vecs.txt")},
        "encoder": {"layers": 1, "hidden": 64},
        "input_lstm_hidden": 32,
        "dims": {"pos": 12, "feat": 8, "arc": 48, "label": 24},
        "epochs": 10, "tolerance": 5, "dropout": 0.2,
    }
    if predicted:
        raw["feature_source"] = {"train": str(tmp / "train_pred.conllu"),
                                 "dev": str(tmp / "dev_pred.conllu")}
    return ExperimentConfig(raw)


def _dev_las(cfg):
    bundle = build_task(cfg)
    train(cfg, bundle=bundle)
    _, detail = bundle.evaluate(bundle.model, bundle.dev)
    return detail["las"]


@pytest.fixture(scope="module")
def trend_workspace(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("trend")
    ud_dir = os.environ.get("MORPHOPARSE_UD_DIR")
    if ud_dir:
        # real-treebank mode: subset the configured training split
        from morphoparse.conllu import read_treebank_file
        train_s = read_treebank_file(
            os.path.join(ud_dir, "trend-train.conllu"))[:500]
        dev_s = read_treebank_file(os.path.join(ud_dir, "trend-dev.conllu"))[:150]
        sents = train_s + dev_s
    else:
        sents = make_dependency_corpus(620, seed=11)
        train_s, dev_s = sents[:500], sents[500:]
    noisy = corrupt_annotations(sents, 0.15, seed=99)
    write_treebank_file(tmp / "train.conllu", train_s)
    write_treebank_file(tmp / "dev.conllu", dev_s)
    write_treebank_file(tmp / "train_pred.conllu", noisy[:len(train_s)])
    write_treebank_file(tmp / "dev_pred.conllu", noisy[len(train_s):])
    write_vectors(tmp / "vecs.txt", form_vectors(corpus_forms(sents), 24, seed=11))
    results = {}
    for seed in TREND_SEEDS:
        results[("baseline", seed)] = _dev_las(_trend_config(tmp, ["word"], seed))
        results[("gold", seed)] = _dev_las(
            _trend_config(tmp, ["word", "upos", "feats"], seed))
        results[("noisy", seed)] = _dev_las(
            _trend_config(tmp, ["word", "upos", "feats"], seed, predicted=True))
    return results


# ---------------------------------------------------------------- 5. capacity

@criterion("capacity-overfit", limit_seconds=600)
def test_capacity_overfit_50_sentences(tmp_path):
    sents = make_dependency_corpus(50, seed=21)
    write_treebank_file(tmp_path / "train.conllu", sents)
    write_treebank_file(tmp_path / "dev.conllu", sents)    # stop on train fit
    write_vectors(tmp_path / "vecs.txt",
                  form_vectors(corpus_forms(sents), 24, seed=21))
    cfg = ExperimentConfig({
        "task": "dp", "seed": 1, "parts": ["word"],
        "data": {"train": str(tmp_path / "train.conllu"),
                 "dev": str(tmp_path / "dev.conllu"),
                 "vectors": str(tmp_path / "vecs.txt")},
        "encoder": {"layers": 1, "hidden": 64},
        "input_lstm_hidden": 32,
        "dims": {"pos": 12, "feat": 8, "arc": 48, "label": 24},
        "epochs": 200, "tolerance": 8, "dropout": 0.0,
    })
    result = train(cfg)
    best_uas = max(e["detail"]["uas"] for e in result.log)
    assert best_uas >= 0.99, f"train UAS only reached {best_uas:.3f}"
    assert result.stopped_epoch <= 200


# ---------------------------------------------------------------- 6. gold trend

@criterion("gold-feature-trend", limit_seconds=3600)
def test_directional_trend_gold_features(trend_workspace):
    gains = [trend_workspace[("gold", s)] - trend_workspace[("baseline", s)]
             for s in TREND_SEEDS]
    mean_gain = float(np.mean(gains))
    print(f"\n  gold-feature LAS gain per seed: "
          f"{[f'{g * 100:.1f}' for g in gains]} (mean {mean_gain * 100:.1f} points)")
    assert mean_gain >= 0.01, f"mean LAS gain {mean_gain * 100:.2f} < 1.0 points"


# ---------------------------------------------------------------- 7. noisy trend

@criterion("noisy-feature-trend", limit_seconds=3600)
def test_noisy_features_gain_strictly_smaller(trend_workspace):
    gold_gain = np.mean([trend_workspace[("gold", s)] -
                         trend_workspace[("baseline", s)] for s in TREND_SEEDS])
    noisy_gain = np.mean([trend_workspace[("noisy", s)] -
                          trend_workspace[("baseline", s)] for s in TREND_SEEDS])
    print(f"\n  gold gain {gold_gain * 100:.2f} vs noisy gain {noisy_gain * 100:.2f} points")
    assert noisy_gain < gold_gain


# ---------------------------------------------------------------- 8. pooling

@criterion("pooling-task", limit_seconds=1200)
def test_weighted_pooling_learns_adjective_count(tmp_path):
    labels, texts, companions = make_adjective_task(3334, seed=7)
    corpus = tmp_path / "task.tsv"
    with open(corpus, "w", encoding="utf-8") as fh:
        for lab, toks in zip(labels, texts):
            fh.write(f"{lab}\t{' '.join(toks)}\n")
    write_treebank_file(tmp_path / "task.conllu", companions)
    write_vectors(tmp_path / "vecs.txt",
                  WordVectors(dim=8, vocab={"w": 0}, matrix=np.zeros((1, 8))))
    cfg = ExperimentConfig({
        "task": "cf", "seed": 1, "parts": ["word", "upos"],
        "data": {"corpus": str(corpus),
                 "annotations": str(tmp_path / "task.conllu"),
                 "vectors": str(tmp_path / "vecs.txt")},
        "encoder": {"layers": 1, "hidden": 16},
        "dims": {"pos": 12, "feat": 8, "arc": 8, "label": 8},
        "pooling": {"kind": "weighted", "lstm_hidden": 0},
        "epochs": 50, "tolerance": 5, "dropout": 0.0,
    })
    bundle = build_task(cfg)
    assert len(bundle.train) == 2000
    result = train(cfg, bundle=bundle)
    assert result.stopped_epoch <= 50
    acc, _ = bundle.evaluate(bundle.model, bundle.test)
    assert acc > 0.95, f"test accuracy {acc:.3f}"


# ---------------------------------------------------------------- 9. determinism

@criterion("determinism")
def test_experiment_cell_reruns_exactly(tmp_path):
    sents = make_dependency_corpus(40, seed=61)
    write_treebank_file(tmp_path / "train.conllu", sents[:30])
    write_treebank_file(tmp_path / "dev.conllu", sents[30:])
    write_vectors(tmp_path / "vecs.txt",
                  form_vectors(corpus_forms(sents), 16, seed=61))
    cfg = ExperimentConfig({
        "task": "dp", "seed": 9, "parts": ["word", "upos", "feats"],
        "data": {"train": str(tmp_path / "train.conllu"),
                 "dev": str(tmp_path / "dev.conllu"),
                 "vectors": str(tmp_path / "vecs.txt")},
        "encoder": {"layers": 1, "hidden": 24},
        "input_lstm_hidden": 12,
        "dims": {"pos": 8, "feat": 6, "arc": 16, "label": 12},
        "epochs": 3, "tolerance": 5, "dropout": 0.15,
    })
    first = train(cfg)
    second = train(cfg)
    assert first.log == second.log           # bitwise-equal reported numbers
    assert first.best_metric == second.best_metric
    for name in first.checkpoint.entries:
        assert np.array_equal(first.checkpoint.entries[name],
                              second.checkpoint.entries[name])
