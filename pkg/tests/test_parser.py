import numpy as np
import pytest

from helpers import brute_force_best_tree, gradcheck
from morphoparse import autodiff as ad
from morphoparse.parser import (
    AttachmentReport,
    BiaffineHead,
    ParseTree,
    ParserError,
    attachment_scores,
    corpus_attachment,
    decode_greedy,
    decode_mst,
    parse_loss,
)


def _head(enc_dim=6, d_arc=4, d_lab=3, labels=("root", "nsubj", "obj"), seed=0):
    return BiaffineHead(enc_dim, d_arc, d_lab, list(labels),
                        np.random.default_rng(seed), dtype=np.float64)


def _tree_score(scores, heads):
    return sum(scores[h, d] for d, h in enumerate(heads))


# ------------------------------------------------------------------ scoring

def test_zero_biaffine_weights_give_zero_scores():
    head = _head()
    head.u_arc.data[...] = 0.0
    head.b_arc.data[...] = 0.0
    hiddens = ad.const(np.random.default_rng(1).standard_normal((4, 6)))
    scores = head.score_arcs(hiddens)
    assert np.array_equal(scores.data, np.zeros((5, 4)))


@pytest.mark.parametrize("n", range(1, 11))
def test_arc_score_matrix_shape(n):
    head = _head()
    hiddens = ad.const(np.random.default_rng(2).standard_normal((n, 6)))
    assert head.score_arcs(hiddens).shape == (n + 1, n)


def test_biaffine_gradients_match_finite_differences():
    head = _head(seed=3)
    rng = np.random.default_rng(4)
    hiddens = ad.param(rng.standard_normal((3, 6)))
    gold = ParseTree(heads=[2, 0, 2], labels=[1, 0, 2])
    params = [hiddens] + list(head.named_parameters().values())

    def loss():
        arc = head.score_arcs(hiddens)
        lab = head.score_labels(hiddens, gold.heads)
        return parse_loss(arc, lab, gold)

    gradcheck(loss, params, points=6, tol=1e-4, seed=5)


def test_summed_arc_scores_gradcheck():
    head = _head(seed=6)
    rng = np.random.default_rng(7)
    hiddens = ad.param(rng.standard_normal((4, 6)))
    params = [hiddens] + list(head.named_parameters().values())
    gradcheck(lambda: ad.vsum(ad.tanh(head.score_arcs(hiddens))),
              params, points=5, tol=1e-4, seed=8)


# ------------------------------------------------------------------ loss

def test_uniform_scores_arc_term_is_log_k():
    n = 4
    arc = ad.const(np.zeros((n + 1, n)))
    lab = ad.const(np.zeros((n, 1)))
    gold = ParseTree(heads=[0, 1, 1, 2], labels=[0, 0, 0, 0])
    loss = parse_loss(ad.param(arc.data), ad.param(lab.data), gold)
    # labels have one class: zero label loss; arcs uniform over n+1 heads
    assert np.isclose(float(loss.data), np.log(n + 1))


def test_peaked_scores_drive_loss_to_zero_monotonically():
    gold = ParseTree(heads=[0, 1], labels=[0, 1])
    last = None
    for peak in (1.0, 3.0, 9.0, 27.0):
        arc = np.zeros((3, 2))
        arc[0, 0] = peak
        arc[1, 1] = peak
        lab = np.zeros((2, 2))
        lab[0, 0] = peak
        lab[1, 1] = peak
        loss = float(parse_loss(ad.param(arc), ad.param(lab), gold).data)
        if last is not None:
            assert loss < last
        last = loss
    assert last < 1e-10


def test_loss_equals_brute_force_log_softmax_sums():
    rng = np.random.default_rng(9)
    n, L = 4, 3
    arc = rng.standard_normal((n + 1, n))
    lab = rng.standard_normal((n, L))
    gold = ParseTree(heads=[2, 0, 2, 3], labels=[1, 0, 2, 1])
    got = float(parse_loss(ad.param(arc), ad.param(lab), gold).data)
    expected = 0.0
    for d in range(n):
        col = arc[:, d]
        expected -= (col[gold.heads[d]] - np.log(np.exp(col).sum())) / n
        row = lab[d]
        expected -= (row[gold.labels[d]] - np.log(np.exp(row).sum())) / n
    assert np.isclose(got, expected, rtol=1e-12)


def test_gold_head_out_of_range_rejected():
    arc = ad.param(np.zeros((3, 2)))
    lab = ad.param(np.zeros((2, 2)))
    with pytest.raises(ParserError):
        parse_loss(arc, lab, ParseTree(heads=[0, 5], labels=[0, 0]))


# ------------------------------------------------------------------ decoding

def test_greedy_follows_diagonal_chain():
    n = 4
    scores = np.full((n + 1, n), -5.0)
    for d in range(1, n + 1):
        scores[d - 1, d - 1] = 5.0              # head of d is d-1: a chain
    assert decode_greedy(scores) == [0, 1, 2, 3]


def test_greedy_tie_breaks_to_root():
    scores = np.zeros((2, 1))                   # ROOT and token 1... only ROOT valid
    assert decode_greedy(scores) == [0]
    scores = np.zeros((3, 2))                   # ties everywhere
    assert decode_greedy(scores) == [0, 0]


def test_greedy_agrees_with_mst_when_already_a_tree():
    rng = np.random.default_rng(10)
    agreements = 0
    for _ in range(1000):
        n = 2 + int(rng.integers(0, 4))
        scores = rng.standard_normal((n + 1, n))
        greedy = decode_greedy(scores)
        try:
            ParseTree(heads=greedy, labels=[0] * n)
        except ParserError:
            continue
        mst = decode_mst(scores)
        assert mst == greedy
        agreements += 1
    assert agreements > 100                     # sanity: the case actually occurs


def test_single_token_decodes_to_root():
    assert decode_mst(np.array([[1.0], [0.0]])) == [0]


def test_mst_resolves_greedy_two_cycle():
    # greedy picks 1->2 and 2->1; the best valid tree must break the cycle
    scores = np.array([
        [1.0, 0.0, -1.0],     # ROOT -> 1, 2, 3
        [0.0, 9.0, 0.0],      # 1 -> 2 strong
        [9.0, 0.0, 5.0],      # 2 -> 1 strong, 2 -> 3
        [0.0, 0.0, 0.0],
    ])
    greedy = decode_greedy(scores)
    assert greedy[0] == 2 and greedy[1] == 1    # the 2-cycle
    mst = decode_mst(scores)
    expected, _ = brute_force_best_tree(scores)
    assert mst == expected
    ParseTree(heads=mst, labels=[0, 0, 0])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_mst_equals_exhaustive_oracle(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(250):
        scores = rng.standard_normal((n + 1, n))
        mst = decode_mst(scores)
        _, best_score = brute_force_best_tree(scores)
        assert np.isclose(_tree_score(scores, [h for h in mst]), best_score,
                          rtol=0, atol=1e-9)
        ParseTree(heads=mst, labels=[0] * n)


def test_mst_always_returns_valid_trees():
    rng = np.random.default_rng(123)
    for _ in range(10_000):
        n = 1 + int(rng.integers(0, 8))
        scores = rng.standard_normal((n + 1, n)) * rng.choice([0.1, 1.0, 10.0])
        heads = decode_mst(scores)
        ParseTree(heads=heads, labels=[0] * n)  # validates single root + acyclic


def test_mst_score_at_least_greedy_when_greedy_valid():
    rng = np.random.default_rng(17)
    for _ in range(300):
        n = 2 + int(rng.integers(0, 4))
        scores = rng.standard_normal((n + 1, n))
        greedy = decode_greedy(scores)
        mst = decode_mst(scores)
        try:
            ParseTree(heads=greedy, labels=[0] * n)
        except ParserError:
            continue
        assert _tree_score(scores, mst) >= _tree_score(scores, greedy) - 1e-12


def test_mst_rejects_empty_and_nonfinite():
    with pytest.raises(ParserError):
        decode_mst(np.zeros((1, 0)))
    with pytest.raises(ParserError):
        decode_mst(np.array([[np.inf], [0.0]]))


# ------------------------------------------------------------------ metrics

def test_attachment_perfect():
    t = ParseTree(heads=[0, 1, 1], labels=[0, 1, 2])
    rep = attachment_scores(t, ParseTree(heads=[0, 1, 1], labels=[0, 1, 2]))
    assert rep.uas == 1.0 and rep.las == 1.0 and rep.token_count == 3


def test_attachment_two_thirds_one_third():
    gold = ParseTree(heads=[0, 1, 1], labels=[0, 1, 2])
    pred = ParseTree(heads=[0, 1, 2], labels=[0, 2, 2])
    rep = attachment_scores(gold, pred)
    assert rep.uas == pytest.approx(2 / 3)
    assert rep.las == pytest.approx(1 / 3)


def test_las_never_exceeds_uas():
    rng = np.random.default_rng(21)
    for _ in range(200):
        n = 1 + int(rng.integers(0, 6))
        scores = rng.standard_normal((n + 1, n))
        gold = ParseTree(heads=decode_mst(scores),
                         labels=list(rng.integers(0, 3, n)))
        pred = ParseTree(heads=decode_mst(rng.standard_normal((n + 1, n))),
                         labels=list(rng.integers(0, 3, n)))
        rep = attachment_scores(gold, pred)
        assert rep.las <= rep.uas


def test_corpus_aggregation_equals_flat_recount():
    rng = np.random.default_rng(22)
    golds, preds = [], []
    for _ in range(50):
        n = 1 + int(rng.integers(0, 7))
        golds.append(ParseTree(heads=decode_mst(rng.standard_normal((n + 1, n))),
                               labels=list(rng.integers(0, 4, n))))
        preds.append(ParseTree(heads=decode_mst(rng.standard_normal((n + 1, n))),
                               labels=list(rng.integers(0, 4, n))))
    rep = corpus_attachment(golds, preds)
    flat_total = flat_heads = flat_both = 0
    for g, p in zip(golds, preds):
        for gh, ph, gl, pl in zip(g.heads, p.heads, g.labels, p.labels):
            flat_total += 1
            flat_heads += gh == ph
            flat_both += gh == ph and gl == pl
    assert rep.token_count == flat_total
    assert rep.uas == flat_heads / flat_total
    assert rep.las == flat_both / flat_total


def test_report_invariant_las_le_uas_by_type():
    rep = AttachmentReport(uas=0.8, las=0.7, token_count=10)
    assert 0.0 <= rep.las <= rep.uas <= 1.0


def test_punctuation_mask_excludes_tokens():
    gold = ParseTree(heads=[0, 1, 1], labels=[0, 1, 2])
    pred = ParseTree(heads=[0, 1, 2], labels=[0, 1, 2])
    full = attachment_scores(gold, pred)
    assert full.uas == pytest.approx(2 / 3)
    masked = attachment_scores(gold, pred, mask=[True, True, False])
    assert masked.uas == 1.0 and masked.token_count == 2
    rep = corpus_attachment([gold], [pred], masks=[[False, True, True]])
    assert rep.uas == pytest.approx(1 / 2)
    with pytest.raises(ParserError):
        attachment_scores(gold, pred, mask=[False, False, False])
