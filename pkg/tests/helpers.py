"""Independent oracles shared by the test modules.

Everything in here deliberately avoids the library's own code paths:
gradients come from central finite differences, best trees from exhaustive
enumeration, spans from a regex segmentation.
"""

import re

import numpy as np

from morphoparse import autodiff as ad


def gradcheck(make_loss, params, points=10, eps=1e-6, tol=1e-4, seed=0):
    """Compare analytic gradients against central differences at randomly
    chosen coordinates; relative error |a - fd| / max(1, |fd|) < tol."""
    rng = np.random.default_rng(seed)
    for p in params:
        p.zero_grad()
    loss = make_loss()
    ad.backward(loss)
    worst = 0.0
    for p in params:
        flat = p.data.reshape(-1)
        gflat = p.grad.reshape(-1)
        coords = rng.choice(flat.size, size=min(points, flat.size), replace=False)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + eps
            lp = float(make_loss().data)
            flat[i] = orig - eps
            lm = float(make_loss().data)
            flat[i] = orig
            fd = (lp - lm) / (2 * eps)
            rel = abs(gflat[i] - fd) / max(1.0, abs(fd))
            worst = max(worst, rel)
    assert worst < tol, f"gradient mismatch: worst relative error {worst}"
    return worst


def all_single_rooted_trees(n):
    """Every head assignment over tokens 1..n (values 0..n, 0=ROOT) that
    forms a single-rooted acyclic tree, as an (M, n) array."""
    grids = np.meshgrid(*[np.arange(n + 1)] * n, indexing="ij")
    heads = np.stack([g.reshape(-1) for g in grids], axis=1)
    tokens = np.arange(1, n + 1)
    ok = (heads != tokens).all(axis=1)
    ok &= (heads == 0).sum(axis=1) == 1
    cur = np.broadcast_to(tokens, heads.shape).copy()
    for _ in range(n):
        nxt = np.where(cur == 0, 0, heads[np.arange(len(heads))[:, None],
                                         np.maximum(cur - 1, 0)])
        cur = nxt
    ok &= (cur == 0).all(axis=1)
    return heads[ok]


def brute_force_best_tree(scores):
    """Exhaustive maximum over all valid single-rooted trees of an
    (n+1, n) score matrix; returns (best heads, best score)."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[1]
    trees = all_single_rooted_trees(n)
    totals = scores[trees, np.arange(n)[None, :]].sum(axis=1)
    best = int(np.argmax(totals))
    return trees[best].tolist(), float(totals[best])


def regex_spans(labels):
    """Span extraction by per-class regex segmentation: for each class,
    project the sequence to a B/I/O string and take 'BI*|I+' runs."""
    spans = set()
    classes = {lab[2:] for lab in labels if lab not in ("OTHR", "O")}
    for cls in classes:
        chars = []
        for lab in labels:
            if lab == f"B-{cls}":
                chars.append("B")
            elif lab == f"I-{cls}":
                chars.append("I")
            else:
                chars.append("O")
        for m in re.finditer(r"BI*|I+", "".join(chars)):
            spans.add((cls, m.start(), m.end() - 1))
    return spans


def finite_scalar(x):
    arr = np.asarray(x)
    assert arr.size == 1 and np.isfinite(arr).all()
    return float(arr)
