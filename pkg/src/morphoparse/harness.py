"""Experiment orchestration: configs, training with early stopping,
evaluation, the ablation grid and report tables.

Configs are plain JSON trees; every field lands in the run report so each
reported number traces back to a (config hash, seed, epoch) triple.  The
MORPHOPARSE_SEED environment variable overrides the configured seed.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:                  # training still works, just slower
    threadpool_limits = None

from . import autodiff as ad
from .classifier import PoolingSpec, accuracy_eval, read_labeled_corpus, split_dataset
from .conllu import Sentence, attach_predicted_annotations, read_treebank_file
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .embeddings import MorphVocab, load_vectors, read_ctxdump
from .models import ClassifierModel, ParserModel, TaggerModel
from .nerdata import NerCorpus, make_folds, read_ner_file
from .parser import ParseTree, corpus_attachment
from .stats import PairedSample, two_proportion_ztest, wilcoxon_signed_rank
from .tagger import weighted_f1


class ConfigError(ValueError):
    pass


class TrainingError(RuntimeError):
    pass


_DEFAULTS = {
    "task": None,
    "seed": 1,
    "parts": ["word"],
    "feature_source": "gold",        # or {"train": path, "dev": path, ...}
    "data": {},
    "encoder": {"layers": 3, "hidden": 400},
    "input_lstm_hidden": 0,
    "dims": {"pos": 15, "feat": 15, "arc": 128, "label": 64},
    "pooling": {"kind": "mean", "lstm_hidden": 0},
    "interaction": None,
    "optimizer": {"lr": 2e-3, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
    "epochs": None,
    "tolerance": 5,
    "dropout": 0.33,
    "dtype": "f32",
    "split_seed": 1234,              # cf 60:20:20 shuffle
    "eval_mode": "span",             # ner F1 granularity
    "select": "best",                # checkpoint selection: best-dev or last epoch
    "exclude_punct": False,          # drop PUNCT tokens from UAS/LAS
}

_DEFAULT_EPOCHS = {"dp": 10, "ner": 50, "cf": 50}
_CTX_DEFAULT_EPOCHS = {"dp": 10, "ner": 10, "cf": 10}


@dataclass
class ExperimentConfig:
    raw: dict

    def __post_init__(self):
        task = self.raw.get("task")
        if task not in ("dp", "ner", "cf"):
            raise ConfigError(f"task must be dp, ner or cf, got {task!r}")
        merged = copy.deepcopy(_DEFAULTS)
        for key, value in self.raw.items():
            if key not in merged:
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(merged[key], dict) and isinstance(value, dict):
                merged[key].update(value)
            else:
                merged[key] = value
        if merged["epochs"] is None:
            table = _CTX_DEFAULT_EPOCHS if "ctx" in merged["parts"] else _DEFAULT_EPOCHS
            merged["epochs"] = table[task]
        if merged["dtype"] not in ("f32", "f64"):
            raise ConfigError(f"dtype must be f32 or f64, got {merged['dtype']!r}")
        if merged["select"] not in ("best", "last"):
            raise ConfigError(f"select must be best or last, got {merged['select']!r}")
        self.raw = merged

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def seed(self) -> int:
        env = os.environ.get("MORPHOPARSE_SEED")
        return int(env) if env else int(self.raw["seed"])

    @property
    def dtype(self):
        return np.float32 if self.raw["dtype"] == "f32" else np.float64

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        raw.update(overrides)
        return ExperimentConfig(raw)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True).encode("utf-8")
        return hashlib.sha256(canon).hexdigest()[:16]

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))


class EarlyStopper:
    """Strict-improvement early stopping with a patience window."""

    def __init__(self, tolerance: int):
        self.tolerance = tolerance
        self.best_metric = float("-inf")
        self.best_epoch = 0

    def update(self, epoch: int, metric: float) -> bool:
        """Record an epoch; returns True when training should stop."""
        if metric > self.best_metric:
            self.best_metric = metric
            self.best_epoch = epoch
            return False
        return epoch - self.best_epoch >= self.tolerance


# ---------------------------------------------------------------------------
# task bundles

@dataclass
class TaskBundle:
    model: object
    train: list
    dev: list
    test: list
    evaluate: callable                # (model, examples) -> (metric, detail)
    step_loss: callable               # (model, example, train, rng) -> Value


def _load_split(cfg, split, strict=False):
    path = cfg["data"].get(split)
    if not path:
        return None
    return read_treebank_file(path, strict=strict)


def _apply_feature_source(cfg, split, sentences):
    source = cfg["feature_source"]
    if source == "gold" or sentences is None:
        return sentences
    if not isinstance(source, dict) or split not in source:
        return sentences
    predicted = read_treebank_file(source[split])
    merged, _ = attach_predicted_annotations(sentences, predicted)
    return merged


def _load_ctx(cfg, split, sentences):
    path = cfg["data"].get(f"ctx_{split}")
    if not path:
        return [None] * len(sentences)
    dump = read_ctxdump(path)
    dump.check_alignment(sentences)
    return dump.sentences


def _ctx_dims(cfg):
    for split in ("train", "dev", "test"):
        path = cfg["data"].get(f"ctx_{split}")
        if path:
            dump = read_ctxdump(path)
            return dump.layers, dump.d_ctx
    raise ConfigError("ctx part enabled but no ctx_* dump configured")


def _build_dp(cfg: ExperimentConfig) -> TaskBundle:
    splits = {}
    for split in ("train", "dev", "test"):
        sents = _apply_feature_source(cfg, split, _load_split(cfg, split))
        splits[split] = sents
    if not splits["train"] or not splits["dev"]:
        raise ConfigError("dp needs train and dev data paths")
    word_vectors = load_vectors(cfg["data"]["vectors"]) if "word" in cfg["parts"] else None
    morph_vocab = MorphVocab.build(splits["train"])
    labels = sorted({t.deprel for s in splits["train"] for t in s.tokens})
    mix_layers, d_ctx = (1, 0)
    if "ctx" in cfg["parts"]:
        mix_layers, d_ctx = _ctx_dims(cfg)
    model = ParserModel(
        parts=cfg["parts"], word_vectors=word_vectors, morph_vocab=morph_vocab,
        labels=labels, seed=cfg.seed,
        enc_layers=cfg["encoder"]["layers"], enc_hidden=cfg["encoder"]["hidden"],
        input_lstm_hidden=cfg["input_lstm_hidden"],
        d_pos=cfg["dims"]["pos"], d_feat=cfg["dims"]["feat"],
        d_arc=cfg["dims"]["arc"], d_lab=cfg["dims"]["label"],
        mix_layers=mix_layers, d_ctx=d_ctx,
        dropout=cfg["dropout"], dtype=cfg.dtype,
    )
    def gold_tree(sent):
        # a dev/test deprel outside the train vocabulary maps to -1, which
        # no prediction can match
        idx = model.head.label_index
        return ParseTree(heads=[t.head for t in sent.tokens],
                         labels=[idx.get(t.deprel, -1) for t in sent.tokens])

    def examples(split):
        sents = splits[split]
        if sents is None:
            return []
        ctxs = _load_ctx(cfg, split, sents)
        return [(s, gold_tree(s), c) for s, c in zip(sents, ctxs)]

    def evaluate(model, exs):
        golds = [g for _, g, _ in exs]
        preds = [model.predict(s, ctx=c) for s, _, c in exs]
        masks = None
        if cfg["exclude_punct"]:
            masks = [[t.upos != "PUNCT" for t in s.tokens] for s, _, _ in exs]
        rep = corpus_attachment(golds, preds, masks=masks)
        return (rep.uas + rep.las) / 2.0, {
            "uas": rep.uas, "las": rep.las, "tokens": rep.token_count,
        }

    def step_loss(model, ex, train, rng):
        sent, gold, ctx = ex
        return model.loss(sent, gold, ctx=ctx, train=train, rng=rng)

    return TaskBundle(model=model, train=examples("train"), dev=examples("dev"),
                      test=examples("test"), evaluate=evaluate, step_loss=step_loss)


def _load_ner_split(cfg, split):
    """Two-column NER file, optionally merged with a companion treebank
    (ann_<split>) that supplies UPOS and features for the same tokens."""
    path = cfg["data"].get(split)
    if not path:
        return None
    corpus = read_ner_file(path)
    ann_path = cfg["data"].get(f"ann_{split}")
    if ann_path:
        annotations = read_treebank_file(ann_path)
        if len(annotations) != len(corpus.sentences):
            raise ConfigError(
                f"{split}: {len(corpus.sentences)} NER sentences but "
                f"{len(annotations)} annotated sentences")
        for i, (sent, ann) in enumerate(zip(corpus.sentences, annotations)):
            if len(sent.tokens) != len(ann.tokens):
                raise ConfigError(f"{split} sentence {i}: token count mismatch")
            for tok, ann_tok in zip(sent.tokens, ann.tokens):
                tok.upos = ann_tok.upos
                tok.feats = dict(ann_tok.feats)
    return corpus.sentences


def _build_ner(cfg: ExperimentConfig) -> TaskBundle:
    splits = {s: _load_ner_split(cfg, s) for s in ("train", "dev", "test")}
    if not splits["train"] or not splits["dev"]:
        raise ConfigError("ner needs train and dev data paths")
    word_vectors = load_vectors(cfg["data"]["vectors"]) if "word" in cfg["parts"] else None
    morph_vocab = MorphVocab.build(splits["train"])
    mix_layers, d_ctx = (1, 0)
    if "ctx" in cfg["parts"]:
        mix_layers, d_ctx = _ctx_dims(cfg)
    model = TaggerModel(
        parts=cfg["parts"], word_vectors=word_vectors, morph_vocab=morph_vocab,
        seed=cfg.seed, enc_hidden=cfg["encoder"]["hidden"],
        d_pos=cfg["dims"]["pos"], d_feat=cfg["dims"]["feat"],
        mix_layers=mix_layers, d_ctx=d_ctx, interaction=cfg["interaction"],
        dropout=cfg["dropout"], dtype=cfg.dtype,
    )

    def examples(split):
        sents = splits[split]
        if sents is None:
            return []
        ctxs = _load_ctx(cfg, split, sents)
        return list(zip(sents, ctxs))

    def evaluate(model, exs):
        gold = [[t.ner for t in s.tokens] for s, _ in exs]
        pred = [model.predict(s, ctx=c) for s, c in exs]
        rep = weighted_f1(gold, pred, mode=cfg["eval_mode"])
        detail = {"weighted_f1": rep.weighted_f1}
        for cls, score in rep.per_class.items():
            detail[f"f1_{cls}"] = score.f1
        return rep.weighted_f1, detail

    def step_loss(model, ex, train, rng):
        sent, ctx = ex
        return model.loss(sent, ctx=ctx, train=train, rng=rng)

    return TaskBundle(model=model, train=examples("train"), dev=examples("dev"),
                      test=examples("test"), evaluate=evaluate, step_loss=step_loss)


def _build_cf(cfg: ExperimentConfig) -> TaskBundle:
    labels, texts = read_labeled_corpus(cfg["data"]["corpus"])
    companion = read_treebank_file(cfg["data"]["annotations"])
    if len(companion) != len(labels):
        raise ConfigError(
            f"annotation file has {len(companion)} sentences for {len(labels)} examples")
    for i, (toks, sent) in enumerate(zip(texts, companion)):
        if len(toks) != len(sent.tokens):
            raise ConfigError(f"example {i}: text/annotation length mismatch")
    train_idx, val_idx, test_idx = split_dataset(len(labels), cfg["split_seed"])
    word_vectors = load_vectors(cfg["data"]["vectors"]) if "word" in cfg["parts"] else None
    train_sents = [companion[i] for i in train_idx]
    morph_vocab = MorphVocab.build(train_sents)
    model = ClassifierModel(
        parts=cfg["parts"], word_vectors=word_vectors, morph_vocab=morph_vocab,
        seed=cfg.seed, enc_hidden=cfg["encoder"]["hidden"],
        d_pos=cfg["dims"]["pos"], d_feat=cfg["dims"]["feat"],
        pooling=PoolingSpec(kind=cfg["pooling"]["kind"],
                            lstm_hidden=cfg["pooling"]["lstm_hidden"]),
        dtype=cfg.dtype,
    )

    def examples(indices):
        return [(companion[i], labels[i]) for i in indices]

    def evaluate(model, exs):
        gold = [label for _, label in exs]
        pred = [model.predict(sent) for sent, _ in exs]
        acc = accuracy_eval(gold, pred)
        return acc, {"accuracy": acc, "examples": len(exs)}

    def step_loss(model, ex, train, rng):
        sent, label = ex
        return model.loss(sent, label, train=train, rng=rng)

    return TaskBundle(model=model, train=examples(train_idx),
                      dev=examples(val_idx), test=examples(test_idx),
                      evaluate=evaluate, step_loss=step_loss)


def build_task(cfg: ExperimentConfig) -> TaskBundle:
    return {"dp": _build_dp, "ner": _build_ner, "cf": _build_cf}[cfg["task"]](cfg)


# ---------------------------------------------------------------------------
# training

@dataclass
class TrainResult:
    checkpoint: Checkpoint
    log: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = float("-inf")
    stopped_epoch: int = 0


def train(cfg: ExperimentConfig, bundle: TaskBundle | None = None) -> TrainResult:
    """Train with early stopping, keeping the best-dev checkpoint.

    BLAS threading is pinned to one thread for the duration: the
    sentence-at-a-time matrix-vector workload gains nothing from pool
    parallelism, and competing numpy/scipy thread pools actively hurt.
    """
    bundle = bundle or build_task(cfg)
    limiter = threadpool_limits(limits=1) if threadpool_limits else nullcontext()
    with limiter:
        return _train_loop(cfg, bundle)


def _train_loop(cfg: ExperimentConfig, bundle: TaskBundle) -> TrainResult:
    model = bundle.model
    params = model.named_parameters()
    opt = ad.AdamState(list(params.values()), lr=cfg["optimizer"]["lr"],
                       beta1=cfg["optimizer"]["beta1"],
                       beta2=cfg["optimizer"]["beta2"],
                       eps=cfg["optimizer"]["eps"])
    run_rng = np.random.default_rng(cfg.seed)
    stopper = EarlyStopper(cfg["tolerance"])
    result = TrainResult(checkpoint=None)
    best_snapshot = None
    chash = cfg.config_hash()
    for epoch in range(1, cfg["epochs"] + 1):
        order = run_rng.permutation(len(bundle.train))
        total_loss = 0.0
        for i in order:
            loss = bundle.step_loss(model, bundle.train[int(i)], True, run_rng)
            value = float(loss.data)
            if not np.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value} at epoch {epoch}, example {int(i)} "
                    f"(config {chash}, seed {cfg.seed})")
            ad.backward(loss)
            ad.adam_step(opt)
            ad.zero_grads(opt.params)
            total_loss += value
        metric, detail = bundle.evaluate(model, bundle.dev)
        result.log.append({
            "epoch": epoch,
            "train_loss": total_loss / max(1, len(bundle.train)),
            "dev_metric": metric,
            "detail": detail,
            "config_hash": chash,
            "seed": cfg.seed,
        })
        improved = metric > stopper.best_metric
        stop = stopper.update(epoch, metric)
        if improved and cfg["select"] == "best":
            best_snapshot = {name: p.data.copy() for name, p in params.items()}
        result.stopped_epoch = epoch
        if stop and cfg["select"] == "best":
            break
    result.best_epoch = stopper.best_epoch
    result.best_metric = stopper.best_metric
    if cfg["select"] == "best" and best_snapshot is not None:
        for name, p in params.items():
            p.data[...] = best_snapshot[name]
        kept_epoch, kept_metric = result.best_epoch, result.best_metric
    else:
        # fixed-length training keeps the final epoch's parameters
        kept_epoch = result.stopped_epoch
        kept_metric = result.log[-1]["dev_metric"] if result.log else 0.0
    result.checkpoint = Checkpoint.from_params(
        params, config=cfg.to_dict(), best_metric=kept_metric, epoch=kept_epoch)
    return result


def evaluate_checkpoint(cfg: ExperimentConfig, ckpt: Checkpoint,
                        split: str = "dev", bundle: TaskBundle | None = None):
    bundle = bundle or build_task(cfg)
    ckpt.load_into(bundle.model.named_parameters())
    examples = getattr(bundle, split)
    if not examples:
        raise ConfigError(f"no data for split {split!r}")
    return bundle.evaluate(bundle.model, examples)


# ---------------------------------------------------------------------------
# cross-validation (the NER evaluation protocol: fixed-epoch training,
# one score per held-out fold)

def cross_validate(cfg: ExperimentConfig, k: int = 10) -> dict:
    if cfg["task"] != "ner":
        raise ConfigError("cross_validate currently applies to the ner task")
    sentences = _load_ner_split(cfg, "train")
    if not sentences:
        raise ConfigError("cross_validate needs data.train")
    corpus = NerCorpus(sentences=sentences)
    plan = make_folds(corpus, k=k, seed=cfg.seed)
    run_cfg = cfg.with_overrides(select="last")
    fold_scores = []
    for fold in range(k):
        train_idx, test_idx = plan.split(fold)
        bundle = _ner_bundle_from_sentences(
            run_cfg,
            [sentences[i] for i in train_idx],
            [sentences[i] for i in test_idx],
        )
        train(run_cfg, bundle=bundle)
        metric, _ = bundle.evaluate(bundle.model, bundle.dev)
        fold_scores.append(metric)
    return {
        "k": k,
        "fold_scores": fold_scores,
        "mean": float(np.mean(fold_scores)),
        "std": float(np.std(fold_scores, ddof=1)) if k > 1 else 0.0,
    }


def _ner_bundle_from_sentences(cfg, train_sents, dev_sents) -> TaskBundle:
    word_vectors = load_vectors(cfg["data"]["vectors"]) if "word" in cfg["parts"] else None
    morph_vocab = MorphVocab.build(train_sents)
    model = TaggerModel(
        parts=cfg["parts"], word_vectors=word_vectors, morph_vocab=morph_vocab,
        seed=cfg.seed, enc_hidden=cfg["encoder"]["hidden"],
        d_pos=cfg["dims"]["pos"], d_feat=cfg["dims"]["feat"],
        interaction=cfg["interaction"], dropout=cfg["dropout"], dtype=cfg.dtype,
    )

    def evaluate(model, exs):
        gold = [[t.ner for t in s.tokens] for s, _ in exs]
        pred = [model.predict(s, ctx=c) for s, c in exs]
        rep = weighted_f1(gold, pred, mode=cfg["eval_mode"])
        return rep.weighted_f1, {"weighted_f1": rep.weighted_f1}

    def step_loss(model, ex, train_flag, rng):
        sent, ctx = ex
        return model.loss(sent, ctx=ctx, train=train_flag, rng=rng)

    return TaskBundle(model=model,
                      train=[(s, None) for s in train_sents],
                      dev=[(s, None) for s in dev_sents],
                      test=[], evaluate=evaluate, step_loss=step_loss)


# ---------------------------------------------------------------------------
# the ablation grid

ABLATION_VARIANTS = (
    ("baseline", ()),
    ("+UPOS", ("upos",)),
    ("+UPOS+feats", ("upos", "feats")),
    ("+feats", ("feats",)),
)


@dataclass
class AblationRow:
    name: str
    config_hash: str
    metrics: dict[str, float]
    p_value: float | None = None
    significant: bool = False


@dataclass
class AblationReport:
    rows: list[AblationRow]
    columns: list[str]
    alpha: float

    def best_per_column(self) -> dict[str, str]:
        best = {}
        for col in self.columns:
            best[col] = max(self.rows, key=lambda r: r.metrics.get(col, -1)).name
        return best


def ablate(cfg: ExperimentConfig, alpha: float = 0.01,
           extra_epochs: int | None = None, repeats: int = 1,
           folds: int = 0) -> AblationReport:
    """Train the four morphological variants and compare each against the
    baseline.

    Significance follows the task's protocol: a two-proportion Z-test over
    correct-token counts for dp; the Wilcoxon signed-rank test over
    per-fold scores for ner when folds > 1, or over repeated runs (seeds
    seed..seed+repeats-1) when repeats > 1.
    """
    base_parts = [p for p in cfg["parts"] if p not in ("upos", "feats")]
    rows = []
    per_variant_scores: dict[str, list[float]] = {}
    per_variant_counts: dict[str, tuple[int, int]] = {}
    columns = None
    for name, morph in ABLATION_VARIANTS:
        overrides = {"parts": base_parts + list(morph)}
        if extra_epochs is not None:
            overrides["epochs"] = cfg["epochs"] + extra_epochs
        sub = cfg.with_overrides(**overrides)
        if folds > 1:
            cv = cross_validate(sub, k=folds)
            scores = cv["fold_scores"]
            last_detail = {"weighted_f1": cv["mean"], "std": cv["std"]}
        else:
            scores = []
            last_detail = None
            for r in range(repeats):
                run_cfg = sub.with_overrides(seed=sub["seed"] + r) \
                    if repeats > 1 else sub
                bundle = build_task(run_cfg)
                train(run_cfg, bundle=bundle)   # leaves kept params in the model
                examples = bundle.test or bundle.dev
                metric, detail = bundle.evaluate(bundle.model, examples)
                scores.append(metric)
                last_detail = detail
            if cfg["task"] == "dp":
                per_variant_counts[name] = (
                    int(round(last_detail["las"] * last_detail["tokens"])),
                    int(last_detail["tokens"]))
        per_variant_scores[name] = scores
        columns = sorted(k for k in last_detail if isinstance(last_detail[k], float))
        metrics = {k: float(last_detail[k]) for k in columns}
        metrics["mean_metric"] = float(np.mean(scores))
        rows.append(AblationRow(name=name, config_hash=sub.config_hash(),
                                metrics=metrics))
    columns = columns + ["mean_metric"]
    baseline = rows[0]
    for row in rows[1:]:
        if cfg["task"] == "dp" and folds <= 1:
            x1, n1 = per_variant_counts[row.name]
            x2, n2 = per_variant_counts[baseline.name]
            res = two_proportion_ztest(x1, n1, x2, n2, alpha=alpha)
            row.p_value, row.significant = res.p_value, res.reject
        elif len(per_variant_scores[row.name]) > 1:
            sample = PairedSample(per_variant_scores[row.name],
                                  per_variant_scores[baseline.name])
            res = wilcoxon_signed_rank(sample, alpha=alpha)
            row.p_value, row.significant = res.p_value, res.reject
    return AblationReport(rows=rows, columns=columns, alpha=alpha)


def repeated_eval(cfg: ExperimentConfig, runs: int = 5) -> dict:
    """Retrain with seeds seed..seed+runs-1; report the sample mean and
    standard deviation of the test metric."""
    scores = []
    for r in range(runs):
        run_cfg = cfg.with_overrides(seed=cfg["seed"] + r)
        bundle = build_task(run_cfg)
        train(run_cfg, bundle=bundle)
        metric, _ = bundle.evaluate(bundle.model, bundle.test or bundle.dev)
        scores.append(metric)
    mean = float(np.mean(scores))
    std = float(np.std(scores, ddof=1)) if runs > 1 else 0.0
    return {"mean": mean, "std": std, "scores": scores, "runs": runs}


# ---------------------------------------------------------------------------
# table rendering (aligned text with best/significant markers, and CSV)

def format_ablation_table(report: AblationReport) -> str:
    best = report.best_per_column()
    headers = ["model"] + report.columns + ["p_value"]
    body = []
    for row in report.rows:
        cells = [row.name]
        for col in report.columns:
            value = row.metrics.get(col)
            text = f"{value:.4f}" if value is not None else "-"
            if best.get(col) == row.name:
                text = f"**{text}**"
            if row.significant:
                text = f"_{text}_"
            cells.append(text)
        cells.append(f"{row.p_value:.4g}" if row.p_value is not None else "-")
        body.append(cells)
    widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for cells in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    lines.append(f"(best per column in **bold**; significant at "
                 f"p={report.alpha} underlined with _)")
    return "\n".join(lines)


def ablation_csv(report: AblationReport) -> str:
    lines = [",".join(["model"] + report.columns + ["p_value", "significant"])]
    for row in report.rows:
        cells = [row.name]
        cells += [f"{row.metrics.get(c, float('nan'))!r}" for c in report.columns]
        cells.append("" if row.p_value is None else repr(row.p_value))
        cells.append(str(row.significant).lower())
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def save_result(path, result: TrainResult) -> None:
    save_checkpoint(path, result.checkpoint)
    with open(str(path) + ".log.json", "w", encoding="utf-8") as fh:
        json.dump(result.log, fh, indent=2, sort_keys=True)


def load_result_checkpoint(path) -> Checkpoint:
    return load_checkpoint(path)
