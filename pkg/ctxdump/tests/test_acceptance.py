"""Secondary acceptance: the dump format interoperates with the consumer
package bit-exactly, and context vectors help the downstream parser."""

import numpy as np
import pytest

from ctxdump.extract import Extractor
from ctxdump.writer import write_ctxd

morphoparse = pytest.importorskip(
    "morphoparse", reason="consumer package not installed")

from morphoparse.conllu import write_treebank_file
from morphoparse.embeddings import read_ctxdump, write_vectors
from morphoparse.harness import ExperimentConfig, build_task, train
from morphoparse.synth import corpus_forms, form_vectors, make_dependency_corpus

SEEDS = (1, 2)


@pytest.fixture(scope="module")
def corpus_and_dumps(tiny_model, tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sec")
    sents = make_dependency_corpus(620, seed=11)
    splits = {"train": sents[:500], "dev": sents[500:]}
    extractor = Extractor(tiny_model, layers="all")
    for name, split in splits.items():
        write_treebank_file(tmp / f"{name}.conllu", split)
        blocks, _ = extractor.run([[t.form for t in s.tokens] for s in split])
        write_ctxd(tmp / f"{name}.ctxd", blocks, extractor.n_layers,
                   extractor.d_ctx)
    write_vectors(tmp / "vecs.txt",
                  form_vectors(corpus_forms(sents), 24, seed=11))
    return tmp, splits, extractor


def test_hundred_sentence_dump_reads_back_bit_exact(tiny_model, corpus_and_dumps,
                                                    tmp_path):
    tmp, splits, extractor = corpus_and_dumps
    sents = splits["train"][:100]
    words = [[t.form for t in s.tokens] for s in sents]
    blocks, stats = extractor.run(words)
    assert stats.sentences == 100
    path = tmp_path / "hundred.ctxd"
    write_ctxd(path, blocks, extractor.n_layers, extractor.d_ctx)

    dump = read_ctxdump(path)                    # the consumer's reader
    assert dump.layers == extractor.n_layers
    assert dump.d_ctx == extractor.d_ctx
    assert len(dump.sentences) == 100
    for ours, theirs, sent in zip(blocks, dump.sentences, sents):
        assert theirs.shape[0] == len(sent.tokens)
        assert np.array_equal(ours, theirs)      # exact float32 round trip
    dump.check_alignment(sents)
    print("\nACCEPTANCE ctxdump-round-trip: PASS")


def test_ctx_vectors_do_not_hurt_parser(corpus_and_dumps):
    tmp, _, _ = corpus_and_dumps
    base = {
        "task": "dp",
        "data": {"train": str(tmp / "train.conllu"),
                 "dev": str(tmp / "dev.conllu"),
                 "vectors": str(tmp / "vecs.txt"),
                 "ctx_train": str(tmp / "train.ctxd"),
                 "ctx_dev": str(tmp / "dev.ctxd")},
        "encoder": {"layers": 1, "hidden": 64},
        "input_lstm_hidden": 32,
        "dims": {"pos": 12, "feat": 8, "arc": 48, "label": 24},
        "epochs": 10, "tolerance": 5, "dropout": 0.2,
    }

    def dev_uas(parts, seed):
        cfg = ExperimentConfig(dict(base, parts=parts, seed=seed))
        bundle = build_task(cfg)
        train(cfg, bundle=bundle)
        _, detail = bundle.evaluate(bundle.model, bundle.dev)
        return detail["uas"]

    baseline = np.mean([dev_uas(["word"], s) for s in SEEDS])
    with_ctx = np.mean([dev_uas(["word", "ctx"], s) for s in SEEDS])
    print(f"\n  dev UAS: no-ctx {baseline:.3f} vs +ctx {with_ctx:.3f}")
    assert with_ctx >= baseline
    print("ACCEPTANCE ctx-parser-trend: PASS")
