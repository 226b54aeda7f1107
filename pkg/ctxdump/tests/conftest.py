import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

import pytest
import torch
from transformers import BertConfig, BertModel

SUFFIX_PIECES = [
    "om", "ami", "am", "ah", "em", "ov", "ih", "ke", "ku", "koj", "kim",
    "kih", "kimi", "ima", "imi", "et", "ut", "il", "ili", "no",
]


def build_tiny_model(path, hidden=32, layers=3, max_pos=64, seed=0):
    """A small randomly initialized BERT plus a character-level WordPiece
    vocab (with a few common suffixes), saved locally."""
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    letters = "abcdefghijklmnopqrstuvwxyz"
    vocab += list(letters) + list(letters.upper())
    vocab += [f"##{c}" for c in letters] + [f"##{c}" for c in letters.upper()]
    vocab += [f"##{s}" for s in SUFFIX_PIECES]
    with open(os.path.join(path, "vocab.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(vocab))
    config = BertConfig(
        vocab_size=len(vocab), hidden_size=hidden, num_hidden_layers=layers,
        num_attention_heads=4, intermediate_size=2 * hidden,
        max_position_embeddings=max_pos,
    )
    torch.manual_seed(seed)
    model = BertModel(config)
    model.save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory):
    path = tmp_path_factory.mktemp("model")
    return str(build_tiny_model(str(path)))
