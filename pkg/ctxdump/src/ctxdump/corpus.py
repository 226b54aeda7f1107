"""Pre-tokenized corpus input.

Two formats: CoNLL-U (FORM column of plain word lines; comments,
multiword ranges and empty nodes skipped) and plain token files (one
sentence per line, whitespace separated).  This reader is deliberately
self-contained: the only contract shared with consumers is the file
format itself.
"""

from __future__ import annotations


class CorpusError(ValueError):
    pass


def read_conllu_tokens(path) -> list[list[str]]:
    sentences: list[list[str]] = []
    current: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                if current:
                    sentences.append(current)
                    current = []
                continue
            if line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise CorpusError(f"malformed line: {line!r}")
            if "-" in cols[0] or "." in cols[0]:
                continue
            current.append(cols[1])
    if current:
        sentences.append(current)
    return sentences


def read_token_file(path) -> list[list[str]]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = line.split()
            if tokens:
                sentences.append(tokens)
    return sentences


def read_corpus(path) -> list[list[str]]:
    text = str(path)
    if text.endswith(".conllu") or text.endswith(".conll"):
        return read_conllu_tokens(path)
    return read_token_file(path)
