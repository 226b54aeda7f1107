"""Word-to-subword alignment and long-sentence windowing."""

from __future__ import annotations

from dataclasses import dataclass


class AlignmentError(ValueError):
    pass


@dataclass
class AlignmentMap:
    """For each word, the contiguous [start, end) range of subword pieces
    it spans (special markers excluded from the ranges)."""
    ranges: list[tuple[int, int]]

    @classmethod
    def from_word_ids(cls, word_ids: list, n_words: int) -> "AlignmentMap":
        ranges: list[list[int] | None] = [None] * n_words
        for piece_idx, word in enumerate(word_ids):
            if word is None:
                continue
            if ranges[word] is None:
                ranges[word] = [piece_idx, piece_idx + 1]
            else:
                if piece_idx != ranges[word][1]:
                    raise AlignmentError(f"word {word} spans non-contiguous pieces")
                ranges[word][1] = piece_idx + 1
        missing = [i for i, r in enumerate(ranges) if r is None]
        if missing:
            raise AlignmentError(f"words produced zero pieces: {missing}")
        return cls(ranges=[tuple(r) for r in ranges])

    def piece_count(self) -> int:
        return sum(end - start for start, end in self.ranges)


@dataclass
class Window:
    start: int                        # first token (inclusive)
    end: int                          # last token (exclusive)
    owned: list[int]                  # token indices this window contributes


def plan_windows(piece_counts: list[int], budget: int, overlap: int = 8) -> list[Window]:
    """Split a token sequence into overlapping windows whose total piece
    count fits the model budget, then assign each token to the window
    where it sits most interior."""
    n = len(piece_counts)
    if max(piece_counts, default=0) > budget:
        worst = max(range(n), key=lambda i: piece_counts[i])
        raise AlignmentError(
            f"token {worst} alone needs {piece_counts[worst]} pieces "
            f"(budget {budget})")
    spans: list[tuple[int, int]] = []
    start = 0
    while start < n:
        total = 0
        end = start
        while end < n and total + piece_counts[end] <= budget:
            total += piece_counts[end]
            end += 1
        spans.append((start, end))
        if end >= n:
            break
        start = max(end - overlap, start + 1)

    def interiority(tok, span):
        s, e = span
        return min(tok - s, e - 1 - tok)

    owner = []
    for tok in range(n):
        candidates = [i for i, sp in enumerate(spans) if sp[0] <= tok < sp[1]]
        owner.append(max(candidates, key=lambda i: interiority(tok, spans[i])))
    windows = []
    for i, (s, e) in enumerate(spans):
        owned = [tok for tok in range(n) if owner[tok] == i]
        windows.append(Window(start=s, end=e, owned=owned))
    return windows
