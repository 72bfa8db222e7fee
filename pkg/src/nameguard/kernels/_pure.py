"""Pure-Python automaton traversal; same flat-array layout as the compiled kernel."""

from __future__ import annotations

from array import array
from bisect import bisect_left


def scan(
    edge_starts: array,
    edge_chars: array,
    edge_targets: array,
    fail: array,
    out_starts: array,
    out_terms: array,
    term_lens: array,
    text: str,
) -> list[tuple[int, int]]:
    matches: list[tuple[int, int]] = []
    state = 0
    for position, ch in enumerate(text):
        cp = ord(ch)
        while True:
            lo = edge_starts[state]
            hi = edge_starts[state + 1]
            e = bisect_left(edge_chars, cp, lo, hi)
            if e < hi and edge_chars[e] == cp:
                state = edge_targets[e]
                break
            if state == 0:
                break
            state = fail[state]
        for k in range(out_starts[state], out_starts[state + 1]):
            term_index = out_terms[k]
            matches.append((position - term_lens[term_index] + 1, term_index))
    return matches
