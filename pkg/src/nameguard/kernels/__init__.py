"""Multi-pattern substring scan kernel.

The scanner is the hot loop of prohibited-content matching: every verify call
and every post-registration sweep funnels each name through it. The automaton
(an Aho-Corasick trie with fail links flattened into CSR-style arrays) is
built once per term-set revision in plain Python; traversal runs either in
the compiled extension or in the pure-Python fallback, chosen at import.
"""

from __future__ import annotations

from array import array
from collections import deque
from dataclasses import dataclass

from nameguard.kernels import _pure

try:
    from nameguard.kernels import _accel
except ImportError:
    _accel = None

ACCELERATED = _accel is not None


@dataclass(frozen=True)
class Automaton:
    """Flattened match automaton over a fixed term list.

    Node edges live in three parallel arrays in CSR layout, sorted by code
    point within each node so both scanners can binary-search them.
    """

    terms: tuple[str, ...]
    edge_starts: array
    edge_chars: array
    edge_targets: array
    fail: array
    out_starts: array
    out_terms: array
    term_lens: array

    @property
    def node_count(self) -> int:
        return len(self.fail)


def build_automaton(terms: list[str] | tuple[str, ...]) -> Automaton:
    terms = tuple(terms)
    for t in terms:
        if not t:
            raise ValueError("automaton terms must be nonempty")

    children: list[dict[int, int]] = [{}]
    outputs: list[list[int]] = [[]]
    for index, term in enumerate(terms):
        node = 0
        for ch in term:
            cp = ord(ch)
            nxt = children[node].get(cp)
            if nxt is None:
                children.append({})
                outputs.append([])
                nxt = len(children) - 1
                children[node][cp] = nxt
            node = nxt
        outputs[node].append(index)

    n = len(children)
    fail = [0] * n
    queue: deque[int] = deque()
    for child in children[0].values():
        queue.append(child)
    while queue:
        node = queue.popleft()
        for cp, child in children[node].items():
            queue.append(child)
            f = fail[node]
            while f and cp not in children[f]:
                f = fail[f]
            candidate = children[f].get(cp, 0)
            fail[child] = candidate if candidate != child else 0
            outputs[child].extend(outputs[fail[child]])

    edge_starts = array("i", [0] * (n + 1))
    edge_chars = array("i")
    edge_targets = array("i")
    out_starts = array("i", [0] * (n + 1))
    out_terms = array("i")
    for node in range(n):
        for cp in sorted(children[node]):
            edge_chars.append(cp)
            edge_targets.append(children[node][cp])
        edge_starts[node + 1] = len(edge_chars)
        for term_index in outputs[node]:
            out_terms.append(term_index)
        out_starts[node + 1] = len(out_terms)

    return Automaton(
        terms=terms,
        edge_starts=edge_starts,
        edge_chars=edge_chars,
        edge_targets=edge_targets,
        fail=array("i", fail),
        out_starts=out_starts,
        out_terms=out_terms,
        term_lens=array("i", [len(t) for t in terms]),
    )


def scan(automaton: Automaton, text: str) -> list[tuple[int, int]]:
    """All (offset, term_index) occurrences of automaton terms in text.

    Results come out ordered by match end position; callers needing a
    different order sort themselves.
    """
    if not automaton.terms or not text:
        return []
    impl = _accel if _accel is not None else _pure
    return impl.scan(
        automaton.edge_starts,
        automaton.edge_chars,
        automaton.edge_targets,
        automaton.fail,
        automaton.out_starts,
        automaton.out_terms,
        automaton.term_lens,
        text,
    )


def scan_pure(automaton: Automaton, text: str) -> list[tuple[int, int]]:
    """Force the pure-Python scanner; used by the benchmark and tests."""
    if not automaton.terms or not text:
        return []
    return _pure.scan(
        automaton.edge_starts,
        automaton.edge_chars,
        automaton.edge_targets,
        automaton.fail,
        automaton.out_starts,
        automaton.out_terms,
        automaton.term_lens,
        text,
    )


def scan_accelerated(automaton: Automaton, text: str) -> list[tuple[int, int]]:
    """Force the compiled scanner; raises if the extension is not built."""
    if _accel is None:
        raise RuntimeError("compiled kernel is not available")
    if not automaton.terms or not text:
        return []
    return _accel.scan(
        automaton.edge_starts,
        automaton.edge_chars,
        automaton.edge_targets,
        automaton.fail,
        automaton.out_starts,
        automaton.out_terms,
        automaton.term_lens,
        text,
    )
