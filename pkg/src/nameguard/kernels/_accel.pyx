# cython: language_level=3
"""Compiled automaton traversal over the flat CSR arrays."""


def scan(
    edge_starts,
    edge_chars,
    edge_targets,
    fail,
    out_starts,
    out_terms,
    term_lens,
    str text,
):
    cdef int[::1] starts = edge_starts
    cdef int[::1] chars = edge_chars
    cdef int[::1] targets = edge_targets
    cdef int[::1] fail_v = fail
    cdef int[::1] ostarts = out_starts
    cdef int[::1] oterms = out_terms
    cdef int[::1] tlens = term_lens

    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t position
    cdef int state = 0
    cdef int cp, lo, hi, mid, edge, term_index, k
    cdef Py_UCS4 ch
    cdef list matches = []

    for position in range(n):
        ch = text[position]
        cp = <int> ch
        while True:
            lo = starts[state]
            hi = starts[state + 1]
            edge = -1
            while lo < hi:
                mid = (lo + hi) >> 1
                if chars[mid] < cp:
                    lo = mid + 1
                elif chars[mid] > cp:
                    hi = mid
                else:
                    edge = mid
                    break
            if edge >= 0:
                state = targets[edge]
                break
            if state == 0:
                break
            state = fail_v[state]
        for k in range(ostarts[state], ostarts[state + 1]):
            term_index = oterms[k]
            matches.append((position - tlens[term_index] + 1, term_index))
    return matches
